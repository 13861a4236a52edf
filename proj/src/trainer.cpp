/* Copyright 2026 The audiostyle Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "audiostyle/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "audiostyle/error.hpp"
#include "audiostyle/style_transfer.hpp"

namespace audiostyle {

namespace {

std::vector<double> dense_forward(const Layer& l, std::span<const double> x) {
  const std::size_t in = l.spec.in_channels;
  std::vector<double> y(l.bias);
  for (std::size_t o = 0; o < l.spec.out_channels; ++o) {
    const double* row = l.weights.data() + o * in;
    double acc = 0.0;
    for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
    y[o] += acc;
  }
  return y;
}

/// Writes weight/bias gradients of a dense layer into grad and returns the
/// input gradient.
std::vector<double> dense_backward(const Layer& l, std::span<const double> x,
                                   std::span<const double> gy, Layer& grad) {
  const std::size_t in = l.spec.in_channels;
  grad.spec = l.spec;
  grad.weights.assign(l.weights.size(), 0.0);
  grad.bias.assign(gy.begin(), gy.end());
  std::vector<double> gx(in, 0.0);
  for (std::size_t o = 0; o < l.spec.out_channels; ++o) {
    const double* row = l.weights.data() + o * in;
    double* grow = grad.weights.data() + o * in;
    for (std::size_t i = 0; i < in; ++i) {
      grow[i] = gy[o] * x[i];
      gx[i] += row[i] * gy[o];
    }
  }
  return gx;
}

void check_label(std::size_t label, std::size_t classes, const char* what) {
  if (label >= classes)
    throw Error(Errc::invalid_argument, std::string(what) + " label " + std::to_string(label) +
                                            " outside 0.." + std::to_string(classes - 1));
}

/// Every trainable tensor in a fixed order, for the optimizer.
std::vector<std::span<double>> param_tensors(NetworkWeights& w) {
  std::vector<std::span<double>> out;
  for (auto& l : w.layers) {
    if (!l.spec.has_params()) continue;
    out.emplace_back(l.weights);
    out.emplace_back(l.bias);
  }
  for (Layer* l : {&w.head->hidden, &w.head->main, &w.head->aux}) {
    out.emplace_back(l->weights);
    out.emplace_back(l->bias);
  }
  return out;
}

std::vector<std::span<double>> grad_tensors(ClassifierGradients& g, const NetworkWeights& w) {
  std::vector<std::span<double>> out;
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    if (!w.layers[i].spec.has_params()) continue;
    out.emplace_back(g.layer_weights[i]);
    out.emplace_back(g.layer_bias[i]);
  }
  for (Layer* l : {&g.hidden, &g.main, &g.aux}) {
    out.emplace_back(l->weights);
    out.emplace_back(l->bias);
  }
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0 || batch_size == 0 || num_classes == 0 || widths.empty())
    throw Error(Errc::invalid_argument, "epochs, batch size, classes and widths must be positive");
  if (!(step_size >= 0.0) || !(aux_weight >= 0.0))
    throw Error(Errc::invalid_argument, "step size and aux weight must be non-negative");
  fft.validate();
}

void assign_centroid_classes(std::span<LabeledClip> clips, const FftConfig& fft) {
  const std::size_t n = clips.size();
  if (n < kCentroidClasses)
    throw Error(Errc::invalid_argument, "need at least 16 clips for centroid classes, got " +
                                            std::to_string(n));
  std::vector<double> centroid(n);
  for (std::size_t i = 0; i < n; ++i)
    centroid[i] = spectral_centroid(magnitude(stft(clips[i].audio, fft)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return centroid[a] < centroid[b]; });
  for (std::size_t g = 0; g < kCentroidClasses; ++g) {
    const std::size_t begin = g * n / kCentroidClasses;
    const std::size_t end = (g + 1) * n / kCentroidClasses;
    for (std::size_t pos = begin; pos < end; ++pos) clips[order[pos]].centroid_class = g;
  }
}

NetworkWeights init_classifier(std::span<const LayerSpec> arch, std::size_t num_classes,
                               std::uint64_t seed) {
  NetworkWeights w = init_random(arch, seed);
  const std::size_t base = arch.size();
  const std::size_t features = w.output_channels();
  w.head = ClassifierHead{
      init_layer(LayerSpec::dense(features, kHiddenUnits), seed, base),
      init_layer(LayerSpec::dense(kHiddenUnits, num_classes), seed, base + 1),
      init_layer(LayerSpec::dense(kHiddenUnits, kCentroidClasses), seed, base + 2),
  };
  return w;
}

ClassifierPass classifier_forward(const NetworkWeights& w, const LogMagSpectrogram& spec) {
  if (!w.head) throw Error(Errc::invalid_argument, "weights carry no classifier head");
  ClassifierPass pass;
  pass.trace = forward(w, spec);
  const FeatureMap& last = pass.trace.final_output();
  if (last.time == 0) throw Error(Errc::dimension_mismatch, "final feature map has no frames");
  if (last.channels != w.head->hidden.spec.in_channels)
    throw Error(Errc::dimension_mismatch, "classifier head does not match the feature width");

  pass.pooled.assign(last.channels, 0.0);
  for (std::size_t c = 0; c < last.channels; ++c) {
    double sum = 0.0;
    for (std::size_t t = 0; t < last.time; ++t) sum += last.at(c, t);
    pass.pooled[c] = sum / static_cast<double>(last.time);
  }
  pass.hidden_pre = dense_forward(w.head->hidden, pass.pooled);
  pass.hidden = pass.hidden_pre;
  for (double& v : pass.hidden) v = std::max(v, 0.0);
  pass.logits_main = dense_forward(w.head->main, pass.hidden);
  pass.logits_aux = dense_forward(w.head->aux, pass.hidden);
  return pass;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double peak = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - peak);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

CrossEntropy cross_entropy(std::span<const double> logits, std::size_t label) {
  if (label >= logits.size())
    throw Error(Errc::invalid_argument, "label " + std::to_string(label) + " out of range for " +
                                            std::to_string(logits.size()) + " classes");
  const double peak = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - peak);
  CrossEntropy out;
  out.loss = std::log(sum) - (logits[label] - peak);
  out.grad = softmax(logits);
  out.grad[label] -= 1.0;
  return out;
}

ClassifierGradients classifier_gradients(const NetworkWeights& w, const LogMagSpectrogram& spec,
                                         std::size_t label, std::size_t centroid_label,
                                         double aux_weight) {
  const ClassifierPass pass = classifier_forward(w, spec);
  const ClassifierHead& head = *w.head;
  check_label(label, head.main.spec.out_channels, "class");
  check_label(centroid_label, head.aux.spec.out_channels, "centroid");

  ClassifierGradients g;
  const CrossEntropy main = cross_entropy(pass.logits_main, label);
  CrossEntropy aux = cross_entropy(pass.logits_aux, centroid_label);
  g.main_loss = main.loss;
  g.predicted_main = argmax(pass.logits_main);
  g.aux_loss = aux.loss;
  for (double& v : aux.grad) v *= aux_weight;

  std::vector<double> dh = dense_backward(head.main, pass.hidden, main.grad, g.main);
  const std::vector<double> dh_aux = dense_backward(head.aux, pass.hidden, aux.grad, g.aux);
  for (std::size_t i = 0; i < dh.size(); ++i) {
    dh[i] += dh_aux[i];
    if (!(pass.hidden_pre[i] > 0.0)) dh[i] = 0.0;
  }
  const std::vector<double> dp = dense_backward(head.hidden, pass.pooled, dh, g.hidden);

  const FeatureMap& last = pass.trace.final_output();
  FeatureMap dlast = FeatureMap::zeros(last.channels, last.time);
  const double inv_t = 1.0 / static_cast<double>(last.time);
  for (std::size_t c = 0; c < last.channels; ++c)
    for (std::size_t t = 0; t < last.time; ++t) dlast.at(c, t) = dp[c] * inv_t;

  std::vector<FeatureMap> block_grads(pass.trace.size());
  block_grads.back() = std::move(dlast);
  NetworkGradients ng = backward(w, pass.trace, block_grads, true);
  g.layer_weights = std::move(ng.weights);
  g.layer_bias = std::move(ng.bias);
  return g;
}

TrainResult train(std::span<const LabeledClip> clips, const TrainConfig& cfg) {
  cfg.validate();
  const auto arch = pooled_architecture(cfg.fft.bins(), cfg.widths, cfg.kernel_width);
  return train(clips, cfg, init_classifier(arch, cfg.num_classes, cfg.seed));
}

TrainResult train(std::span<const LabeledClip> clips, const TrainConfig& cfg,
                  NetworkWeights initial) {
  cfg.validate();
  if (clips.empty()) throw Error(Errc::invalid_argument, "empty training set");
  if (!initial.head) throw Error(Errc::invalid_argument, "initial weights need a classifier head");
  for (const auto& clip : clips) {
    if (!clip.centroid_class)
      throw Error(Errc::invalid_argument, "centroid classes have not been assigned");
    check_label(clip.class_id, initial.head->main.spec.out_channels, "class");
  }

  std::vector<LogMagSpectrogram> specs;
  specs.reserve(clips.size());
  for (const auto& clip : clips) specs.push_back(to_log_mag(stft(clip.audio, cfg.fft)));

  TrainResult result{std::move(initial), {}};
  NetworkWeights& w = result.weights;
  std::vector<AdamState> states(param_tensors(w).size());
  std::vector<std::size_t> order(clips.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(cfg.seed);
  std::uint64_t step = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochLog log{epoch, 0.0, 0.0, 0.0};
    std::size_t correct = 0;

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      ClassifierGradients sum;
      for (std::size_t j = start; j < end; ++j) {
        const std::size_t idx = order[j];
        ClassifierGradients g = classifier_gradients(w, specs[idx], clips[idx].class_id,
                                                     *clips[idx].centroid_class, cfg.aux_weight);
        log.main_loss += g.main_loss;
        log.aux_loss += g.aux_loss;
        if (g.predicted_main == clips[idx].class_id) ++correct;
        if (j == start) {
          sum = std::move(g);
          continue;
        }
        auto acc = grad_tensors(sum, w);
        const auto add = grad_tensors(g, w);
        for (std::size_t t = 0; t < acc.size(); ++t)
          for (std::size_t i = 0; i < acc[t].size(); ++i) acc[t][i] += add[t][i];
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      auto params = param_tensors(w);
      auto grads = grad_tensors(sum, w);
      ++step;
      for (std::size_t t = 0; t < params.size(); ++t) {
        for (double& v : grads[t]) v *= scale;
        adam_step(params[t], grads[t], states[t], cfg.step_size, step);
      }
    }
    const double n = static_cast<double>(clips.size());
    log.main_loss /= n;
    log.aux_loss /= n;
    log.main_accuracy = static_cast<double>(correct) / n;
    result.log.push_back(log);
  }
  return result;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

Accuracy evaluate(const NetworkWeights& w, std::span<const LabeledClip> clips,
                  const FftConfig& fft) {
  std::size_t main_hits = 0, aux_hits = 0, aux_total = 0;
  for (const auto& clip : clips) {
    const ClassifierPass pass = classifier_forward(w, to_log_mag(stft(clip.audio, fft)));
    if (argmax(pass.logits_main) == clip.class_id) ++main_hits;
    if (clip.centroid_class) {
      ++aux_total;
      if (argmax(pass.logits_aux) == *clip.centroid_class) ++aux_hits;
    }
  }
  Accuracy acc;
  if (!clips.empty()) acc.main = static_cast<double>(main_hits) / static_cast<double>(clips.size());
  if (aux_total) acc.centroid = static_cast<double>(aux_hits) / static_cast<double>(aux_total);
  return acc;
}

std::vector<LabeledClip> load_dataset(const std::filesystem::path& dir,
                                      const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw Error(Errc::file_not_found, "cannot open manifest " + manifest.string());
  std::vector<LabeledClip> clips;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos)
      throw Error(Errc::malformed_file, manifest.string() + ":" + std::to_string(line_no) +
                                            ": expected filename,class_id");
    const std::string name = line.substr(0, comma);
    std::string field = line.substr(comma + 1);
    field.erase(0, field.find_first_not_of(" \t"));
    std::size_t id = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), id);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
      if (line_no == 1 && clips.empty()) continue;
      throw Error(Errc::malformed_file, manifest.string() + ":" + std::to_string(line_no) +
                                            ": bad class id '" + field + "'");
    }
    clips.push_back({read_wav(dir / name), id, std::nullopt});
  }
  if (clips.empty()) throw Error(Errc::empty_data, "manifest lists no clips");
  return clips;
}

void write_training_log(const std::filesystem::path& path, std::span<const EpochLog> log) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw Error(Errc::write_failed, "cannot open " + path.string() + " for writing");
  file << std::setprecision(std::numeric_limits<double>::max_digits10);
  file << "epoch,main_loss,aux_loss,main_acc\n";
  for (const auto& e : log)
    file << e.epoch << ',' << e.main_loss << ',' << e.aux_loss << ',' << e.main_accuracy << '\n';
  if (!file) throw Error(Errc::write_failed, "failed writing " + path.string());
}

}  // namespace audiostyle
