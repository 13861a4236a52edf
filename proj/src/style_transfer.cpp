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

#include "audiostyle/style_transfer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <string>

#include "audiostyle/error.hpp"

namespace audiostyle {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMatrix>;
using RowMap = Eigen::Map<RowMatrix>;

void accumulate(FeatureMap& into, const FeatureMap& g, double scale) {
  if (into.empty()) into = FeatureMap::zeros(g.channels, g.time);
  for (std::size_t i = 0; i < g.data.size(); ++i) into.data[i] += scale * g.data[i];
}

}  // namespace

LossAndGrad content_loss(const FeatureMap& f, const FeatureMap& p) {
  if (!f.same_shape(p))
    throw Error(Errc::dimension_mismatch,
                "content features " + std::to_string(f.channels) + "x" + std::to_string(f.time) +
                    " vs target " + std::to_string(p.channels) + "x" + std::to_string(p.time));
  const double ct = static_cast<double>(f.channels * f.time);
  LossAndGrad out{0.0, FeatureMap::zeros(f.channels, f.time)};
  double sum = 0.0;
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    const double d = f.data[i] - p.data[i];
    sum += d * d;
    out.grad.data[i] = d / ct;
  }
  out.loss = sum / (2.0 * ct);
  return out;
}

LossAndGrad style_loss(const FeatureMap& f, const Eigen::MatrixXd& target_gram) {
  const auto c = static_cast<Eigen::Index>(f.channels);
  if (target_gram.rows() != c || target_gram.cols() != c)
    throw Error(Errc::dimension_mismatch,
                "target gram is " + std::to_string(target_gram.rows()) + "x" +
                    std::to_string(target_gram.cols()) + " for " + std::to_string(f.channels) +
                    " channels");
  const Eigen::MatrixXd diff = gram(f) - target_gram;
  const double cc = static_cast<double>(f.channels) * static_cast<double>(f.channels);

  LossAndGrad out{diff.squaredNorm() / (4.0 * cc), FeatureMap::zeros(f.channels, f.time)};
  const auto t = static_cast<Eigen::Index>(f.time);
  const ConstRowMap fm(f.data.data(), c, t);
  RowMap g(out.grad.data.data(), c, t);
  g.noalias() = diff * fm;
  g *= 1.0 / (cc * static_cast<double>(f.time));
  return out;
}

FeatureMap backprop_to_input(const NetworkWeights& w, const ForwardTrace& trace,
                             std::span<const FeatureMap> block_grads) {
  for (std::size_t b = 0; b < block_grads.size() && b < trace.size(); ++b) {
    if (!block_grads[b].empty() && !block_grads[b].same_shape(trace.output(b)))
      throw Error(Errc::dimension_mismatch,
                  "gradient for block " + std::to_string(b + 1) + " has the wrong shape");
  }
  return backward(w, trace, block_grads, false).input;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double step_size, std::uint64_t t) {
  if (t < 1) throw Error(Errc::invalid_argument, "adam step index starts at 1");
  if (grads.size() != params.size())
    throw Error(Errc::dimension_mismatch,
                std::to_string(grads.size()) + " gradients for " + std::to_string(params.size()) +
                    " parameters");
  if (state.m.empty() && state.v.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw Error(Errc::dimension_mismatch, "adam state does not match the parameters");

  const double td = static_cast<double>(t);
  const double correct1 = 1.0 - std::pow(kAdamBeta1, td);
  const double correct2 = 1.0 - std::pow(kAdamBeta2, td);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = kAdamBeta1 * state.m[i] + (1.0 - kAdamBeta1) * g;
    state.v[i] = kAdamBeta2 * state.v[i] + (1.0 - kAdamBeta2) * g * g;
    const double m_hat = state.m[i] / correct1;
    const double v_hat = state.v[i] / correct2;
    params[i] -= step_size * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
  }
}

void TransferConfig::validate(std::size_t blocks) const {
  auto fail = [](const std::string& what) { throw Error(Errc::invalid_argument, what); };
  if (!(alpha >= 0.0) || !(beta >= 0.0)) fail("loss weights must be non-negative");
  if (alpha == 0.0 && beta == 0.0) fail("alpha and beta cannot both be zero");
  if (iterations < 1) fail("iterations must be at least 1");
  if (!(step_size > 0.0)) fail("step size must be positive");
  if (!(noise_level >= 0.0)) fail("noise level must be non-negative");
  if (content_layer < 1 || content_layer > blocks)
    fail("content layer " + std::to_string(content_layer) + " outside 1.." +
         std::to_string(blocks));
  if (beta > 0.0 && style_layers.empty()) fail("style weight set but no style layers");
  for (std::size_t l : style_layers)
    if (l < 1 || l > blocks)
      fail("style layer " + std::to_string(l) + " outside 1.." + std::to_string(blocks));
}

TransferObjective::TransferObjective(NetworkWeights weights, const LogMagSpectrogram& content,
                                     const LogMagSpectrogram& style, const TransferConfig& cfg)
    : weights_(std::move(weights)), alpha_(cfg.alpha), beta_(cfg.beta) {
  cfg.validate(weights_.block_count());
  content_block_ = cfg.content_layer - 1;
  for (std::size_t l : cfg.style_layers) style_blocks_.push_back(l - 1);

  if (alpha_ > 0.0) content_target_ = forward(weights_, content).output(content_block_);
  if (beta_ > 0.0) {
    const ForwardTrace style_trace = forward(weights_, style);
    for (std::size_t b : style_blocks_) style_targets_.push_back(gram(style_trace.output(b)));
  }
}

LossTerms TransferObjective::evaluate(const FeatureMap& x, FeatureMap* grad) const {
  const ForwardTrace trace = forward(weights_, x);
  std::vector<FeatureMap> block_grads(trace.size());
  LossTerms terms;

  // Zero-weighted terms are skipped entirely and reported as zero.
  if (alpha_ > 0.0) {
    const LossAndGrad c = content_loss(trace.output(content_block_), content_target_);
    terms.content = c.loss;
    if (grad) accumulate(block_grads[content_block_], c.grad, alpha_);
  }
  if (beta_ > 0.0) {
    for (std::size_t i = 0; i < style_blocks_.size(); ++i) {
      const std::size_t b = style_blocks_[i];
      const LossAndGrad s = style_loss(trace.output(b), style_targets_[i]);
      terms.style += s.loss;
      if (grad) accumulate(block_grads[b], s.grad, beta_);
    }
  }
  terms.total = alpha_ * terms.content + beta_ * terms.style;
  if (grad) *grad = backprop_to_input(weights_, trace, block_grads);
  return terms;
}

NetworkWeights transfer_weights(const TransferConfig& cfg) {
  if (cfg.weights_source.file) {
    return NetworkWeights{std::move(load_weights(*cfg.weights_source.file).layers), std::nullopt};
  }
  return init_random(cfg.architecture, cfg.weights_source.random_seed);
}

TransferResult run_transfer(const LogMagSpectrogram& content, const LogMagSpectrogram& style,
                            const NetworkWeights& weights, const TransferConfig& cfg) {
  if (content.sample_rate != style.sample_rate)
    throw Error(Errc::sample_rate_mismatch,
                "content is " + std::to_string(content.sample_rate) + " Hz but style is " +
                    std::to_string(style.sample_rate) + " Hz");
  if (content.bins != weights.input_channels() || style.bins != weights.input_channels())
    throw Error(Errc::dimension_mismatch,
                "spectrograms have " + std::to_string(content.bins) + "/" +
                    std::to_string(style.bins) + " bins, network expects " +
                    std::to_string(weights.input_channels()));

  const TransferObjective objective(weights, content, style, cfg);

  FeatureMap x = as_feature_map(content);
  if (cfg.init_mode != InitMode::content) {
    const double peak = content.data.empty()
                            ? 0.0
                            : *std::max_element(content.data.begin(), content.data.end());
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> noise(0.0, 1.0);
    const double scale = cfg.noise_level * peak;
    for (double& v : x.data) {
      const double n = scale * noise(rng);
      v = cfg.init_mode == InitMode::noise ? n : v + n;
    }
  }

  TransferResult result;
  result.config = cfg;
  result.loss_trace.reserve(cfg.iterations);
  AdamState state;
  FeatureMap grad;
  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    result.loss_trace.push_back(objective.evaluate(x, &grad));
    adam_step(x.data, grad.data, state, cfg.step_size, it);
    for (double& v : x.data) v = std::max(v, 0.0);
  }

  result.output = LogMagSpectrogram{content};
  result.output.data = std::move(x.data);
  return result;
}

TransferResult run_transfer(const AudioBuffer& content, const AudioBuffer& style,
                            const TransferConfig& cfg) {
  if (content.sample_rate != style.sample_rate)
    throw Error(Errc::sample_rate_mismatch,
                "content is " + std::to_string(content.sample_rate) + " Hz but style is " +
                    std::to_string(style.sample_rate) + " Hz");
  const LogMagSpectrogram c = to_log_mag(stft(content, cfg.fft));
  const LogMagSpectrogram s = to_log_mag(stft(style, cfg.fft));
  return run_transfer(c, s, transfer_weights(cfg), cfg);
}

void write_loss_csv(const std::filesystem::path& path, std::span<const LossTerms> trace) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw Error(Errc::write_failed, "cannot open " + path.string() + " for writing");
  file << std::setprecision(std::numeric_limits<double>::max_digits10);
  file << "iteration,total,content,style\n";
  for (std::size_t i = 0; i < trace.size(); ++i)
    file << i + 1 << ',' << trace[i].total << ',' << trace[i].content << ',' << trace[i].style
         << '\n';
  if (!file) throw Error(Errc::write_failed, "failed writing " + path.string());
}

}  // namespace audiostyle
