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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "audiostyle/audio_io.hpp"
#include "audiostyle/dsp.hpp"
#include "audiostyle/feature_net.hpp"
#include "audiostyle/phase_recon.hpp"
#include "audiostyle/style_transfer.hpp"
#include "audiostyle/trainer.hpp"
#include "cli.hpp"
#include "oracles.hpp"
#include "toy_corpus.hpp"
#include "wav_bytes.hpp"

using namespace audiostyle;
namespace fs = std::filesystem;

namespace {

constexpr int kCd = 44100;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  std::vector<std::string> failures;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failures.push_back(what);
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string sci(double v) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(2) << v;
  return s.str();
}

LogMagSpectrogram grid(std::size_t bins, std::size_t frames, std::uint64_t seed) {
  LogMagSpectrogram s;
  s.bins = bins;
  s.frames = frames;
  s.data = oracle::uniform(bins * frames, seed, 0.0, 2.0);
  return s;
}

NetworkWeights tiny_net(std::size_t bins, std::uint64_t seed) {
  const std::size_t widths[] = {2, 2};
  NetworkWeights w = init_random(pooled_architecture(bins, widths, 3), seed);
  for (auto& l : w.layers)
    if (l.spec.has_params()) l.bias = oracle::uniform(l.bias.size(), seed + 77, -0.1, 0.1);
  return w;
}

/// Derivatives below this are compared on an absolute scale.
constexpr double kGradientFloor = 1e-5;

double max_fd_error(const std::vector<double>& analytic, std::vector<double>& x,
                    const std::function<double()>& f, const std::vector<std::size_t>& coords) {
  double worst = 0.0;
  for (std::size_t i : coords)
    worst = std::max(worst, oracle::relative_error(analytic[i], oracle::central_difference(x, i, f), kGradientFloor));
  return worst;
}

std::vector<std::size_t> all_coords(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

// 1
Outcome stft_round_trip() {
  Outcome o;
  double worst = 0.0;
  std::vector<AudioBuffer> signals;
  for (std::uint64_t seed = 0; seed < 10; ++seed) signals.push_back({oracle::uniform(kCd, seed), kCd});
  for (double f : {440.0, 1234.5, 3001.0}) signals.push_back({oracle::sine(kCd, f, kCd), kCd});
  for (std::size_t hop : {256u, 128u}) {
    const FftConfig cfg{512, hop};
    for (const auto& s : signals)
      worst = std::max(worst, oracle::interior_rms(s.samples, istft(stft(s, cfg)).samples, 512));
  }
  o.require(worst < 1e-6, "interior RMS < 1e-6");

  const AudioBuffer clip{oracle::uniform(5 * kCd, 99), kCd};
  double slowest = 0.0;
  for (std::size_t hop : {256u, 128u}) {
    const auto start = std::chrono::steady_clock::now();
    const AudioBuffer back = istft(stft(clip, {512, hop}));
    slowest = std::max(slowest, seconds_since(start));
    o.require(!back.samples.empty(), "non-empty output");
  }
  o.require(slowest < 1.0, "round trip < 1 s per 5-second clip");
  o.detail << "max interior RMS " << sci(worst) << " over 13 signals x 2 hops; 5 s round trip "
           << std::fixed << std::setprecision(3) << slowest << " s";
  return o;
}

// 2
Outcome fft_vs_dft() {
  Outcome o;
  double worst = 0.0;
  for (std::size_t n = 2; n <= 64; n *= 2) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto re = oracle::uniform(n, seed * 64 + n), im = oracle::uniform(n, seed * 64 + n + 1000);
      std::vector<Complex> x(n);
      for (std::size_t i = 0; i < n; ++i) x[i] = {re[i], im[i]};
      for (bool inverse : {false, true}) {
        const auto fast = fft(x, inverse);
        const auto slow = oracle::dft(x, inverse);
        for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(fast[i] - slow[i]));
      }
    }
  }
  o.require(worst < 1e-10, "max error < 1e-10");
  o.detail << "max |fft - dft| " << sci(worst) << " for sizes 2..64 (powers of two), forward and inverse";
  return o;
}

// 3
Outcome spectrogram_shape() {
  Outcome o;
  const LogMagSpectrogram s = to_log_mag(stft(AudioBuffer{oracle::uniform(5 * kCd, 3), kCd}, {}));
  const double frame_dev = std::abs(static_cast<double>(s.frames) - 856.0) / 856.0;
  o.require(s.bins == 257, "257 bins");
  o.require(frame_dev < 0.01, "frames within 1% of 856");
  o.detail << s.bins << " bins x " << s.frames << " frames (reference 856; deviation " << std::fixed
           << std::setprecision(2) << 100.0 * frame_dev << "%, uncentred framing)";
  return o;
}

// 4
Outcome gradient_suite() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  double content_err = 0.0, style_err = 0.0, input_err = 0.0, weight_err = 0.0;
  constexpr std::uint64_t kInstances = 20;

  for (std::uint64_t seed = 0; seed < kInstances; ++seed) {
    const std::size_t c = 1 + seed % 4, t = 4 + seed % 13;
    FeatureMap f{c, t, oracle::uniform(c * t, seed)};
    const FeatureMap p{c, t, oracle::uniform(c * t, seed + 500)};
    content_err = std::max(content_err, max_fd_error(content_loss(f, p).grad.data, f.data,
                                                     [&] { return content_loss(f, p).loss; },
                                                     all_coords(f.data.size())));
    const Eigen::MatrixXd target = gram(FeatureMap{c, t + 3, oracle::uniform(c * (t + 3), seed + 900)});
    style_err = std::max(style_err, max_fd_error(style_loss(f, target).grad.data, f.data,
                                                 [&] { return style_loss(f, target).loss; },
                                                 all_coords(f.data.size())));
  }

  for (std::uint64_t seed = 0; seed < kInstances; ++seed) {
    TransferConfig cfg;
    cfg.beta = 10.0;
    const TransferObjective objective(tiny_net(16, seed + 2), grid(16, 32, seed), grid(16, 24, seed + 1),
                                      cfg);
    FeatureMap x = as_feature_map(grid(16, 32, seed + 3));
    FeatureMap g;
    objective.evaluate(x, &g);
    input_err = std::max(input_err, max_fd_error(g.data, x.data,
                                                 [&] { return objective.evaluate(x, nullptr).total; },
                                                 all_coords(x.data.size())));
  }

  for (std::uint64_t seed = 0; seed < kInstances; ++seed) {
    const std::size_t widths[] = {4 + seed % 5, 2 + seed % 7};
    NetworkWeights w = init_classifier(pooled_architecture(257, widths, 5), 5, seed);
    for (auto& l : w.layers)
      if (l.spec.has_params()) l.bias = oracle::uniform(l.bias.size(), seed + 1, -0.05, 0.05);
    w.head->hidden.bias = oracle::uniform(kHiddenUnits, seed + 2, 0.05, 0.2);
    const LogMagSpectrogram spec =
        to_log_mag(stft(AudioBuffer{oracle::uniform(toy::kRate, seed + 3, -0.5, 0.5), toy::kRate}, {}));
    const std::size_t label = seed % 5, centroid = seed % 16;
    const ClassifierGradients g = classifier_gradients(w, spec, label, centroid, 0.3);
    auto loss = [&] { return classifier_gradients(w, spec, label, centroid, 0.3).total(0.3); };

    std::vector<std::pair<std::vector<double>*, const std::vector<double>*>> tensors;
    for (std::size_t i = 0; i < w.layers.size(); ++i) {
      if (!w.layers[i].spec.has_params()) continue;
      tensors.emplace_back(&w.layers[i].weights, &g.layer_weights[i]);
      tensors.emplace_back(&w.layers[i].bias, &g.layer_bias[i]);
    }
    for (auto [layer, grad] : {std::pair{&w.head->hidden, &g.hidden}, {&w.head->main, &g.main},
                               {&w.head->aux, &g.aux}}) {
      tensors.emplace_back(&layer->weights, &grad->weights);
      tensors.emplace_back(&layer->bias, &grad->bias);
    }
    std::mt19937_64 rng(seed);
    for (auto [param, grad] : tensors) {
      std::vector<std::size_t> coords;
      if (param->size() <= 8) {
        coords = all_coords(param->size());
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, param->size() - 1);
        for (int s = 0; s < 8; ++s) coords.push_back(pick(rng));
      }
      weight_err = std::max(weight_err, max_fd_error(*grad, *param, loss, coords));
    }
  }

  const double elapsed = seconds_since(start);
  o.require(content_err < 1e-4, "content");
  o.require(style_err < 1e-4, "style");
  o.require(input_err < 1e-4, "input backprop");
  o.require(weight_err < 1e-4, "trainer weights");
  o.require(elapsed < 60.0, "runtime < 60 s");
  o.detail << "max rel err content " << sci(content_err) << ", style " << sci(style_err) << ", input "
           << sci(input_err) << ", weights " << sci(weight_err) << " (" << kInstances
           << " instances each, denominator floor " << kGradientFloor << "); " << std::fixed << std::setprecision(1) << elapsed << " s";
  return o;
}

// 5
Outcome griffin_lim_convergence() {
  Outcome o;
  bool monotone = true;
  double worst_rise = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const MagSpectrogram target = magnitude(stft(AudioBuffer{oracle::uniform(kCd / 2, 40 + seed), kCd}, {}));
    const auto report = griffin_lim(target, 100, PhaseInit::random(seed));
    for (std::size_t i = 1; i < report.convergence_trace.size(); ++i) {
      const double rise = report.convergence_trace[i] - report.convergence_trace[i - 1];
      worst_rise = std::max(worst_rise, rise);
      if (rise > 1e-9) monotone = false;
    }
  }
  const MagSpectrogram sine = magnitude(stft(AudioBuffer{oracle::sine(kCd, 440.0, kCd), kCd}, {}));
  const double sc = griffin_lim(sine, 100).convergence_trace.back();
  const double sc_spsi_init = griffin_lim(sine, 100, PhaseInit::provided(spsi_phase(sine))).convergence_trace.back();
  o.require(monotone, "trace non-increasing");
  o.require(sc < 0.05, "440 Hz SC < 0.05 after 100 iterations");
  o.detail << "largest trace rise " << sci(worst_rise) << " on 5 targets; 440 Hz (1 s, zero-phase init) SC "
           << std::fixed << std::setprecision(4) << sc << " (SPSI-initialised: " << sc_spsi_init << ")";
  return o;
}

// 6
Outcome spsi_vs_zero_phase() {
  Outcome o;
  for (double f : {440.0, 1234.5, 3001.0}) {
    const MagSpectrogram target = magnitude(stft(AudioBuffer{oracle::sine(kCd, f, kCd), kCd}, {}));
    const double spsi_sc = spectral_convergence(target, spsi(target));
    const std::vector<double> zeros(target.data.size(), 0.0);
    const double zero_sc = spectral_convergence(target, invert_with_phase(target, zeros));
    o.require(spsi_sc < zero_sc, "SPSI below zero phase at " + std::to_string(f) + " Hz");
    o.detail << f << " Hz: " << std::fixed << std::setprecision(4) << spsi_sc << " vs " << zero_sc << "; ";
  }
  return o;
}

// 7
Outcome transfer_fixed_point_and_descent() {
  Outcome o;
  const AudioBuffer content{oracle::sine(kCd / 2, 440.0, kCd), kCd};
  const AudioBuffer style{oracle::uniform(kCd / 2, 5, -0.3, 0.3), kCd};

  TransferConfig fixed;
  fixed.beta = 0.0;
  fixed.iterations = 5;
  const TransferResult r = run_transfer(content, style, fixed);
  const LogMagSpectrogram c = to_log_mag(stft(content, fixed.fft));
  double max_loss = 0.0, max_diff = 0.0;
  for (const auto& t : r.loss_trace) max_loss = std::max(max_loss, t.total);
  for (std::size_t i = 0; i < c.data.size(); ++i) max_diff = std::max(max_diff, std::abs(r.output.data[i] - c.data[i]));
  o.require(r.loss_trace.size() == 5 && max_loss == 0.0, "zero loss every iteration");
  o.require(max_diff <= 1e-12, "output equals content");

  TransferConfig descent;
  descent.alpha = 0.0;
  descent.init_mode = InitMode::noise;
  descent.seed = 7;
  descent.noise_level = 0.1;
  descent.iterations = 50;
  descent.weights_source.random_seed = 42;
  const TransferResult d = run_transfer(content, style, descent);
  const double first = d.loss_trace.front().style, last = d.loss_trace.back().style;
  o.require(last < first, "style loss decreases");
  o.detail << "fixed point: max loss " << max_loss << ", max |x - content| " << sci(max_diff)
           << "; style loss it1 " << sci(first) << " -> it50 " << sci(last);
  return o;
}

// 8
Outcome architecture_conformance() {
  Outcome o;
  const NetworkWeights w = init_random(default_architecture(), 42);
  const ForwardTrace trace = forward(w, FeatureMap{257, 860, oracle::uniform(257 * 860, 1, 0.0, 3.0)});
  o.require(trace.size() == 2, "two blocks");
  if (trace.size() == 2) {
    const FeatureMap &a = trace.output(0), &b = trace.output(1);
    o.require(a.channels == 2048 && a.time == 430, "block 1 is 2048x430");
    o.require(b.channels == 64 && b.time == 215, "block 2 is 64x215");
    o.detail << "block outputs " << a.channels << "x" << a.time << ", " << b.channels << "x" << b.time;
  }
  return o;
}

// 9
Outcome trainer_overfit(const fs::path& weights_out) {
  Outcome o;
  auto clips = toy::corpus(10, toy::kRate / 2);
  const auto start = std::chrono::steady_clock::now();
  assign_centroid_classes(clips);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.num_classes = 4;
  cfg.widths = {64, 16};
  cfg.seed = 1;
  const TrainResult r = train(clips, cfg);
  const double elapsed = seconds_since(start);
  const Accuracy acc = evaluate(r.weights, clips);
  std::size_t first_perfect = 0;
  for (const auto& e : r.log)
    if (e.main_accuracy == 1.0) {
      first_perfect = e.epoch;
      break;
    }
  save_weights(r.weights, weights_out);

  std::vector<LabeledClip> ladder;
  for (std::size_t i = 0; i < 32; ++i)
    ladder.push_back({{oracle::sine(2048, 150.0 + 200.0 * static_cast<double>((i * 13) % 32), toy::kRate), toy::kRate}, 0, {}});
  assign_centroid_classes(ladder);
  std::map<std::size_t, std::size_t> sizes;
  for (const auto& c : ladder) ++sizes[*c.centroid_class];
  bool balanced = sizes.size() == 16;
  for (auto [cls, n] : sizes) balanced = balanced && n == 2;

  o.require(acc.main == 1.0, "100% training accuracy");
  o.require(elapsed < 300.0, "< 5 minutes");
  o.require(balanced, "32 clips give sixteen classes of 2");
  o.detail << "40 clips, widths 64/16: accuracy " << acc.main << " (first perfect epoch "
           << first_perfect << "), " << std::fixed << std::setprecision(1) << elapsed
           << " s; centroid split of 32 clips balanced: " << (balanced ? "yes" : "no");
  return o;
}

// 10
Outcome figure1_harness(const fs::path& dir, const fs::path& weights) {
  Outcome o;
  const fs::path content = dir / "content.wav", style = dir / "style.wav";
  write_wav(content, {toy::chirp(toy::kRate, 300.0, 2500.0), toy::kRate});
  write_wav(style, {toy::square(toy::kRate, 330.0), toy::kRate});
  auto grid_run = [&](const fs::path& outdir) {
    std::ostringstream out, err;
    const int code = cli::run({"figure1", "--content", content.string(), "--style", style.string(), "--weights",
                               weights.string(), "--outdir", outdir.string(), "--channels", "64,16",
                               "--iterations", "50", "--step-size", "0.05"},
                              out, err);
    if (code != cli::kExitOk) o.detail << " figure1 exit " << code << ": " << err.str();
    return code;
  };
  const fs::path first = dir / "run1", second = dir / "run2";
  fs::remove_all(first);
  fs::remove_all(second);
  o.require(grid_run(first) == cli::kExitOk && grid_run(second) == cli::kExitOk, "grid runs");

  std::size_t media = 0, traces = 0;
  bool identical = true;
  for (const auto& entry : fs::directory_iterator(first)) {
    const auto ext = entry.path().extension();
    media += ext == ".wav" || ext == ".png";
    traces += ext == ".csv";
    identical = identical && fs::exists(second / entry.path().filename()) &&
                wav_bytes::slurp(entry.path()) == wav_bytes::slurp(second / entry.path().filename());
  }
  bool distinct = true;
  const char* cells[] = {"a", "b", "c", "d"};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j)
      for (const char* ext : {".png", ".wav"})
        distinct = distinct && wav_bytes::slurp(first / (std::string(cells[i]) + ext)) !=
                                   wav_bytes::slurp(first / (std::string(cells[j]) + ext));
  o.require(media == 8 && traces == 4, "8 media + 4 traces");
  o.require(distinct, "pairwise distinct outputs");
  o.require(identical, "bit-identical rerun");
  o.detail << media << " media + " << traces << " traces; pairwise distinct: " << (distinct ? "yes" : "no")
           << "; rerun identical: " << (identical ? "yes" : "no");
  return o;
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "audiostyle_acceptance";
  fs::create_directories(dir);
  const fs::path weights = dir / "toy.astw";

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"STFT/ISTFT round trip", stft_round_trip},
      {"FFT vs direct DFT", fft_vs_dft},
      {"spectrogram shape", spectrogram_shape},
      {"gradient suite", gradient_suite},
      {"Griffin-Lim convergence", griffin_lim_convergence},
      {"SPSI vs zero phase", spsi_vs_zero_phase},
      {"transfer fixed point and descent", transfer_fixed_point_and_descent},
      {"architecture conformance", architecture_conformance},
      {"trainer overfit", [&] { return trainer_overfit(weights); }},
      {"figure1 grid harness", [&] { return figure1_harness(dir, weights); }},
  };

  std::size_t failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << std::setw(2) << i + 1 << " " << criteria[i].first << ": "
              << o.detail.str();
    for (const auto& f : o.failures) std::cout << " [failed: " << f << "]";
    std::cout << std::endl;
  }
  std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
