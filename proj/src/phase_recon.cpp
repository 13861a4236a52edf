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

#include "audiostyle/phase_recon.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "audiostyle/error.hpp"

namespace audiostyle {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Flat-peak guard for the quadratic interpolation denominator.
constexpr double kFlatPeak = 1e-12;

double frobenius(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool all_zero(const MagSpectrogram& m) {
  for (double v : m.data)
    if (v != 0.0) return false;
  return true;
}

ComplexSpectrogram apply_phase(const MagSpectrogram& target, const std::vector<double>& phase) {
  ComplexSpectrogram spec = target.like<Complex>();
  for (std::size_t i = 0; i < target.data.size(); ++i)
    spec.data[i] = std::polar(target.data[i], phase[i]);
  return spec;
}

std::vector<double> initial_phase(const MagSpectrogram& target, const PhaseInit& init) {
  const std::size_t n = target.data.size();
  switch (init.kind) {
    case PhaseInitKind::zero:
      return std::vector<double>(n, 0.0);
    case PhaseInitKind::random: {
      std::mt19937_64 rng(init.seed);
      std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
      std::vector<double> phase(n);
      for (double& p : phase) p = angle(rng);
      return phase;
    }
    case PhaseInitKind::provided:
      if (init.phase.size() != n)
        throw Error(Errc::dimension_mismatch,
                    "provided phase has " + std::to_string(init.phase.size()) +
                        " entries, target has " + std::to_string(n));
      return init.phase;
  }
  return std::vector<double>(n, 0.0);
}

}  // namespace

double spectral_convergence(const MagSpectrogram& target, const ComplexSpectrogram& candidate) {
  if (candidate.bins != target.bins || candidate.frames < target.frames)
    throw Error(Errc::dimension_mismatch,
                "candidate spectrogram " + std::to_string(candidate.bins) + "x" +
                    std::to_string(candidate.frames) + " cannot cover target " +
                    std::to_string(target.bins) + "x" + std::to_string(target.frames));
  const double denom = frobenius(target.data);
  if (!(denom > 0.0)) throw Error(Errc::silent_input, "spectral convergence of a zero target");
  double num = 0.0;
  for (std::size_t k = 0; k < target.bins; ++k) {
    for (std::size_t f = 0; f < target.frames; ++f) {
      const double d = std::abs(candidate.at(k, f)) - target.at(k, f);
      num += d * d;
    }
  }
  return std::sqrt(num) / denom;
}

double spectral_convergence(const MagSpectrogram& target, const AudioBuffer& candidate) {
  if (frame_count(candidate.size(), target.config) < target.frames)
    throw Error(Errc::invalid_argument,
                "candidate of " + std::to_string(candidate.size()) +
                    " samples is too short for " + std::to_string(target.frames) + " frames");
  return spectral_convergence(target, stft(candidate, target.config));
}

AudioBuffer invert_with_phase(const MagSpectrogram& target, const std::vector<double>& phase) {
  if (phase.size() != target.data.size())
    throw Error(Errc::dimension_mismatch, "phase grid does not match the magnitude grid");
  return istft(apply_phase(target, phase));
}

ReconstructionReport griffin_lim(const MagSpectrogram& target, std::size_t iterations,
                                 const PhaseInit& init) {
  if (iterations < 1) throw Error(Errc::invalid_argument, "griffin-lim needs at least one iteration");
  ReconstructionReport report;
  report.iterations_run = iterations;

  if (all_zero(target)) {
    report.signal.sample_rate = target.sample_rate;
    report.signal.samples.assign(signal_length(target.frames, target.config), 0.0);
    report.convergence_trace.assign(iterations, 0.0);
    return report;
  }

  std::vector<double> phase = initial_phase(target, init);
  report.convergence_trace.reserve(iterations);
  for (std::size_t it = 0; it < iterations; ++it) {
    report.signal = istft(apply_phase(target, phase));
    const ComplexSpectrogram projected = stft(report.signal, target.config);
    report.convergence_trace.push_back(spectral_convergence(target, projected));
    for (std::size_t i = 0; i < phase.size(); ++i) phase[i] = std::arg(projected.data[i]);
  }
  return report;
}

std::vector<double> spsi_phase(const MagSpectrogram& target) {
  if (target.frames < 1 || target.data.size() != target.bins * target.frames)
    throw Error(Errc::dimension_mismatch, "spsi needs a non-empty, consistent grid");

  const std::size_t bins = target.bins;
  const double sr = static_cast<double>(target.sample_rate);
  const double n = static_cast<double>(target.config.fft_size);
  const double hop = static_cast<double>(target.config.hop);

  std::vector<double> phase(target.data.size(), 0.0);
  std::vector<double> previous(bins, 0.0);
  std::vector<double> current(bins, 0.0);
  std::vector<bool> is_peak(bins);

  for (std::size_t f = 0; f < target.frames; ++f) {
    std::fill(is_peak.begin(), is_peak.end(), false);
    for (std::size_t k = 1; k + 1 < bins; ++k) {
      const double below = target.at(k - 1, f);
      const double mid = target.at(k, f);
      const double above = target.at(k + 1, f);
      if (!(mid > below && mid > above)) continue;
      is_peak[k] = true;
      if (f == 0) {
        current[k] = 0.0;
        continue;
      }
      const double denom = below - 2.0 * mid + above;
      const double delta = std::abs(denom) < kFlatPeak ? 0.0 : 0.5 * (below - above) / denom;
      const double freq_hz = (static_cast<double>(k) + delta) * sr / n;
      current[k] = std::remainder(previous[k] + kTwoPi * freq_hz * hop / sr, kTwoPi);
    }

    // Non-peak bins lock to the nearest peak below; bins under the first peak
    // keep zero phase.
    double locked = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      if (is_peak[k]) {
        locked = current[k];
      } else {
        current[k] = locked;
      }
      phase[k * target.frames + f] = current[k];
    }
    previous = current;
  }
  return phase;
}

AudioBuffer spsi(const MagSpectrogram& target) {
  return invert_with_phase(target, spsi_phase(target));
}

std::optional<ReconMethodKind> parse_recon_method(const std::string& name) {
  if (name == "griffinlim") return ReconMethodKind::griffinlim;
  if (name == "spsi") return ReconMethodKind::spsi;
  if (name == "spsi+gl") return ReconMethodKind::spsi_then_gl;
  return std::nullopt;
}

ReconstructionReport reconstruct(const MagSpectrogram& target, const ReconMethod& method) {
  switch (method.kind) {
    case ReconMethodKind::griffinlim:
      return griffin_lim(target, method.iterations, PhaseInit::zero());
    case ReconMethodKind::spsi_then_gl:
      return griffin_lim(target, method.iterations, PhaseInit::provided(spsi_phase(target)));
    case ReconMethodKind::spsi: {
      ReconstructionReport report;
      report.signal = spsi(target);
      report.iterations_run = 1;
      report.convergence_trace.push_back(
          all_zero(target) ? 0.0 : spectral_convergence(target, report.signal));
      return report;
    }
  }
  throw Error(Errc::invalid_argument, "unknown reconstruction method");
}

}  // namespace audiostyle
