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

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "audiostyle/dsp.hpp"

namespace audiostyle {

struct ReconstructionReport {
  AudioBuffer signal;
  std::size_t iterations_run = 0;
  /// Spectral convergence after each iteration; one entry per iteration.
  std::vector<double> convergence_trace;
};

/// || |STFT(candidate)| - target ||_F / || target ||_F, using the target's
/// analysis config. The candidate must yield at least target.frames frames;
/// only the first target.frames frames are compared.
double spectral_convergence(const MagSpectrogram& target, const AudioBuffer& candidate);

/// Same measure against an already computed candidate spectrogram.
double spectral_convergence(const MagSpectrogram& target, const ComplexSpectrogram& candidate);

enum class PhaseInitKind { zero, random, provided };

struct PhaseInit {
  PhaseInitKind kind = PhaseInitKind::zero;
  std::uint64_t seed = 0;
  /// Phase in radians for every bin/frame when kind == provided.
  std::vector<double> phase;

  static PhaseInit zero() { return {}; }
  static PhaseInit random(std::uint64_t seed) { return {PhaseInitKind::random, seed, {}}; }
  static PhaseInit provided(std::vector<double> phase) {
    return {PhaseInitKind::provided, 0, std::move(phase)};
  }
};

inline constexpr std::size_t kDefaultGriffinLimIterations = 100;

/// Alternates magnitude replacement with the least-squares STFT projection.
/// An all-zero target yields silence and a trace of zeros.
ReconstructionReport griffin_lim(const MagSpectrogram& target, std::size_t iterations,
                                 const PhaseInit& init = PhaseInit::zero());

/// Phase grid (bin-major, same layout as the target) estimated by single-pass
/// peak tracking.
std::vector<double> spsi_phase(const MagSpectrogram& target);

/// Single-pass spectrogram inversion: spsi_phase followed by one istft.
AudioBuffer spsi(const MagSpectrogram& target);

/// Combines a magnitude grid with a phase grid and inverts it.
AudioBuffer invert_with_phase(const MagSpectrogram& target, const std::vector<double>& phase);

enum class ReconMethodKind { griffinlim, spsi, spsi_then_gl };

struct ReconMethod {
  ReconMethodKind kind = ReconMethodKind::spsi_then_gl;
  std::size_t iterations = kDefaultGriffinLimIterations;
};

/// Parses "griffinlim", "spsi" or "spsi+gl".
std::optional<ReconMethodKind> parse_recon_method(const std::string& name);

/// For spsi alone the report holds one iteration whose trace value is the
/// spectral convergence of the SPSI output.
ReconstructionReport reconstruct(const MagSpectrogram& target, const ReconMethod& method);

}  // namespace audiostyle
