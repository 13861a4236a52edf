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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "audiostyle/audio_io.hpp"

namespace audiostyle {

using Complex = std::complex<double>;

/// Analysis parameters. 512 is the only power of two giving 257 bins.
struct FftConfig {
  std::size_t fft_size = 512;
  std::size_t hop = 256;

  std::size_t bins() const noexcept { return fft_size / 2 + 1; }
  /// Throws invalid_argument unless fft_size is a power of two >= 2 and hop
  /// divides it.
  void validate() const;
};

/// Frequency x time grid. Storage is bin-major: entry (k, f) lives at
/// k * frames + f, so a row is the time course of one bin.
template <typename T>
struct SpectrogramGrid {
  FftConfig config;
  int sample_rate = kDefaultSampleRate;
  std::size_t bins = 0;
  std::size_t frames = 0;
  std::vector<T> data;

  T& at(std::size_t bin, std::size_t frame) { return data[bin * frames + frame]; }
  const T& at(std::size_t bin, std::size_t frame) const {
    return data[bin * frames + frame];
  }

  /// Same geometry, zero-filled, different element type.
  template <typename U>
  SpectrogramGrid<U> like() const {
    return {config, sample_rate, bins, frames, std::vector<U>(data.size())};
  }
};

using ComplexSpectrogram = SpectrogramGrid<Complex>;

struct MagSpectrogram : SpectrogramGrid<double> {};
/// Entries are ln(1 + |S|).
struct LogMagSpectrogram : SpectrogramGrid<double> {};

/// Periodic Hann window, w[i] = 0.5 (1 - cos(2 pi i / n)).
std::vector<double> hann_window(std::size_t n);

/// In-place radix-2 transform with the e^{-2 pi i k n / N} kernel. The inverse
/// is scaled by 1/N.
void fft_inplace(std::span<Complex> x, bool inverse);
std::vector<Complex> fft(std::span<const Complex> x, bool inverse = false);

/// Number of frames produced for a signal of the given length (no padding).
std::size_t frame_count(std::size_t length, const FftConfig& cfg);
/// Length of the signal istft produces for the given frame count.
std::size_t signal_length(std::size_t frames, const FftConfig& cfg);

ComplexSpectrogram stft(const AudioBuffer& buf, const FftConfig& cfg = {});

/// Weighted overlap-add inverse: each frame is inverse transformed, windowed
/// again and summed, then divided by the accumulated squared window. Samples
/// where that envelope vanishes come out as zero.
AudioBuffer istft(const ComplexSpectrogram& spec);

MagSpectrogram magnitude(const ComplexSpectrogram& spec);
LogMagSpectrogram to_log_mag(const MagSpectrogram& mag);
LogMagSpectrogram to_log_mag(const ComplexSpectrogram& spec);
MagSpectrogram from_log_mag(const LogMagSpectrogram& log_mag);

/// Magnitude-weighted mean frequency over the whole clip, in Hz.
double spectral_centroid(const MagSpectrogram& mag);

}  // namespace audiostyle
