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

#include "audiostyle/dsp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "audiostyle/error.hpp"

namespace audiostyle {

namespace {

// Squared-window envelope below this is treated as uncovered.
constexpr double kEnvelopeFloor = 1e-12;

const std::vector<Complex>& twiddles(std::size_t n) {
  thread_local std::vector<Complex> table;
  thread_local std::size_t table_size = 0;
  if (table_size != n) {
    table.resize(n / 2);
    for (std::size_t j = 0; j < n / 2; ++j) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(j) /
                           static_cast<double>(n);
      table[j] = {std::cos(angle), std::sin(angle)};
    }
    table_size = n;
  }
  return table;
}

template <typename Grid>
void check_geometry(const Grid& g) {
  g.config.validate();
  if (g.bins != g.config.bins() || g.data.size() != g.bins * g.frames || g.frames == 0)
    throw Error(Errc::dimension_mismatch,
                "spectrogram is " + std::to_string(g.bins) + "x" +
                    std::to_string(g.frames) + " with " + std::to_string(g.data.size()) +
                    " entries, fft size " + std::to_string(g.config.fft_size));
}

}  // namespace

void FftConfig::validate() const {
  if (fft_size < 2 || !std::has_single_bit(fft_size))
    throw Error(Errc::invalid_argument,
                "fft size " + std::to_string(fft_size) + " is not a power of two");
  if (hop == 0 || hop > fft_size || fft_size % hop != 0)
    throw Error(Errc::invalid_argument,
                "hop " + std::to_string(hop) + " must divide fft size " +
                    std::to_string(fft_size));
}

std::vector<double> hann_window(std::size_t n) {
  if (n < 2) throw Error(Errc::invalid_argument, "window length must be at least 2");
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                 static_cast<double>(n)));
  return w;
}

void fft_inplace(std::span<Complex> x, bool inverse) {
  const std::size_t n = x.size();
  if (n == 0 || !std::has_single_bit(n))
    throw Error(Errc::invalid_argument,
                "fft length " + std::to_string(n) + " is not a power of two");
  if (n == 1) return;

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }

  const auto& w = twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t j = 0; j < half; ++j) {
        const Complex tw = inverse ? std::conj(w[j * stride]) : w[j * stride];
        const Complex u = x[start + j];
        const Complex v = x[start + j + half] * tw;
        x[start + j] = u + v;
        x[start + j + half] = u - v;
      }
    }
  }

  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : x) v *= scale;
  }
}

std::vector<Complex> fft(std::span<const Complex> x, bool inverse) {
  std::vector<Complex> out(x.begin(), x.end());
  fft_inplace(out, inverse);
  return out;
}

std::size_t frame_count(std::size_t length, const FftConfig& cfg) {
  if (length < cfg.fft_size) return 0;
  return (length - cfg.fft_size) / cfg.hop + 1;
}

std::size_t signal_length(std::size_t frames, const FftConfig& cfg) {
  return frames == 0 ? 0 : (frames - 1) * cfg.hop + cfg.fft_size;
}

ComplexSpectrogram stft(const AudioBuffer& buf, const FftConfig& cfg) {
  cfg.validate();
  if (buf.size() < cfg.fft_size)
    throw Error(Errc::invalid_argument,
                "signal of " + std::to_string(buf.size()) +
                    " samples is shorter than one frame of " +
                    std::to_string(cfg.fft_size));

  const std::size_t n = cfg.fft_size;
  ComplexSpectrogram spec;
  spec.config = cfg;
  spec.sample_rate = buf.sample_rate;
  spec.bins = cfg.bins();
  spec.frames = frame_count(buf.size(), cfg);
  spec.data.assign(spec.bins * spec.frames, Complex{});

  const auto window = hann_window(n);
  std::vector<Complex> frame(n);
  for (std::size_t f = 0; f < spec.frames; ++f) {
    const std::size_t offset = f * cfg.hop;
    for (std::size_t i = 0; i < n; ++i) frame[i] = buf.samples[offset + i] * window[i];
    fft_inplace(frame, false);
    for (std::size_t k = 0; k < spec.bins; ++k) spec.at(k, f) = frame[k];
  }
  return spec;
}

AudioBuffer istft(const ComplexSpectrogram& spec) {
  check_geometry(spec);
  const FftConfig& cfg = spec.config;
  const std::size_t n = cfg.fft_size;
  const std::size_t length = signal_length(spec.frames, cfg);
  const auto window = hann_window(n);

  std::vector<double> acc(length, 0.0);
  std::vector<double> envelope(length, 0.0);
  std::vector<Complex> frame(n);
  for (std::size_t f = 0; f < spec.frames; ++f) {
    for (std::size_t k = 0; k < spec.bins; ++k) frame[k] = spec.at(k, f);
    for (std::size_t k = spec.bins; k < n; ++k) frame[k] = std::conj(frame[n - k]);
    fft_inplace(frame, true);
    const std::size_t offset = f * cfg.hop;
    for (std::size_t i = 0; i < n; ++i) {
      acc[offset + i] += frame[i].real() * window[i];
      envelope[offset + i] += window[i] * window[i];
    }
  }

  AudioBuffer out;
  out.sample_rate = spec.sample_rate;
  out.samples.resize(length);
  for (std::size_t i = 0; i < length; ++i)
    out.samples[i] = envelope[i] > kEnvelopeFloor ? acc[i] / envelope[i] : 0.0;
  return out;
}

MagSpectrogram magnitude(const ComplexSpectrogram& spec) {
  MagSpectrogram mag{spec.like<double>()};
  std::transform(spec.data.begin(), spec.data.end(), mag.data.begin(),
                 [](const Complex& c) { return std::abs(c); });
  return mag;
}

LogMagSpectrogram to_log_mag(const MagSpectrogram& mag) {
  LogMagSpectrogram out{mag};
  for (double& v : out.data) v = std::log1p(std::max(v, 0.0));
  return out;
}

LogMagSpectrogram to_log_mag(const ComplexSpectrogram& spec) {
  return to_log_mag(magnitude(spec));
}

MagSpectrogram from_log_mag(const LogMagSpectrogram& log_mag) {
  MagSpectrogram out{log_mag};
  for (double& v : out.data) v = std::max(std::expm1(v), 0.0);
  return out;
}

double spectral_centroid(const MagSpectrogram& mag) {
  double weighted = 0.0;
  double total = 0.0;
  const double bin_hz =
      static_cast<double>(mag.sample_rate) / static_cast<double>(mag.config.fft_size);
  for (std::size_t k = 0; k < mag.bins; ++k) {
    double row = 0.0;
    for (std::size_t f = 0; f < mag.frames; ++f) row += mag.at(k, f);
    weighted += static_cast<double>(k) * bin_hz * row;
    total += row;
  }
  if (!(total > 0.0)) throw Error(Errc::silent_input, "spectral centroid of a silent clip");
  return weighted / total;
}

}  // namespace audiostyle
