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
#include <filesystem>
#include <vector>

namespace audiostyle {

inline constexpr int kDefaultSampleRate = 44100;

/// Mono time-domain signal. Samples lie in [-1, 1] and are finite.
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = kDefaultSampleRate;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
};

/// Reads a RIFF/WAVE file holding 16-bit PCM or 32-bit IEEE float samples in
/// one or two channels. Stereo is mixed down by the per-sample mean.
///
/// Throws Error with file_not_found, unsupported_format, empty_data or
/// malformed_file.
AudioBuffer read_wav(const std::filesystem::path& path);

/// Writes 16-bit PCM mono with the canonical 44-byte header. Samples are hard
/// clipped to [-1, 1] and rounded half away from zero after scaling by 32768.
void write_wav(const std::filesystem::path& path, const AudioBuffer& buf);

/// Quantizes one sample the way write_wav does.
std::int16_t quantize_pcm16(double sample) noexcept;

}  // namespace audiostyle
