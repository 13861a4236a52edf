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

#include "audiostyle/dsp.hpp"

namespace audiostyle {

/// Rows are bins from 0 Hz upward, columns are frames.
void write_spectrogram_csv(const std::filesystem::path& path, const MagSpectrogram& mag);

/// 8-bit gray image, one column per frame. Row 0 is the Nyquist bin. Each
/// pixel maps dB = 20 log10(|S| + 1e-10) linearly from [-80, 0] to [0, 255].
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  std::uint8_t at(std::size_t row, std::size_t col) const {
    return pixels[row * width + col];
  }
};

std::uint8_t db_to_pixel(double magnitude) noexcept;
GrayImage render_spectrogram(const MagSpectrogram& mag);
void write_png(const std::filesystem::path& path, const GrayImage& image);
void write_spectrogram_png(const std::filesystem::path& path, const MagSpectrogram& mag);

}  // namespace audiostyle
