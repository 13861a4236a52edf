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

#include "audiostyle/spectrogram_export.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <string>

#include "audiostyle/error.hpp"

namespace audiostyle {

namespace {

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8)
    out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_chunk(std::vector<std::uint8_t>& out, const char* type,
               const std::vector<std::uint8_t>& body) {
  put_be32(out, static_cast<std::uint32_t>(body.size()));
  const std::size_t type_at = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), body.begin(), body.end());
  const uLong crc = crc32(0L, out.data() + type_at, static_cast<uInt>(body.size() + 4));
  put_be32(out, static_cast<std::uint32_t>(crc));
}

std::ofstream open_for_write(const std::filesystem::path& path, bool binary) {
  std::ofstream file(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!file) throw Error(Errc::write_failed, "cannot open " + path.string() + " for writing");
  return file;
}

}  // namespace

void write_spectrogram_csv(const std::filesystem::path& path, const MagSpectrogram& mag) {
  auto file = open_for_write(path, false);
  file << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t k = 0; k < mag.bins; ++k) {
    for (std::size_t f = 0; f < mag.frames; ++f) {
      if (f) file << ',';
      file << mag.at(k, f);
    }
    file << '\n';
  }
  if (!file) throw Error(Errc::write_failed, "failed writing " + path.string());
}

std::uint8_t db_to_pixel(double magnitude) noexcept {
  const double db = 20.0 * std::log10(magnitude + 1e-10);
  const double level = std::round(255.0 * (db + 80.0) / 80.0);
  return static_cast<std::uint8_t>(std::clamp(level, 0.0, 255.0));
}

GrayImage render_spectrogram(const MagSpectrogram& mag) {
  GrayImage img;
  img.width = mag.frames;
  img.height = mag.bins;
  img.pixels.resize(img.width * img.height);
  for (std::size_t row = 0; row < img.height; ++row) {
    const std::size_t bin = img.height - 1 - row;
    for (std::size_t col = 0; col < img.width; ++col)
      img.pixels[row * img.width + col] = db_to_pixel(mag.at(bin, col));
  }
  return img;
}

void write_png(const std::filesystem::path& path, const GrayImage& image) {
  if (image.width == 0 || image.height == 0 ||
      image.pixels.size() != image.width * image.height)
    throw Error(Errc::invalid_argument, "cannot encode an empty image");

  std::vector<std::uint8_t> raw;
  raw.reserve((image.width + 1) * image.height);
  for (std::size_t row = 0; row < image.height; ++row) {
    raw.push_back(0);  // filter: none
    const auto* begin = image.pixels.data() + row * image.width;
    raw.insert(raw.end(), begin, begin + image.width);
  }
  uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> packed(packed_size);
  if (compress2(packed.data(), &packed_size, raw.data(), static_cast<uLong>(raw.size()),
                Z_BEST_COMPRESSION) != Z_OK)
    throw Error(Errc::write_failed, "deflate failed for " + path.string());
  packed.resize(packed_size);

  std::vector<std::uint8_t> header;
  put_be32(header, static_cast<std::uint32_t>(image.width));
  put_be32(header, static_cast<std::uint32_t>(image.height));
  header.insert(header.end(), {8, 0, 0, 0, 0});  // 8-bit grayscale, no interlace

  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  put_chunk(out, "IHDR", header);
  put_chunk(out, "IDAT", packed);
  put_chunk(out, "IEND", {});

  auto file = open_for_write(path, true);
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) throw Error(Errc::write_failed, "failed writing " + path.string());
}

void write_spectrogram_png(const std::filesystem::path& path, const MagSpectrogram& mag) {
  write_png(path, render_spectrogram(mag));
}

}  // namespace audiostyle
