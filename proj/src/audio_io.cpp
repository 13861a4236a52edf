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

#include "audiostyle/audio_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <span>

#include "audiostyle/error.hpp"

namespace audiostyle {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::file_not_found: return "file not found";
    case Errc::unsupported_format: return "unsupported format";
    case Errc::empty_data: return "empty data";
    case Errc::malformed_file: return "malformed file";
    case Errc::write_failed: return "write failed";
    case Errc::invalid_argument: return "invalid argument";
    case Errc::dimension_mismatch: return "dimension mismatch";
    case Errc::sample_rate_mismatch: return "sample rate mismatch";
    case Errc::silent_input: return "silent input";
    case Errc::bad_magic: return "bad magic";
    case Errc::version_mismatch: return "version mismatch";
    case Errc::truncated: return "truncated";
  }
  return "unknown error";
}

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) |
         (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

struct FormatChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::file_not_found, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  const std::span<const std::uint8_t> b(bytes);

  if (b.size() < 12 || !tag_is(b, 0, "RIFF") || !tag_is(b, 8, "WAVE"))
    throw Error(Errc::malformed_file, path.string() + " is not a RIFF/WAVE file");

  std::optional<FormatChunk> fmt;
  std::optional<std::span<const std::uint8_t>> data;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::uint32_t chunk_size = get_u32(b, pos + 4);
    const std::size_t body = pos + 8;
    // Writers that stream often leave the data size unset; clamp to the file.
    const std::size_t avail = std::min<std::size_t>(chunk_size, b.size() - body);
    if (tag_is(b, pos, "fmt ")) {
      if (avail < 16) throw Error(Errc::malformed_file, "short fmt chunk");
      FormatChunk f;
      f.format = get_u16(b, body);
      f.channels = get_u16(b, body + 2);
      f.sample_rate = get_u32(b, body + 4);
      f.bits = get_u16(b, body + 14);
      if (f.format == kFormatExtensible) {
        if (avail < 26) throw Error(Errc::malformed_file, "short extensible fmt chunk");
        f.format = get_u16(b, body + 24);
      }
      fmt = f;
    } else if (tag_is(b, pos, "data")) {
      data = b.subspan(body, avail);
    }
    pos = body + avail + (avail & 1);
  }

  if (!fmt) throw Error(Errc::malformed_file, "missing fmt chunk");
  if (!data) throw Error(Errc::malformed_file, "missing data chunk");

  const bool pcm16 = fmt->format == kFormatPcm && fmt->bits == 16;
  const bool float32 = fmt->format == kFormatFloat && fmt->bits == 32;
  if (!pcm16 && !float32)
    throw Error(Errc::unsupported_format,
                "unsupported codec " + std::to_string(fmt->format) + " with " +
                    std::to_string(fmt->bits) + " bits");
  if (fmt->channels < 1 || fmt->channels > 2)
    throw Error(Errc::unsupported_format,
                "unsupported channel count " + std::to_string(fmt->channels));
  if (fmt->sample_rate == 0) throw Error(Errc::malformed_file, "zero sample rate");

  const std::size_t width = fmt->bits / 8;
  const std::size_t frame_bytes = width * fmt->channels;
  const std::size_t frames = data->size() / frame_bytes;
  if (frames == 0) throw Error(Errc::empty_data, "zero-length data chunk");

  auto sample_at = [&](std::size_t offset) -> double {
    if (pcm16) {
      const auto v = static_cast<std::int16_t>(get_u16(*data, offset));
      return static_cast<double>(v) / 32768.0;
    }
    const std::uint32_t raw = get_u32(*data, offset);
    float v;
    std::memcpy(&v, &raw, sizeof v);
    if (!std::isfinite(v)) throw Error(Errc::malformed_file, "non-finite float sample");
    return std::clamp(static_cast<double>(v), -1.0, 1.0);
  };

  AudioBuffer out;
  out.sample_rate = static_cast<int>(fmt->sample_rate);
  out.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const std::size_t at = i * frame_bytes;
    if (fmt->channels == 1) {
      out.samples[i] = sample_at(at);
    } else {
      out.samples[i] = 0.5 * (sample_at(at) + sample_at(at + width));
    }
  }
  return out;
}

std::int16_t quantize_pcm16(double sample) noexcept {
  const double clipped = std::clamp(sample, -1.0, 1.0);
  const double scaled = std::round(clipped * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& buf) {
  if (buf.empty()) throw Error(Errc::invalid_argument, "cannot write an empty buffer");
  if (buf.sample_rate <= 0) throw Error(Errc::invalid_argument, "non-positive sample rate");

  const auto data_bytes = static_cast<std::uint32_t>(buf.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(buf.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(buf.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double s : buf.samples)
    put_u16(out, static_cast<std::uint16_t>(quantize_pcm16(s)));

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(Errc::write_failed, "cannot open " + path.string() + " for writing");
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) throw Error(Errc::write_failed, "failed writing " + path.string());
}

}  // namespace audiostyle
