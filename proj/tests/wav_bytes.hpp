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

// Hand-assembled RIFF/WAVE images for reader tests.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace wav_bytes {

inline void u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(v & 0xFF);
  b.push_back(v >> 8);
}
inline void u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void tag(std::vector<std::uint8_t>& b, const char* t) { b.insert(b.end(), t, t + 4); }

/// payload is the raw data chunk; frames are interleaved.
inline std::vector<std::uint8_t> make(std::uint16_t format, std::uint16_t channels,
                                      std::uint32_t rate, std::uint16_t bits,
                                      const std::vector<std::uint8_t>& payload) {
  std::vector<std::uint8_t> b;
  tag(b, "RIFF");
  u32(b, static_cast<std::uint32_t>(36 + payload.size()));
  tag(b, "WAVE");
  tag(b, "fmt ");
  u32(b, 16);
  u16(b, format);
  u16(b, channels);
  u32(b, rate);
  u32(b, rate * channels * bits / 8);
  u16(b, static_cast<std::uint16_t>(channels * bits / 8));
  u16(b, bits);
  tag(b, "data");
  u32(b, static_cast<std::uint32_t>(payload.size()));
  b.insert(b.end(), payload.begin(), payload.end());
  return b;
}

inline std::vector<std::uint8_t> pcm16(const std::vector<std::int16_t>& samples) {
  std::vector<std::uint8_t> p;
  for (auto s : samples) u16(p, static_cast<std::uint16_t>(s));
  return p;
}

inline std::vector<std::uint8_t> float32(const std::vector<float>& samples) {
  std::vector<std::uint8_t> p;
  for (float s : samples) {
    std::uint32_t raw;
    std::memcpy(&raw, &s, 4);
    u32(p, raw);
  }
  return p;
}

inline std::filesystem::path save(const std::string& name, const std::vector<std::uint8_t>& b) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path, std::ios::binary).write(reinterpret_cast<const char*>(b.data()),
                                              static_cast<std::streamsize>(b.size()));
  return path;
}

inline std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace wav_bytes
