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

#include "doctest.h"

#include <cmath>

#include "audiostyle/audio_io.hpp"
#include "audiostyle/error.hpp"
#include "oracles.hpp"
#include "wav_bytes.hpp"

using namespace audiostyle;

namespace {

Errc read_error(const std::filesystem::path& path) {
  try {
    read_wav(path);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("read_wav did not throw");
  return Errc::invalid_argument;
}

}  // namespace

TEST_CASE("one second of 16-bit silence") {
  const auto path = wav_bytes::save(
      "as_silence.wav", wav_bytes::make(1, 1, 44100, 16, wav_bytes::pcm16(std::vector<std::int16_t>(44100, 0))));
  const AudioBuffer buf = read_wav(path);
  CHECK(buf.sample_rate == 44100);
  REQUIRE(buf.size() == 44100);
  for (double s : buf.samples) CHECK(s == 0.0);
}

TEST_CASE("16-bit scaling is 1/32768") {
  const auto path = wav_bytes::save(
      "as_half.wav", wav_bytes::make(1, 1, 8000, 16, wav_bytes::pcm16({16384, -32768, 32767})));
  const AudioBuffer buf = read_wav(path);
  CHECK(buf.samples[0] == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(buf.samples[1] == -1.0);
  CHECK(buf.samples[2] < 1.0);
}

TEST_CASE("stereo is mixed down by the mean and channel order does not matter") {
  const std::int16_t half = 16384;
  std::vector<std::int16_t> lr, rl;
  for (int i = 0; i < 64; ++i) {
    lr.insert(lr.end(), {half, static_cast<std::int16_t>(-half)});
    rl.insert(rl.end(), {static_cast<std::int16_t>(-half), half});
  }
  const AudioBuffer a = read_wav(wav_bytes::save("as_lr.wav", wav_bytes::make(1, 2, 8000, 16, wav_bytes::pcm16(lr))));
  const AudioBuffer b = read_wav(wav_bytes::save("as_rl.wav", wav_bytes::make(1, 2, 8000, 16, wav_bytes::pcm16(rl))));
  REQUIRE(a.size() == 64);
  for (double s : a.samples) CHECK(s == 0.0);

  // Asymmetric random stereo: swapping channels gives the same mono signal.
  const auto left = oracle::uniform(100, 3);
  const auto right = oracle::uniform(100, 4);
  std::vector<std::int16_t> x, y;
  for (std::size_t i = 0; i < left.size(); ++i) {
    const auto l = static_cast<std::int16_t>(left[i] * 20000);
    const auto r = static_cast<std::int16_t>(right[i] * 20000);
    x.insert(x.end(), {l, r});
    y.insert(y.end(), {r, l});
  }
  const AudioBuffer mx = read_wav(wav_bytes::save("as_x.wav", wav_bytes::make(1, 2, 8000, 16, wav_bytes::pcm16(x))));
  const AudioBuffer my = read_wav(wav_bytes::save("as_y.wav", wav_bytes::make(1, 2, 8000, 16, wav_bytes::pcm16(y))));
  CHECK(mx.samples == my.samples);
}

TEST_CASE("32-bit float input, clamped to [-1, 1]") {
  const auto path = wav_bytes::save(
      "as_float.wav", wav_bytes::make(3, 2, 22050, 32, wav_bytes::float32({0.25f, 0.75f, 3.0f, 3.0f})));
  const AudioBuffer buf = read_wav(path);
  CHECK(buf.sample_rate == 22050);
  REQUIRE(buf.size() == 2);
  CHECK(buf.samples[0] == doctest::Approx(0.5));
  CHECK(buf.samples[1] == 1.0);
}

TEST_CASE("read errors are distinct") {
  CHECK(read_error("/nonexistent/nowhere.wav") == Errc::file_not_found);
  CHECK(read_error(wav_bytes::save("as_u8.wav", wav_bytes::make(1, 1, 8000, 8, {1, 2, 3}))) ==
        Errc::unsupported_format);
  CHECK(read_error(wav_bytes::save("as_empty.wav", wav_bytes::make(1, 1, 8000, 16, {}))) ==
        Errc::empty_data);
  CHECK(read_error(wav_bytes::save("as_junk.wav", {'J', 'U', 'N', 'K'})) == Errc::malformed_file);
  CHECK(read_error(wav_bytes::save("as_5ch.wav", wav_bytes::make(1, 5, 8000, 16, {0, 0}))) ==
        Errc::unsupported_format);
}

TEST_CASE("write produces the canonical 44-byte PCM-16 header") {
  const auto path = std::filesystem::temp_directory_path() / "as_zeros_out.wav";
  write_wav(path, AudioBuffer{std::vector<double>(10, 0.0), 16000});
  const auto bytes = wav_bytes::slurp(path);
  REQUIRE(bytes.size() == 44 + 20);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "RIFF");
  CHECK(std::string(bytes.begin() + 36, bytes.begin() + 40) == "data");
  for (std::size_t i = 44; i < bytes.size(); ++i) CHECK(bytes[i] == 0);
}

TEST_CASE("write clips then rounds half away from zero") {
  CHECK(quantize_pcm16(2.0) == 32767);
  CHECK(quantize_pcm16(-2.0) == -32768);
  CHECK(quantize_pcm16(1.5 / 32768.0) == 2);
  CHECK(quantize_pcm16(-1.5 / 32768.0) == -2);

  const auto path = std::filesystem::temp_directory_path() / "as_clip.wav";
  write_wav(path, AudioBuffer{{2.0, -2.0}, 8000});
  const auto bytes = wav_bytes::slurp(path);
  CHECK(bytes[44] == 0xFF);
  CHECK(bytes[45] == 0x7F);
  CHECK(bytes[46] == 0x00);
  CHECK(bytes[47] == 0x80);
}

TEST_CASE("round trip stays within one quantization step") {
  const auto path = std::filesystem::temp_directory_path() / "as_roundtrip.wav";
  SUBCASE("440 Hz sine") {
    const AudioBuffer sine{oracle::sine(44100, 440.0, 44100, 0.9), 44100};
    write_wav(path, sine);
    const AudioBuffer back = read_wav(path);
    REQUIRE(back.size() == sine.size());
    CHECK(back.sample_rate == 44100);
    double worst = 0.0;
    for (std::size_t i = 0; i < sine.size(); ++i)
      worst = std::max(worst, std::abs(back.samples[i] - sine.samples[i]));
    CHECK(worst <= 1.0 / 32768.0);
  }
  SUBCASE("random buffers") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const AudioBuffer buf{oracle::uniform(257 + seed * 31, seed), 8000 + static_cast<int>(seed)};
      write_wav(path, buf);
      const AudioBuffer back = read_wav(path);
      REQUIRE(back.size() == buf.size());
      CHECK(back.sample_rate == buf.sample_rate);
      for (std::size_t i = 0; i < buf.size(); ++i)
        CHECK(std::abs(back.samples[i] - buf.samples[i]) <= 1.0 / 32768.0);
    }
  }
}

TEST_CASE("write errors") {
  try {
    write_wav("/nonexistent/dir/out.wav", AudioBuffer{{0.0}, 8000});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::write_failed);
  }
  CHECK_THROWS_AS(write_wav(std::filesystem::temp_directory_path() / "e.wav", AudioBuffer{}), Error);
}
