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

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "audiostyle/error.hpp"
#include "audiostyle/feature_net.hpp"

// ASTW layout, little-endian:
//   "ASTW" | u32 version | u32 layer_count | layers...
//   layer: u8 kind, then for conv1d: u32 out, u32 in, u32 width, kernel f32[],
//   bias f32[]; for dense: u32 out, u32 in, weights f32[], bias f32[].
// A classifier head follows the feature layers as dense, relu, dense, dense.

namespace audiostyle {

namespace {

constexpr char kMagic[4] = {'A', 'S', 'T', 'W'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(double v) {
    const float f = static_cast<float>(v);
    std::uint32_t raw;
    std::memcpy(&raw, &f, sizeof raw);
    u32(raw);
  }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  void need(std::size_t n) const {
    if (b_.size() - pos_ < n)
      throw Error(Errc::truncated, "weight file ends at byte " + std::to_string(b_.size()) +
                                       ", needed " + std::to_string(n) + " more at " +
                                       std::to_string(pos_));
  }
  std::uint8_t u8() {
    need(1);
    return b_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::vector<double> f32s(std::size_t count) {
    if (count > (b_.size() - pos_) / 4) need(count * 4);
    std::vector<double> out(count);
    for (double& v : out) {
      const std::uint32_t raw = u32();
      float f;
      std::memcpy(&f, &raw, sizeof f);
      if (!std::isfinite(f)) throw Error(Errc::malformed_file, "non-finite weight value");
      v = f;
    }
    return out;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

void write_layer(Writer& out, const Layer& l) {
  out.u8(static_cast<std::uint8_t>(l.spec.kind));
  if (l.spec.kind == LayerKind::conv1d) {
    out.u32(static_cast<std::uint32_t>(l.spec.out_channels));
    out.u32(static_cast<std::uint32_t>(l.spec.in_channels));
    out.u32(static_cast<std::uint32_t>(l.spec.kernel_width));
  } else if (l.spec.kind == LayerKind::dense) {
    out.u32(static_cast<std::uint32_t>(l.spec.out_channels));
    out.u32(static_cast<std::uint32_t>(l.spec.in_channels));
  }
  for (double v : l.weights) out.f32(v);
  for (double v : l.bias) out.f32(v);
}

Layer read_layer(Reader& in) {
  const std::uint8_t tag = in.u8();
  Layer l;
  switch (tag) {
    case 0: {
      const std::uint32_t out = in.u32(), inch = in.u32(), width = in.u32();
      l.spec = LayerSpec::conv1d(inch, out, width);
      break;
    }
    case 1:
      l.spec = LayerSpec::relu();
      return l;
    case 2:
      l.spec = LayerSpec::maxpool2();
      return l;
    case 3: {
      const std::uint32_t out = in.u32(), inch = in.u32();
      l.spec = LayerSpec::dense(inch, out);
      break;
    }
    default:
      throw Error(Errc::malformed_file, "unknown layer kind " + std::to_string(tag));
  }
  if (l.spec.out_channels == 0 || l.spec.in_channels == 0 || l.spec.kernel_width == 0)
    throw Error(Errc::dimension_mismatch, "layer with a zero dimension");
  l.weights = in.f32s(l.spec.weight_count());
  l.bias = in.f32s(l.spec.out_channels);
  return l;
}

}  // namespace

std::vector<std::uint8_t> encode_weights(const NetworkWeights& w) {
  validate_weights(w);
  Writer out;
  out.raw(kMagic, 4);
  out.u32(kVersion);
  const std::size_t head_layers = w.head ? 4 : 0;
  out.u32(static_cast<std::uint32_t>(w.layers.size() + head_layers));
  for (const Layer& l : w.layers) write_layer(out, l);
  if (w.head) {
    write_layer(out, w.head->hidden);
    write_layer(out, Layer{LayerSpec::relu(), {}, {}});
    write_layer(out, w.head->main);
    write_layer(out, w.head->aux);
  }
  return out.take();
}

NetworkWeights decode_weights(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw Error(Errc::bad_magic, "not an ASTW weight file");
  Reader in(bytes.subspan(4));
  const std::uint32_t version = in.u32();
  if (version != kVersion)
    throw Error(Errc::version_mismatch, "ASTW version " + std::to_string(version) +
                                            ", expected " + std::to_string(kVersion));
  const std::uint32_t count = in.u32();

  std::vector<Layer> all;
  for (std::uint32_t i = 0; i < count; ++i) all.push_back(read_layer(in));
  if (!in.done()) throw Error(Errc::malformed_file, "trailing bytes after the last layer");

  NetworkWeights w;
  std::size_t i = 0;
  for (; i < all.size() && all[i].spec.kind != LayerKind::dense; ++i)
    w.layers.push_back(std::move(all[i]));
  try {
    validate_weights(w);
  } catch (const Error& e) {
    throw Error(Errc::dimension_mismatch, e.what());
  }

  if (i < all.size()) {
    const bool shaped = all.size() - i == 4 && all[i + 1].spec.kind == LayerKind::relu &&
                        all[i + 2].spec.kind == LayerKind::dense &&
                        all[i + 3].spec.kind == LayerKind::dense;
    if (!shaped)
      throw Error(Errc::dimension_mismatch, "classifier head must be dense, relu, dense, dense");
    ClassifierHead head{std::move(all[i]), std::move(all[i + 2]), std::move(all[i + 3])};
    const std::size_t hidden = head.hidden.spec.out_channels;
    if (head.hidden.spec.in_channels != w.output_channels() ||
        head.main.spec.in_channels != hidden || head.aux.spec.in_channels != hidden)
      throw Error(Errc::dimension_mismatch, "classifier head does not chain onto the features");
    w.head = std::move(head);
  }
  return w;
}

void save_weights(const NetworkWeights& w, const std::filesystem::path& path) {
  const auto bytes = encode_weights(w);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(Errc::write_failed, "cannot open " + path.string() + " for writing");
  file.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  if (!file) throw Error(Errc::write_failed, "failed writing " + path.string());
}

NetworkWeights load_weights(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(Errc::file_not_found, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)),
                                        std::istreambuf_iterator<char>());
  return decode_weights(bytes);
}

}  // namespace audiostyle
