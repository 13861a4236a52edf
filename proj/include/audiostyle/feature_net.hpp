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

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "audiostyle/dsp.hpp"

namespace audiostyle {

/// Channels x time activations, row-major: entry (c, t) at c * time + t.
struct FeatureMap {
  std::size_t channels = 0;
  std::size_t time = 0;
  std::vector<double> data;

  static FeatureMap zeros(std::size_t channels, std::size_t time) {
    return {channels, time, std::vector<double>(channels * time, 0.0)};
  }

  double& at(std::size_t c, std::size_t t) { return data[c * time + t]; }
  double at(std::size_t c, std::size_t t) const { return data[c * time + t]; }
  bool same_shape(const FeatureMap& o) const { return channels == o.channels && time == o.time; }
  bool empty() const noexcept { return data.empty(); }
};

/// A spectrogram frame is a channel vector: channels = bins, time = frames.
FeatureMap as_feature_map(const LogMagSpectrogram& spec);

enum class LayerKind : std::uint8_t { conv1d = 0, relu = 1, maxpool2 = 2, dense = 3 };

/// Convolutions are stride 1 with same padding over time; the kernel spans
/// every input channel.
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel_width = 0;

  static LayerSpec conv1d(std::size_t in, std::size_t out, std::size_t width) {
    return {LayerKind::conv1d, in, out, width};
  }
  static LayerSpec dense(std::size_t in, std::size_t out) { return {LayerKind::dense, in, out, 1}; }
  static LayerSpec relu() { return {LayerKind::relu, 0, 0, 0}; }
  static LayerSpec maxpool2() { return {LayerKind::maxpool2, 0, 0, 0}; }

  bool has_params() const { return kind == LayerKind::conv1d || kind == LayerKind::dense; }
  std::size_t weight_count() const { return out_channels * in_channels * kernel_width; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Parameters of one layer. Conv kernels are out x in x width, dense weights
/// out x in, both row-major. Parameter-free layers leave both vectors empty.
struct Layer {
  LayerSpec spec;
  std::vector<double> weights;
  std::vector<double> bias;
};

inline constexpr std::size_t kDefaultKernelWidth = 11;
inline constexpr std::size_t kDefaultBins = 257;
inline constexpr std::size_t kCentroidClasses = 16;
inline constexpr std::size_t kHiddenUnits = 32;

/// Dense(feature -> 32) with relu, then two parallel output layers.
struct ClassifierHead {
  Layer hidden;
  Layer main;
  Layer aux;
};

struct NetworkWeights {
  /// Feature extractor only: conv1d / relu / maxpool2.
  std::vector<Layer> layers;
  std::optional<ClassifierHead> head;

  std::vector<LayerSpec> architecture() const;
  std::size_t input_channels() const;
  std::size_t output_channels() const;
  /// Number of conv blocks; a block is a conv1d plus the relu/pool layers
  /// that follow it.
  std::size_t block_count() const;
};

/// Conv blocks conv -> relu -> maxpool2 with the given widths.
std::vector<LayerSpec> pooled_architecture(std::size_t bins, std::span<const std::size_t> widths,
                                           std::size_t kernel_width = kDefaultKernelWidth);
/// The two-block 2048/64 network.
std::vector<LayerSpec> default_architecture(std::size_t bins = kDefaultBins,
                                            std::size_t kernel_width = kDefaultKernelWidth);
/// One wide conv + relu, no pooling.
std::vector<LayerSpec> single_layer_architecture(std::size_t bins = kDefaultBins,
                                                 std::size_t channels = 4096,
                                                 std::size_t kernel_width = kDefaultKernelWidth);

/// Throws invalid_argument / dimension_mismatch for malformed layer lists.
void validate_architecture(std::span<const LayerSpec> arch);
void validate_weights(const NetworkWeights& w);

/// Rectifier-scaled Gaussian kernels (std sqrt(2 / fan_in)), zero biases. Each
/// layer draws from its own stream derived from (seed, layer index).
NetworkWeights init_random(std::span<const LayerSpec> arch, std::uint64_t seed);
Layer init_layer(const LayerSpec& spec, std::uint64_t seed, std::uint64_t stream);

FeatureMap conv1d_forward(const FeatureMap& input, std::span<const double> kernel,
                          std::span<const double> bias, std::size_t width);
FeatureMap conv1d_forward(const FeatureMap& input, const Layer& conv);
FeatureMap relu(const FeatureMap& x);
FeatureMap maxpool2(const FeatureMap& x);

/// Every intermediate of one forward pass. layer_outputs[i] is the output of
/// layers[i]; blocks index the conv blocks.
struct ForwardTrace {
  FeatureMap input;
  std::vector<FeatureMap> layer_outputs;
  std::vector<std::size_t> block_activation_layer;  // last non-pool layer
  std::vector<std::size_t> block_output_layer;      // last layer

  std::size_t size() const noexcept { return block_output_layer.size(); }
  /// Post-activation, pre-pool map of block b (0-based).
  const FeatureMap& activation(std::size_t b) const {
    return layer_outputs[block_activation_layer[b]];
  }
  /// Post-pool map of block b (0-based).
  const FeatureMap& output(std::size_t b) const { return layer_outputs[block_output_layer[b]]; }
  const FeatureMap& final_output() const { return layer_outputs.back(); }
};

ForwardTrace forward(const NetworkWeights& w, const FeatureMap& input);
ForwardTrace forward(const NetworkWeights& w, const LogMagSpectrogram& spec);

/// Time-normalized Gram matrix: G = F F^T / time.
Eigen::MatrixXd gram(const FeatureMap& f);

struct NetworkGradients {
  FeatureMap input;
  /// Per layer; empty for parameter-free layers or when not requested.
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;
};

/// Reverse-mode pass. block_grads[b] is dL/d(output of block b); an empty
/// map means zero. Pool gradients go to the larger element (earlier on
/// ties), relu passes where its output is positive.
NetworkGradients backward(const NetworkWeights& w, const ForwardTrace& trace,
                          std::span<const FeatureMap> block_grads, bool param_grads);

void save_weights(const NetworkWeights& w, const std::filesystem::path& path);
NetworkWeights load_weights(const std::filesystem::path& path);

/// In-memory forms of the ASTW file.
std::vector<std::uint8_t> encode_weights(const NetworkWeights& w);
NetworkWeights decode_weights(std::span<const std::uint8_t> bytes);

}  // namespace audiostyle
