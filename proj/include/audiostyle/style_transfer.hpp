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
#include <optional>
#include <span>
#include <vector>

#include "audiostyle/feature_net.hpp"

namespace audiostyle {

struct LossAndGrad {
  double loss = 0.0;
  FeatureMap grad;
};

/// L = sum((f - p)^2) / (2 C T), dL/df = (f - p) / (C T).
LossAndGrad content_loss(const FeatureMap& f, const FeatureMap& p);

/// L = sum((gram(f) - A)^2) / (4 C^2), dL/df = (gram(f) - A) f / (C^2 T).
LossAndGrad style_loss(const FeatureMap& f, const Eigen::MatrixXd& target_gram);

/// Gradient of a loss defined on block outputs with respect to the network
/// input (bins x frames).
FeatureMap backprop_to_input(const NetworkWeights& w, const ForwardTrace& trace,
                             std::span<const FeatureMap> block_grads);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

/// One bias-corrected Adam update at step t (1-based). A fresh (empty) state
/// is sized on first use.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double step_size, std::uint64_t t);

enum class InitMode { content, noise, content_plus_noise };

struct WeightsSource {
  /// Random weights for the configured architecture when no file is given.
  std::optional<std::filesystem::path> file;
  std::uint64_t random_seed = 42;
};

struct TransferConfig {
  double alpha = 1.0;
  double beta = 1e3;
  /// 1-based block indices.
  std::size_t content_layer = 2;
  std::vector<std::size_t> style_layers = {1, 2};
  std::size_t iterations = 500;
  double step_size = 0.05;
  InitMode init_mode = InitMode::content;
  /// Noise is uniform in [0, noise_level * max(content)].
  double noise_level = 0.1;
  std::uint64_t seed = 0;
  WeightsSource weights_source;
  /// Used for random weights only; file weights carry their own.
  std::vector<LayerSpec> architecture = default_architecture();
  FftConfig fft;

  /// Throws invalid_argument if the knobs are out of range for a network
  /// with the given number of blocks.
  void validate(std::size_t blocks) const;
};

struct LossTerms {
  double total = 0.0;
  double content = 0.0;
  double style = 0.0;
};

struct TransferResult {
  LogMagSpectrogram output;
  /// Loss at the start of each iteration, before its update.
  std::vector<LossTerms> loss_trace;
  TransferConfig config;
};

/// Precomputed targets plus the network; evaluates the weighted objective
/// and its input gradient for any candidate grid.
class TransferObjective {
 public:
  TransferObjective(NetworkWeights weights, const LogMagSpectrogram& content,
                    const LogMagSpectrogram& style, const TransferConfig& cfg);

  LossTerms evaluate(const FeatureMap& x, FeatureMap* grad) const;
  const NetworkWeights& weights() const { return weights_; }

 private:
  NetworkWeights weights_;
  double alpha_;
  double beta_;
  std::size_t content_block_;
  std::vector<std::size_t> style_blocks_;
  FeatureMap content_target_;
  std::vector<Eigen::MatrixXd> style_targets_;
};

/// Resolves cfg.weights_source into concrete weights.
NetworkWeights transfer_weights(const TransferConfig& cfg);

TransferResult run_transfer(const LogMagSpectrogram& content, const LogMagSpectrogram& style,
                            const NetworkWeights& weights, const TransferConfig& cfg);
TransferResult run_transfer(const AudioBuffer& content, const AudioBuffer& style,
                            const TransferConfig& cfg);

void write_loss_csv(const std::filesystem::path& path, std::span<const LossTerms> trace);

}  // namespace audiostyle
