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

struct LabeledClip {
  AudioBuffer audio;
  std::size_t class_id = 0;
  /// Spectral-centroid quantile class, filled by assign_centroid_classes.
  std::optional<std::size_t> centroid_class;
};

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 8;
  double step_size = 1e-3;
  std::uint64_t seed = 0;
  double aux_weight = 0.3;
  std::size_t num_classes = 50;
  std::vector<std::size_t> widths = {64, 16};
  std::size_t kernel_width = kDefaultKernelWidth;
  FftConfig fft;

  void validate() const;
};

/// Sorts clips by spectral centroid (stable) and cuts the order into 16
/// contiguous groups; group g holds sorted positions [g n / 16, (g + 1) n / 16).
void assign_centroid_classes(std::span<LabeledClip> clips, const FftConfig& fft = {});

/// Feature network plus a fresh classifier head.
NetworkWeights init_classifier(std::span<const LayerSpec> arch, std::size_t num_classes,
                               std::uint64_t seed);

struct ClassifierPass {
  ForwardTrace trace;
  std::vector<double> pooled;      // time average of the final map
  std::vector<double> hidden_pre;  // before relu
  std::vector<double> hidden;
  std::vector<double> logits_main;
  std::vector<double> logits_aux;
};

ClassifierPass classifier_forward(const NetworkWeights& w, const LogMagSpectrogram& spec);

struct CrossEntropy {
  double loss = 0.0;
  std::vector<double> grad;  // softmax - onehot
};

std::vector<double> softmax(std::span<const double> logits);
CrossEntropy cross_entropy(std::span<const double> logits, std::size_t label);

struct ClassifierGradients {
  double main_loss = 0.0;
  double aux_loss = 0.0;
  /// Argmax of the main logits at the evaluated weights.
  std::size_t predicted_main = 0;
  /// Indexed like NetworkWeights::layers.
  std::vector<std::vector<double>> layer_weights;
  std::vector<std::vector<double>> layer_bias;
  Layer hidden;  // gradients in the tensors, spec copied
  Layer main;
  Layer aux;

  double total(double aux_weight) const { return main_loss + aux_weight * aux_loss; }
};

/// Loss main + aux_weight * aux and its gradient for every parameter.
ClassifierGradients classifier_gradients(const NetworkWeights& w, const LogMagSpectrogram& spec,
                                         std::size_t label, std::size_t centroid_label,
                                         double aux_weight);

struct EpochLog {
  std::size_t epoch = 0;
  double main_loss = 0.0;
  double aux_loss = 0.0;
  double main_accuracy = 0.0;
};

struct TrainResult {
  NetworkWeights weights;
  std::vector<EpochLog> log;
};

/// Minibatch Adam on the multi-task loss. Deterministic for a given seed.
TrainResult train(std::span<const LabeledClip> clips, const TrainConfig& cfg);
/// Continues from existing weights (head required).
TrainResult train(std::span<const LabeledClip> clips, const TrainConfig& cfg,
                  NetworkWeights initial);

struct Accuracy {
  double main = 0.0;
  double centroid = 0.0;
};

/// Argmax accuracy per head, ties to the lower index. Clips without a centroid
/// class are left out of the centroid figure.
Accuracy evaluate(const NetworkWeights& w, std::span<const LabeledClip> clips,
                  const FftConfig& fft = {});

std::size_t argmax(std::span<const double> values);

/// Manifest lines are "filename,class_id"; a non-numeric first line is a header.
std::vector<LabeledClip> load_dataset(const std::filesystem::path& dir,
                                      const std::filesystem::path& manifest);

void write_training_log(const std::filesystem::path& path, std::span<const EpochLog> log);

}  // namespace audiostyle
