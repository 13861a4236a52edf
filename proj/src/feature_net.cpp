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

#include "audiostyle/feature_net.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "audiostyle/error.hpp"

namespace audiostyle {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMatrix>;
using ConstRowMap = Eigen::Map<const RowMatrix>;

std::string shape(std::size_t a, std::size_t b) {
  return std::to_string(a) + "x" + std::to_string(b);
}

/// Row (c * width + k) holds input channel c shifted by k - (width - 1) / 2,
/// zero outside [0, time).
RowMatrix im2col(const FeatureMap& in, std::size_t width) {
  const auto pad = static_cast<std::ptrdiff_t>((width - 1) / 2);
  const auto time = static_cast<std::ptrdiff_t>(in.time);
  RowMatrix cols = RowMatrix::Zero(static_cast<Eigen::Index>(in.channels * width),
                                   static_cast<Eigen::Index>(in.time));
  for (std::size_t c = 0; c < in.channels; ++c) {
    const double* src = in.data.data() + c * in.time;
    for (std::size_t k = 0; k < width; ++k) {
      const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(k) - pad;
      const std::ptrdiff_t t0 = std::max<std::ptrdiff_t>(0, -shift);
      const std::ptrdiff_t t1 = std::min(time, time - shift);
      double* dst = cols.data() + (c * width + k) * in.time;
      for (std::ptrdiff_t t = t0; t < t1; ++t) dst[t] = src[t + shift];
    }
  }
  return cols;
}

/// Adjoint of im2col.
FeatureMap col2im(const RowMatrix& cols, std::size_t channels, std::size_t width,
                  std::size_t time) {
  const auto pad = static_cast<std::ptrdiff_t>((width - 1) / 2);
  const auto t_len = static_cast<std::ptrdiff_t>(time);
  FeatureMap out = FeatureMap::zeros(channels, time);
  for (std::size_t c = 0; c < channels; ++c) {
    double* dst = out.data.data() + c * time;
    for (std::size_t k = 0; k < width; ++k) {
      const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(k) - pad;
      const std::ptrdiff_t t0 = std::max<std::ptrdiff_t>(0, -shift);
      const std::ptrdiff_t t1 = std::min(t_len, t_len - shift);
      const double* src = cols.data() + (c * width + k) * time;
      for (std::ptrdiff_t t = t0; t < t1; ++t) dst[t + shift] += src[t];
    }
  }
  return out;
}

void add_into(FeatureMap& acc, const FeatureMap& g) {
  if (g.empty()) return;
  if (!acc.same_shape(g))
    throw Error(Errc::dimension_mismatch,
                "gradient " + shape(g.channels, g.time) + " does not match activation " +
                    shape(acc.channels, acc.time));
  for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += g.data[i];
}

}  // namespace

FeatureMap as_feature_map(const LogMagSpectrogram& spec) {
  return {spec.bins, spec.frames, spec.data};
}

std::vector<LayerSpec> NetworkWeights::architecture() const {
  std::vector<LayerSpec> arch;
  arch.reserve(layers.size());
  for (const auto& l : layers) arch.push_back(l.spec);
  return arch;
}

std::size_t NetworkWeights::input_channels() const {
  return layers.empty() ? 0 : layers.front().spec.in_channels;
}

std::size_t NetworkWeights::output_channels() const {
  std::size_t channels = 0;
  for (const auto& l : layers)
    if (l.spec.kind == LayerKind::conv1d) channels = l.spec.out_channels;
  return channels;
}

std::size_t NetworkWeights::block_count() const {
  return static_cast<std::size_t>(std::count_if(layers.begin(), layers.end(), [](const Layer& l) {
    return l.spec.kind == LayerKind::conv1d;
  }));
}

std::vector<LayerSpec> pooled_architecture(std::size_t bins, std::span<const std::size_t> widths,
                                           std::size_t kernel_width) {
  std::vector<LayerSpec> arch;
  std::size_t channels = bins;
  for (std::size_t width : widths) {
    arch.push_back(LayerSpec::conv1d(channels, width, kernel_width));
    arch.push_back(LayerSpec::relu());
    arch.push_back(LayerSpec::maxpool2());
    channels = width;
  }
  return arch;
}

std::vector<LayerSpec> default_architecture(std::size_t bins, std::size_t kernel_width) {
  const std::size_t widths[] = {2048, 64};
  return pooled_architecture(bins, widths, kernel_width);
}

std::vector<LayerSpec> single_layer_architecture(std::size_t bins, std::size_t channels,
                                                 std::size_t kernel_width) {
  return {LayerSpec::conv1d(bins, channels, kernel_width), LayerSpec::relu()};
}

void validate_architecture(std::span<const LayerSpec> arch) {
  if (arch.empty() || arch.front().kind != LayerKind::conv1d)
    throw Error(Errc::invalid_argument, "architecture must start with a conv1d layer");
  std::size_t channels = arch.front().in_channels;
  for (std::size_t i = 0; i < arch.size(); ++i) {
    const LayerSpec& s = arch[i];
    switch (s.kind) {
      case LayerKind::conv1d:
        if (s.in_channels == 0 || s.out_channels == 0)
          throw Error(Errc::invalid_argument, "layer " + std::to_string(i) + " has zero channels");
        if (s.kernel_width % 2 == 0)
          throw Error(Errc::invalid_argument,
                      "layer " + std::to_string(i) + " kernel width " +
                          std::to_string(s.kernel_width) + " is not odd");
        if (s.in_channels != channels)
          throw Error(Errc::dimension_mismatch,
                      "layer " + std::to_string(i) + " expects " + std::to_string(s.in_channels) +
                          " channels but receives " + std::to_string(channels));
        channels = s.out_channels;
        break;
      case LayerKind::relu:
      case LayerKind::maxpool2:
        break;
      case LayerKind::dense:
        throw Error(Errc::invalid_argument, "dense layers belong to the classifier head");
    }
  }
}

void validate_weights(const NetworkWeights& w) {
  const auto arch = w.architecture();
  validate_architecture(arch);
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    const Layer& l = w.layers[i];
    const std::size_t want_w = l.spec.has_params() ? l.spec.weight_count() : 0;
    const std::size_t want_b = l.spec.has_params() ? l.spec.out_channels : 0;
    if (l.weights.size() != want_w || l.bias.size() != want_b)
      throw Error(Errc::dimension_mismatch,
                  "layer " + std::to_string(i) + " tensors do not match its spec");
  }
}

Layer init_layer(const LayerSpec& spec, std::uint64_t seed, std::uint64_t stream) {
  Layer layer{spec, {}, {}};
  if (!spec.has_params()) return layer;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::mt19937_64 rng(seq);
  const double fan_in = static_cast<double>(spec.in_channels * spec.kernel_width);
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
  layer.weights.resize(spec.weight_count());
  for (double& v : layer.weights) v = normal(rng);
  layer.bias.assign(spec.out_channels, 0.0);
  return layer;
}

NetworkWeights init_random(std::span<const LayerSpec> arch, std::uint64_t seed) {
  validate_architecture(arch);
  NetworkWeights w;
  for (std::size_t i = 0; i < arch.size(); ++i) w.layers.push_back(init_layer(arch[i], seed, i));
  return w;
}

FeatureMap conv1d_forward(const FeatureMap& input, std::span<const double> kernel,
                          std::span<const double> bias, std::size_t width) {
  const std::size_t out_ch = bias.size();
  if (width % 2 == 0)
    throw Error(Errc::invalid_argument, "kernel width " + std::to_string(width) + " is not odd");
  if (kernel.size() != out_ch * input.channels * width)
    throw Error(Errc::dimension_mismatch,
                "kernel of " + std::to_string(kernel.size()) + " values does not fit " +
                    std::to_string(out_ch) + " outputs x " + std::to_string(input.channels) +
                    " inputs x width " + std::to_string(width));
  FeatureMap out = FeatureMap::zeros(out_ch, input.time);
  if (input.time == 0 || out_ch == 0) return out;

  const RowMatrix cols = im2col(input, width);
  const ConstRowMap k(kernel.data(), static_cast<Eigen::Index>(out_ch),
                      static_cast<Eigen::Index>(input.channels * width));
  RowMap o(out.data.data(), static_cast<Eigen::Index>(out_ch),
           static_cast<Eigen::Index>(input.time));
  o.noalias() = k * cols;
  for (std::size_t c = 0; c < out_ch; ++c) o.row(static_cast<Eigen::Index>(c)).array() += bias[c];
  return out;
}

FeatureMap conv1d_forward(const FeatureMap& input, const Layer& conv) {
  if (conv.spec.kind != LayerKind::conv1d)
    throw Error(Errc::invalid_argument, "layer is not a conv1d");
  if (input.channels != conv.spec.in_channels)
    throw Error(Errc::dimension_mismatch,
                "conv expects " + std::to_string(conv.spec.in_channels) + " channels, input has " +
                    std::to_string(input.channels));
  return conv1d_forward(input, conv.weights, conv.bias, conv.spec.kernel_width);
}

FeatureMap relu(const FeatureMap& x) {
  FeatureMap out = x;
  for (double& v : out.data) v = std::max(v, 0.0);
  return out;
}

FeatureMap maxpool2(const FeatureMap& x) {
  if (x.time < 2)
    throw Error(Errc::invalid_argument,
                "max pooling needs at least 2 time steps, got " + std::to_string(x.time));
  FeatureMap out = FeatureMap::zeros(x.channels, x.time / 2);
  for (std::size_t c = 0; c < x.channels; ++c)
    for (std::size_t t = 0; t < out.time; ++t)
      out.at(c, t) = std::max(x.at(c, 2 * t), x.at(c, 2 * t + 1));
  return out;
}

ForwardTrace forward(const NetworkWeights& w, const FeatureMap& input) {
  if (w.layers.empty()) throw Error(Errc::invalid_argument, "network has no layers");
  if (input.channels != w.input_channels())
    throw Error(Errc::dimension_mismatch,
                "input has " + std::to_string(input.channels) + " bins, network expects " +
                    std::to_string(w.input_channels()));

  ForwardTrace trace;
  trace.input = input;
  trace.layer_outputs.reserve(w.layers.size());
  const FeatureMap* current = &trace.input;
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    const Layer& layer = w.layers[i];
    switch (layer.spec.kind) {
      case LayerKind::conv1d:
        trace.layer_outputs.push_back(conv1d_forward(*current, layer));
        trace.block_activation_layer.push_back(i);
        trace.block_output_layer.push_back(i);
        break;
      case LayerKind::relu:
        trace.layer_outputs.push_back(relu(*current));
        trace.block_activation_layer.back() = i;
        trace.block_output_layer.back() = i;
        break;
      case LayerKind::maxpool2:
        trace.layer_outputs.push_back(maxpool2(*current));
        trace.block_output_layer.back() = i;
        break;
      case LayerKind::dense:
        throw Error(Errc::invalid_argument, "dense layer inside the feature extractor");
    }
    current = &trace.layer_outputs.back();
  }
  return trace;
}

ForwardTrace forward(const NetworkWeights& w, const LogMagSpectrogram& spec) {
  return forward(w, as_feature_map(spec));
}

Eigen::MatrixXd gram(const FeatureMap& f) {
  if (f.time == 0) throw Error(Errc::invalid_argument, "gram of an empty map");
  const auto c = static_cast<Eigen::Index>(f.channels);
  const ConstRowMap m(f.data.data(), c, static_cast<Eigen::Index>(f.time));
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(c, c);
  g.selfadjointView<Eigen::Lower>().rankUpdate(m, 1.0 / static_cast<double>(f.time));
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g;
}

NetworkGradients backward(const NetworkWeights& w, const ForwardTrace& trace,
                          std::span<const FeatureMap> block_grads, bool param_grads) {
  if (trace.layer_outputs.size() != w.layers.size() || block_grads.size() > trace.size())
    throw Error(Errc::dimension_mismatch, "trace does not belong to these weights");

  NetworkGradients grads;
  grads.weights.resize(w.layers.size());
  grads.bias.resize(w.layers.size());

  // Start at the deepest block that receives a gradient.
  std::ptrdiff_t deepest = -1;
  for (std::size_t b = 0; b < block_grads.size(); ++b)
    if (!block_grads[b].empty()) deepest = static_cast<std::ptrdiff_t>(b);
  if (deepest < 0) {
    grads.input = FeatureMap::zeros(trace.input.channels, trace.input.time);
    return grads;
  }

  const std::size_t top = trace.block_output_layer[static_cast<std::size_t>(deepest)];
  FeatureMap g = FeatureMap::zeros(trace.layer_outputs[top].channels,
                                   trace.layer_outputs[top].time);
  std::vector<const FeatureMap*> injected(w.layers.size(), nullptr);
  for (std::size_t b = 0; b < block_grads.size(); ++b)
    injected[trace.block_output_layer[b]] = &block_grads[b];

  for (std::size_t i = top + 1; i-- > 0;) {
    if (injected[i]) add_into(g, *injected[i]);

    const Layer& layer = w.layers[i];
    const FeatureMap& in = i == 0 ? trace.input : trace.layer_outputs[i - 1];
    const FeatureMap& out = trace.layer_outputs[i];
    switch (layer.spec.kind) {
      case LayerKind::relu:
        for (std::size_t j = 0; j < g.data.size(); ++j)
          if (!(out.data[j] > 0.0)) g.data[j] = 0.0;
        break;
      case LayerKind::maxpool2: {
        FeatureMap gin = FeatureMap::zeros(in.channels, in.time);
        for (std::size_t c = 0; c < in.channels; ++c) {
          for (std::size_t t = 0; t < out.time; ++t) {
            const std::size_t src = in.at(c, 2 * t) >= in.at(c, 2 * t + 1) ? 2 * t : 2 * t + 1;
            gin.at(c, src) += g.at(c, t);
          }
        }
        g = std::move(gin);
        break;
      }
      case LayerKind::conv1d: {
        const std::size_t width = layer.spec.kernel_width;
        const auto oc = static_cast<Eigen::Index>(layer.spec.out_channels);
        const auto ck = static_cast<Eigen::Index>(in.channels * width);
        const auto t = static_cast<Eigen::Index>(in.time);
        const ConstRowMap gout(g.data.data(), oc, t);
        const ConstRowMap kernel(layer.weights.data(), oc, ck);
        if (param_grads) {
          const RowMatrix cols = im2col(in, width);
          grads.weights[i].assign(layer.weights.size(), 0.0);
          RowMap gw(grads.weights[i].data(), oc, ck);
          gw.noalias() = gout * cols.transpose();
          grads.bias[i].resize(layer.bias.size());
          for (Eigen::Index o = 0; o < oc; ++o) grads.bias[i][static_cast<std::size_t>(o)] = gout.row(o).sum();
        }
        RowMatrix gcols(ck, t);
        gcols.noalias() = kernel.transpose() * gout;
        g = col2im(gcols, in.channels, width, in.time);
        break;
      }
      case LayerKind::dense:
        throw Error(Errc::invalid_argument, "dense layer inside the feature extractor");
    }
  }
  grads.input = std::move(g);
  return grads;
}

}  // namespace audiostyle
