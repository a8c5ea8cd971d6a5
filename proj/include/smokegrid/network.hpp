// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared sparse-convolution backbone feeding three single-channel heads
// (FireWork reconstruction, BlueSky reconstruction, PM2.5). Every layer is
// conv2d_sparse -> avgpool_mask -> activation, threading (features, mask).

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "smokegrid/field.hpp"
#include "smokegrid/ingest.hpp"
#include "smokegrid/tensor.hpp"
#include "smokegrid/wft.hpp"

namespace smokegrid {

enum class Activation { relu, none };

struct LayerSpec {
  std::size_t kernel = 3;
  std::size_t filters = 16;
  Activation activation = Activation::relu;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

enum class HeadId : std::size_t { fw = 0, bscan = 1, pm25 = 2 };
constexpr std::array<const char*, 3> kHeadNames{"fw", "bscan", "pm25"};

struct NetworkSpec {
  std::size_t in_channels = 9;
  std::vector<LayerSpec> backbone;
  std::array<std::vector<LayerSpec>, 3> heads;

  /// Backbone kernels 11, 7, 5, 3, 3 with 16 filters; heads 3x16 relu then 3x1 linear.
  static NetworkSpec defaults(std::size_t in_channels = 9);

  void validate() const;
  std::size_t layer_count() const;
  /// Layers are numbered backbone first, then fw, bscan and pm25 head layers.
  std::string layer_name(std::size_t layer) const;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// `11x16:relu,7x16:relu` style layer lists; the activation defaults to relu.
std::vector<LayerSpec> parse_layers(const std::string& text);
std::string format_layers(const std::vector<LayerSpec>& layers);

/// Learnable tensors (kernel, bias per layer, in layer order) and their
/// adaptive-moment state.
template <typename T>
struct ParamStore {
  using value_type = T;

  std::vector<Tensor<T>> tensors;
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;
  std::uint64_t step = 0;

  Tensor<T>& kernel(std::size_t layer) { return tensors[2 * layer]; }
  Tensor<T>& bias(std::size_t layer) { return tensors[2 * layer + 1]; }
  const Tensor<T>& kernel(std::size_t layer) const { return tensors[2 * layer]; }
  const Tensor<T>& bias(std::size_t layer) const { return tensors[2 * layer + 1]; }

  void zero_grad();
  ParamStore clone() const;
};

template <typename T>
ParamStore<T> init_network(const NetworkSpec& spec, std::uint64_t seed);

template <typename T>
struct ForwardResult {
  std::array<Tensor<T>, 3> heads;  // each H x W x 1
  MaskGrid final_mask;
};

template <typename T>
ForwardResult<T> forward(Tape<T>& tape, const ParamStore<T>& params, const NetworkSpec& spec, const Tensor<T>& input,
                         const MaskGrid& input_mask, T eps = T(1e-8));

struct Gammas {
  double fw = 0.25;
  double bscan = 0.25;
  double pm25 = 1.0;
};

template <typename T>
struct Targets {
  Tensor<T> fw;
  Tensor<T> bscan;
  Tensor<T> pm25;
};

/// gamma_fw * |fw| + gamma_bscan * |bscan| + gamma_pm25 * masked |pm25|.
/// Terms with a zero weight are not evaluated at all.
template <typename T>
Tensor<T> total_loss(Tape<T>& tape, const std::array<Tensor<T>, 3>& outputs, const Targets<T>& targets,
                     const MaskGrid& label_mask, const Gammas& gammas, Reduction reduction = Reduction::sum);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected adaptive-moment update. Tensors the last backward did not
/// reach are treated as having a zero gradient.
template <typename T>
void adam_step(ParamStore<T>& params, const AdamConfig& config);

enum class InputMaskPolicy { observed, stations };

/// `observed`: cells where at least one input channel is not the sentinel.
/// `stations`: the frame's PM2.5 label mask.
MaskGrid input_mask_for(const SampleFrame& frame, InputMaskPolicy policy);

/// A frame converted to network tensors.
template <typename T>
struct Example {
  Timestamp time = 0;
  Tensor<T> input;
  MaskGrid input_mask;
  Targets<T> targets;
  MaskGrid label_mask;
};

/// The FireWork and BlueSky targets are the frame's own baseline channels.
template <typename T>
Example<T> make_example(const SampleFrame& frame, const ChannelRegistry& registry, InputMaskPolicy policy);

struct TrainConfig {
  Gammas gammas;
  AdamConfig adam;
  std::size_t epochs = 12;
  std::uint64_t seed = 7;
  Reduction reduction = Reduction::sum;
  double conv_eps = 1e-8;
  std::filesystem::path checkpoint;  // empty: no checkpoint file
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  std::uint64_t step = 0;  // optimizer steps taken so far
};

template <typename T>
struct TrainResult {
  ParamStore<T> params;
  ParamStore<T> best;
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Per-sample updates over a seeded shuffle each epoch. The best-validation
/// parameters (training loss when there is no validation set) are kept and
/// checkpointed.
template <typename T>
TrainResult<T> train(const std::vector<Example<T>>& train_set, const std::vector<Example<T>>& val_set,
                     const NetworkSpec& spec, const TrainConfig& config, std::optional<ParamStore<T>> initial = {},
                     const EpochCallback& on_epoch = {});

template <typename T>
double evaluate_loss(const ParamStore<T>& params, const NetworkSpec& spec, const Example<T>& example,
                     const TrainConfig& config);

/// PM2.5 head mapped back to ug/m3 with expm1 and clamped at zero.
template <typename T>
Plane predict(const ParamStore<T>& params, const NetworkSpec& spec, const Example<T>& example, T eps = T(1e-8));

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const NetworkSpec& spec, const ParamStore<T>& params);

struct CheckpointInfo {
  NetworkSpec spec;
  DType dtype = DType::float32;
};

CheckpointInfo read_checkpoint_info(const std::filesystem::path& path);

/// Loads parameters (and optimizer state when present) converting to T.
template <typename T>
ParamStore<T> load_checkpoint(const std::filesystem::path& path, NetworkSpec& spec);

}  // namespace smokegrid
