// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense tensors and a small reverse-mode tape covering exactly the operations
// the forecasting network needs. Spatial tensors are row-major H x W x C with
// the channel axis fastest; convolution kernels are k x k x Cin x Cout.

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smokegrid/error.hpp"

namespace smokegrid {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

template <typename T>
class Tape;

template <typename T>
class Tensor {
 public:
  Tensor();
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> values);

  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t extent(std::size_t axis) const { return impl_->shape.at(axis); }
  std::size_t size() const { return impl_->data.size(); }

  std::span<const T> data() const { return impl_->data; }
  /// Writable view for leaves (parameters, finite-difference probes).
  std::span<T> mutable_data() { return impl_->data; }
  T item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor& set_requires_grad(bool on);

  bool has_grad() const { return impl_->grad_written; }
  std::span<const T> grad() const { return impl_->grad; }
  std::span<T> mutable_grad() { return impl_->grad; }
  void zero_grad();

  bool is(const Tensor& other) const { return impl_ == other.impl_; }
  bool all_finite() const;

 private:
  struct Impl {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;
    bool requires_grad = false;
    bool grad_written = false;
  };
  std::shared_ptr<Impl> impl_;

  void ensure_grad();

  friend class Tape<T>;
};

/// Supervision-density grid in [0, 1]; binary at the input, fractional after
/// average pooling.
struct MaskGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  static MaskGrid filled(std::size_t rows, std::size_t cols, double v);
  static MaskGrid ones(std::size_t rows, std::size_t cols) { return filled(rows, cols, 1.0); }
  static MaskGrid zeros(std::size_t rows, std::size_t cols) { return filled(rows, cols, 0.0); }

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  bool is_binary() const;
  bool in_unit_range() const;
  double sum() const;
};

enum class OpKind { conv2d_sparse, relu, l1_loss, masked_l1_loss, scale, add };

std::string_view op_name(OpKind kind);

enum class Reduction { sum, mean };

/// Records op nodes in creation order; backward() walks them in reverse.
template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tensor<T>& out, std::vector<Tensor<T>>& inputs)>;

  struct Node {
    OpKind kind;
    std::vector<Tensor<T>> inputs;
    Tensor<T> output;
    BackwardFn backward;
  };

  Tensor<T> record(OpKind kind, std::vector<Tensor<T>> inputs, Tensor<T> output, BackwardFn fn);

  /// Seeds d(loss)/d(loss) = 1 and propagates. Leaf gradients are reset first
  /// unless `accumulate` is set; intermediate gradients are always fresh.
  void backward(const Tensor<T>& loss, bool accumulate = false);

  const std::vector<Node>& nodes() const { return nodes_; }
  void clear() { nodes_.clear(); }

  /// With recording off, ops still compute but outputs never require grad and
  /// no nodes are kept (inference).
  void set_recording(bool on) { recording_ = on; }
  bool recording() const { return recording_; }

 private:
  std::vector<Node> nodes_;
  bool recording_ = true;
};

// Differentiable operations. All validate shapes before touching data.

template <typename T>
Tensor<T> conv2d_sparse(Tape<T>& tape, const Tensor<T>& x, const MaskGrid& mask, const Tensor<T>& weight,
                        const Tensor<T>& bias, T eps);

template <typename T>
Tensor<T> relu(Tape<T>& tape, const Tensor<T>& x);

template <typename T>
Tensor<T> l1_loss(Tape<T>& tape, const Tensor<T>& pred, const Tensor<T>& target,
                  Reduction reduction = Reduction::sum);

/// Sum over cells of mask * |pred - target|. `pred` and `target` must hold
/// mask.rows * mask.cols values with matching leading dims; the mask must be
/// binary.
template <typename T>
Tensor<T> masked_l1_loss(Tape<T>& tape, const Tensor<T>& pred, const Tensor<T>& target, const MaskGrid& mask,
                         Reduction reduction = Reduction::sum);

template <typename T>
Tensor<T> scale(Tape<T>& tape, const Tensor<T>& x, T factor);

template <typename T>
Tensor<T> add(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);

/// Average of the centered k x k window with out-of-bounds cells counted as 0
/// and a fixed k*k divisor.
MaskGrid avgpool_mask(const MaskGrid& mask, std::size_t k);

/// Test hook: flips the sign of the relu backward rule so the gradient checker
/// can demonstrate it catches a wrong gradient.
void set_gradient_fault_injection(bool on);
bool gradient_fault_injection();

}  // namespace smokegrid
