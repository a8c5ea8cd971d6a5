// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "smokegrid/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <Eigen/Core>

#include "smokegrid/parallel.hpp"

namespace smokegrid {

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

namespace {

std::atomic<bool> g_fault{false};

void check_rank(const Shape& shape) {
  require(shape.size() <= 4, ErrorCode::shape_mismatch, "tensor rank above 4: " + shape_string(shape));
}

template <typename T>
T sign_of(T v) {
  return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0));
}

}  // namespace

void set_gradient_fault_injection(bool on) { g_fault.store(on); }
bool gradient_fault_injection() { return g_fault.load(); }

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::conv2d_sparse: return "conv2d_sparse";
    case OpKind::relu: return "relu";
    case OpKind::l1_loss: return "l1_loss";
    case OpKind::masked_l1_loss: return "masked_l1_loss";
    case OpKind::scale: return "scale";
    case OpKind::add: return "add";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Tensor

template <typename T>
Tensor<T>::Tensor() : impl_(std::make_shared<Impl>()) {
  impl_->shape = {0};
}

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : impl_(std::make_shared<Impl>()) {
  check_rank(shape);
  impl_->data.assign(shape_numel(shape), fill);
  impl_->shape = std::move(shape);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values) : impl_(std::make_shared<Impl>()) {
  check_rank(shape);
  require(shape_numel(shape) == values.size(), ErrorCode::shape_mismatch,
          "data length " + std::to_string(values.size()) + " does not match shape " + shape_string(shape));
  impl_->shape = std::move(shape);
  impl_->data = std::move(values);
}

template <typename T>
T Tensor<T>::item() const {
  require(size() == 1, ErrorCode::shape_mismatch, "item() on tensor of shape " + shape_string(shape()));
  return impl_->data[0];
}

template <typename T>
Tensor<T>& Tensor<T>::set_requires_grad(bool on) {
  impl_->requires_grad = on;
  if (!on) {
    impl_->grad.clear();
    impl_->grad_written = false;
  }
  return *this;
}

template <typename T>
void Tensor<T>::zero_grad() {
  if (impl_->grad_written) std::fill(impl_->grad.begin(), impl_->grad.end(), T(0));
}

template <typename T>
void Tensor<T>::ensure_grad() {
  if (impl_->grad.size() != impl_->data.size()) impl_->grad.assign(impl_->data.size(), T(0));
  impl_->grad_written = true;
}

template <typename T>
bool Tensor<T>::all_finite() const {
  return std::all_of(impl_->data.begin(), impl_->data.end(), [](T v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------
// MaskGrid

MaskGrid MaskGrid::filled(std::size_t rows, std::size_t cols, double v) {
  MaskGrid m;
  m.rows = rows;
  m.cols = cols;
  m.values.assign(rows * cols, v);
  return m;
}

bool MaskGrid::is_binary() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0 || v == 1.0; });
}

bool MaskGrid::in_unit_range() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

double MaskGrid::sum() const { return std::accumulate(values.begin(), values.end(), 0.0); }

MaskGrid avgpool_mask(const MaskGrid& mask, std::size_t k) {
  require(k % 2 == 1, ErrorCode::invalid_argument, "avgpool_mask window must be odd, got " + std::to_string(k));
  require(mask.values.size() == mask.rows * mask.cols, ErrorCode::shape_mismatch, "mask storage does not match its extents");
  const auto r = static_cast<std::ptrdiff_t>(k / 2);
  const auto rows = static_cast<std::ptrdiff_t>(mask.rows);
  const auto cols = static_cast<std::ptrdiff_t>(mask.cols);
  const double divisor = static_cast<double>(k * k);
  MaskGrid out = MaskGrid::zeros(mask.rows, mask.cols);
  for (std::ptrdiff_t u = 0; u < rows; ++u) {
    for (std::ptrdiff_t v = 0; v < cols; ++v) {
      double s = 0.0;
      for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(0, u - r); i <= std::min(rows - 1, u + r); ++i)
        for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, v - r); j <= std::min(cols - 1, v + r); ++j)
          s += mask.values[static_cast<std::size_t>(i * cols + j)];
      out.values[static_cast<std::size_t>(u * cols + v)] = std::min(1.0, s / divisor);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tape

template <typename T>
Tensor<T> Tape<T>::record(OpKind kind, std::vector<Tensor<T>> inputs, Tensor<T> output, BackwardFn fn) {
  const bool needs = recording_ && std::any_of(inputs.begin(), inputs.end(),
                                               [](const Tensor<T>& t) { return t.requires_grad(); });
  output.impl_->requires_grad = needs;
  require(output.all_finite(), ErrorCode::numerical, std::string("non-finite output from ") + std::string(op_name(kind)));
  if (needs) nodes_.push_back(Node{kind, std::move(inputs), output, std::move(fn)});
  return output;
}

template <typename T>
void Tape<T>::backward(const Tensor<T>& loss, bool accumulate) {
  require(loss.size() == 1, ErrorCode::shape_mismatch,
          "backward() needs a scalar root, got shape " + shape_string(loss.shape()));
  if (!loss.requires_grad()) return;

  std::unordered_set<const void*> produced;
  for (const Node& n : nodes_) produced.insert(n.output.impl_.get());

  for (Node& n : nodes_) {
    n.output.ensure_grad();
    std::fill(n.output.impl_->grad.begin(), n.output.impl_->grad.end(), T(0));
    for (Tensor<T>& in : n.inputs) {
      if (!in.requires_grad()) continue;
      const bool leaf = !produced.contains(in.impl_.get());
      const bool fresh = in.impl_->grad.size() != in.size();
      in.ensure_grad();
      if (!leaf || !accumulate || fresh) std::fill(in.impl_->grad.begin(), in.impl_->grad.end(), T(0));
    }
  }

  Tensor<T> root = loss;
  root.ensure_grad();
  root.impl_->grad[0] += T(1);

  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->backward) it->backward(it->output, it->inputs);
  }
}

// ---------------------------------------------------------------------------
// Ops

namespace {

// Pixels per GEMM block. Fixed, so the summation order never depends on the
// thread count.
constexpr std::size_t kPixelBlock = 256;

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ConvGeometry {
  std::size_t H, W, Cin, Cout, k;
  std::ptrdiff_t r;
  std::size_t patch() const { return k * k * Cin; }
  std::size_t blocks() const { return (H * W + kPixelBlock - 1) / kPixelBlock; }
};

// Rows [p0, p1) of the patch matrix: one row per output pixel, k*k*Cin
// columns in kernel layout order. Out-of-bounds taps are zero.
template <typename T>
void im2col(const ConvGeometry& g, const std::vector<T>& xm, std::size_t p0, std::size_t p1, RowMatrix<T>& col) {
  col.setZero(static_cast<Eigen::Index>(p1 - p0), static_cast<Eigen::Index>(g.patch()));
  const auto Hs = static_cast<std::ptrdiff_t>(g.H), Ws = static_cast<std::ptrdiff_t>(g.W);
  const auto ks = static_cast<std::ptrdiff_t>(g.k);
  for (std::size_t p = p0; p < p1; ++p) {
    const auto u = static_cast<std::ptrdiff_t>(p / g.W), v = static_cast<std::ptrdiff_t>(p % g.W);
    T* row = col.data() + (p - p0) * g.patch();
    for (std::ptrdiff_t i = 0; i < ks; ++i) {
      const std::ptrdiff_t su = u + i - g.r;
      if (su < 0 || su >= Hs) continue;
      for (std::ptrdiff_t j = 0; j < ks; ++j) {
        const std::ptrdiff_t sv = v + j - g.r;
        if (sv < 0 || sv >= Ws) continue;
        const T* src = &xm[static_cast<std::size_t>(su * Ws + sv) * g.Cin];
        std::copy(src, src + g.Cin, row + static_cast<std::size_t>(i * ks + j) * g.Cin);
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> conv2d_sparse(Tape<T>& tape, const Tensor<T>& x, const MaskGrid& mask, const Tensor<T>& weight,
                        const Tensor<T>& bias, T eps) {
  require(x.rank() == 3, ErrorCode::shape_mismatch, "conv2d_sparse input must be HxWxC, got " + shape_string(x.shape()));
  require(weight.rank() == 4, ErrorCode::shape_mismatch,
          "conv2d_sparse kernel must be k x k x Cin x Cout, got " + shape_string(weight.shape()));
  const std::size_t H = x.extent(0), W = x.extent(1), Cin = x.extent(2);
  const std::size_t k = weight.extent(0), Cout = weight.extent(3);
  require(weight.extent(1) == k, ErrorCode::shape_mismatch, "conv2d_sparse kernel must be square");
  require(k % 2 == 1, ErrorCode::invalid_argument, "conv2d_sparse kernel size must be odd, got " + std::to_string(k));
  require(weight.extent(2) == Cin, ErrorCode::shape_mismatch,
          "kernel input channels " + std::to_string(weight.extent(2)) + " != input channels " + std::to_string(Cin));
  require(bias.size() == Cout, ErrorCode::shape_mismatch, "bias length must equal output channels");
  require(mask.rows == H && mask.cols == W && mask.values.size() == H * W, ErrorCode::shape_mismatch,
          "mask extents do not match input spatial extents");
  require(eps >= T(0), ErrorCode::invalid_argument, "conv2d_sparse eps must be non-negative");

  const ConvGeometry geo{H, W, Cin, Cout, k, static_cast<std::ptrdiff_t>(k / 2)};
  const auto r = geo.r;
  const auto Hs = static_cast<std::ptrdiff_t>(H), Ws = static_cast<std::ptrdiff_t>(W);

  // Masked input; exact zeros wherever the mask is zero.
  std::vector<T> xm(H * W * Cin);
  std::vector<T> mT(H * W);
  {
    auto xd = x.data();
    for (std::size_t p = 0; p < H * W; ++p) {
      const double m = mask.values[p];
      mT[p] = static_cast<T>(m);
      for (std::size_t c = 0; c < Cin; ++c) xm[p * Cin + c] = m == 0.0 ? T(0) : static_cast<T>(m) * xd[p * Cin + c];
    }
  }

  std::vector<T> inv_den(H * W);
  for (std::ptrdiff_t u = 0; u < Hs; ++u) {
    for (std::ptrdiff_t v = 0; v < Ws; ++v) {
      double s = 0.0;
      for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(0, u - r); i <= std::min(Hs - 1, u + r); ++i)
        for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, v - r); j <= std::min(Ws - 1, v + r); ++j)
          s += mask.values[static_cast<std::size_t>(i * Ws + j)];
      const double den = s + static_cast<double>(eps);
      require(den > 0.0, ErrorCode::numerical, "conv2d_sparse window with zero mask and eps = 0");
      inv_den[static_cast<std::size_t>(u * Ws + v)] = static_cast<T>(1.0 / den);
    }
  }

  using ConstMap = Eigen::Map<const RowMatrix<T>>;
  using Map = Eigen::Map<RowMatrix<T>>;
  const auto K = static_cast<Eigen::Index>(geo.patch()), N = static_cast<Eigen::Index>(Cout);

  std::vector<T> out(H * W * Cout);
  {
    const ConstMap wm(weight.data().data(), K, N);
    auto bd = bias.data();
    parallel_for(0, geo.blocks(), [&](std::size_t b) {
      const std::size_t p0 = b * kPixelBlock, p1 = std::min(H * W, p0 + kPixelBlock);
      RowMatrix<T> col;
      im2col(geo, xm, p0, p1, col);
      Map ym(&out[p0 * Cout], static_cast<Eigen::Index>(p1 - p0), N);
      ym.noalias() = col * wm;
      for (std::size_t p = p0; p < p1; ++p) {
        T* yp = &out[p * Cout];
        const T inv = inv_den[p];
        for (std::size_t o = 0; o < Cout; ++o) yp[o] = yp[o] * inv + bd[o];
      }
    });
  }

  auto backward = [geo, xm = std::move(xm), mT = std::move(mT), inv_den = std::move(inv_den)](
                      Tensor<T>& y, std::vector<Tensor<T>>& in) {
    Tensor<T>& xt = in[0];
    Tensor<T>& wt = in[1];
    Tensor<T>& bt = in[2];
    const std::size_t HW = geo.H * geo.W, Cin = geo.Cin, Cout = geo.Cout, P = geo.patch();
    const auto K = static_cast<Eigen::Index>(P), N = static_cast<Eigen::Index>(Cout);
    auto g = y.grad();

    std::vector<T> dnum(HW * Cout);
    for (std::size_t p = 0; p < HW; ++p)
      for (std::size_t o = 0; o < Cout; ++o) dnum[p * Cout + o] = g[p * Cout + o] * inv_den[p];

    if (bt.requires_grad()) {
      auto gb = bt.mutable_grad();
      std::vector<T> acc(Cout, T(0));
      for (std::size_t p = 0; p < HW; ++p)
        for (std::size_t o = 0; o < Cout; ++o) acc[o] += g[p * Cout + o];
      for (std::size_t o = 0; o < Cout; ++o) gb[o] += acc[o];
    }

    if (wt.requires_grad()) {
      // Per-block partial products, reduced in block order.
      std::vector<RowMatrix<T>> partial(geo.blocks());
      parallel_for(0, geo.blocks(), [&](std::size_t b) {
        const std::size_t p0 = b * kPixelBlock, p1 = std::min(HW, p0 + kPixelBlock);
        RowMatrix<T> col;
        im2col(geo, xm, p0, p1, col);
        const ConstMap dm(&dnum[p0 * Cout], static_cast<Eigen::Index>(p1 - p0), N);
        partial[b].noalias() = col.transpose() * dm;
      });
      auto gw = wt.mutable_grad();
      Map gwm(gw.data(), K, N);
      for (const auto& part : partial) gwm += part;
    }

    if (xt.requires_grad()) {
      const ConstMap wm(wt.data().data(), K, N);
      std::vector<T> dcol(HW * P);
      parallel_for(0, geo.blocks(), [&](std::size_t b) {
        const std::size_t p0 = b * kPixelBlock, p1 = std::min(HW, p0 + kPixelBlock);
        const auto rows = static_cast<Eigen::Index>(p1 - p0);
        const ConstMap dm(&dnum[p0 * Cout], rows, N);
        Map dc(&dcol[p0 * P], rows, K);
        dc.noalias() = dm * wm.transpose();
      });
      auto gx = xt.mutable_grad();
      const auto Hs = static_cast<std::ptrdiff_t>(geo.H), Ws = static_cast<std::ptrdiff_t>(geo.W);
      const auto ks = static_cast<std::ptrdiff_t>(geo.k);
      parallel_for(0, geo.H, [&](std::size_t qu_) {
        const auto qu = static_cast<std::ptrdiff_t>(qu_);
        std::vector<T> acc(Cin);
        for (std::ptrdiff_t qv = 0; qv < Ws; ++qv) {
          const std::size_t q = static_cast<std::size_t>(qu * Ws + qv);
          if (mT[q] == T(0)) continue;
          std::fill(acc.begin(), acc.end(), T(0));
          for (std::ptrdiff_t i = 0; i < ks; ++i) {
            const std::ptrdiff_t u = qu - i + geo.r;
            if (u < 0 || u >= Hs) continue;
            for (std::ptrdiff_t j = 0; j < ks; ++j) {
              const std::ptrdiff_t v = qv - j + geo.r;
              if (v < 0 || v >= Ws) continue;
              const T* src = &dcol[static_cast<std::size_t>(u * Ws + v) * P + static_cast<std::size_t>(i * ks + j) * Cin];
              for (std::size_t c = 0; c < Cin; ++c) acc[c] += src[c];
            }
          }
          for (std::size_t c = 0; c < Cin; ++c) gx[q * Cin + c] += mT[q] * acc[c];
        }
      });
    }
  };

  return tape.record(OpKind::conv2d_sparse, {x, weight, bias}, Tensor<T>({H, W, Cout}, std::move(out)),
                     std::move(backward));
}

template <typename T>
Tensor<T> relu(Tape<T>& tape, const Tensor<T>& x) {
  std::vector<T> out(x.size());
  auto xd = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xd[i] > T(0) ? xd[i] : T(0);
  return tape.record(OpKind::relu, {x}, Tensor<T>(x.shape(), std::move(out)),
                     [](Tensor<T>& y, std::vector<Tensor<T>>& in) {
                       if (!in[0].requires_grad()) return;
                       const T dir = gradient_fault_injection() ? T(-1) : T(1);
                       auto g = y.grad();
                       auto xd = in[0].data();
                       auto gx = in[0].mutable_grad();
                       for (std::size_t i = 0; i < gx.size(); ++i)
                         if (xd[i] > T(0)) gx[i] += dir * g[i];
                     });
}

template <typename T>
Tensor<T> l1_loss(Tape<T>& tape, const Tensor<T>& pred, const Tensor<T>& target, Reduction reduction) {
  require(pred.shape() == target.shape(), ErrorCode::shape_mismatch,
          "l1_loss shapes differ: " + shape_string(pred.shape()) + " vs " + shape_string(target.shape()));
  auto pd = pred.data();
  auto td = target.data();
  T s = T(0);
  for (std::size_t i = 0; i < pd.size(); ++i) s += std::abs(pd[i] - td[i]);
  const T norm = reduction == Reduction::mean && !pd.empty() ? T(1) / static_cast<T>(pd.size()) : T(1);
  return tape.record(OpKind::l1_loss, {pred, target}, Tensor<T>({1}, std::vector<T>{s * norm}),
                     [norm](Tensor<T>& y, std::vector<Tensor<T>>& in) {
                       const T g = y.grad()[0] * norm;
                       auto pd = in[0].data();
                       auto td = in[1].data();
                       if (in[0].requires_grad()) {
                         auto gp = in[0].mutable_grad();
                         for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g * sign_of(pd[i] - td[i]);
                       }
                       if (in[1].requires_grad()) {
                         auto gt = in[1].mutable_grad();
                         for (std::size_t i = 0; i < gt.size(); ++i) gt[i] -= g * sign_of(pd[i] - td[i]);
                       }
                     });
}

template <typename T>
Tensor<T> masked_l1_loss(Tape<T>& tape, const Tensor<T>& pred, const Tensor<T>& target, const MaskGrid& mask,
                         Reduction reduction) {
  require(pred.shape() == target.shape(), ErrorCode::shape_mismatch,
          "masked_l1_loss shapes differ: " + shape_string(pred.shape()) + " vs " + shape_string(target.shape()));
  require(pred.rank() >= 2 && pred.extent(0) == mask.rows && pred.extent(1) == mask.cols &&
              pred.size() == mask.rows * mask.cols && mask.values.size() == pred.size(),
          ErrorCode::shape_mismatch, "masked_l1_loss mask does not cover the prediction plane");
  require(mask.is_binary(), ErrorCode::invalid_argument, "masked_l1_loss requires a binary mask");
  auto pd = pred.data();
  auto td = target.data();
  T s = T(0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < pd.size(); ++i) {
    if (mask.values[i] == 0.0) continue;
    s += std::abs(pd[i] - td[i]);
    ++count;
  }
  const T norm = reduction == Reduction::mean && count > 0 ? T(1) / static_cast<T>(count) : T(1);
  std::vector<unsigned char> on(pd.size());
  for (std::size_t i = 0; i < on.size(); ++i) on[i] = mask.values[i] != 0.0;
  return tape.record(OpKind::masked_l1_loss, {pred, target}, Tensor<T>({1}, std::vector<T>{s * norm}),
                     [norm, on = std::move(on)](Tensor<T>& y, std::vector<Tensor<T>>& in) {
                       const T g = y.grad()[0] * norm;
                       auto pd = in[0].data();
                       auto td = in[1].data();
                       for (std::size_t which = 0; which < 2; ++which) {
                         if (!in[which].requires_grad()) continue;
                         const T dir = which == 0 ? T(1) : T(-1);
                         auto gv = in[which].mutable_grad();
                         for (std::size_t i = 0; i < gv.size(); ++i)
                           if (on[i]) gv[i] += dir * g * sign_of(pd[i] - td[i]);
                       }
                     });
}

template <typename T>
Tensor<T> scale(Tape<T>& tape, const Tensor<T>& x, T factor) {
  std::vector<T> out(x.data().begin(), x.data().end());
  for (T& v : out) v *= factor;
  return tape.record(OpKind::scale, {x}, Tensor<T>(x.shape(), std::move(out)),
                     [factor](Tensor<T>& y, std::vector<Tensor<T>>& in) {
                       if (!in[0].requires_grad()) return;
                       auto g = y.grad();
                       auto gx = in[0].mutable_grad();
                       for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += factor * g[i];
                     });
}

template <typename T>
Tensor<T> add(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), ErrorCode::shape_mismatch,
          "add shapes differ: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return tape.record(OpKind::add, {a, b}, Tensor<T>(a.shape(), std::move(out)),
                     [](Tensor<T>& y, std::vector<Tensor<T>>& in) {
                       auto g = y.grad();
                       for (Tensor<T>& t : in) {
                         if (!t.requires_grad()) continue;
                         auto gt = t.mutable_grad();
                         for (std::size_t i = 0; i < gt.size(); ++i) gt[i] += g[i];
                       }
                     });
}

#define SMOKEGRID_INSTANTIATE(T)                                                                              \
  template class Tensor<T>;                                                                                   \
  template class Tape<T>;                                                                                     \
  template Tensor<T> conv2d_sparse<T>(Tape<T>&, const Tensor<T>&, const MaskGrid&, const Tensor<T>&,          \
                                      const Tensor<T>&, T);                                                   \
  template Tensor<T> relu<T>(Tape<T>&, const Tensor<T>&);                                                     \
  template Tensor<T> l1_loss<T>(Tape<T>&, const Tensor<T>&, const Tensor<T>&, Reduction);                     \
  template Tensor<T> masked_l1_loss<T>(Tape<T>&, const Tensor<T>&, const Tensor<T>&, const MaskGrid&,         \
                                       Reduction);                                                            \
  template Tensor<T> scale<T>(Tape<T>&, const Tensor<T>&, T);                                                 \
  template Tensor<T> add<T>(Tape<T>&, const Tensor<T>&, const Tensor<T>&);

SMOKEGRID_INSTANTIATE(float)
SMOKEGRID_INSTANTIATE(double)

#undef SMOKEGRID_INSTANTIATE

}  // namespace smokegrid
