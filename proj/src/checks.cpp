// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "smokegrid/checks.hpp"

#include <algorithm>
#include <random>

#include "smokegrid/network.hpp"

namespace smokegrid {

namespace {

using TensorD = Tensor<double>;

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  TensorD uniform(Shape shape, double lo, double hi, bool grad = true) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(shape_numel(shape));
    for (double& x : v) x = d(rng_);
    TensorD t(std::move(shape), std::move(v));
    t.set_requires_grad(grad);
    return t;
  }

  // Values with |x| in [gap, 1].
  TensorD away_from_zero(Shape shape, double gap) {
    std::uniform_real_distribution<double> mag(gap, 1.0);
    std::bernoulli_distribution sign(0.5);
    std::vector<double> v(shape_numel(shape));
    for (double& x : v) x = sign(rng_) ? mag(rng_) : -mag(rng_);
    TensorD t(std::move(shape), std::move(v));
    t.set_requires_grad(true);
    return t;
  }

  // A target at distance [0.5, 1.5] from `y`, on a random side.
  TensorD offset_target(const TensorD& y) {
    std::uniform_real_distribution<double> off(0.5, 1.5);
    std::bernoulli_distribution sign(0.5);
    std::vector<double> v(y.data().begin(), y.data().end());
    for (double& x : v) x += sign(rng_) ? off(rng_) : -off(rng_);
    return TensorD(y.shape(), std::move(v));
  }

  MaskGrid binary_mask(std::size_t rows, std::size_t cols, double p) {
    std::bernoulli_distribution on(p);
    MaskGrid m = MaskGrid::zeros(rows, cols);
    for (double& x : m.values) x = on(rng_) ? 1.0 : 0.0;
    return m;
  }

 private:
  std::mt19937_64 rng_;
};

// Reduces a non-scalar output through an L1 term whose kinks are far away.
TensorD smooth_reduce(Tape<double>& tape, const TensorD& y, const TensorD& target) {
  return l1_loss(tape, y, target);
}

TensorD evaluate(const LossBuilder& f) {
  Tape<double> tape;
  tape.set_recording(false);
  return f(tape);
}

}  // namespace

std::vector<GradCheckRow> gradcheck_suite(std::uint64_t seed, double step, double tolerance) {
  Draw draw(seed);
  std::vector<GradCheckRow> rows;

  for (const bool fractional : {false, true}) {
    TensorD x = draw.uniform({8, 8, 2}, -1.0, 1.0);
    TensorD w = draw.uniform({3, 3, 2, 3}, -0.5, 0.5);
    TensorD b = draw.uniform({3}, -0.2, 0.2);
    MaskGrid m = draw.binary_mask(8, 8, 0.5);
    if (fractional) m = avgpool_mask(m, 3);
    const TensorD y0 = evaluate([&](Tape<double>& t) { return conv2d_sparse(t, x, m, w, b, 1e-8); });
    const TensorD target = draw.offset_target(y0);
    auto f = [=](Tape<double>& t) { return smooth_reduce(t, conv2d_sparse(t, x, m, w, b, 1e-8), target); };
    rows.push_back({fractional ? "conv2d_sparse (fractional mask)" : "conv2d_sparse",
                    finite_diff_check(f, {x, w, b}, step, tolerance)});
  }
  {
    TensorD x = draw.away_from_zero({4, 4, 3}, 1e-2);
    const TensorD y0 = evaluate([&](Tape<double>& t) { return relu(t, x); });
    const TensorD target = draw.offset_target(y0);
    auto f = [=](Tape<double>& t) { return smooth_reduce(t, relu(t, x), target); };
    rows.push_back({"relu", finite_diff_check(f, {x}, step, tolerance)});
  }
  {
    TensorD p = draw.uniform({5, 4}, -1.0, 1.0);
    TensorD q = draw.offset_target(p);
    q.set_requires_grad(true);
    auto f = [=](Tape<double>& t) { return l1_loss(t, p, q); };
    rows.push_back({"l1_loss", finite_diff_check(f, {p, q}, step, tolerance)});
  }
  {
    TensorD p = draw.uniform({6, 6, 1}, -1.0, 1.0);
    TensorD q = draw.offset_target(p);
    q.set_requires_grad(true);
    MaskGrid m = draw.binary_mask(6, 6, 0.4);
    auto f = [=](Tape<double>& t) { return masked_l1_loss(t, p, q, m); };
    rows.push_back({"masked_l1_loss", finite_diff_check(f, {p, q}, step, tolerance)});
  }
  {
    TensorD x = draw.uniform({3, 4}, -1.0, 1.0);
    const TensorD target = draw.offset_target(evaluate([&](Tape<double>& t) { return scale(t, x, 0.7); }));
    auto f = [=](Tape<double>& t) { return smooth_reduce(t, scale(t, x, 0.7), target); };
    rows.push_back({"scale", finite_diff_check(f, {x}, step, tolerance)});
  }
  {
    TensorD a = draw.uniform({3, 4}, -1.0, 1.0);
    TensorD c = draw.uniform({3, 4}, -1.0, 1.0);
    const TensorD target = draw.offset_target(evaluate([&](Tape<double>& t) { return add(t, a, c); }));
    auto f = [=](Tape<double>& t) { return smooth_reduce(t, add(t, a, c), target); };
    rows.push_back({"add", finite_diff_check(f, {a, c}, step, tolerance)});
  }
  {
    NetworkSpec spec;
    spec.in_channels = 3;
    spec.backbone = {{3, 4, Activation::relu}, {3, 4, Activation::relu}};
    for (auto& h : spec.heads) h = {{3, 1, Activation::none}};
    ParamStore<double> params = init_network<double>(spec, seed);
    // Zero biases would sit exactly on the relu kink wherever a window has no mask.
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
      const TensorD b = draw.away_from_zero(params.bias(l).shape(), 0.05);
      auto dst = params.bias(l).mutable_data();
      std::copy(b.data().begin(), b.data().end(), dst.begin());
    }
    TensorD x = draw.uniform({8, 8, 3}, 0.0, 1.0, false);
    MaskGrid m0 = draw.binary_mask(8, 8, 0.6);
    MaskGrid label_mask = draw.binary_mask(8, 8, 0.3);
    const auto out0 = [&] {
      Tape<double> t;
      t.set_recording(false);
      return forward(t, params, spec, x, m0);
    }();
    Targets<double> targets{draw.offset_target(out0.heads[0]), draw.offset_target(out0.heads[1]),
                            draw.offset_target(out0.heads[2])};
    auto f = [=](Tape<double>& t) {
      auto out = forward(t, params, spec, x, m0);
      return total_loss(t, out.heads, targets, label_mask, Gammas{});
    };
    rows.push_back({"network total_loss", finite_diff_check(f, params.tensors, step, tolerance)});
  }
  return rows;
}

}  // namespace smokegrid
