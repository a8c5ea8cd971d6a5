// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

#include "smokegrid/checks.hpp"
#include "smokegrid/gradcheck.hpp"
#include "smokegrid/network.hpp"

using namespace smokegrid;

namespace {

NetworkSpec small_spec(std::size_t in_channels = 3) {
  NetworkSpec s;
  s.in_channels = in_channels;
  s.backbone = parse_layers("3x4:relu,3x4:relu");
  for (auto& h : s.heads) h = parse_layers("3x1:none");
  return s;
}

template <typename T>
std::vector<T> flatten(const ParamStore<T>& p) {
  std::vector<T> out;
  for (const auto& t : p.tensors) out.insert(out.end(), t.data().begin(), t.data().end());
  return out;
}

Tensor<double> random_input(std::size_t h, std::size_t w, std::size_t c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1, 1);
  std::vector<double> v(h * w * c);
  for (auto& x : v) x = d(rng);
  return Tensor<double>({h, w, c}, v);
}

MaskGrid random_mask(std::size_t h, std::size_t w, std::mt19937_64& rng) {
  std::bernoulli_distribution b(0.4);
  MaskGrid m = MaskGrid::zeros(h, w);
  for (auto& v : m.values) v = b(rng);
  return m;
}

Example<double> toy_example(std::size_t h, std::size_t w, std::size_t c, std::mt19937_64& rng, Timestamp t) {
  Example<double> e;
  e.time = t;
  e.input = random_input(h, w, c, rng);
  e.input_mask = random_mask(h, w, rng);
  e.targets.fw = Tensor<double>({h, w, 1}, 0.0);
  e.targets.bscan = Tensor<double>({h, w, 1}, 0.0);
  e.targets.pm25 = Tensor<double>({h, w, 1}, 0.0);
  e.label_mask = MaskGrid::zeros(h, w);
  e.label_mask.values[0] = 1.0;
  e.label_mask.values[h * w / 2 + 3] = 1.0;
  e.label_mask.values[h * w - 5] = 1.0;
  return e;
}

}  // namespace

TEST(Spec, DefaultsAndLayerText) {
  const auto s = NetworkSpec::defaults();
  EXPECT_EQ(s.in_channels, 9u);
  ASSERT_EQ(s.backbone.size(), 5u);
  EXPECT_EQ(s.backbone[0].kernel, 11u);
  EXPECT_EQ(format_layers(s.backbone), "11x16:relu,7x16:relu,5x16:relu,3x16:relu,3x16:relu");
  EXPECT_EQ(format_layers(s.heads[2]), "3x16:relu,3x1:none");
  EXPECT_EQ(s.layer_count(), 11u);
  EXPECT_EQ(s.layer_name(0), "backbone.0");
  EXPECT_EQ(s.layer_name(10), "head.pm25.1");
  EXPECT_NO_THROW(s.validate());
  NetworkSpec even = small_spec();
  even.backbone = parse_layers("4x16:relu");
  EXPECT_THROW(even.validate(), Error);
  EXPECT_THROW(parse_layers("3x16:tanh"), Error);
  NetworkSpec bad = small_spec();
  bad.heads[0] = parse_layers("3x2:none");
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Init, DeterministicBoundedZeroBias) {
  NetworkSpec s = small_spec(9);
  const auto a = init_network<double>(s, 42);
  const auto b = init_network<double>(s, 42);
  const auto c = init_network<double>(s, 43);
  EXPECT_EQ(flatten(a), flatten(b));
  EXPECT_NE(flatten(a), flatten(c));
  for (std::size_t l = 0; l < s.layer_count(); ++l)
    for (double v : a.bias(l).data()) EXPECT_EQ(v, 0.0);
  const double bound = std::sqrt(1.0 / (3.0 * 3.0 * 9.0));
  EXPECT_NEAR(bound, 1.0 / 9.0, 1e-15);
  for (double v : a.kernel(0).data()) EXPECT_LT(std::abs(v), bound);
}

TEST(Forward, ZeroMaskIsInputIndependent) {
  std::mt19937_64 rng(1);
  NetworkSpec s = small_spec();
  auto p = init_network<double>(s, 3);
  for (auto& t : p.tensors)
    if (t.rank() == 1)
      for (auto& v : t.mutable_data()) v = 0.3;
  Tape<double> tape;
  const auto a = forward(tape, p, s, random_input(6, 6, 3, rng), MaskGrid::zeros(6, 6));
  const auto b = forward(tape, p, s, random_input(6, 6, 3, rng), MaskGrid::zeros(6, 6));
  for (std::size_t h = 0; h < 3; ++h) {
    EXPECT_EQ(std::vector<double>(a.heads[h].data().begin(), a.heads[h].data().end()),
              std::vector<double>(b.heads[h].data().begin(), b.heads[h].data().end()));
    for (double v : a.heads[h].data()) EXPECT_DOUBLE_EQ(v, a.heads[h].data()[0]);
  }
}

TEST(Forward, FirstLayerSparsityInvariance) {
  std::mt19937_64 rng(2);
  NetworkSpec s = small_spec();
  const auto p = init_network<double>(s, 5);
  const auto x = random_input(7, 7, 3, rng);
  const auto m = random_mask(7, 7, rng);
  auto x2 = random_input(7, 7, 3, rng);
  for (std::size_t i = 0; i < 49; ++i)
    if (m.values[i] == 1.0)
      for (std::size_t c = 0; c < 3; ++c) x2.mutable_data()[i * 3 + c] = x.data()[i * 3 + c];
  Tape<double> tape;
  const auto a = forward(tape, p, s, x, m);
  const auto b = forward(tape, p, s, x2, m);
  const auto& ya = a.heads[2];
  const auto& yb = b.heads[2];
  EXPECT_EQ(0, std::memcmp(ya.data().data(), yb.data().data(), ya.size() * sizeof(double)));
}

TEST(Forward, ShapesForRandomSpecs) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> kernel(0, 2), filters(1, 5), size(1, 9), depth(1, 3);
  for (int trial = 0; trial < 20; ++trial) {
    NetworkSpec s;
    s.in_channels = static_cast<std::size_t>(filters(rng));
    const int nb = depth(rng);
    for (int i = 0; i < nb; ++i)
      s.backbone.push_back({static_cast<std::size_t>(2 * kernel(rng) + 1), static_cast<std::size_t>(filters(rng)), Activation::relu});
    for (auto& h : s.heads) {
      const int nh = depth(rng) - 1;
      for (int i = 0; i < nh; ++i)
        h.push_back({static_cast<std::size_t>(2 * kernel(rng) + 1), static_cast<std::size_t>(filters(rng)), Activation::relu});
      h.push_back({static_cast<std::size_t>(2 * kernel(rng) + 1), 1, Activation::none});
    }
    const std::size_t H = static_cast<std::size_t>(size(rng)), W = static_cast<std::size_t>(size(rng));
    const auto p = init_network<double>(s, static_cast<std::uint64_t>(trial));
    Tape<double> tape;
    const auto out = forward(tape, p, s, random_input(H, W, s.in_channels, rng), random_mask(H, W, rng));
    for (const auto& y : out.heads) ASSERT_EQ(y.shape(), (Shape{H, W, 1}));
  }
}

TEST(Forward, OneLayerHeadsOn4x4) {
  NetworkSpec s;
  s.in_channels = 2;
  s.backbone = parse_layers("3x3:relu");
  for (auto& h : s.heads) h = parse_layers("1x1:none");
  std::mt19937_64 rng(4);
  Tape<double> tape;
  const auto out = forward(tape, init_network<double>(s, 1), s, random_input(4, 4, 2, rng), MaskGrid::ones(4, 4));
  for (const auto& y : out.heads) EXPECT_EQ(y.shape(), (Shape{4, 4, 1}));
}

TEST(Forward, ChannelMismatchRejected) {
  NetworkSpec s = small_spec(3);
  std::mt19937_64 rng(5);
  Tape<double> tape;
  EXPECT_THROW(forward(tape, init_network<double>(s, 1), s, random_input(4, 4, 2, rng), MaskGrid::ones(4, 4)), Error);
}

TEST(TotalLoss, Examples) {
  Tape<double> tape;
  const std::array<Tensor<double>, 3> y{Tensor<double>({1, 1, 1}, 1.0), Tensor<double>({1, 1, 1}, 2.0),
                                        Tensor<double>({1, 1, 1}, 3.0)};
  const Targets<double> zero{Tensor<double>({1, 1, 1}, 0.0), Tensor<double>({1, 1, 1}, 0.0),
                             Tensor<double>({1, 1, 1}, 0.0)};
  EXPECT_EQ(total_loss(tape, y, zero, MaskGrid::ones(1, 1), Gammas{1, 1, 1}).item(), 6.0);
  const Targets<double> same{y[0], y[1], y[2]};
  EXPECT_EQ(total_loss(tape, y, same, MaskGrid::ones(1, 1), Gammas{1, 1, 1}).item(), 0.0);

  const std::array<Tensor<double>, 3> y2{y[0], y[1], Tensor<double>({1, 1, 1}, -40.0)};
  EXPECT_EQ(total_loss(tape, y, zero, MaskGrid::ones(1, 1), Gammas{1, 1, 0}).item(),
            total_loss(tape, y2, zero, MaskGrid::ones(1, 1), Gammas{1, 1, 0}).item());

  EXPECT_THROW(total_loss(tape, y, zero, MaskGrid::ones(1, 1), Gammas{-1, 1, 1}), Error);
}

TEST(TotalLoss, Decomposable) {
  std::mt19937_64 rng(6);
  Tape<double> tape;
  const std::array<Tensor<double>, 3> y{random_input(5, 5, 1, rng), random_input(5, 5, 1, rng), random_input(5, 5, 1, rng)};
  const Targets<double> t{random_input(5, 5, 1, rng), random_input(5, 5, 1, rng), random_input(5, 5, 1, rng)};
  const MaskGrid m = random_mask(5, 5, rng);
  EXPECT_EQ(total_loss(tape, y, t, m, Gammas{1, 0, 0}).item(), l1_loss(tape, y[0], t.fw).item());
  EXPECT_EQ(total_loss(tape, y, t, m, Gammas{0, 1, 0}).item(), l1_loss(tape, y[1], t.bscan).item());
  EXPECT_EQ(total_loss(tape, y, t, m, Gammas{0, 0, 1}).item(), masked_l1_loss(tape, y[2], t.pm25, m).item());
}

TEST(TotalLoss, PredictionsAtUnlabelledCellsDoNotMatter) {
  std::mt19937_64 rng(7);
  NetworkSpec s = small_spec();
  auto p = init_network<double>(s, 9);
  const auto x = random_input(6, 6, 3, rng);
  const auto m0 = random_mask(6, 6, rng);
  const auto label_mask = random_mask(6, 6, rng);
  const Targets<double> t{random_input(6, 6, 1, rng), random_input(6, 6, 1, rng), random_input(6, 6, 1, rng)};
  auto run = [&](const std::vector<double>& offsets) {
    p.zero_grad();
    Tape<double> tape;
    auto out = forward(tape, p, s, x, m0);
    Tensor<double> shift({6, 6, 1}, offsets);
    out.heads[2] = add(tape, out.heads[2], shift);
    const auto loss = total_loss(tape, out.heads, t, label_mask, Gammas{});
    tape.backward(loss);
    std::vector<double> g;
    for (const auto& q : p.tensors) g.insert(g.end(), q.grad().begin(), q.grad().end());
    return std::pair{loss.item(), g};
  };
  const auto base = run(std::vector<double>(36, 0.0));
  std::uniform_real_distribution<double> d(-10, 10);
  std::vector<double> off(36, 0.0);
  for (std::size_t i = 0; i < 36; ++i)
    if (label_mask.values[i] == 0.0) off[i] = d(rng);
  const auto moved = run(off);
  EXPECT_EQ(base.first, moved.first);
  EXPECT_EQ(base.second, moved.second);
}

TEST(Adam, Examples) {
  ParamStore<double> p;
  p.tensors.push_back(Tensor<double>({2}, {1.0, 1.0}));
  p.tensors[0].set_requires_grad(true);
  p.first_moment.assign(1, std::vector<double>(2, 0.0));
  p.second_moment.assign(1, std::vector<double>(2, 0.0));
  EXPECT_THROW(adam_step(p, AdamConfig{}), Error);

  Tape<double> tape;
  const auto loss = scale(tape, l1_loss(tape, p.tensors[0], Tensor<double>({2}, 0.0)), 0.5);
  tape.backward(loss);
  adam_step(p, AdamConfig{0.001, 0.9, 0.999, 1e-8});
  EXPECT_NEAR(p.tensors[0].data()[0], 0.999, 1e-9);
  EXPECT_DOUBLE_EQ(p.tensors[0].data()[0], 1.0 - 0.001 * 0.5 / (0.5 + 1e-8));
  EXPECT_EQ(p.tensors[0].data()[0], p.tensors[0].data()[1]);
  EXPECT_EQ(p.step, 1u);
}

TEST(Adam, ZeroGradientLeavesParameter) {
  ParamStore<double> p;
  p.tensors.push_back(Tensor<double>({1}, {2.5}));
  p.tensors[0].set_requires_grad(true);
  p.first_moment.assign(1, std::vector<double>(1, 0.0));
  p.second_moment.assign(1, std::vector<double>(1, 0.0));
  Tape<double> tape;
  tape.backward(scale(tape, l1_loss(tape, p.tensors[0], Tensor<double>({1}, 0.0)), 0.0));
  adam_step(p, AdamConfig{});
  EXPECT_EQ(p.tensors[0].data()[0], 2.5);
}

TEST(Predict, InverseTransformAndClamp) {
  NetworkSpec s = small_spec();
  auto p = init_network<double>(s, 1);
  for (auto& t : p.tensors)
    for (auto& v : t.mutable_data()) v = 0.0;
  std::mt19937_64 rng(8);
  Example<double> e = toy_example(4, 4, 3, rng, 0);
  for (double v : predict(p, s, e).values) EXPECT_EQ(v, 0.0);

  const std::size_t last = s.layer_count() - 1;
  p.bias(last).mutable_data()[0] = 1.0;
  for (double v : predict(p, s, e).values) EXPECT_NEAR(v, 1.718281828459045, 1e-12);
  p.bias(last).mutable_data()[0] = -5.0;
  for (double v : predict(p, s, e).values) EXPECT_EQ(v, 0.0);
}

TEST(Train, ZeroEpochsReturnsInitialParams) {
  std::mt19937_64 rng(9);
  NetworkSpec s = small_spec();
  std::vector<Example<double>> data{toy_example(8, 8, 3, rng, 0)};
  TrainConfig cfg;
  cfg.epochs = 0;
  const auto r = train(data, {}, s, cfg);
  EXPECT_TRUE(r.history.empty());
  EXPECT_EQ(flatten(r.params), flatten(init_network<double>(s, cfg.seed)));
}

TEST(Train, ToyLossNonIncreasingAndDeterministic) {
  std::mt19937_64 rng(10);
  NetworkSpec s = small_spec();
  std::vector<Example<double>> data;
  for (int i = 0; i < 6; ++i) data.push_back(toy_example(16, 16, 3, rng, i));
  for (auto& e : data) {
    auto pm = e.targets.pm25.mutable_data();
    std::fill(pm.begin(), pm.end(), 0.0);
  }
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.gammas = Gammas{0, 0, 1};
  cfg.adam.lr = 1e-2;
  // Biases start at zero; push the pm25 output away from its target so there is something to learn.
  auto init = init_network<double>(s, cfg.seed);
  init.bias(s.layer_count() - 1).mutable_data()[0] = 2.0;
  const auto r = train(data, std::vector<Example<double>>{}, s, cfg, std::optional<ParamStore<double>>(init));
  ASSERT_EQ(r.history.size(), 5u);
  for (std::size_t i = 1; i < r.history.size(); ++i)
    EXPECT_LE(r.history[i].train_loss, r.history[i - 1].train_loss * 1.05) << "epoch " << i + 1;
  EXPECT_LT(r.history.back().train_loss, r.history.front().train_loss);

  const auto again = train(data, std::vector<Example<double>>{}, s, cfg, std::optional<ParamStore<double>>(init));
  for (std::size_t i = 0; i < r.history.size(); ++i) EXPECT_EQ(r.history[i].train_loss, again.history[i].train_loss);
  EXPECT_EQ(flatten(r.params), flatten(again.params));
}

TEST(Train, EmptyTrainingSetRejected) {
  EXPECT_THROW(train<double>({}, {}, small_spec(), TrainConfig{}), Error);
}

TEST(Checkpoint, RoundTripKeepsSpecParamsAndMoments) {
  std::mt19937_64 rng(11);
  NetworkSpec s = small_spec();
  std::vector<Example<float>> data;
  {
    auto e = toy_example(8, 8, 3, rng, 0);
    Example<float> f;
    auto cast = [](const Tensor<double>& t) {
      return Tensor<float>(t.shape(), std::vector<float>(t.data().begin(), t.data().end()));
    };
    f.input = cast(e.input);
    f.input_mask = e.input_mask;
    f.targets = {cast(e.targets.fw), cast(e.targets.bscan), cast(e.targets.pm25)};
    f.label_mask = e.label_mask;
    data.push_back(f);
  }
  TrainConfig cfg;
  cfg.epochs = 2;
  const auto r = train(data, {}, s, cfg);
  const auto path = std::filesystem::temp_directory_path() / "smokegrid_ckpt_rt.ckpt";
  save_checkpoint(path, s, r.params);
  const auto info = read_checkpoint_info(path);
  EXPECT_EQ(info.dtype, DType::float32);
  EXPECT_EQ(info.spec, s);
  NetworkSpec loaded_spec;
  const auto back = load_checkpoint<float>(path, loaded_spec);
  EXPECT_EQ(loaded_spec, s);
  EXPECT_EQ(back.step, 2u);
  EXPECT_EQ(flatten(back), flatten(r.params));
  EXPECT_EQ(back.first_moment, r.params.first_moment);
  EXPECT_EQ(back.second_moment, r.params.second_moment);
  const auto widened = load_checkpoint<double>(path, loaded_spec);
  const auto narrow = flatten(back);
  const auto wide = flatten(widened);
  ASSERT_EQ(wide.size(), narrow.size());
  for (std::size_t i = 0; i < wide.size(); ++i) EXPECT_EQ(wide[i], static_cast<double>(narrow[i]));
  std::filesystem::remove(path);
}

TEST(GradCheck, EndToEndNetwork) {
  const auto rows = gradcheck_suite(3);
  bool found = false;
  for (const auto& row : rows) {
    EXPECT_TRUE(row.report.passed) << row.name << " " << row.report.max_rel_error;
    EXPECT_LT(row.report.max_rel_error, 1e-4) << row.name;
    if (row.name == "network total_loss") found = true;
  }
  EXPECT_TRUE(found);
}
