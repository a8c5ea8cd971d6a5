// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "smokegrid/synth.hpp"

using namespace smokegrid;

namespace {

SimConfig quiet_config(std::size_t n = 16) {
  SimConfig c;
  c.rows = n;
  c.cols = n;
  c.diffusion = 0.0;
  return c;
}

double total(const Plane& p) { return std::accumulate(p.values.begin(), p.values.end(), 0.0); }

FireSource always_on(Cell cell, double rate) {
  FireSource s;
  s.cell = cell;
  s.rate = rate;
  s.frp_mw = 100.0;
  s.windows = {{0.0, 1e9, 1.0}};
  return s;
}

FrameDrivers constant_drivers(std::size_t n, double value) {
  FrameDrivers d;
  d.truth_valid = Plane(n, n, value);
  d.truth_advected = Plane(n, n, value);
  d.truth_lagged = Plane(n, n, value);
  d.u = Plane(n, n, 1.0);
  d.v = Plane(n, n, -0.5);
  d.frp = Plane(n, n, 0.0);
  return d;
}

NoiseConfig silent() {
  NoiseConfig n;
  n.firework_blur = 1;
  n.firework_sigma = 0.0;
  n.bluesky_sigma = 0.0;
  n.aod_sigma = 0.0;
  n.upper_wind_sigma = 0.0;
  n.plume_dropout = 0.0;
  return n;
}

}  // namespace

TEST(Step, QuietWorldUnchanged) {
  const SimConfig c = quiet_config();
  SimState s = SimState::calm(16, 16);
  s.c.at(5, 5) = 4.0;
  const Plane before = s.c;
  for (int i = 0; i < 5; ++i) step(s, c);
  EXPECT_EQ(s.c, before);
  EXPECT_DOUBLE_EQ(s.hours, 5.0);
}

TEST(Step, SourceAccumulates) {
  SimConfig c = quiet_config(8);
  c.dt_hours = 0.5;
  c.sources = {always_on({3, 4}, 2.0)};
  SimState s = SimState::calm(8, 8);
  for (int i = 0; i < 3; ++i) step(s, c);
  EXPECT_DOUBLE_EQ(s.c.at(3, 4), 3.0);
  EXPECT_DOUBLE_EQ(total(s.c), 3.0);
}

TEST(Step, DiffusionConservesMass) {
  SimConfig c = quiet_config(32);
  c.diffusion = 20.0;
  SimState s = SimState::calm(32, 32);
  for (std::size_t r = 12; r < 18; ++r)
    for (std::size_t col = 10; col < 14; ++col) s.c.at(r, col) = 50.0 + static_cast<double>(r * col);
  const double m0 = total(s.c);
  for (int i = 0; i < 100; ++i) {
    const double before = total(s.c);
    step(s, c);
    ASSERT_LT(std::abs(total(s.c) - before) / before, 1e-9);
  }
  EXPECT_LT(std::abs(total(s.c) - m0) / m0, 1e-7);
  EXPECT_EQ(s.clamp_count, 0u);
}

TEST(Step, AdvectionTranslatesCenterOfMass) {
  SimConfig c = quiet_config(64);
  SimState s = SimState::calm(64, 64);
  // Half a cell per step.
  const double u = 0.5 * c.cell_km / (kMetersPerSecondToKmPerHour * c.dt_hours);
  for (auto& x : s.u.values) x = u;
  s.c.at(20, 5) = 100.0;
  const int n = 40;
  for (int i = 0; i < n; ++i) step(s, c);
  double mass = 0.0, mx = 0.0, my = 0.0;
  for (std::size_t r = 0; r < 64; ++r)
    for (std::size_t col = 0; col < 64; ++col) {
      mass += s.c.at(r, col);
      mx += s.c.at(r, col) * static_cast<double>(col);
      my += s.c.at(r, col) * static_cast<double>(r);
    }
  EXPECT_NEAR(mass, 100.0, 1e-9);
  EXPECT_NEAR(mx / mass, 5.0 + 0.5 * n, 0.5);
  EXPECT_NEAR(my / mass, 20.0, 1e-9);
  for (std::size_t col = 0; col < 5; ++col) EXPECT_EQ(s.c.at(20, col), 0.0);
  EXPECT_EQ(s.clamp_count, 0u);
}

TEST(Step, CflViolationRejected) {
  SimConfig c = quiet_config();
  SimState s = SimState::calm(16, 16);
  for (auto& x : s.u.values) x = 5.0;  // 1.8 cells per hour
  EXPECT_THROW(step(s, c), Error);
  SimState d = SimState::calm(16, 16);
  c.diffusion = 30.0;  // 4*30/100 = 1.2
  EXPECT_THROW(step(d, c), Error);
}

TEST(Step, DefaultScenarioNeverClamps) {
  SimConfig c;
  c.frames = 60;
  const Scenario sc = generate_scenario(c);
  EXPECT_EQ(sc.clamp_count, 0u);
  for (const auto& t : sc.archive.truth)
    for (double v : t.values) ASSERT_GE(v, 0.0);
}

TEST(DeriveChannels, ConstantTruthNoNoise) {
  const auto reg = ChannelRegistry::parse(
      "firework_pm25:firework_pm25:mean,bluesky_pm25:bluesky_pm25:mean,aod:aod:mean,frp:frp:sum,hms_plume:hms_plume:max");
  NoiseConfig n = silent();
  n.bluesky_bias = 1.0;
  const auto out = derive_channels(constant_drivers(6, 4.5), reg, n, 1);
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t c = 0; c < 6; ++c) {
      EXPECT_EQ(out.input.at(r, c, 0), 4.5);
      EXPECT_EQ(out.input.at(r, c, 1), 4.5);
      EXPECT_DOUBLE_EQ(out.input.at(r, c, 2), 0.045);
      EXPECT_EQ(out.input.at(r, c, 3), 0.0);
      EXPECT_EQ(out.input.at(r, c, 4), 0.0);
    }
}

TEST(DeriveChannels, PlumeThreshold) {
  const auto reg = ChannelRegistry::parse("hms_plume:hms_plume:max");
  FrameDrivers d = constant_drivers(3, 0.0);
  d.truth_lagged.at(1, 1) = 12.0;
  d.truth_lagged.at(0, 0) = 9.0;
  const auto out = derive_channels(d, reg, silent(), 5);
  ASSERT_TRUE(out.plume.has_value());
  EXPECT_EQ(out.input.at(1, 1, 0), 1.0);
  EXPECT_EQ(out.input.at(0, 0, 0), 0.0);

  NoiseConfig always_drop = silent();
  always_drop.plume_dropout = 1.0;
  const auto gap = derive_channels(d, reg, always_drop, 5);
  EXPECT_FALSE(gap.plume.has_value());
  for (double v : gap.input.values) EXPECT_EQ(v, kSentinel);
  d.previous_plume = Plane(3, 3, 1.0);
  const auto held = derive_channels(d, reg, always_drop, 5);
  for (double v : held.input.values) EXPECT_EQ(v, 1.0);
}

TEST(DeriveChannels, DependsOnlyOnInputsAndSeed) {
  FrameDrivers d = constant_drivers(8, 3.0);
  d.truth_valid.at(2, 3) = 40.0;
  const auto reg = ChannelRegistry::defaults();
  const auto a = derive_channels(d, reg, NoiseConfig{}, 99);
  const auto b = derive_channels(d, reg, NoiseConfig{}, 99);
  const auto c = derive_channels(d, reg, NoiseConfig{}, 100);
  EXPECT_EQ(a.input, b.input);
  EXPECT_NE(a.input, c.input);
}

TEST(DeriveChannels, UnknownChannelRejected) {
  EXPECT_THROW(derive_channels(constant_drivers(2, 1.0), ChannelRegistry::parse("ozone:ozone:mean"), silent(), 1),
               Error);
}

TEST(SampleStations, Examples) {
  Plane truth(125, 125, 5.0);
  truth.at(3, 4) = 0.0;
  truth.at(7, 7) = 12.0;
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < 56; ++i) cells.push_back({i * 2, (i * 37) % 125});
  cells.push_back({3, 4});
  cells.push_back({3, 4});
  const auto [label, mask] = sample_stations(truth, cells);
  EXPECT_EQ(mask.at(3, 4), 1.0);
  EXPECT_EQ(label.at(3, 4), 0.0);
  EXPECT_LT(mask.sum() / 15625.0, 0.005);

  const auto [one, one_mask] = sample_stations(truth, {Cell{7, 7}});
  EXPECT_EQ(one_mask.sum(), 1.0);
  EXPECT_NEAR(one.at(7, 7), std::log(13.0), 1e-12);
  EXPECT_THROW(sample_stations(truth, {Cell{125, 0}}), Error);
}

TEST(Scenario, EmptyHorizon) {
  SimConfig c;
  c.frames = 0;
  const Scenario sc = generate_scenario(c);
  EXPECT_TRUE(sc.archive.frames.empty());
  EXPECT_TRUE(sc.archive.truth.empty());
}

TEST(Scenario, DeterministicAndShaped) {
  SimConfig c;
  c.rows = 24;
  c.cols = 20;
  c.frames = 30;
  c.station_count = 10;
  const Scenario a = generate_scenario(c);
  const Scenario b = generate_scenario(c);
  ASSERT_EQ(a.archive.frames.size(), 30u);
  for (std::size_t i = 0; i < 30; ++i) {
    ASSERT_EQ(a.archive.frames[i].input, b.archive.frames[i].input);
    ASSERT_EQ(a.archive.frames[i].label, b.archive.frames[i].label);
    ASSERT_EQ(a.archive.truth[i], b.archive.truth[i]);
    EXPECT_EQ(a.archive.frames[i].mask.sum(), 10.0);
    EXPECT_EQ(a.archive.frames[i].input.channels, 9u);
    if (i > 0) EXPECT_EQ(a.archive.frames[i].time - a.archive.frames[i - 1].time, 8 * kHour);
  }
  c.seed = 8;
  const Scenario other = generate_scenario(c);
  EXPECT_NE(other.archive.truth[10], a.archive.truth[10]);
}

TEST(Scenario, PeakThirdExceedsQuietThird) {
  const Scenario sc = generate_scenario(SimConfig{});
  const auto& truth = sc.archive.truth;
  ASSERT_EQ(truth.size(), 600u);
  auto mean_of = [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += total(truth[i]) / static_cast<double>(truth[i].size());
    return s / static_cast<double>(hi - lo);
  };
  const double quiet = mean_of(0, 200), peak = mean_of(200, 400), decline = mean_of(400, 600);
  EXPECT_GT(peak, quiet);
  EXPECT_GT(peak, decline);
  EXPECT_EQ(sc.clamp_count, 0u);
  EXPECT_EQ(sc.config.stations.size(), 40u);
}

TEST(Config, ValidationAndGrid) {
  SimConfig c;
  EXPECT_NO_THROW(c.validate());
  const GridSpec g = c.grid();
  EXPECT_EQ(g.rows, 64u);
  EXPECT_NO_THROW(g.validate());
  SimConfig bad = c;
  bad.min_sources = 7;
  EXPECT_THROW(bad.validate(), Error);
  bad = c;
  bad.stations = {Cell{64, 0}};
  EXPECT_THROW(bad.validate(), Error);
}
