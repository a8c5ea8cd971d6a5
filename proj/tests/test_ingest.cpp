// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>

#include "smokegrid/archive.hpp"
#include "smokegrid/grid.hpp"
#include "smokegrid/ingest.hpp"
#include "smokegrid/time.hpp"

using namespace smokegrid;

namespace {

Timestamp ts(const char* s) { return *parse_timestamp(s); }

PointObservation obs(Timestamp t, LatLon p, const std::string& var, double v) {
  return PointObservation{t, p.lat, p.lon, var, v};
}

Raster raster_with(std::size_t rows, std::size_t cols, std::vector<std::pair<std::size_t, double>> cells) {
  Raster r{Plane(rows, cols), Plane(rows, cols), 0};
  for (auto [i, v] : cells) {
    r.values.values[i] = v;
    r.presence.values[i] = 1.0;
  }
  return r;
}

}  // namespace

TEST(Grid, CornersAndMidpoint) {
  const GridSpec g;
  EXPECT_EQ(latlon_to_cell(g, 57.87, -133.54), (Cell{0, 0}));
  EXPECT_EQ(latlon_to_cell(g, 49.43, -110.61), (Cell{124, 124}));
  const LatLon mid = g.point_at(0.5, 0.5);
  EXPECT_EQ(latlon_to_cell(g, mid.lat, mid.lon), (Cell{62, 62}));
}

TEST(Grid, EveryCellCenterRoundTrips) {
  const GridSpec g;
  for (std::size_t r = 0; r < g.rows; ++r)
    for (std::size_t c = 0; c < g.cols; ++c) {
      const LatLon p = g.cell_center(r, c);
      const auto cell = latlon_to_cell(g, p.lat, p.lon);
      ASSERT_TRUE(cell.has_value()) << r << "," << c;
      ASSERT_EQ(*cell, (Cell{r, c}));
    }
}

TEST(Grid, OutsidePointsAreOutOfBounds) {
  const GridSpec g;
  EXPECT_FALSE(latlon_to_cell(g, 70.0, -120.0).has_value());
  EXPECT_FALSE(latlon_to_cell(g, 53.0, -150.0).has_value());
  EXPECT_FALSE(latlon_to_cell(g, 40.0, -100.0).has_value());
}

TEST(Grid, DegenerateQuadrilateralRejected) {
  GridSpec g;
  g.sw = g.nw;
  EXPECT_THROW(g.validate(), Error);
  GridSpec twisted;
  std::swap(twisted.ne, twisted.se);
  EXPECT_THROW(twisted.validate(), Error);
  GridSpec tiny;
  tiny.rows = 1;
  EXPECT_THROW(tiny.validate(), Error);
  EXPECT_NO_THROW(GridSpec{}.validate());
}

TEST(Grid, LatLonTextRoundTrip) {
  const LatLon p{57.87, -133.54};
  EXPECT_EQ(parse_latlon(format_latlon(p)), p);
  EXPECT_THROW(parse_latlon("57.87"), Error);
}

TEST(Rasterize, Examples) {
  const GridSpec g;
  const LatLon c = g.cell_center(10, 20);
  const std::vector<PointObservation> two{obs(0, c, "pm25", 10), obs(0, c, "pm25", 20)};
  const Raster mean = rasterize(two, g, ReduceRule::mean);
  EXPECT_EQ(mean.values.at(10, 20), 15.0);
  EXPECT_EQ(mean.presence.at(10, 20), 1.0);
  EXPECT_EQ(rasterize(two, g, ReduceRule::sum).values.at(10, 20), 30.0);

  const Raster none = rasterize({}, g, ReduceRule::mean);
  for (double v : none.presence.values) EXPECT_EQ(v, 0.0);

  const std::vector<PointObservation> flags{obs(0, c, "hms", 0), obs(0, c, "hms", 1)};
  EXPECT_EQ(rasterize(flags, g, ReduceRule::max).values.at(10, 20), 1.0);
}

TEST(Rasterize, OutOfBoundsCountedAndSkipped) {
  const GridSpec g;
  const std::vector<PointObservation> v{obs(0, {80.0, -120.0}, "pm25", 5), obs(0, g.cell_center(0, 0), "pm25", 4)};
  const Raster r = rasterize(v, g, ReduceRule::mean);
  EXPECT_EQ(r.skipped, 1u);
  EXPECT_EQ(r.values.at(0, 0), 4.0);
}

TEST(FillForward, Examples) {
  const Raster now = raster_with(1, 3, {{0, 4.0}});
  const std::vector<Raster> history{raster_with(1, 3, {{0, 100.0}}), raster_with(1, 3, {{1, 7.0}}),
                                    raster_with(1, 3, {{1, 9.0}})};
  const Plane filled = fill_forward(now, history);
  EXPECT_EQ(filled.values[0], 4.0);
  EXPECT_EQ(filled.values[1], 7.0);
  EXPECT_EQ(filled.values[2], -1.0);
}

TEST(FillForward, NeverInventsValues) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> val(0.0, 50.0);
  std::bernoulli_distribution present(0.3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Raster> planes(4, Raster{Plane(5, 5), Plane(5, 5), 0});
    std::multiset<double> inputs{-1.0};
    for (auto& p : planes)
      for (std::size_t i = 0; i < 25; ++i)
        if (present(rng)) {
          p.values.values[i] = val(rng);
          p.presence.values[i] = 1.0;
          inputs.insert(p.values.values[i]);
        }
    const Plane out = fill_forward(planes[0], std::span<const Raster>(planes).subspan(1));
    for (double v : out.values) ASSERT_TRUE(inputs.count(v)) << v;
  }
}

TEST(FillSpatial, UsesNearestPopulatedCell) {
  Plane p(1, 4, -1.0);
  p.values[0] = 3.0;
  const Plane f = fill_spatial(p);
  for (double v : f.values) EXPECT_EQ(v, 3.0);
  const Plane empty = fill_spatial(Plane(2, 2, -1.0));
  for (double v : empty.values) EXPECT_EQ(v, -1.0);
}

TEST(LogTransform, Examples) {
  EXPECT_EQ(log_transform(0.0), 0.0);
  EXPECT_NEAR(log_transform(std::exp(1.0) - 1.0), 1.0, 1e-15);
  for (double x : {0.1, 5.0, 500.0}) EXPECT_NEAR(inverse_log_transform(log_transform(x)), x, 1e-9);
  EXPECT_THROW(log_transform(-0.5), Error);
  EXPECT_EQ(inverse_log_transform(-5.0), 0.0);
  EXPECT_NEAR(inverse_log_transform(1.0), 1.718281828459045, 1e-12);
}

TEST(Registry, DefaultsParseAndFormat) {
  const auto reg = ChannelRegistry::defaults();
  EXPECT_EQ(reg.size(), 9u);
  EXPECT_EQ(ChannelRegistry::parse(reg.to_string()).channels, reg.channels);
  EXPECT_EQ(reg.index_of("frp"), 7u);
  EXPECT_FALSE(reg.index_of("nope").has_value());
  EXPECT_THROW(ChannelRegistry::parse("a:a:median"), Error);
  EXPECT_THROW(ChannelRegistry::parse("a:a:mean,a:b:mean"), Error);
}

TEST(ComposeSample, OneStationOneFire) {
  const GridSpec g;
  const auto reg = ChannelRegistry::defaults();
  const Timestamp t = ts("2018-07-02T00:00:00Z");
  const std::vector<PointObservation> v{obs(t, g.cell_center(40, 50), "pm25", 12.0),
                                        obs(t - 24 * kHour, g.cell_center(60, 70), "frp", 250.0)};
  const ObservationStore store(v);
  ComposeReport report;
  const auto frame = compose_sample(t, store, g, reg, ComposeOptions{}, report);
  ASSERT_TRUE(frame.has_value());
  EXPECT_EQ(frame->mask.sum(), 1.0);
  EXPECT_EQ(frame->mask.at(40, 50), 1.0);
  EXPECT_NEAR(frame->label.at(40, 50), std::log(13.0), 1e-12);
  EXPECT_NEAR(frame->label.at(40, 50), 2.5649, 1e-4);
  EXPECT_EQ(frame->station_count, 1u);
  const std::size_t frp = *reg.index_of("frp");
  std::size_t non_sentinel = 0;
  for (std::size_t r = 0; r < g.rows; ++r)
    for (std::size_t c = 0; c < g.cols; ++c)
      if (frame->input.at(r, c, frp) != kSentinel) ++non_sentinel;
  EXPECT_EQ(non_sentinel, 1u);
  EXPECT_NEAR(frame->input.at(60, 70, frp), std::log1p(250.0), 1e-12);
}

TEST(ComposeSample, EmptyChannelsAreSentinel) {
  const GridSpec g;
  const Timestamp t = ts("2018-07-02T00:00:00Z");
  // Inputs at t itself are too recent to be used.
  const ObservationStore store(std::vector<PointObservation>{obs(t, g.cell_center(1, 1), "pm25", 3.0),
                                                             obs(t, g.cell_center(1, 1), "aod", 0.4)});
  ComposeReport report;
  const auto frame = compose_sample(t, store, g, ChannelRegistry::defaults(), ComposeOptions{}, report);
  ASSERT_TRUE(frame.has_value());
  for (double v : frame->input.values) ASSERT_EQ(v, -1.0);
}

TEST(ComposeSample, LookbackFillAndWindow) {
  GridSpec g;
  const Timestamp t = ts("2018-07-02T00:00:00Z");
  const LatLon a = g.cell_center(5, 5), b = g.cell_center(6, 6), c = g.cell_center(7, 7);
  const ObservationStore store(std::vector<PointObservation>{
      obs(t, a, "pm25", 1.0),
      obs(t - 24 * kHour, a, "aod", 0.5),
      obs(t - 30 * kHour, b, "aod", 0.7),
      obs(t - 36 * kHour, b, "aod", 0.9),
      obs(t - 60 * kHour, c, "aod", 0.3),
  });
  ComposeReport report;
  const auto frame = compose_sample(t, store, g, ChannelRegistry::defaults(), ComposeOptions{}, report);
  ASSERT_TRUE(frame.has_value());
  EXPECT_EQ(frame->input.at(5, 5, 2), 0.5);
  EXPECT_EQ(frame->input.at(6, 6, 2), 0.7);
  EXPECT_EQ(frame->input.at(7, 7, 2), -1.0);
}

TEST(ComposeSample, NoGroundTruthIsSkipped) {
  const GridSpec g;
  const ObservationStore store(std::vector<PointObservation>{obs(0, g.cell_center(0, 0), "aod", 1.0)});
  ComposeReport report;
  EXPECT_FALSE(compose_sample(0, store, g, ChannelRegistry::defaults(), ComposeOptions{}, report).has_value());
  EXPECT_EQ(report.skipped_samples, 1u);
}

TEST(ComposeSample, MaskEqualsPresenceAndIsSparse) {
  const GridSpec g;
  std::mt19937_64 rng(56);
  std::uniform_int_distribution<std::size_t> cell(0, 124);
  std::vector<PointObservation> v;
  std::set<std::pair<std::size_t, std::size_t>> cells;
  while (cells.size() < 56) cells.insert({cell(rng), cell(rng)});
  for (auto [r, c] : cells) v.push_back(obs(0, g.cell_center(r, c), "pm25", 4.0));
  const ObservationStore store(v);
  ComposeReport report;
  const auto frame = compose_sample(0, store, g, ChannelRegistry::defaults(), ComposeOptions{}, report);
  ASSERT_TRUE(frame.has_value());
  const Raster presence = rasterize(store.at("pm25", 0), g, ReduceRule::mean);
  EXPECT_EQ(frame->mask.values, presence.presence.values);
  const double density = frame->mask.sum() / static_cast<double>(g.rows * g.cols);
  EXPECT_NEAR(density, 0.003584, 1e-6);
  EXPECT_LT(density, 0.005);
}

TEST(ObservationsCsv, ParsesAndReportsLine) {
  std::istringstream good("timestamp,lat,lon,variable,value\n2018-07-01T00:00:00Z,55.0,-120.0,pm25,12.5\n");
  const auto v = read_observations_csv(good, "good.csv");
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].value, 12.5);
  EXPECT_EQ(v[0].time, ts("2018-07-01T00:00:00Z"));

  std::istringstream bad("timestamp,lat,lon,variable,value\n2018-07-01T00:00:00Z,55.0,-120.0,pm25,1\n"
                         "2018-07-01T00:00:00Z,abc,-120.0,pm25,1\n");
  try {
    read_observations_csv(bad, "bad.csv");
    FAIL() << "expected parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse);
    EXPECT_NE(std::string(e.what()).find("bad.csv:3"), std::string::npos) << e.what();
  }
}

TEST(Split, Examples) {
  const auto s = split_dataset(6090, SplitRatios{}, 7);
  EXPECT_EQ(s.train.size(), 4872u);
  EXPECT_EQ(s.val.size(), 609u);
  EXPECT_EQ(s.test.size(), 609u);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  all.insert(s.test.begin(), s.test.end());
  EXPECT_EQ(all.size(), 6090u);

  const auto only = split_dataset(10, SplitRatios{1, 0, 0}, 7);
  EXPECT_EQ(only.train.size(), 10u);
  EXPECT_TRUE(only.val.empty());

  const auto again = split_dataset(6090, SplitRatios{}, 7);
  EXPECT_EQ(again.train, s.train);
  EXPECT_EQ(again.test, s.test);

  EXPECT_THROW(split_dataset(0, SplitRatios{}, 7), Error);
  EXPECT_THROW(split_dataset(10, SplitRatios{0.5, 0.1, 0.1}, 7), Error);
}

TEST(Archive, RoundTripIsExact) {
  FrameArchive a;
  a.grid.rows = 4;
  a.grid.cols = 3;
  a.registry = ChannelRegistry::parse("x:x:mean,y:y:sum:log1p");
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(-1, 1);
  for (int f = 0; f < 3; ++f) {
    SampleFrame s;
    s.time = ts("2018-05-01T00:00:00Z") + f * 8 * kHour;
    s.input = Volume(4, 3, 2);
    for (auto& v : s.input.values) v = d(rng);
    s.label = Plane(4, 3);
    for (auto& v : s.label.values) v = d(rng);
    s.mask = MaskGrid::zeros(4, 3);
    s.mask.values[f] = 1.0;
    s.station_count = 1;
    a.frames.push_back(s);
    Plane t(4, 3);
    for (auto& v : t.values) v = d(rng);
    a.truth.push_back(t);
  }
  const auto dir = std::filesystem::temp_directory_path() / "smokegrid_archive_rt";
  std::filesystem::remove_all(dir);
  save_archive(dir, a);
  const FrameArchive b = load_archive(dir);
  EXPECT_EQ(b.grid, a.grid);
  EXPECT_EQ(b.registry.channels, a.registry.channels);
  ASSERT_EQ(b.frames.size(), 3u);
  for (std::size_t f = 0; f < 3; ++f) {
    EXPECT_EQ(b.frames[f].time, a.frames[f].time);
    EXPECT_EQ(b.frames[f].input, a.frames[f].input);
    EXPECT_EQ(b.frames[f].label, a.frames[f].label);
    EXPECT_EQ(b.frames[f].mask.values, a.frames[f].mask.values);
    EXPECT_EQ(b.truth[f], a.truth[f]);
  }
  std::filesystem::remove_all(dir);
  EXPECT_THROW(load_archive(dir), Error);
}

TEST(Time, ParseFormatAndSeasons) {
  const Timestamp t = ts("2018-07-15T06:00:00Z");
  EXPECT_EQ(format_timestamp(t), "2018-07-15T06:00:00Z");
  EXPECT_FALSE(parse_timestamp("2018-02-30T00:00:00Z").has_value());
  EXPECT_FALSE(parse_timestamp("2018-07-15 06:00:00").has_value());
  EXPECT_EQ(season_of(ts("2018-05-31T23:00:00Z")), SeasonBucket::early);
  EXPECT_EQ(season_of(ts("2018-06-01T00:00:00Z")), SeasonBucket::mid);
  EXPECT_EQ(season_of(ts("2018-10-01T00:00:00Z")), SeasonBucket::late);
  EXPECT_EQ(season_of(ts("2018-11-01T00:00:00Z")), SeasonBucket::off_season);
}
