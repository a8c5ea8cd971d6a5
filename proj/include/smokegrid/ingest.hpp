// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0
//
// Point observations -> gridded training samples. Inputs for a label time t
// come from observations no later than t - lag (24 h by default); cells with
// no fresh value are filled from the most recent earlier frame in the lookback
// window, and cells never seen get the -1 sentinel.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smokegrid/field.hpp"
#include "smokegrid/grid.hpp"
#include "smokegrid/tensor.hpp"
#include "smokegrid/time.hpp"

namespace smokegrid {

constexpr double kSentinel = -1.0;

struct PointObservation {
  Timestamp time = 0;
  double lat = 0.0;
  double lon = 0.0;
  std::string variable;
  double value = 0.0;
};

/// CSV with header `timestamp,lat,lon,variable,value`. Malformed lines throw
/// with the source name and line number.
std::vector<PointObservation> read_observations_csv(std::istream& is, const std::string& source);

/// Immutable after construction; lookups are by variable then time.
class ObservationStore {
 public:
  ObservationStore() = default;
  explicit ObservationStore(std::vector<PointObservation> observations);

  /// Distinct timestamps of `variable`, ascending.
  std::vector<Timestamp> timestamps(const std::string& variable) const;
  std::span<const PointObservation> at(const std::string& variable, Timestamp t) const;
  std::size_t size() const { return total_; }

 private:
  std::map<std::string, std::vector<PointObservation>> by_variable_;
  std::size_t total_ = 0;
};

enum class ReduceRule { mean, sum, max };
enum class ValueTransform { none, log1p };

struct ChannelSpec {
  std::string name;
  std::string variable;
  ReduceRule reduce = ReduceRule::mean;
  ValueTransform transform = ValueTransform::none;

  friend bool operator==(const ChannelSpec&, const ChannelSpec&) = default;
};

struct ChannelRegistry {
  std::vector<ChannelSpec> channels;

  /// Nine channels: two baseline PM2.5 forecasts, AOD, four wind components,
  /// FRP and the HMS plume flag.
  static ChannelRegistry defaults();
  /// `name:variable:reduce[:transform]` entries separated by commas.
  static ChannelRegistry parse(const std::string& text);
  std::string to_string() const;

  void validate() const;
  std::size_t size() const { return channels.size(); }
  std::optional<std::size_t> index_of(const std::string& name) const;
  std::vector<std::string> names() const;
};

struct Raster {
  Plane values;
  Plane presence;
  std::size_t skipped = 0;
};

/// Bins observations into cells and reduces collisions with `rule`.
/// Out-of-bounds points are counted in `skipped`.
Raster rasterize(std::span<const PointObservation> observations, const GridSpec& grid, ReduceRule rule);

/// `history` is ordered most recent first.
Plane fill_forward(const Raster& current, std::span<const Raster> history, double sentinel = kSentinel);

/// Sentinel cells take the value of the nearest non-sentinel cell (ties go to
/// the lowest row-major index).
Plane fill_spatial(const Plane& plane, double sentinel = kSentinel);

double log_transform(double ug_m3);
double inverse_log_transform(double y);

struct SampleFrame {
  Timestamp time = 0;
  Volume input;
  Plane label;
  MaskGrid mask;
  std::size_t station_count = 0;
};

struct ComposeOptions {
  Timestamp lag = 24 * kHour;
  Timestamp lookback = 24 * kHour;
  bool spatial_fill = false;
  std::string label_variable = "pm25";
};

struct ComposeReport {
  std::size_t skipped_observations = 0;
  std::size_t skipped_samples = 0;
};

std::optional<SampleFrame> compose_sample(Timestamp t, const ObservationStore& store, const GridSpec& grid,
                                          const ChannelRegistry& registry, const ComposeOptions& options,
                                          ComposeReport& report);

/// One frame per distinct label-variable timestamp, in time order.
std::vector<SampleFrame> compose_all(const ObservationStore& store, const GridSpec& grid,
                                     const ChannelRegistry& registry, const ComposeOptions& options,
                                     ComposeReport& report);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Seeded shuffle, then contiguous partition. Validation and test sizes are
/// floored; the remainder goes to training.
SplitIndices split_dataset(std::size_t count, const SplitRatios& ratios, std::uint64_t seed);

}  // namespace smokegrid
