// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic smoke world: a 2-D advection-diffusion model on a regular grid of
// square cells. Row 0 is the northern edge, so a northward wind moves smoke
// toward lower row indices. Wind planes are in m/s, lengths in km, time in h.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "smokegrid/archive.hpp"
#include "smokegrid/field.hpp"
#include "smokegrid/grid.hpp"
#include "smokegrid/ingest.hpp"
#include "smokegrid/tensor.hpp"
#include "smokegrid/time.hpp"

namespace smokegrid {

constexpr double kMetersPerSecondToKmPerHour = 3.6;

struct EmissionWindow {
  double start_hour = 0.0;
  double end_hour = 0.0;
  double intensity = 1.0;
};

struct FireSource {
  Cell cell;
  double rate = 0.0;    // ug/m3 per hour at full intensity
  double frp_mw = 0.0;  // fire radiative power at full intensity
  std::vector<EmissionWindow> windows;

  /// Intensity of the window covering `hour` (start inclusive), or 0.
  double intensity_at(double hour) const;
};

struct WindConfig {
  double mean_speed = 1.5;         // m/s
  double spatial_variation = 0.2;  // relative amplitude of the fixed speed pattern
  double direction_drift = 0.1;    // rad per sqrt(hour)
  std::optional<double> initial_direction;  // rad, counterclockwise from east; random when absent
};

struct NoiseConfig {
  std::size_t firework_blur = 5;
  double firework_sigma = 0.3;
  double bluesky_sigma = 0.6;
  double bluesky_bias = 1.5;
  double aod_scale = 0.01;
  double aod_sigma = 0.02;
  double upper_wind_scale = 2.5;
  double upper_wind_sigma = 0.5;
  double plume_threshold = 10.0;
  double plume_dropout = 0.3;
};

struct SimConfig {
  std::size_t rows = 64;
  std::size_t cols = 64;
  double cell_km = 10.0;
  double dt_hours = 1.0;
  double diffusion = 5.0;  // km2/h

  WindConfig wind;
  NoiseConfig noise;

  /// Explicit sources; when empty, generate_scenario draws between
  /// `min_sources` and `max_sources` of them from the seed.
  std::vector<FireSource> sources;
  std::size_t min_sources = 3;
  std::size_t max_sources = 6;
  double min_rate = 20.0;
  double max_rate = 80.0;
  double min_frp = 50.0;
  double max_frp = 500.0;
  double min_on_hours = 48.0;
  double max_on_hours = 240.0;
  double min_off_hours = 24.0;
  double max_off_hours = 168.0;
  /// Emission intensity in the quiet, peak and decline thirds of the horizon.
  std::array<double, 3> season_intensity{0.3, 1.0, 0.5};

  /// Explicit station cells; when empty, `station_count` distinct cells are drawn.
  std::vector<Cell> stations;
  std::size_t station_count = 40;

  std::size_t frames = 600;
  Timestamp start = 1522540800;  // 2018-04-01T00:00:00Z
  Timestamp spinup = 24 * kHour;
  Timestamp frame_interval = 8 * kHour;
  Timestamp lag = 24 * kHour;
  Timestamp lookback = 24 * kHour;
  double background = 2.0;  // ug/m3 added to the simulated field

  std::uint64_t seed = 7;

  void validate() const;
  /// Axis-aligned lat/lon box whose cells are roughly `cell_km` wide.
  GridSpec grid() const;
};

struct SimState {
  Plane c;  // ug/m3, >= 0
  Plane u;  // eastward wind, m/s
  Plane v;  // northward wind, m/s
  double hours = 0.0;
  double direction = 0.0;  // current mean wind direction, rad
  Plane speed_pattern;     // fixed multiplicative speed pattern around 1
  std::size_t clamp_count = 0;

  static SimState calm(std::size_t rows, std::size_t cols);
};

/// Throws invalid_argument unless max|wind| * dt / cell <= 0.9 and
/// 4 D dt / cell^2 <= 0.9.
void check_cfl(const SimState& state, const SimConfig& config);

/// One explicit finite-volume step: upwind advection in x then y (open,
/// outflow-only edges), central diffusion (no-flux edges), then source
/// injection. Negative cells are clamped to 0 and counted.
void step(SimState& state, const SimConfig& config);

/// Rotates the mean direction by a seeded random walk increment and rebuilds
/// the u/v planes from the speed pattern.
void update_wind(SimState& state, const SimConfig& config, std::mt19937_64& rng);

/// Box mean over the in-bounds part of a centered k x k window.
Plane box_blur(const Plane& p, std::size_t k);

/// Everything a frame's input channels are derived from.
struct FrameDrivers {
  Plane truth_valid;     // dense truth at the label time
  Plane truth_advected;  // the label-time state pushed one more step
  Plane truth_lagged;    // dense truth at the input time
  Plane u;               // wind at the input time
  Plane v;
  Plane frp;             // fire radiative power at the input time
  std::optional<Plane> previous_plume;  // last undropped plume plane within the lookback
};

struct DerivedFrame {
  Volume input;
  std::optional<Plane> plume;  // raw plume plane when this frame was not dropped
};

/// Builds the registry's channels (transform applied) from the drivers. The
/// result depends only on the drivers, the noise settings and `seed`.
DerivedFrame derive_channels(const FrameDrivers& drivers, const ChannelRegistry& registry, const NoiseConfig& noise,
                             std::uint64_t seed);

/// Log-transformed truth at the station cells, 0 elsewhere. Duplicate cells
/// collapse into one station.
std::pair<Plane, MaskGrid> sample_stations(const Plane& truth, const std::vector<Cell>& stations);

/// Fills in drawn sources and stations.
SimConfig resolve_config(const SimConfig& config);

struct Scenario {
  SimConfig config;  // resolved
  FrameArchive archive;
  std::size_t clamp_count = 0;
};

Scenario generate_scenario(const SimConfig& config, const ChannelRegistry& registry = ChannelRegistry::defaults());

}  // namespace smokegrid
