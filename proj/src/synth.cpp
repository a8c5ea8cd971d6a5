// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "smokegrid/synth.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <numeric>
#include <string_view>

#include "smokegrid/error.hpp"

namespace smokegrid {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char ch : s) h = (h ^ static_cast<unsigned char>(ch)) * 0x100000001B3ULL;
  return h;
}

std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
  return splitmix64(splitmix64(seed ^ fnv1a(tag)) + index);
}

std::int64_t whole_steps(Timestamp seconds, double dt_hours, const char* what) {
  const double steps = static_cast<double>(seconds) / (dt_hours * kHour);
  const double rounded = std::round(steps);
  require(std::abs(steps - rounded) < 1e-9, ErrorCode::invalid_argument,
          std::string(what) + " must be a whole number of time steps");
  return static_cast<std::int64_t>(rounded);
}

double lognormal_factor(double sigma, std::normal_distribution<double>& z, std::mt19937_64& rng) {
  if (sigma == 0.0) return 1.0;
  return std::exp(sigma * z(rng) - 0.5 * sigma * sigma);
}

}  // namespace

double FireSource::intensity_at(double hour) const {
  for (const auto& w : windows)
    if (hour >= w.start_hour && hour < w.end_hour) return w.intensity;
  return 0.0;
}

void SimConfig::validate() const {
  require(rows >= 2 && cols >= 2, ErrorCode::invalid_argument, "synthetic grid needs at least 2 rows and 2 columns");
  require(cell_km > 0 && dt_hours > 0, ErrorCode::invalid_argument, "cell size and time step must be positive");
  require(diffusion >= 0, ErrorCode::invalid_argument, "diffusion coefficient must be non-negative");
  require(wind.mean_speed >= 0 && wind.spatial_variation >= 0 && wind.spatial_variation < 1 && wind.direction_drift >= 0,
          ErrorCode::invalid_argument, "wind speed, variation in [0, 1) and drift must be non-negative");
  require(noise.firework_blur % 2 == 1, ErrorCode::invalid_argument, "firework blur window must be odd");
  require(noise.firework_sigma >= 0 && noise.bluesky_sigma >= 0 && noise.aod_sigma >= 0 && noise.upper_wind_sigma >= 0,
          ErrorCode::invalid_argument, "noise levels must be non-negative");
  require(noise.plume_dropout >= 0 && noise.plume_dropout <= 1, ErrorCode::invalid_argument,
          "plume dropout must lie in [0, 1]");
  require(min_sources <= max_sources && min_rate <= max_rate && min_frp <= max_frp && min_on_hours > 0 &&
              min_on_hours <= max_on_hours && min_off_hours > 0 && min_off_hours <= max_off_hours,
          ErrorCode::invalid_argument, "source ranges must satisfy min <= max with positive durations");
  for (double s : season_intensity) require(s >= 0, ErrorCode::invalid_argument, "season intensities must be >= 0");
  for (const auto& s : sources)
    require(s.cell.row < rows && s.cell.col < cols, ErrorCode::invalid_argument, "source cell outside the grid");
  for (const auto& c : stations)
    require(c.row < rows && c.col < cols, ErrorCode::invalid_argument, "station cell outside the grid");
  require(station_count <= rows * cols, ErrorCode::invalid_argument, "more stations than grid cells");
  require(lag >= 0 && lookback >= 0 && spinup >= 0 && frame_interval > 0, ErrorCode::invalid_argument,
          "lag, lookback and spin-up must be >= 0 and the frame interval > 0");
  whole_steps(spinup, dt_hours, "spinup");
  whole_steps(lag, dt_hours, "lag");
  whole_steps(frame_interval, dt_hours, "frame interval");
  require(background >= 0, ErrorCode::invalid_argument, "background must be non-negative");
}

GridSpec SimConfig::grid() const {
  constexpr double km_per_degree = 111.32;
  const double north = 57.0, west = -129.0;
  const double lat_span = static_cast<double>(rows) * cell_km / km_per_degree;
  const double mid = (north - 0.5 * lat_span) * std::numbers::pi / 180.0;
  const double lon_span = static_cast<double>(cols) * cell_km / (km_per_degree * std::cos(mid));
  GridSpec g;
  g.nw = {north, west};
  g.sw = {north - lat_span, west};
  g.ne = {north, west + lon_span};
  g.se = {north - lat_span, west + lon_span};
  g.rows = rows;
  g.cols = cols;
  return g;
}

SimState SimState::calm(std::size_t rows, std::size_t cols) {
  SimState s;
  s.c = Plane(rows, cols);
  s.u = Plane(rows, cols);
  s.v = Plane(rows, cols);
  s.speed_pattern = Plane(rows, cols, 1.0);
  return s;
}

void check_cfl(const SimState& state, const SimConfig& config) {
  double vmax = 0.0;
  for (std::size_t i = 0; i < state.u.values.size(); ++i)
    vmax = std::max(vmax, std::hypot(state.u.values[i], state.v.values[i]));
  const double courant = vmax * kMetersPerSecondToKmPerHour * config.dt_hours / config.cell_km;
  const double diffusion = 4.0 * config.diffusion * config.dt_hours / (config.cell_km * config.cell_km);
  require(std::isfinite(courant) && courant <= 0.9, ErrorCode::invalid_argument,
          "CFL violated: advective Courant number " + std::to_string(courant) + " > 0.9");
  require(diffusion <= 0.9, ErrorCode::invalid_argument,
          "CFL violated: diffusion number " + std::to_string(diffusion) + " > 0.9");
}

void step(SimState& state, const SimConfig& config) {
  check_cfl(state, config);
  const std::size_t R = state.c.rows, C = state.c.cols;
  require(state.u.rows == R && state.u.cols == C && state.v.rows == R && state.v.cols == C, ErrorCode::shape_mismatch,
          "wind planes do not match the concentration plane");
  std::vector<double>& c = state.c.values;
  const double k = kMetersPerSecondToKmPerHour * config.dt_hours / config.cell_km;

  // Eastward sweep; flux[j] is the transport through the west face of column j.
  {
    std::vector<double> flux(C + 1);
    for (std::size_t r = 0; r < R; ++r) {
      const double* u = &state.u.values[r * C];
      double* row = &c[r * C];
      const double west = u[0] * k;
      flux[0] = west < 0 ? west * row[0] : 0.0;
      for (std::size_t j = 1; j < C; ++j) {
        const double a = 0.5 * (u[j - 1] + u[j]) * k;
        flux[j] = a > 0 ? a * row[j - 1] : a * row[j];
      }
      const double east = u[C - 1] * k;
      flux[C] = east > 0 ? east * row[C - 1] : 0.0;
      for (std::size_t j = 0; j < C; ++j) row[j] -= flux[j + 1] - flux[j];
    }
  }

  // Southward sweep (increasing row); a northward wind gives negative transport.
  {
    std::vector<double> flux((R + 1) * C);
    for (std::size_t j = 0; j < C; ++j) {
      const double north = -state.v.values[j] * k;
      flux[j] = north < 0 ? north * c[j] : 0.0;
      const double south = -state.v.values[(R - 1) * C + j] * k;
      flux[R * C + j] = south > 0 ? south * c[(R - 1) * C + j] : 0.0;
    }
    for (std::size_t r = 1; r < R; ++r)
      for (std::size_t j = 0; j < C; ++j) {
        const double a = -0.5 * (state.v.values[(r - 1) * C + j] + state.v.values[r * C + j]) * k;
        flux[r * C + j] = a > 0 ? a * c[(r - 1) * C + j] : a * c[r * C + j];
      }
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t j = 0; j < C; ++j) c[r * C + j] -= flux[(r + 1) * C + j] - flux[r * C + j];
  }

  if (config.diffusion > 0) {
    const double alpha = config.diffusion * config.dt_hours / (config.cell_km * config.cell_km);
    std::vector<double> next = c;
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t j = 0; j < C; ++j) {
        const double here = c[r * C + j];
        double s = 0.0;
        if (r > 0) s += c[(r - 1) * C + j] - here;
        if (r + 1 < R) s += c[(r + 1) * C + j] - here;
        if (j > 0) s += c[r * C + j - 1] - here;
        if (j + 1 < C) s += c[r * C + j + 1] - here;
        next[r * C + j] = here + alpha * s;
      }
    c.swap(next);
  }

  for (const auto& src : config.sources) {
    require(src.cell.row < R && src.cell.col < C, ErrorCode::invalid_argument, "source cell outside the grid");
    c[src.cell.row * C + src.cell.col] += src.rate * src.intensity_at(state.hours) * config.dt_hours;
  }

  for (double& x : c) {
    if (x < 0.0) {
      x = 0.0;
      ++state.clamp_count;
    }
  }
  state.hours += config.dt_hours;
}

void update_wind(SimState& state, const SimConfig& config, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  state.direction += config.wind.direction_drift * std::sqrt(config.dt_hours) * z(rng);
  const double cu = std::cos(state.direction), cv = std::sin(state.direction);
  for (std::size_t i = 0; i < state.c.values.size(); ++i) {
    const double speed = config.wind.mean_speed * state.speed_pattern.values[i];
    state.u.values[i] = speed * cu;
    state.v.values[i] = speed * cv;
  }
}

Plane box_blur(const Plane& p, std::size_t k) {
  require(k % 2 == 1, ErrorCode::invalid_argument, "blur window must be odd");
  const auto r = static_cast<std::ptrdiff_t>(k / 2);
  const auto R = static_cast<std::ptrdiff_t>(p.rows), C = static_cast<std::ptrdiff_t>(p.cols);
  Plane out(p.rows, p.cols);
  for (std::ptrdiff_t u = 0; u < R; ++u)
    for (std::ptrdiff_t v = 0; v < C; ++v) {
      double s = 0.0;
      std::size_t n = 0;
      for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(0, u - r); i <= std::min(R - 1, u + r); ++i)
        for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, v - r); j <= std::min(C - 1, v + r); ++j, ++n)
          s += p.values[static_cast<std::size_t>(i * C + j)];
      out.values[static_cast<std::size_t>(u * C + v)] = s / static_cast<double>(n);
    }
  return out;
}

DerivedFrame derive_channels(const FrameDrivers& d, const ChannelRegistry& registry, const NoiseConfig& noise,
                             std::uint64_t seed) {
  const std::size_t R = d.truth_valid.rows, C = d.truth_valid.cols, n = R * C;
  std::normal_distribution<double> z(0.0, 1.0);
  auto rng_for = [&](std::string_view name) { return std::mt19937_64(mix_seed(seed, name)); };

  DerivedFrame out;
  {
    auto rng = rng_for("plume-dropout");
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    if (!(u01(rng) < noise.plume_dropout)) {
      Plane plume(R, C);
      for (std::size_t i = 0; i < n; ++i) plume.values[i] = d.truth_lagged.values[i] > noise.plume_threshold ? 1.0 : 0.0;
      out.plume = std::move(plume);
    }
  }

  out.input = Volume(R, C, registry.size());
  for (std::size_t ch = 0; ch < registry.size(); ++ch) {
    const ChannelSpec& spec = registry.channels[ch];
    auto rng = rng_for(spec.name);
    Plane p(R, C);
    if (spec.name == "firework_pm25") {
      p = box_blur(d.truth_valid, noise.firework_blur);
      for (double& x : p.values) x *= lognormal_factor(noise.firework_sigma, z, rng);
    } else if (spec.name == "bluesky_pm25") {
      for (std::size_t i = 0; i < n; ++i)
        p.values[i] = noise.bluesky_bias * d.truth_advected.values[i] * lognormal_factor(noise.bluesky_sigma, z, rng);
    } else if (spec.name == "aod") {
      for (std::size_t i = 0; i < n; ++i)
        p.values[i] = std::max(0.0, noise.aod_scale * d.truth_lagged.values[i] + noise.aod_sigma * z(rng));
    } else if (spec.name == "wind_u_50m") {
      p = d.u;
    } else if (spec.name == "wind_v_50m") {
      p = d.v;
    } else if (spec.name == "wind_u_250hpa" || spec.name == "wind_v_250hpa") {
      const Plane& base = spec.name == "wind_u_250hpa" ? d.u : d.v;
      for (std::size_t i = 0; i < n; ++i)
        p.values[i] = noise.upper_wind_scale * base.values[i] + noise.upper_wind_sigma * z(rng);
    } else if (spec.name == "frp") {
      p = d.frp;
    } else if (spec.name == "hms_plume") {
      if (out.plume)
        p = *out.plume;
      else if (d.previous_plume)
        p = *d.previous_plume;
      else
        p = Plane(R, C, kSentinel);
    } else {
      fail(ErrorCode::invalid_argument, "the synthetic world cannot produce channel '" + spec.name + "'");
    }
    if (spec.transform == ValueTransform::log1p)
      for (double& x : p.values)
        if (x != kSentinel) x = log_transform(x);
    out.input.set_channel(ch, p);
  }
  return out;
}

std::pair<Plane, MaskGrid> sample_stations(const Plane& truth, const std::vector<Cell>& stations) {
  Plane label(truth.rows, truth.cols);
  MaskGrid mask = MaskGrid::zeros(truth.rows, truth.cols);
  for (const Cell& s : stations) {
    require(s.row < truth.rows && s.col < truth.cols, ErrorCode::invalid_argument, "station cell outside the grid");
    const std::size_t i = s.row * truth.cols + s.col;
    mask.values[i] = 1.0;
    label.values[i] = log_transform(truth.values[i]);
  }
  return {std::move(label), std::move(mask)};
}

SimConfig resolve_config(const SimConfig& config) {
  config.validate();
  SimConfig out = config;
  const double first_label = static_cast<double>(config.spinup + config.lag) / kHour;
  const double span = static_cast<double>(config.frames) * static_cast<double>(config.frame_interval) / kHour;
  const double horizon = first_label + span + config.dt_hours;

  auto season = [&](double hour) {
    if (span <= 0 || hour < first_label) return config.season_intensity[0];
    const double f = (hour - first_label) / span;
    return config.season_intensity[f < 1.0 / 3.0 ? 0 : f < 2.0 / 3.0 ? 1 : 2];
  };

  if (out.sources.empty()) {
    std::mt19937_64 rng(mix_seed(config.seed, "sources"));
    std::uniform_int_distribution<std::size_t> count(config.min_sources, config.max_sources);
    const std::size_t margin_r = std::min<std::size_t>(4, config.rows / 4), margin_c = std::min<std::size_t>(4, config.cols / 4);
    std::uniform_int_distribution<std::size_t> row(margin_r, config.rows - 1 - margin_r);
    std::uniform_int_distribution<std::size_t> col(margin_c, config.cols - 1 - margin_c);
    std::uniform_real_distribution<double> rate(config.min_rate, config.max_rate);
    std::uniform_real_distribution<double> frp(config.min_frp, config.max_frp);
    std::uniform_real_distribution<double> on(config.min_on_hours, config.max_on_hours);
    std::uniform_real_distribution<double> off(config.min_off_hours, config.max_off_hours);
    std::uniform_real_distribution<double> jitter(0.6, 1.4);
    const std::size_t n = count(rng);
    for (std::size_t i = 0; i < n; ++i) {
      FireSource s;
      s.cell = {row(rng), col(rng)};
      s.rate = rate(rng);
      s.frp_mw = frp(rng);
      double t = std::uniform_real_distribution<double>(0.0, config.max_off_hours)(rng);
      while (t < horizon) {
        const double len = on(rng);
        s.windows.push_back({t, t + len, season(t) * jitter(rng)});
        t += len + off(rng);
      }
      out.sources.push_back(std::move(s));
    }
  }

  if (out.stations.empty() && config.station_count > 0) {
    std::mt19937_64 rng(mix_seed(config.seed, "stations"));
    std::vector<std::size_t> cells(config.rows * config.cols);
    std::iota(cells.begin(), cells.end(), std::size_t{0});
    std::shuffle(cells.begin(), cells.end(), rng);
    cells.resize(config.station_count);
    std::sort(cells.begin(), cells.end());
    for (std::size_t i : cells) out.stations.push_back({i / config.cols, i % config.cols});
  }
  return out;
}

namespace {

struct Snapshot {
  Plane truth;
  Plane u;
  Plane v;
  Plane frp;
};

Plane frp_plane(const SimConfig& config, double hour) {
  Plane p(config.rows, config.cols);
  for (const auto& s : config.sources) p.at(s.cell.row, s.cell.col) += s.frp_mw * s.intensity_at(hour);
  return p;
}

Plane with_background(const Plane& c, double background) {
  Plane t = c;
  for (double& x : t.values) x += background;
  return t;
}

}  // namespace

Scenario generate_scenario(const SimConfig& input, const ChannelRegistry& registry) {
  registry.validate();
  Scenario out;
  out.config = resolve_config(input);
  const SimConfig& cfg = out.config;
  out.archive.grid = cfg.grid();
  out.archive.registry = registry;
  if (cfg.frames == 0) return out;

  SimConfig quiet = cfg;
  quiet.sources.clear();

  std::mt19937_64 wind_rng(mix_seed(cfg.seed, "wind"));
  SimState state = SimState::calm(cfg.rows, cfg.cols);
  {
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> wave(0.5, 2.0);
    const double a1 = wave(wind_rng), b1 = wave(wind_rng), p1 = phase(wind_rng);
    const double a2 = wave(wind_rng), b2 = wave(wind_rng), p2 = phase(wind_rng);
    for (std::size_t r = 0; r < cfg.rows; ++r)
      for (std::size_t c = 0; c < cfg.cols; ++c) {
        const double y = static_cast<double>(r) / static_cast<double>(cfg.rows);
        const double x = static_cast<double>(c) / static_cast<double>(cfg.cols);
        const double pattern = 0.5 * (std::sin(2 * std::numbers::pi * (a1 * x + b1 * y) + p1) +
                                      std::sin(2 * std::numbers::pi * (a2 * x - b2 * y) + p2));
        state.speed_pattern.at(r, c) = 1.0 + cfg.wind.spatial_variation * pattern;
      }
    state.direction = cfg.wind.initial_direction ? *cfg.wind.initial_direction : phase(wind_rng);
  }

  const std::int64_t lag_steps = whole_steps(cfg.lag, cfg.dt_hours, "lag");
  const std::int64_t first_label = whole_steps(cfg.spinup + cfg.lag, cfg.dt_hours, "spinup");
  const std::int64_t interval = whole_steps(cfg.frame_interval, cfg.dt_hours, "frame interval");
  const std::int64_t last_label = first_label + interval * static_cast<std::int64_t>(cfg.frames - 1);
  const auto step_seconds = static_cast<Timestamp>(std::llround(cfg.dt_hours * kHour));

  std::deque<Snapshot> history;  // back() is the current step
  std::optional<Plane> last_plume;
  Timestamp last_plume_time = 0;
  std::size_t frame = 0;

  for (std::int64_t k = 0; k <= last_label; ++k) {
    update_wind(state, cfg, wind_rng);
    history.push_back({with_background(state.c, cfg.background), state.u, state.v, frp_plane(cfg, state.hours)});
    if (static_cast<std::int64_t>(history.size()) > lag_steps + 1) history.pop_front();

    if (k == first_label + interval * static_cast<std::int64_t>(frame)) {
      const Timestamp t = cfg.start + k * step_seconds;
      const Timestamp input_time = t - cfg.lag;
      const Snapshot& now = history.back();
      const Snapshot& lagged = history.front();

      SimState ahead = state;
      step(ahead, quiet);

      FrameDrivers drivers{now.truth, with_background(ahead.c, cfg.background), lagged.truth, lagged.u, lagged.v,
                           lagged.frp, std::nullopt};
      if (last_plume && input_time - last_plume_time <= cfg.lookback) drivers.previous_plume = last_plume;
      DerivedFrame derived = derive_channels(drivers, registry, cfg.noise, mix_seed(cfg.seed, "frame", frame));
      if (derived.plume) {
        last_plume = std::move(derived.plume);
        last_plume_time = input_time;
      }

      auto [label, mask] = sample_stations(now.truth, cfg.stations);
      SampleFrame f;
      f.time = t;
      f.input = std::move(derived.input);
      f.station_count = static_cast<std::size_t>(mask.sum());
      f.label = std::move(label);
      f.mask = std::move(mask);
      out.archive.frames.push_back(std::move(f));
      out.archive.truth.push_back(now.truth);
      ++frame;
    }
    if (k < last_label) step(state, cfg);
  }
  out.clamp_count = state.clamp_count;
  return out;
}

}  // namespace smokegrid
