// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "smokegrid/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "smokegrid/error.hpp"
#include "smokegrid/textio.hpp"

namespace smokegrid {

// ---------------------------------------------------------------------------
// Observations

std::vector<PointObservation> read_observations_csv(std::istream& is, const std::string& source) {
  std::vector<PointObservation> out;
  std::string line;
  std::size_t n = 0;
  bool header_seen = false;
  auto where = [&] { return source + ":" + std::to_string(n) + ": "; };
  while (std::getline(is, line)) {
    ++n;
    if (n == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split(t, ',');
    if (!header_seen) {
      require(fields == std::vector<std::string>{"timestamp", "lat", "lon", "variable", "value"}, ErrorCode::parse,
              where() + "expected header 'timestamp,lat,lon,variable,value'");
      header_seen = true;
      continue;
    }
    require(fields.size() == 5, ErrorCode::parse, where() + "expected 5 fields, got " + std::to_string(fields.size()));
    const auto ts = parse_timestamp(fields[0]);
    require(ts.has_value(), ErrorCode::parse, where() + "malformed timestamp '" + fields[0] + "'");
    PointObservation obs;
    obs.time = *ts;
    try {
      obs.lat = parse_real(fields[1]);
      obs.lon = parse_real(fields[2]);
      obs.value = parse_real(fields[4]);
    } catch (const Error& e) {
      fail(ErrorCode::parse, where() + e.what());
    }
    require(!fields[3].empty(), ErrorCode::parse, where() + "empty variable name");
    require(std::isfinite(obs.value), ErrorCode::parse, where() + "non-finite value");
    obs.variable = fields[3];
    out.push_back(std::move(obs));
  }
  require(header_seen, ErrorCode::parse, source + ": missing CSV header");
  return out;
}

ObservationStore::ObservationStore(std::vector<PointObservation> observations) : total_(observations.size()) {
  for (auto& o : observations) by_variable_[o.variable].push_back(std::move(o));
  for (auto& [name, list] : by_variable_)
    std::stable_sort(list.begin(), list.end(),
                     [](const PointObservation& a, const PointObservation& b) { return a.time < b.time; });
}

std::vector<Timestamp> ObservationStore::timestamps(const std::string& variable) const {
  std::vector<Timestamp> out;
  auto it = by_variable_.find(variable);
  if (it == by_variable_.end()) return out;
  for (const auto& o : it->second)
    if (out.empty() || out.back() != o.time) out.push_back(o.time);
  return out;
}

std::span<const PointObservation> ObservationStore::at(const std::string& variable, Timestamp t) const {
  auto it = by_variable_.find(variable);
  if (it == by_variable_.end()) return {};
  const auto& list = it->second;
  auto lo = std::lower_bound(list.begin(), list.end(), t,
                             [](const PointObservation& o, Timestamp v) { return o.time < v; });
  auto hi = std::upper_bound(lo, list.end(), t, [](Timestamp v, const PointObservation& o) { return v < o.time; });
  return {lo, hi};
}

// ---------------------------------------------------------------------------
// Channel registry

namespace {

std::string_view reduce_name(ReduceRule r) {
  switch (r) {
    case ReduceRule::mean: return "mean";
    case ReduceRule::sum: return "sum";
    case ReduceRule::max: return "max";
  }
  return "?";
}

ReduceRule parse_reduce(const std::string& s) {
  if (s == "mean") return ReduceRule::mean;
  if (s == "sum") return ReduceRule::sum;
  if (s == "max") return ReduceRule::max;
  fail(ErrorCode::parse, "unknown reduce rule '" + s + "'");
}

ValueTransform parse_transform(const std::string& s) {
  if (s == "none") return ValueTransform::none;
  if (s == "log1p") return ValueTransform::log1p;
  fail(ErrorCode::parse, "unknown channel transform '" + s + "'");
}

}  // namespace

ChannelRegistry ChannelRegistry::defaults() {
  using enum ReduceRule;
  using enum ValueTransform;
  return ChannelRegistry{{
      {"firework_pm25", "firework_pm25", mean, log1p},
      {"bluesky_pm25", "bluesky_pm25", mean, log1p},
      {"aod", "aod", mean, none},
      {"wind_u_50m", "wind_u_50m", mean, none},
      {"wind_v_50m", "wind_v_50m", mean, none},
      {"wind_u_250hpa", "wind_u_250hpa", mean, none},
      {"wind_v_250hpa", "wind_v_250hpa", mean, none},
      {"frp", "frp", sum, log1p},
      {"hms_plume", "hms_plume", max, none},
  }};
}

ChannelRegistry ChannelRegistry::parse(const std::string& text) {
  ChannelRegistry reg;
  for (const auto& entry : split(text, ',')) {
    const auto f = split(entry, ':');
    require(f.size() == 3 || f.size() == 4, ErrorCode::parse,
            "channel entry must be name:variable:reduce[:transform], got '" + entry + "'");
    reg.channels.push_back({f[0], f[1], parse_reduce(f[2]), f.size() == 4 ? parse_transform(f[3]) : ValueTransform::none});
  }
  reg.validate();
  return reg;
}

std::string ChannelRegistry::to_string() const {
  std::string out;
  for (const auto& c : channels) {
    if (!out.empty()) out += ',';
    out += c.name + ":" + c.variable + ":" + std::string(reduce_name(c.reduce)) + ":" +
           (c.transform == ValueTransform::log1p ? "log1p" : "none");
  }
  return out;
}

void ChannelRegistry::validate() const {
  require(!channels.empty(), ErrorCode::invalid_argument, "channel registry is empty");
  std::set<std::string> seen;
  for (const auto& c : channels) {
    require(!c.name.empty() && !c.variable.empty(), ErrorCode::invalid_argument, "channel with empty name or variable");
    require(seen.insert(c.name).second, ErrorCode::invalid_argument, "duplicate channel name '" + c.name + "'");
  }
}

std::optional<std::size_t> ChannelRegistry::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < channels.size(); ++i)
    if (channels[i].name == name) return i;
  return std::nullopt;
}

std::vector<std::string> ChannelRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& c : channels) out.push_back(c.name);
  return out;
}

// ---------------------------------------------------------------------------
// Rasterization and fill

Raster rasterize(std::span<const PointObservation> observations, const GridSpec& grid, ReduceRule rule) {
  Raster r{Plane(grid.rows, grid.cols), Plane(grid.rows, grid.cols), 0};
  std::vector<std::size_t> count(grid.rows * grid.cols, 0);
  for (const auto& o : observations) {
    const auto cell = latlon_to_cell(grid, o.lat, o.lon);
    if (!cell) {
      ++r.skipped;
      continue;
    }
    const std::size_t i = cell->row * grid.cols + cell->col;
    double& v = r.values.values[i];
    if (count[i] == 0)
      v = o.value;
    else if (rule == ReduceRule::max)
      v = std::max(v, o.value);
    else
      v += o.value;
    ++count[i];
    r.presence.values[i] = 1.0;
  }
  if (rule == ReduceRule::mean)
    for (std::size_t i = 0; i < count.size(); ++i)
      if (count[i] > 1) r.values.values[i] /= static_cast<double>(count[i]);
  return r;
}

Plane fill_forward(const Raster& current, std::span<const Raster> history, double sentinel) {
  Plane out = current.values;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    if (current.presence.values[i] != 0.0) continue;
    out.values[i] = sentinel;
    for (const Raster& h : history) {
      require(h.presence.size() == out.size(), ErrorCode::shape_mismatch, "fill_forward history extents differ");
      if (h.presence.values[i] != 0.0) {
        out.values[i] = h.values.values[i];
        break;
      }
    }
  }
  return out;
}

Plane fill_spatial(const Plane& plane, double sentinel) {
  std::vector<std::size_t> known;
  for (std::size_t i = 0; i < plane.values.size(); ++i)
    if (plane.values[i] != sentinel) known.push_back(i);
  if (known.empty()) return plane;
  Plane out = plane;
  for (std::size_t i = 0; i < plane.values.size(); ++i) {
    if (plane.values[i] != sentinel) continue;
    const auto r = static_cast<long long>(i / plane.cols), c = static_cast<long long>(i % plane.cols);
    long long best = std::numeric_limits<long long>::max();
    std::size_t best_idx = known.front();
    for (std::size_t k : known) {
      const auto kr = static_cast<long long>(k / plane.cols), kc = static_cast<long long>(k % plane.cols);
      const long long d = (kr - r) * (kr - r) + (kc - c) * (kc - c);
      if (d < best) {
        best = d;
        best_idx = k;
      }
    }
    out.values[i] = plane.values[best_idx];
  }
  return out;
}

double log_transform(double x) {
  require(x >= 0.0, ErrorCode::invalid_argument, "log_transform needs a non-negative concentration");
  return std::log1p(x);
}

double inverse_log_transform(double y) { return std::max(0.0, std::expm1(y)); }

// ---------------------------------------------------------------------------
// Sample composition

std::optional<SampleFrame> compose_sample(Timestamp t, const ObservationStore& store, const GridSpec& grid,
                                          const ChannelRegistry& registry, const ComposeOptions& options,
                                          ComposeReport& report) {
  const Raster truth = rasterize(store.at(options.label_variable, t), grid, ReduceRule::mean);
  report.skipped_observations += truth.skipped;
  const double stations = std::accumulate(truth.presence.values.begin(), truth.presence.values.end(), 0.0);
  if (stations == 0.0) {
    ++report.skipped_samples;
    return std::nullopt;
  }

  SampleFrame frame;
  frame.time = t;
  frame.station_count = static_cast<std::size_t>(stations);
  frame.label = Plane(grid.rows, grid.cols);
  frame.mask = MaskGrid::zeros(grid.rows, grid.cols);
  for (std::size_t i = 0; i < truth.values.size(); ++i) {
    if (truth.presence.values[i] == 0.0) continue;
    frame.label.values[i] = log_transform(truth.values.values[i]);
    frame.mask.values[i] = 1.0;
  }

  const Timestamp latest = t - options.lag;
  const Timestamp oldest = latest - options.lookback;
  frame.input = Volume(grid.rows, grid.cols, registry.size(), kSentinel);
  for (std::size_t ch = 0; ch < registry.size(); ++ch) {
    const ChannelSpec& spec = registry.channels[ch];
    std::vector<Raster> window;  // most recent first
    const auto times = store.timestamps(spec.variable);
    for (auto it = times.rbegin(); it != times.rend(); ++it) {
      if (*it > latest) continue;
      if (*it < oldest) break;
      window.push_back(rasterize(store.at(spec.variable, *it), grid, spec.reduce));
      report.skipped_observations += window.back().skipped;
    }
    if (window.empty()) continue;
    Plane filled = fill_forward(window.front(), std::span<const Raster>(window).subspan(1));
    if (options.spatial_fill) filled = fill_spatial(filled);
    if (spec.transform == ValueTransform::log1p)
      for (double& v : filled.values)
        if (v != kSentinel) v = log_transform(v);
    frame.input.set_channel(ch, filled);
  }
  return frame;
}

std::vector<SampleFrame> compose_all(const ObservationStore& store, const GridSpec& grid,
                                     const ChannelRegistry& registry, const ComposeOptions& options,
                                     ComposeReport& report) {
  std::vector<SampleFrame> frames;
  for (Timestamp t : store.timestamps(options.label_variable))
    if (auto f = compose_sample(t, store, grid, registry, options, report)) frames.push_back(std::move(*f));
  return frames;
}

SplitIndices split_dataset(std::size_t count, const SplitRatios& ratios, std::uint64_t seed) {
  require(count > 0, ErrorCode::invalid_argument, "split_dataset needs at least one sample");
  require(ratios.train >= 0 && ratios.val >= 0 && ratios.test >= 0, ErrorCode::invalid_argument,
          "split ratios must be non-negative");
  require(std::abs(ratios.train + ratios.val + ratios.test - 1.0) <= 1e-9, ErrorCode::invalid_argument,
          "split ratios must sum to 1");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n = static_cast<double>(count);
  const auto n_val = static_cast<std::size_t>(std::floor(n * ratios.val + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(n * ratios.test + 1e-9));
  const std::size_t n_train = count - n_val - n_test;
  SplitIndices s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
               order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return s;
}

}  // namespace smokegrid
