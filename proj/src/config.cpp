// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "smokegrid/config.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "smokegrid/error.hpp"
#include "smokegrid/textio.hpp"
#include "smokegrid/time.hpp"

namespace smokegrid {

namespace {

// clang-format off
constexpr std::array kKeys{
  // general
  ConfigKey{"seed", "7", "seed for the simulator, initialization, shuffling and the split"},
  ConfigKey{"threads", "0", "worker threads; 0 uses SMOKEGRID_THREADS, else 1"},
  ConfigKey{"precision", "float32", "training precision: float32 or float64"},
  // paths
  ConfigKey{"archive", "data/synth", "frame archive directory (written by synth/ingest, read by train/eval)"},
  ConfigKey{"inputs", "", "comma-separated observation CSV files for ingest"},
  ConfigKey{"checkpoint", "runs/model.ckpt", "checkpoint path (best validation loss)"},
  ConfigKey{"history", "runs/history.csv", "per-epoch loss history CSV"},
  ConfigKey{"report_dir", "runs/report", "directory for the evaluation report and heatmaps"},
  ConfigKey{"resume", "false", "continue training from an existing checkpoint"},
  // grid
  ConfigKey{"grid.nw", "57.87,-133.54", "north-west corner lat,lon"},
  ConfigKey{"grid.sw", "47.31,-127.18", "south-west corner lat,lon"},
  ConfigKey{"grid.ne", "60.61,-112.19", "north-east corner lat,lon"},
  ConfigKey{"grid.se", "49.43,-110.61", "south-east corner lat,lon"},
  ConfigKey{"grid.rows", "125", "grid rows"},
  ConfigKey{"grid.cols", "125", "grid columns"},
  // ingest
  ConfigKey{"channels",
            "firework_pm25:firework_pm25:mean:log1p,bluesky_pm25:bluesky_pm25:mean:log1p,aod:aod:mean,"
            "wind_u_50m:wind_u_50m:mean,wind_v_50m:wind_v_50m:mean,wind_u_250hpa:wind_u_250hpa:mean,"
            "wind_v_250hpa:wind_v_250hpa:mean,frp:frp:sum:log1p,hms_plume:hms_plume:max",
            "input channel registry: name:variable:mean|sum|max[:none|log1p], comma-separated"},
  ConfigKey{"lag_hours", "24", "hours between input observations and the label time"},
  ConfigKey{"lookback_hours", "24", "fill-forward depth in hours"},
  ConfigKey{"spatial_fill", "false", "fill remaining sentinel cells from the nearest populated cell"},
  ConfigKey{"label_variable", "pm25", "observation variable used as the label"},
  // split
  ConfigKey{"split.train", "0.8", "training fraction"},
  ConfigKey{"split.val", "0.1", "validation fraction"},
  ConfigKey{"split.test", "0.1", "test fraction"},
  // synthetic world
  ConfigKey{"frames", "600", "synthetic frames to generate"},
  ConfigKey{"sim.rows", "64", "synthetic grid rows"},
  ConfigKey{"sim.cols", "64", "synthetic grid columns"},
  ConfigKey{"sim.cell_km", "10", "synthetic cell size in km"},
  ConfigKey{"sim.dt_hours", "1", "simulator time step in hours"},
  ConfigKey{"sim.diffusion", "5", "diffusion coefficient in km2/h"},
  ConfigKey{"sim.wind_speed", "1.5", "mean wind speed in m/s"},
  ConfigKey{"sim.wind_variation", "0.2", "relative spatial variation of the wind speed"},
  ConfigKey{"sim.wind_drift", "0.1", "wind direction random walk, rad per sqrt(hour)"},
  ConfigKey{"sim.min_sources", "3", "minimum number of fire sources"},
  ConfigKey{"sim.max_sources", "6", "maximum number of fire sources"},
  ConfigKey{"sim.stations", "40", "number of monitoring stations"},
  ConfigKey{"sim.frame_interval_hours", "8", "hours between synthetic label times"},
  ConfigKey{"sim.spinup_hours", "24", "simulated hours before the first input time"},
  ConfigKey{"sim.start", "2018-04-01T00:00:00Z", "simulation start time"},
  ConfigKey{"sim.background", "2", "background PM2.5 in ug/m3"},
  ConfigKey{"sim.season_intensity", "0.3,1.0,0.5", "emission intensity in the quiet, peak and decline thirds"},
  ConfigKey{"noise.firework_blur", "5", "box blur window of the synthetic FireWork channel"},
  ConfigKey{"noise.firework_sigma", "0.3", "log-normal noise of the synthetic FireWork channel"},
  ConfigKey{"noise.bluesky_sigma", "0.6", "log-normal noise of the synthetic BlueSky channel"},
  ConfigKey{"noise.bluesky_bias", "1.5", "multiplicative bias of the synthetic BlueSky channel"},
  ConfigKey{"noise.aod_scale", "0.01", "AOD per ug/m3"},
  ConfigKey{"noise.aod_sigma", "0.02", "additive AOD noise"},
  ConfigKey{"noise.upper_wind_scale", "2.5", "250 hPa wind relative to the 50 m wind"},
  ConfigKey{"noise.upper_wind_sigma", "0.5", "additive 250 hPa wind noise in m/s"},
  ConfigKey{"noise.plume_threshold", "10", "plume flag threshold in ug/m3"},
  ConfigKey{"noise.plume_dropout", "0.3", "probability that a plume frame is missing"},
  // network and training
  ConfigKey{"net.backbone", "11x16:relu,7x16:relu,5x16:relu,3x16:relu,3x16:relu", "backbone layers"},
  ConfigKey{"net.head_fw", "3x16:relu,3x1:none", "FireWork head layers"},
  ConfigKey{"net.head_bscan", "3x16:relu,3x1:none", "BlueSky head layers"},
  ConfigKey{"net.head_pm25", "3x16:relu,3x1:none", "PM2.5 head layers"},
  ConfigKey{"net.input_mask", "observed", "first-layer mask: observed or stations"},
  ConfigKey{"epochs", "20", "training epochs"},
  ConfigKey{"gamma_fw", "0.25", "FireWork reconstruction loss weight"},
  ConfigKey{"gamma_bscan", "0.25", "BlueSky reconstruction loss weight"},
  ConfigKey{"gamma_pm25", "1.0", "masked PM2.5 loss weight"},
  ConfigKey{"lr", "0.001", "learning rate"},
  ConfigKey{"beta1", "0.9", "first moment decay"},
  ConfigKey{"beta2", "0.999", "second moment decay"},
  ConfigKey{"adam_eps", "1e-8", "optimizer epsilon"},
  ConfigKey{"loss_reduction", "sum", "L1 reduction: sum or mean"},
  ConfigKey{"conv_eps", "1e-8", "sparse convolution normalization epsilon"},
  // evaluation
  ConfigKey{"eval.subset", "test", "frames to evaluate: test, val, train or all"},
  ConfigKey{"heatmaps", "0", "number of prediction heatmaps to export"},
  ConfigKey{"heatmap.lo", "0", "heatmap lower bound in ug/m3"},
  ConfigKey{"heatmap.hi", "100", "heatmap upper bound in ug/m3"},
  // gradient check
  ConfigKey{"gradcheck.step", "1e-5", "central difference step"},
  ConfigKey{"gradcheck.tolerance", "1e-4", "maximum relative error"},
  ConfigKey{"gradcheck.inject_fault", "false", "flip the relu backward sign to exercise the checker"},
};
// clang-format on

const ConfigKey* find_key(const std::string& name) {
  for (const auto& k : kKeys)
    if (name == k.name) return &k;
  return nullptr;
}

Timestamp hours(double h) { return static_cast<Timestamp>(std::llround(h * kHour)); }

}  // namespace

std::span<const ConfigKey> config_keys() { return kKeys; }

RunConfig::RunConfig() {
  for (const auto& k : kKeys) values_[k.name] = k.default_value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  require(find_key(key) != nullptr, ErrorCode::invalid_argument, "unknown configuration key '" + key + "'");
  values_[key] = trim(value);
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  require(it != values_.end(), ErrorCode::invalid_argument, "unknown configuration key '" + key + "'");
  return it->second;
}

void RunConfig::load_file(const std::filesystem::path& path) {
  for (const auto& kv : read_key_values_file(path)) {
    try {
      set(kv.key, kv.value);
    } catch (const Error& e) {
      fail(e.code(), path.string() + ":" + std::to_string(kv.line) + ": " + e.what());
    }
  }
}

double RunConfig::get_real(const std::string& key) const {
  try {
    return parse_real(get(key));
  } catch (const Error& e) {
    fail(ErrorCode::parse, "key '" + key + "': " + e.what());
  }
}

long long RunConfig::get_integer(const std::string& key) const {
  try {
    return parse_integer(get(key));
  } catch (const Error& e) {
    fail(ErrorCode::parse, "key '" + key + "': " + e.what());
  }
}

std::size_t RunConfig::get_count(const std::string& key) const {
  const long long v = get_integer(key);
  require(v >= 0, ErrorCode::invalid_argument, "key '" + key + "' must be >= 0");
  return static_cast<std::size_t>(v);
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(ErrorCode::parse, "key '" + key + "' expects a boolean, got '" + v + "'");
}

std::filesystem::path RunConfig::get_path(const std::string& key) const { return std::filesystem::path(get(key)); }

std::uint64_t RunConfig::seed() const {
  const long long v = get_integer("seed");
  require(v >= 0, ErrorCode::invalid_argument, "seed must be >= 0");
  return static_cast<std::uint64_t>(v);
}

Precision RunConfig::precision() const {
  const std::string& p = get("precision");
  if (p == "float32") return Precision::float32;
  if (p == "float64") return Precision::float64;
  fail(ErrorCode::parse, "precision must be float32 or float64, got '" + p + "'");
}

GridSpec RunConfig::grid() const {
  GridSpec g;
  g.nw = parse_latlon(get("grid.nw"));
  g.sw = parse_latlon(get("grid.sw"));
  g.ne = parse_latlon(get("grid.ne"));
  g.se = parse_latlon(get("grid.se"));
  g.rows = get_count("grid.rows");
  g.cols = get_count("grid.cols");
  g.validate();
  return g;
}

ChannelRegistry RunConfig::registry() const {
  ChannelRegistry r = ChannelRegistry::parse(get("channels"));
  r.validate();
  return r;
}

ComposeOptions RunConfig::compose_options() const {
  ComposeOptions o;
  o.lag = hours(get_real("lag_hours"));
  o.lookback = hours(get_real("lookback_hours"));
  o.spatial_fill = get_bool("spatial_fill");
  o.label_variable = get("label_variable");
  require(o.lag >= 0 && o.lookback >= 0, ErrorCode::invalid_argument, "lag and lookback must be >= 0");
  return o;
}

SplitRatios RunConfig::split_ratios() const {
  const SplitRatios r{get_real("split.train"), get_real("split.val"), get_real("split.test")};
  require(r.train >= 0 && r.val >= 0 && r.test >= 0 && std::abs(r.train + r.val + r.test - 1.0) <= 1e-9,
          ErrorCode::invalid_argument, "split.train, split.val and split.test must be non-negative and sum to 1");
  return r;
}

SimConfig RunConfig::sim_config() const {
  SimConfig s;
  s.rows = get_count("sim.rows");
  s.cols = get_count("sim.cols");
  s.cell_km = get_real("sim.cell_km");
  s.dt_hours = get_real("sim.dt_hours");
  s.diffusion = get_real("sim.diffusion");
  s.wind.mean_speed = get_real("sim.wind_speed");
  s.wind.spatial_variation = get_real("sim.wind_variation");
  s.wind.direction_drift = get_real("sim.wind_drift");
  s.min_sources = get_count("sim.min_sources");
  s.max_sources = get_count("sim.max_sources");
  s.station_count = get_count("sim.stations");
  s.frames = get_count("frames");
  s.frame_interval = hours(get_real("sim.frame_interval_hours"));
  s.spinup = hours(get_real("sim.spinup_hours"));
  s.lag = hours(get_real("lag_hours"));
  s.lookback = hours(get_real("lookback_hours"));
  const auto start = parse_timestamp(get("sim.start"));
  require(start.has_value(), ErrorCode::parse, "sim.start must look like 2018-04-01T00:00:00Z");
  s.start = *start;
  s.background = get_real("sim.background");
  const auto season = split(get("sim.season_intensity"), ',');
  require(season.size() == 3, ErrorCode::parse, "sim.season_intensity needs three comma-separated values");
  for (std::size_t i = 0; i < 3; ++i) s.season_intensity[i] = parse_real(season[i]);
  s.noise.firework_blur = get_count("noise.firework_blur");
  s.noise.firework_sigma = get_real("noise.firework_sigma");
  s.noise.bluesky_sigma = get_real("noise.bluesky_sigma");
  s.noise.bluesky_bias = get_real("noise.bluesky_bias");
  s.noise.aod_scale = get_real("noise.aod_scale");
  s.noise.aod_sigma = get_real("noise.aod_sigma");
  s.noise.upper_wind_scale = get_real("noise.upper_wind_scale");
  s.noise.upper_wind_sigma = get_real("noise.upper_wind_sigma");
  s.noise.plume_threshold = get_real("noise.plume_threshold");
  s.noise.plume_dropout = get_real("noise.plume_dropout");
  s.seed = seed();
  s.validate();
  return s;
}

NetworkSpec RunConfig::network_spec(std::size_t in_channels) const {
  NetworkSpec n;
  n.in_channels = in_channels;
  n.backbone = parse_layers(get("net.backbone"));
  n.heads[0] = parse_layers(get("net.head_fw"));
  n.heads[1] = parse_layers(get("net.head_bscan"));
  n.heads[2] = parse_layers(get("net.head_pm25"));
  n.validate();
  return n;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.gammas = {get_real("gamma_fw"), get_real("gamma_bscan"), get_real("gamma_pm25")};
  t.adam = {get_real("lr"), get_real("beta1"), get_real("beta2"), get_real("adam_eps")};
  require(t.adam.lr > 0 && t.adam.beta1 >= 0 && t.adam.beta1 < 1 && t.adam.beta2 >= 0 && t.adam.beta2 < 1 &&
              t.adam.eps > 0,
          ErrorCode::invalid_argument, "optimizer settings need lr > 0, betas in [0, 1) and eps > 0");
  t.epochs = get_count("epochs");
  t.seed = seed();
  const std::string& red = get("loss_reduction");
  require(red == "sum" || red == "mean", ErrorCode::parse, "loss_reduction must be sum or mean");
  t.reduction = red == "sum" ? Reduction::sum : Reduction::mean;
  t.conv_eps = get_real("conv_eps");
  require(t.conv_eps > 0, ErrorCode::invalid_argument, "conv_eps must be positive");
  t.checkpoint = get_path("checkpoint");
  return t;
}

InputMaskPolicy RunConfig::input_mask_policy() const {
  const std::string& p = get("net.input_mask");
  if (p == "observed") return InputMaskPolicy::observed;
  if (p == "stations") return InputMaskPolicy::stations;
  fail(ErrorCode::parse, "net.input_mask must be observed or stations, got '" + p + "'");
}

std::string RunConfig::dump() const {
  std::ostringstream os;
  for (const auto& k : kKeys) os << k.name << " = " << values_.at(k.name) << '\n';
  return os.str();
}

}  // namespace smokegrid
