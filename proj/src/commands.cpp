// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "smokegrid/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "smokegrid/checks.hpp"
#include "smokegrid/error.hpp"
#include "smokegrid/parallel.hpp"
#include "smokegrid/synth.hpp"
#include "smokegrid/textio.hpp"

namespace smokegrid {

namespace {

void apply_threads(const RunConfig& config) {
  set_thread_count(resolve_thread_count(static_cast<int>(config.get_integer("threads"))));
}

std::string fixed(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorCode::io, "cannot write " + path.string());
  os << text;
}

FrameArchive load_existing_archive(const RunConfig& config) {
  const auto dir = config.get_path("archive");
  require(std::filesystem::is_directory(dir), ErrorCode::io, "archive directory '" + dir.string() + "' does not exist");
  return load_archive(dir);
}

template <typename T>
int train_with(const RunConfig& config, const FrameArchive& archive, std::ostream& out, std::ostream& log) {
  const SplitIndices split = split_dataset(archive.frames.size(), config.split_ratios(), config.seed());
  const InputMaskPolicy policy = config.input_mask_policy();
  auto examples = [&](const std::vector<std::size_t>& idx) {
    std::vector<Example<T>> v;
    v.reserve(idx.size());
    for (std::size_t i : idx) v.push_back(make_example<T>(archive.frames[i], archive.registry, policy));
    return v;
  };
  const auto train_set = examples(split.train);
  const auto val_set = examples(split.val);

  NetworkSpec spec = config.network_spec(archive.registry.size());
  TrainConfig tc = config.train_config();
  std::optional<ParamStore<T>> initial;
  if (config.get_bool("resume") && std::filesystem::exists(tc.checkpoint)) {
    NetworkSpec stored;
    initial = load_checkpoint<T>(tc.checkpoint, stored);
    require(stored == spec, ErrorCode::invalid_argument,
            "checkpoint architecture differs from the configured network; adjust net.* keys to resume");
    log << "resuming from " << tc.checkpoint.string() << " at step " << initial->step << '\n';
  }

  const auto history_path = config.get_path("history");
  if (history_path.has_parent_path()) std::filesystem::create_directories(history_path.parent_path());
  std::ofstream history(history_path);
  require(static_cast<bool>(history), ErrorCode::io, "cannot write " + history_path.string());
  history << "epoch,train_loss,val_loss,step\n";

  log << "training on " << train_set.size() << " frames, validating on " << val_set.size() << '\n';
  auto result = train<T>(train_set, val_set, spec, tc, std::move(initial), [&](const EpochStats& s) {
    history << s.epoch << ',' << format_real(s.train_loss) << ',' << format_real(s.val_loss) << ',' << s.step << '\n';
    history.flush();
    log << "epoch " << s.epoch << "  train " << fixed(s.train_loss) << "  val " << fixed(s.val_loss) << '\n';
  });
  if (result.history.empty() && !tc.checkpoint.empty()) save_checkpoint(tc.checkpoint, spec, result.best);

  out << "checkpoint " << tc.checkpoint.string();
  if (result.best_epoch > 0)
    out << " (best epoch " << result.best_epoch << ", val loss " << fixed(result.history[result.best_epoch - 1].val_loss)
        << ")";
  out << "\nhistory " << history_path.string() << " (" << result.history.size() << " epochs)\n";
  return 0;
}

template <typename T>
int eval_with(const RunConfig& config, const FrameArchive& archive, std::ostream& out, std::ostream&) {
  const auto ckpt = config.get_path("checkpoint");
  NetworkSpec spec;
  const ParamStore<T> params = load_checkpoint<T>(ckpt, spec);
  require(spec.in_channels == archive.registry.size(), ErrorCode::shape_mismatch,
          "checkpoint expects " + std::to_string(spec.in_channels) + " channels, archive has " +
              std::to_string(archive.registry.size()));

  const auto indices =
      subset_indices(archive.frames.size(), config.split_ratios(), config.seed(), config.get("eval.subset"));
  const Evaluation ev = evaluate_frames<T>(params, spec, archive, indices, config.input_mask_policy(),
                                           static_cast<T>(config.get_real("conv_eps")));
  const SeasonalReport report = seasonal_report(ev.records);

  const auto dir = config.get_path("report_dir");
  std::filesystem::create_directories(dir);
  write_text(dir / "report.txt", report.text());
  write_text(dir / "report.csv", report.csv());

  const std::size_t maps = std::min(config.get_count("heatmaps"), ev.predictions.size());
  const double lo = config.get_real("heatmap.lo"), hi = config.get_real("heatmap.hi");
  for (std::size_t k = 0; k < maps; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "heatmap_%03zu", k);
    export_heatmap(ev.predictions[k], dir / name, lo, hi);
  }

  out << report.text();
  out << "evaluated " << indices.size() << " frames; report in " << dir.string();
  if (maps) out << ", " << maps << " heatmaps";
  out << '\n';
  return 0;
}

}  // namespace

std::vector<std::size_t> subset_indices(std::size_t frames, const SplitRatios& ratios, std::uint64_t seed,
                                        const std::string& subset) {
  std::vector<std::size_t> idx;
  if (subset == "all") {
    idx.resize(frames);
    for (std::size_t i = 0; i < frames; ++i) idx[i] = i;
    return idx;
  }
  const SplitIndices s = split_dataset(frames, ratios, seed);
  if (subset == "train")
    idx = s.train;
  else if (subset == "val")
    idx = s.val;
  else if (subset == "test")
    idx = s.test;
  else
    fail(ErrorCode::invalid_argument, "eval.subset must be train, val, test or all, got '" + subset + "'");
  std::sort(idx.begin(), idx.end());
  return idx;
}

template <typename T>
Evaluation evaluate_frames(const ParamStore<T>& params, const NetworkSpec& spec, const FrameArchive& archive,
                           const std::vector<std::size_t>& indices, InputMaskPolicy policy, T conv_eps) {
  const auto fw = archive.registry.index_of("firework_pm25");
  const auto bs = archive.registry.index_of("bluesky_pm25");
  Evaluation ev;
  for (std::size_t i : indices) {
    require(i < archive.frames.size(), ErrorCode::invalid_argument, "frame index out of range");
    const SampleFrame& f = archive.frames[i];
    const std::optional<Plane> truth = archive.has_truth() ? std::optional<Plane>(archive.truth[i]) : std::nullopt;
    Plane pred = predict(params, spec, make_example<T>(f, archive.registry, policy), conv_eps);
    ev.records.push_back(make_record("Model", f.time, pred, f.label, f.mask, truth));
    if (fw)
      ev.records.push_back(make_record("FireWork", f.time,
                                       channel_prediction(f.input, *fw, archive.registry.channels[*fw].transform),
                                       f.label, f.mask, truth));
    if (bs)
      ev.records.push_back(make_record("BlueSky", f.time,
                                       channel_prediction(f.input, *bs, archive.registry.channels[*bs].transform),
                                       f.label, f.mask, truth));
    if (truth && f.mask.sum() > 0)
      ev.records.push_back(
          make_record("NearestStation", f.time, nearest_station_interpolation(f.label, f.mask), f.label, f.mask, truth));
    ev.predictions.push_back(std::move(pred));
  }
  return ev;
}

int run_synth(const RunConfig& config, std::ostream& out, std::ostream& log) {
  apply_threads(config);
  const SimConfig sim = config.sim_config();
  const Scenario sc = generate_scenario(sim, config.registry());
  require(sc.clamp_count == 0, ErrorCode::numerical,
          "simulator clamped " + std::to_string(sc.clamp_count) + " negative cells despite a valid CFL number");
  const auto dir = config.get_path("archive");
  save_archive(dir, sc.archive);
  log << sc.config.sources.size() << " sources, " << sc.config.stations.size() << " stations\n";
  out << "wrote " << sc.archive.frames.size() << " frames (" << sim.rows << "x" << sim.cols << ") to " << dir.string()
      << '\n';
  return 0;
}

int run_ingest(const RunConfig& config, std::ostream& out, std::ostream& log) {
  apply_threads(config);
  const std::string inputs = config.get("inputs");
  require(!inputs.empty(), ErrorCode::invalid_argument, "ingest needs at least one CSV in 'inputs'");
  std::vector<PointObservation> all;
  for (const auto& path : split(inputs, ',')) {
    std::ifstream is(path);
    require(static_cast<bool>(is), ErrorCode::io, "cannot open " + path);
    auto obs = read_observations_csv(is, path);
    all.insert(all.end(), std::make_move_iterator(obs.begin()), std::make_move_iterator(obs.end()));
  }
  const std::size_t total = all.size();
  const ObservationStore store(std::move(all));
  FrameArchive archive;
  archive.grid = config.grid();
  archive.registry = config.registry();
  ComposeReport report;
  archive.frames = compose_all(store, archive.grid, archive.registry, config.compose_options(), report);
  const auto dir = config.get_path("archive");
  save_archive(dir, archive);
  log << "read " << total << " observations\n";
  out << "wrote " << archive.frames.size() << " frames to " << dir.string() << "\nskipped observations "
      << report.skipped_observations << "\nskipped samples " << report.skipped_samples << '\n';
  return 0;
}

int run_train(const RunConfig& config, std::ostream& out, std::ostream& log) {
  apply_threads(config);
  const FrameArchive archive = load_existing_archive(config);
  require(!archive.frames.empty(), ErrorCode::invalid_argument, "archive holds no frames");
  return config.precision() == Precision::float32 ? train_with<float>(config, archive, out, log)
                                                  : train_with<double>(config, archive, out, log);
}

int run_eval(const RunConfig& config, std::ostream& out, std::ostream& log) {
  apply_threads(config);
  const FrameArchive archive = load_existing_archive(config);
  require(!archive.frames.empty(), ErrorCode::invalid_argument, "archive holds no frames");
  const CheckpointInfo info = read_checkpoint_info(config.get_path("checkpoint"));
  return info.dtype == DType::float32 ? eval_with<float>(config, archive, out, log)
                                      : eval_with<double>(config, archive, out, log);
}

int run_gradcheck(const RunConfig& config, std::ostream& out, std::ostream&) {
  apply_threads(config);
  const double tol = config.get_real("gradcheck.tolerance");
  const bool was = gradient_fault_injection();
  set_gradient_fault_injection(config.get_bool("gradcheck.inject_fault"));
  std::vector<GradCheckRow> rows;
  try {
    rows = gradcheck_suite(config.seed(), config.get_real("gradcheck.step"), tol);
  } catch (...) {
    set_gradient_fault_injection(was);
    throw;
  }
  set_gradient_fault_injection(was);

  std::size_t width = 2;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  bool ok = true;
  out << std::string("op") + std::string(width - 2, ' ') << " | coords | max rel error | result\n";
  for (const auto& r : rows) {
    char err[32];
    std::snprintf(err, sizeof err, "%.3e", r.report.max_rel_error);
    char coords[16];
    std::snprintf(coords, sizeof coords, "%6zu", r.report.coordinates);
    out << r.name << std::string(width - r.name.size(), ' ') << " | " << coords << " | " << std::string(13 - std::string(err).size(), ' ')
        << err << " | " << (r.report.passed ? "pass" : "FAIL") << '\n';
    ok = ok && r.report.passed;
  }
  out << (ok ? "all ops within " : "gradient check failed; tolerance ") << tol << '\n';
  return ok ? 0 : 1;
}

int run_command(const std::string& command, const RunConfig& config, std::ostream& out, std::ostream& log) {
  if (command == "synth") return run_synth(config, out, log);
  if (command == "ingest") return run_ingest(config, out, log);
  if (command == "train") return run_train(config, out, log);
  if (command == "eval") return run_eval(config, out, log);
  if (command == "gradcheck") return run_gradcheck(config, out, log);
  fail(ErrorCode::invalid_argument, "unknown command '" + command + "'");
}

template Evaluation evaluate_frames<float>(const ParamStore<float>&, const NetworkSpec&, const FrameArchive&,
                                           const std::vector<std::size_t>&, InputMaskPolicy, float);
template Evaluation evaluate_frames<double>(const ParamStore<double>&, const NetworkSpec&, const FrameArchive&,
                                            const std::vector<std::size_t>&, InputMaskPolicy, double);

}  // namespace smokegrid
