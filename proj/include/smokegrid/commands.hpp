// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0
//
// The five batch commands. Data goes to files and `out`, diagnostics to
// `log`. Each returns a process exit code; errors are thrown as Error.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "smokegrid/archive.hpp"
#include "smokegrid/config.hpp"
#include "smokegrid/eval.hpp"
#include "smokegrid/network.hpp"

namespace smokegrid {

int run_synth(const RunConfig& config, std::ostream& out, std::ostream& log);
int run_ingest(const RunConfig& config, std::ostream& out, std::ostream& log);
int run_train(const RunConfig& config, std::ostream& out, std::ostream& log);
int run_eval(const RunConfig& config, std::ostream& out, std::ostream& log);
int run_gradcheck(const RunConfig& config, std::ostream& out, std::ostream& log);

/// Dispatches on "synth", "ingest", "train", "eval" or "gradcheck".
int run_command(const std::string& command, const RunConfig& config, std::ostream& out, std::ostream& log);

/// Frame indices of `subset` (train, val, test or all), ascending.
std::vector<std::size_t> subset_indices(std::size_t frames, const SplitRatios& ratios, std::uint64_t seed,
                                        const std::string& subset);

struct Evaluation {
  std::vector<EvalRecord> records;
  std::vector<Plane> predictions;  // model output per evaluated frame
};

/// Records for "Model", "FireWork" and "BlueSky" (when those channels exist)
/// and, with dense truth, "NearestStation".
template <typename T>
Evaluation evaluate_frames(const ParamStore<T>& params, const NetworkSpec& spec, const FrameArchive& archive,
                           const std::vector<std::size_t>& indices, InputMaskPolicy policy, T conv_eps);

}  // namespace smokegrid
