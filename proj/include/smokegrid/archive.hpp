// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0
//
// A SampleFrame archive is a directory holding manifest.txt (key = value
// lines) and stacked WFT1 tensors: input.wft (N x H x W x C), label.wft and
// mask.wft (N x H x W). Synthetic archives add one truth_<i>.wft per frame.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "smokegrid/grid.hpp"
#include "smokegrid/ingest.hpp"

namespace smokegrid {

struct FrameArchive {
  GridSpec grid;
  ChannelRegistry registry;
  std::vector<SampleFrame> frames;
  /// Dense ground truth in ug/m3, parallel to `frames`; empty for real data.
  std::vector<Plane> truth;

  bool has_truth() const { return !truth.empty(); }
};

void save_archive(const std::filesystem::path& dir, const FrameArchive& archive);
FrameArchive load_archive(const std::filesystem::path& dir);

}  // namespace smokegrid
