// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smokegrid/gradcheck.hpp"

namespace smokegrid {

struct GradCheckRow {
  std::string name;
  GradCheckReport report;
};

/// Finite-difference checks of every differentiable op plus a small
/// two-layer network loss, all in 64-bit. Op inputs are drawn from `seed`
/// and kept at least 1e-2 away from relu and L1 kinks.
std::vector<GradCheckRow> gradcheck_suite(std::uint64_t seed, double step = 1e-5, double tolerance = 1e-4);

}  // namespace smokegrid
