// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "smokegrid/tensor.hpp"

namespace smokegrid {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::size_t worst_tensor = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  bool passed = true;
};

using LossBuilder = std::function<Tensor<double>(Tape<double>&)>;

/// Central differences against backward(). The relative error per coordinate
/// is |analytic - numeric| / max(1, |numeric|). Only 64-bit tensors are
/// accepted; float32 differences are too coarse for the 1e-4 bar.
GradCheckReport finite_diff_check(const LossBuilder& build, std::vector<Tensor<double>> wrt, double step,
                                  double tolerance);

}  // namespace smokegrid
