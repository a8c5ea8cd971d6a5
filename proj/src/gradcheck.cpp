// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "smokegrid/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace smokegrid {

GradCheckReport finite_diff_check(const LossBuilder& build, std::vector<Tensor<double>> wrt, double step,
                                  double tolerance) {
  require(step > 0.0, ErrorCode::invalid_argument, "finite difference step must be positive");
  for (Tensor<double>& t : wrt) t.set_requires_grad(true);

  {
    Tape<double> tape;
    Tensor<double> loss = build(tape);
    tape.backward(loss);
  }
  std::vector<std::vector<double>> analytic;
  analytic.reserve(wrt.size());
  for (const Tensor<double>& t : wrt) {
    if (t.has_grad())
      analytic.emplace_back(t.grad().begin(), t.grad().end());
    else
      analytic.emplace_back(t.size(), 0.0);
  }

  auto evaluate = [&build] {
    Tape<double> tape;
    return build(tape).item();
  };

  GradCheckReport report;
  for (std::size_t ti = 0; ti < wrt.size(); ++ti) {
    auto values = wrt[ti].mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + step;
      const double up = evaluate();
      values[i] = saved - step;
      const double down = evaluate();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double rel = std::abs(analytic[ti][i] - numeric) / std::max(1.0, std::abs(numeric));
      ++report.coordinates;
      if (report.coordinates == 1 || rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_tensor = ti;
        report.worst_index = i;
        report.worst_analytic = analytic[ti][i];
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.max_rel_error < tolerance;
  return report;
}

}  // namespace smokegrid
