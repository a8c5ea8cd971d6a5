// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0
//
// Station and dense error metrics in ug/m3, seasonal aggregation, heatmaps.

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "smokegrid/field.hpp"
#include "smokegrid/ingest.hpp"
#include "smokegrid/tensor.hpp"
#include "smokegrid/time.hpp"

namespace smokegrid {

/// |pred - expm1(label)| at every mask = 1 cell, row-major order.
std::vector<double> station_errors(const Plane& pred, const Plane& label, const MaskGrid& mask);

/// Empty mask: no value.
std::optional<double> mae_at_stations(const Plane& pred, const Plane& label, const MaskGrid& mask);

struct DenseError {
  double all = 0.0;
  std::optional<double> non_station;  // absent when every cell is a station
};

DenseError dense_mae(const Plane& pred, const Plane& truth, const MaskGrid& stations);

/// Every cell takes the inverse-transformed label of its nearest station
/// (Euclidean in cell units, ties to the lowest row-major index).
Plane nearest_station_interpolation(const Plane& label, const MaskGrid& mask);

/// A baseline input channel mapped back to ug/m3; sentinel cells become 0.
Plane channel_prediction(const Volume& input, std::size_t channel, ValueTransform transform);

struct EvalRecord {
  Timestamp time = 0;
  std::string system;
  std::vector<double> errors;
  std::size_t station_count = 0;
  std::optional<double> dense_mae;
  std::optional<double> dense_non_station_mae;

  std::optional<double> mae() const;
};

EvalRecord make_record(const std::string& system, Timestamp time, const Plane& pred, const Plane& label,
                       const MaskGrid& mask, const std::optional<Plane>& truth);

struct BucketSummary {
  std::optional<double> mae;
  std::size_t record_count = 0;
  std::optional<double> dense_mae;
  std::optional<double> dense_non_station_mae;
};

/// Early, Mid, Late, OffSeason, then All.
constexpr std::size_t kReportColumns = 5;

struct SeasonalReport {
  struct Row {
    std::string system;
    std::array<BucketSummary, kReportColumns> buckets;
  };
  std::vector<Row> rows;  // systems in first-seen order
  bool has_dense = false;

  const Row* find(const std::string& system) const;
  std::string text() const;
  /// `system,bucket,mae,record_count` plus the two dense columns when present.
  std::string csv() const;
};

std::string report_column_name(std::size_t column);

/// Records without a station MAE are ignored; each remaining record has
/// equal weight within its bucket.
SeasonalReport seasonal_report(const std::vector<EvalRecord>& records);

/// Writes `<prefix>.csv`, `<prefix>.pgm` (ASCII P2, maxval 255, floor of the
/// linear map of [lo, hi], clamped) and `<prefix>.txt` holding the bounds.
void export_heatmap(const Plane& plane, const std::filesystem::path& prefix, double lo, double hi);

int gray_level(double value, double lo, double hi);
Plane read_plane_csv(const std::filesystem::path& path);

}  // namespace smokegrid
