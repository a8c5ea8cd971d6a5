// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "smokegrid/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "smokegrid/error.hpp"
#include "smokegrid/textio.hpp"

namespace smokegrid {

namespace {

void check_same(const Plane& a, const Plane& b, const MaskGrid& m) {
  require(a.rows == b.rows && a.cols == b.cols && m.rows == a.rows && m.cols == a.cols, ErrorCode::shape_mismatch,
          "prediction, reference and mask extents differ");
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return mean(v);
}

std::string format_17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<double> station_errors(const Plane& pred, const Plane& label, const MaskGrid& mask) {
  check_same(pred, label, mask);
  std::vector<double> out;
  for (std::size_t i = 0; i < mask.values.size(); ++i)
    if (mask.values[i] == 1.0) out.push_back(std::abs(pred.values[i] - inverse_log_transform(label.values[i])));
  return out;
}

std::optional<double> mae_at_stations(const Plane& pred, const Plane& label, const MaskGrid& mask) {
  return mean_of(station_errors(pred, label, mask));
}

DenseError dense_mae(const Plane& pred, const Plane& truth, const MaskGrid& stations) {
  check_same(pred, truth, stations);
  require(!pred.values.empty(), ErrorCode::invalid_argument, "dense_mae of an empty plane");
  double all = 0.0, rest = 0.0;
  std::size_t n_rest = 0;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const double e = std::abs(pred.values[i] - truth.values[i]);
    all += e;
    if (stations.values[i] != 1.0) {
      rest += e;
      ++n_rest;
    }
  }
  DenseError out;
  out.all = all / static_cast<double>(pred.values.size());
  if (n_rest > 0) out.non_station = rest / static_cast<double>(n_rest);
  return out;
}

Plane nearest_station_interpolation(const Plane& label, const MaskGrid& mask) {
  require(mask.rows == label.rows && mask.cols == label.cols, ErrorCode::shape_mismatch, "label and mask extents differ");
  std::vector<std::size_t> stations;
  for (std::size_t i = 0; i < mask.values.size(); ++i)
    if (mask.values[i] == 1.0) stations.push_back(i);
  require(!stations.empty(), ErrorCode::invalid_argument, "nearest-station interpolation needs at least one station");
  Plane out(label.rows, label.cols);
  for (std::size_t r = 0; r < label.rows; ++r)
    for (std::size_t c = 0; c < label.cols; ++c) {
      std::size_t best = stations.front();
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t s : stations) {
        const double dr = static_cast<double>(s / label.cols) - static_cast<double>(r);
        const double dc = static_cast<double>(s % label.cols) - static_cast<double>(c);
        const double d = dr * dr + dc * dc;
        if (d < best_d) {
          best_d = d;
          best = s;
        }
      }
      out.at(r, c) = inverse_log_transform(label.values[best]);
    }
  return out;
}

Plane channel_prediction(const Volume& input, std::size_t channel, ValueTransform transform) {
  require(channel < input.channels, ErrorCode::invalid_argument, "channel index out of range");
  Plane p = input.channel(channel);
  for (double& x : p.values) {
    if (x == kSentinel)
      x = 0.0;
    else if (transform == ValueTransform::log1p)
      x = inverse_log_transform(x);
    else
      x = std::max(0.0, x);
  }
  return p;
}

std::optional<double> EvalRecord::mae() const { return mean_of(errors); }

EvalRecord make_record(const std::string& system, Timestamp time, const Plane& pred, const Plane& label,
                       const MaskGrid& mask, const std::optional<Plane>& truth) {
  EvalRecord r;
  r.system = system;
  r.time = time;
  r.errors = station_errors(pred, label, mask);
  r.station_count = r.errors.size();
  if (truth) {
    const DenseError d = dense_mae(pred, *truth, mask);
    r.dense_mae = d.all;
    r.dense_non_station_mae = d.non_station;
  }
  return r;
}

std::string report_column_name(std::size_t column) {
  if (column < 4) return std::string(bucket_name(static_cast<SeasonBucket>(column)));
  return "All";
}

const SeasonalReport::Row* SeasonalReport::find(const std::string& system) const {
  for (const auto& r : rows)
    if (r.system == system) return &r;
  return nullptr;
}

SeasonalReport seasonal_report(const std::vector<EvalRecord>& records) {
  struct Acc {
    std::vector<double> mae, dense, dense_ns;
  };
  std::vector<std::string> systems;
  std::vector<std::array<Acc, kReportColumns>> acc;
  SeasonalReport report;
  for (const auto& rec : records) {
    const auto m = rec.mae();
    if (!m) continue;
    auto it = std::find(systems.begin(), systems.end(), rec.system);
    if (it == systems.end()) {
      systems.push_back(rec.system);
      acc.emplace_back();
      it = systems.end() - 1;
    }
    auto& row = acc[static_cast<std::size_t>(it - systems.begin())];
    for (std::size_t col : {static_cast<std::size_t>(season_of(rec.time)), kReportColumns - 1}) {
      row[col].mae.push_back(*m);
      if (rec.dense_mae) row[col].dense.push_back(*rec.dense_mae);
      if (rec.dense_non_station_mae) row[col].dense_ns.push_back(*rec.dense_non_station_mae);
    }
    if (rec.dense_mae) report.has_dense = true;
  }
  for (std::size_t s = 0; s < systems.size(); ++s) {
    SeasonalReport::Row row;
    row.system = systems[s];
    for (std::size_t col = 0; col < kReportColumns; ++col) {
      const Acc& a = acc[s][col];
      row.buckets[col] = {mean_of(a.mae), a.mae.size(), mean_of(a.dense), mean_of(a.dense_ns)};
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace {

std::string cell_text(const std::optional<double>& v) {
  if (!v) return "—";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

std::size_t display_width(const std::string& s) {
  // Count UTF-8 code points.
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char ch) { return (ch & 0xC0) != 0x80; }));
}

std::string pad(const std::string& s, std::size_t width, bool right) {
  const std::size_t w = display_width(s);
  const std::string fill(width > w ? width - w : 0, ' ');
  return right ? fill + s : s + fill;
}

}  // namespace

std::string SeasonalReport::text() const {
  const std::array<std::string, kReportColumns> headers{"Early (Apr+May)", "Mid (Jun+Jul+Aug)", "Late (Sep+Oct)",
                                                        "OffSeason", "All"};
  std::vector<std::vector<std::string>> table;
  table.push_back({"System"});
  for (const auto& h : headers) table.back().push_back(h);
  auto add_rows = [&](auto value_of, const std::string& suffix) {
    for (const auto& r : rows) {
      table.push_back({r.system + suffix});
      for (const auto& b : r.buckets) table.back().push_back(cell_text(value_of(b)));
    }
  };
  add_rows([](const BucketSummary& b) { return b.mae; }, "");
  if (has_dense) {
    add_rows([](const BucketSummary& b) { return b.dense_mae; }, " dense");
    add_rows([](const BucketSummary& b) { return b.dense_non_station_mae; }, " dense non-station");
  }
  std::vector<std::size_t> width(table.front().size(), 0);
  for (const auto& row : table)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], display_width(row[i]));
  std::ostringstream os;
  for (std::size_t r = 0; r < table.size(); ++r) {
    for (std::size_t i = 0; i < table[r].size(); ++i) {
      if (i) os << " | ";
      os << pad(table[r][i], width[i], i > 0);
    }
    os << '\n';
    if (r == 0) {
      for (std::size_t i = 0; i < width.size(); ++i) os << (i ? "-+-" : "") << std::string(width[i], '-');
      os << '\n';
    }
  }
  return os.str();
}

std::string SeasonalReport::csv() const {
  std::ostringstream os;
  os << "system,bucket,mae,record_count";
  if (has_dense) os << ",dense_mae,dense_non_station_mae";
  os << '\n';
  auto value = [](const std::optional<double>& v) { return v ? format_17(*v) : std::string("—"); };
  for (const auto& r : rows)
    for (std::size_t col = 0; col < kReportColumns; ++col) {
      const auto& b = r.buckets[col];
      os << r.system << ',' << report_column_name(col) << ',' << value(b.mae) << ',' << b.record_count;
      if (has_dense) os << ',' << value(b.dense_mae) << ',' << value(b.dense_non_station_mae);
      os << '\n';
    }
  return os.str();
}

int gray_level(double value, double lo, double hi) {
  const double g = std::floor((value - lo) / (hi - lo) * 255.0);
  return static_cast<int>(std::clamp(g, 0.0, 255.0));
}

void export_heatmap(const Plane& plane, const std::filesystem::path& prefix, double lo, double hi) {
  require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, ErrorCode::invalid_argument,
          "heatmap bounds need lo < hi, got " + format_real(lo) + " and " + format_real(hi));
  require(std::all_of(plane.values.begin(), plane.values.end(), [](double v) { return std::isfinite(v); }),
          ErrorCode::numerical, "heatmap plane contains non-finite values");
  if (prefix.has_parent_path()) std::filesystem::create_directories(prefix.parent_path());
  auto open = [&](const char* ext) {
    std::filesystem::path p = prefix;
    p += ext;
    std::ofstream os(p);
    require(static_cast<bool>(os), ErrorCode::io, "cannot write " + p.string());
    return os;
  };
  {
    auto os = open(".csv");
    for (std::size_t r = 0; r < plane.rows; ++r) {
      for (std::size_t c = 0; c < plane.cols; ++c) os << (c ? "," : "") << format_17(plane.at(r, c));
      os << '\n';
    }
  }
  {
    auto os = open(".pgm");
    os << "P2\n" << plane.cols << ' ' << plane.rows << "\n255\n";
    for (std::size_t r = 0; r < plane.rows; ++r) {
      for (std::size_t c = 0; c < plane.cols; ++c) os << (c ? " " : "") << gray_level(plane.at(r, c), lo, hi);
      os << '\n';
    }
  }
  {
    auto os = open(".txt");
    os << "lo = " << format_17(lo) << "\nhi = " << format_17(hi) << '\n';
  }
}

Plane read_plane_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorCode::io, "cannot open " + path.string());
  Plane p;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    require(p.rows == 0 || cells.size() == p.cols, ErrorCode::parse,
            path.string() + ":" + std::to_string(n) + ": ragged row");
    p.cols = cells.size();
    for (const auto& c : cells) p.values.push_back(parse_real(c));
    ++p.rows;
  }
  return p;
}

}  // namespace smokegrid
