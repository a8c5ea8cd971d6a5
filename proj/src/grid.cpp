// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "smokegrid/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "smokegrid/error.hpp"
#include "smokegrid/textio.hpp"

namespace smokegrid {

namespace {

constexpr double kNewtonTol = 1e-10;
constexpr int kNewtonMaxIter = 25;
constexpr double kEdgeSlack = 1e-9;

double cross(const LatLon& o, const LatLon& a, const LatLon& b) {
  return (a.lon - o.lon) * (b.lat - o.lat) - (a.lat - o.lat) * (b.lon - o.lon);
}

std::size_t to_index(double t, std::size_t n) {
  const double scaled = std::floor(std::clamp(t, 0.0, 1.0) * static_cast<double>(n));
  return std::min(static_cast<std::size_t>(scaled), n - 1);
}

}  // namespace

void GridSpec::validate() const {
  require(rows >= 2 && cols >= 2, ErrorCode::invalid_argument, "grid needs at least 2 rows and 2 columns");
  // Walk the boundary NW -> NE -> SE -> SW; every turn must have the same sign.
  const std::array<LatLon, 4> ring{nw, ne, se, sw};
  int sign = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double z = cross(ring[i], ring[(i + 1) % 4], ring[(i + 2) % 4]);
    require(std::abs(z) > 1e-12, ErrorCode::invalid_argument, "degenerate grid quadrilateral");
    const int s = z > 0 ? 1 : -1;
    require(sign == 0 || s == sign, ErrorCode::invalid_argument, "grid quadrilateral is not convex");
    sign = s;
  }
}

LatLon GridSpec::point_at(double u, double v) const {
  const double a = (1 - u) * (1 - v), b = u * (1 - v), c = (1 - u) * v, d = u * v;
  return {a * nw.lat + b * ne.lat + c * sw.lat + d * se.lat, a * nw.lon + b * ne.lon + c * sw.lon + d * se.lon};
}

LatLon GridSpec::cell_center(std::size_t row, std::size_t col) const {
  return point_at((static_cast<double>(col) + 0.5) / static_cast<double>(cols),
                  (static_cast<double>(row) + 0.5) / static_cast<double>(rows));
}

std::optional<Cell> latlon_to_cell(const GridSpec& g, double lat, double lon) {
  double u = 0.5, v = 0.5;
  bool converged = false;
  for (int it = 0; it < kNewtonMaxIter; ++it) {
    const LatLon p = g.point_at(u, v);
    const double fx = p.lon - lon, fy = p.lat - lat;
    // Partial derivatives of the bilinear map.
    const double dxu = (1 - v) * (g.ne.lon - g.nw.lon) + v * (g.se.lon - g.sw.lon);
    const double dyu = (1 - v) * (g.ne.lat - g.nw.lat) + v * (g.se.lat - g.sw.lat);
    const double dxv = (1 - u) * (g.sw.lon - g.nw.lon) + u * (g.se.lon - g.ne.lon);
    const double dyv = (1 - u) * (g.sw.lat - g.nw.lat) + u * (g.se.lat - g.ne.lat);
    const double det = dxu * dyv - dxv * dyu;
    if (det == 0.0) return std::nullopt;
    const double du = (fx * dyv - fy * dxv) / det;
    const double dv = (dxu * fy - dyu * fx) / det;
    u -= du;
    v -= dv;
    if (std::abs(du) < kNewtonTol && std::abs(dv) < kNewtonTol) {
      converged = true;
      break;
    }
  }
  if (!converged || !std::isfinite(u) || !std::isfinite(v)) return std::nullopt;
  if (u < -kEdgeSlack || u > 1 + kEdgeSlack || v < -kEdgeSlack || v > 1 + kEdgeSlack) return std::nullopt;
  return Cell{to_index(v, g.rows), to_index(u, g.cols)};
}

std::string format_latlon(const LatLon& p) { return format_real(p.lat) + "," + format_real(p.lon); }

LatLon parse_latlon(const std::string& text) {
  const auto parts = split(text, ',');
  require(parts.size() == 2, ErrorCode::parse, "expected 'lat,lon', got '" + text + "'");
  return {parse_real(parts[0]), parse_real(parts[1])};
}

}  // namespace smokegrid
