// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0
//
// The forecasting canvas: a lat/lon quadrilateral split into rows x cols
// cells. Geometry is plain bilinear interpolation between the four corners,
// with longitude as x and latitude as y; row 0 is the northern edge.

#pragma once

#include <cstddef>
#include <optional>
#include <string>

namespace smokegrid {

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const LatLon&, const LatLon&) = default;
};

struct Cell {
  std::size_t row = 0;
  std::size_t col = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

struct GridSpec {
  LatLon nw{57.87, -133.54};
  LatLon sw{47.31, -127.18};
  LatLon ne{60.61, -112.19};
  LatLon se{49.43, -110.61};
  std::size_t rows = 125;
  std::size_t cols = 125;

  /// Throws if rows/cols < 2 or the corner quadrilateral is degenerate or
  /// self-intersecting.
  void validate() const;

  /// Forward bilinear map; u runs west to east, v north to south, both in [0, 1].
  LatLon point_at(double u, double v) const;
  LatLon cell_center(std::size_t row, std::size_t col) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Newton inversion of the bilinear map. Returns nullopt outside the
/// quadrilateral; exact far edges clamp into the last row/column.
std::optional<Cell> latlon_to_cell(const GridSpec& grid, double lat, double lon);

std::string format_latlon(const LatLon& p);
LatLon parse_latlon(const std::string& text);

}  // namespace smokegrid
