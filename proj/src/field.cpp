// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "smokegrid/field.hpp"

#include "smokegrid/error.hpp"

namespace smokegrid {

Plane Volume::channel(std::size_t ch) const {
  require(ch < channels, ErrorCode::invalid_argument, "channel index out of range");
  Plane p(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) p.values[i] = values[i * channels + ch];
  return p;
}

void Volume::set_channel(std::size_t ch, const Plane& p) {
  require(ch < channels, ErrorCode::invalid_argument, "channel index out of range");
  require(p.rows == rows && p.cols == cols, ErrorCode::shape_mismatch, "plane extents differ from volume");
  for (std::size_t i = 0; i < rows * cols; ++i) values[i * channels + ch] = p.values[i];
}

}  // namespace smokegrid
