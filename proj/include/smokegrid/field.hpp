// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

namespace smokegrid {

/// Row-major H x W grid of reals.
struct Plane {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Plane() = default;
  Plane(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  std::size_t size() const { return values.size(); }

  friend bool operator==(const Plane&, const Plane&) = default;
};

/// Row-major H x W x C grid, channel fastest.
struct Volume {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t channels = 0;
  std::vector<double> values;

  Volume() = default;
  Volume(std::size_t r, std::size_t c, std::size_t ch, double fill = 0.0)
      : rows(r), cols(c), channels(ch), values(r * c * ch, fill) {}

  double at(std::size_t r, std::size_t c, std::size_t ch) const { return values[(r * cols + c) * channels + ch]; }
  double& at(std::size_t r, std::size_t c, std::size_t ch) { return values[(r * cols + c) * channels + ch]; }

  Plane channel(std::size_t ch) const;
  void set_channel(std::size_t ch, const Plane& p);

  friend bool operator==(const Volume&, const Volume&) = default;
};

}  // namespace smokegrid
