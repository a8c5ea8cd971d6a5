// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0
//
// WFT1 tensor files: magic "WFT1", one byte rank, rank x u32 LE extents, one
// byte dtype code (4 = float32, 8 = float64), then the row-major LE payload.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "smokegrid/tensor.hpp"

namespace smokegrid {

enum class DType : std::uint8_t { float32 = 4, float64 = 8 };

/// Type-erased tensor payload as read from disk; values are widened to double
/// and `dtype` remembers the stored width.
struct WftTensor {
  Shape shape;
  DType dtype = DType::float64;
  std::vector<double> values;
};

void write_wft(std::ostream& os, const Shape& shape, std::span<const double> values, DType dtype);
void write_wft(std::ostream& os, const Shape& shape, std::span<const float> values);
WftTensor read_wft(std::istream& is);

void save_wft(const std::filesystem::path& path, const Shape& shape, std::span<const double> values,
              DType dtype = DType::float64);
WftTensor load_wft(const std::filesystem::path& path);

/// Encoded size in bytes of a WFT1 record.
std::uint64_t wft_size(const Shape& shape, DType dtype);

template <typename T>
void write_tensor(std::ostream& os, const Tensor<T>& t);

template <typename T>
Tensor<T> to_tensor(const WftTensor& w);

}  // namespace smokegrid
