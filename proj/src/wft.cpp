// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "smokegrid/wft.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace smokegrid {

namespace {

constexpr std::array<char, 4> kMagic{'W', 'F', 'T', '1'};

template <typename U>
void put_le(std::ostream& os, U v) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& is) {
  std::array<unsigned char, sizeof(U)> bytes;
  is.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  require(static_cast<bool>(is), ErrorCode::io, "truncated WFT1 stream");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
  return v;
}

void write_header(std::ostream& os, const Shape& shape, DType dtype) {
  require(shape.size() <= 255, ErrorCode::invalid_argument, "WFT1 rank must fit in one byte");
  os.write(kMagic.data(), kMagic.size());
  os.put(static_cast<char>(shape.size()));
  for (std::size_t e : shape) {
    require(e <= std::numeric_limits<std::uint32_t>::max(), ErrorCode::invalid_argument, "WFT1 extent exceeds 32 bits");
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(e));
  }
  os.put(static_cast<char>(dtype));
}

}  // namespace

std::uint64_t wft_size(const Shape& shape, DType dtype) {
  return 4 + 1 + 4 * shape.size() + 1 + shape_numel(shape) * static_cast<std::uint64_t>(dtype);
}

void write_wft(std::ostream& os, const Shape& shape, std::span<const double> values, DType dtype) {
  require(shape_numel(shape) == values.size(), ErrorCode::shape_mismatch, "WFT1 payload does not match shape");
  write_header(os, shape, dtype);
  for (double v : values) {
    if (dtype == DType::float64)
      put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(v));
    else
      put_le<std::uint32_t>(os, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  require(static_cast<bool>(os), ErrorCode::io, "failed writing WFT1 stream");
}

void write_wft(std::ostream& os, const Shape& shape, std::span<const float> values) {
  require(shape_numel(shape) == values.size(), ErrorCode::shape_mismatch, "WFT1 payload does not match shape");
  write_header(os, shape, DType::float32);
  for (float v : values) put_le<std::uint32_t>(os, std::bit_cast<std::uint32_t>(v));
  require(static_cast<bool>(os), ErrorCode::io, "failed writing WFT1 stream");
}

WftTensor read_wft(std::istream& is) {
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  require(static_cast<bool>(is) && magic == kMagic, ErrorCode::parse, "missing WFT1 magic");
  const int rank = is.get();
  require(rank != std::char_traits<char>::eof(), ErrorCode::io, "truncated WFT1 header");
  WftTensor out;
  for (int i = 0; i < rank; ++i) out.shape.push_back(get_le<std::uint32_t>(is));
  const int code = is.get();
  require(code == 4 || code == 8, ErrorCode::parse, "unknown WFT1 dtype code " + std::to_string(code));
  out.dtype = static_cast<DType>(code);
  const std::size_t n = shape_numel(out.shape);
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (out.dtype == DType::float64)
      out.values[i] = std::bit_cast<double>(get_le<std::uint64_t>(is));
    else
      out.values[i] = std::bit_cast<float>(get_le<std::uint32_t>(is));
  }
  return out;
}

void save_wft(const std::filesystem::path& path, const Shape& shape, std::span<const double> values, DType dtype) {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorCode::io, "cannot open " + path.string() + " for writing");
  write_wft(os, shape, values, dtype);
}

WftTensor load_wft(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::io, "cannot open " + path.string());
  return read_wft(is);
}

template <>
void write_tensor<float>(std::ostream& os, const Tensor<float>& t) {
  write_wft(os, t.shape(), t.data());
}

template <>
void write_tensor<double>(std::ostream& os, const Tensor<double>& t) {
  write_wft(os, t.shape(), t.data(), DType::float64);
}

template <typename T>
Tensor<T> to_tensor(const WftTensor& w) {
  return Tensor<T>(w.shape, std::vector<T>(w.values.begin(), w.values.end()));
}

template Tensor<float> to_tensor<float>(const WftTensor&);
template Tensor<double> to_tensor<double>(const WftTensor&);

}  // namespace smokegrid
