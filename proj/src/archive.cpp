// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "smokegrid/archive.hpp"

#include <fstream>
#include <map>

#include "smokegrid/error.hpp"
#include "smokegrid/textio.hpp"
#include "smokegrid/wft.hpp"

namespace smokegrid {

namespace {

constexpr const char* kFormat = "smokegrid-archive-1";

std::string truth_name(std::size_t i) { return "truth_" + std::to_string(i) + ".wft"; }

}  // namespace

void save_archive(const std::filesystem::path& dir, const FrameArchive& a) {
  std::filesystem::create_directories(dir);
  const std::size_t n = a.frames.size(), H = a.grid.rows, W = a.grid.cols, C = a.registry.size();
  require(a.truth.empty() || a.truth.size() == n, ErrorCode::invalid_argument, "truth planes must match frame count");

  std::vector<double> input, label, mask;
  input.reserve(n * H * W * C);
  label.reserve(n * H * W);
  mask.reserve(n * H * W);
  for (const SampleFrame& f : a.frames) {
    require(f.input.rows == H && f.input.cols == W && f.input.channels == C && f.label.rows == H &&
                f.label.cols == W && f.mask.rows == H && f.mask.cols == W,
            ErrorCode::shape_mismatch, "frame extents differ from the archive grid");
    input.insert(input.end(), f.input.values.begin(), f.input.values.end());
    label.insert(label.end(), f.label.values.begin(), f.label.values.end());
    mask.insert(mask.end(), f.mask.values.begin(), f.mask.values.end());
  }
  save_wft(dir / "input.wft", {n, H, W, C}, input);
  save_wft(dir / "label.wft", {n, H, W}, label);
  save_wft(dir / "mask.wft", {n, H, W}, mask);
  for (std::size_t i = 0; i < a.truth.size(); ++i) save_wft(dir / truth_name(i), {H, W}, a.truth[i].values);

  std::ofstream os(dir / "manifest.txt");
  require(static_cast<bool>(os), ErrorCode::io, "cannot write manifest in " + dir.string());
  os << "format = " << kFormat << '\n'
     << "frames = " << n << '\n'
     << "rows = " << H << '\n'
     << "cols = " << W << '\n'
     << "corner_nw = " << format_latlon(a.grid.nw) << '\n'
     << "corner_sw = " << format_latlon(a.grid.sw) << '\n'
     << "corner_ne = " << format_latlon(a.grid.ne) << '\n'
     << "corner_se = " << format_latlon(a.grid.se) << '\n'
     << "channels = " << a.registry.to_string() << '\n'
     << "input = input.wft\nlabel = label.wft\nmask = mask.wft\n";
  for (std::size_t i = 0; i < n; ++i) os << "timestamp." << i << " = " << format_timestamp(a.frames[i].time) << '\n';
  for (std::size_t i = 0; i < a.truth.size(); ++i) os << "truth." << i << " = " << truth_name(i) << '\n';
  require(static_cast<bool>(os), ErrorCode::io, "failed writing manifest in " + dir.string());
}

FrameArchive load_archive(const std::filesystem::path& dir) {
  require(std::filesystem::is_directory(dir), ErrorCode::io, "archive directory not found: " + dir.string());
  std::map<std::string, std::string> kv;
  for (auto& e : read_key_values_file(dir / "manifest.txt")) kv[e.key] = e.value;
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    require(it != kv.end(), ErrorCode::parse, "manifest is missing '" + key + "'");
    return it->second;
  };
  require(get("format") == kFormat, ErrorCode::parse, "unsupported archive format '" + get("format") + "'");

  FrameArchive a;
  a.grid.rows = static_cast<std::size_t>(parse_integer(get("rows")));
  a.grid.cols = static_cast<std::size_t>(parse_integer(get("cols")));
  a.grid.nw = parse_latlon(get("corner_nw"));
  a.grid.sw = parse_latlon(get("corner_sw"));
  a.grid.ne = parse_latlon(get("corner_ne"));
  a.grid.se = parse_latlon(get("corner_se"));
  a.registry = ChannelRegistry::parse(get("channels"));
  const auto n = static_cast<std::size_t>(parse_integer(get("frames")));
  const std::size_t H = a.grid.rows, W = a.grid.cols, C = a.registry.size();

  const WftTensor input = load_wft(dir / get("input"));
  const WftTensor label = load_wft(dir / get("label"));
  const WftTensor mask = load_wft(dir / get("mask"));
  require(input.shape == Shape{n, H, W, C} && label.shape == Shape{n, H, W} && mask.shape == Shape{n, H, W},
          ErrorCode::shape_mismatch, "archive tensors do not match the manifest extents");

  for (std::size_t i = 0; i < n; ++i) {
    SampleFrame f;
    const auto ts = parse_timestamp(get("timestamp." + std::to_string(i)));
    require(ts.has_value(), ErrorCode::parse, "bad timestamp for frame " + std::to_string(i));
    f.time = *ts;
    f.input = Volume(H, W, C);
    std::copy_n(input.values.begin() + static_cast<std::ptrdiff_t>(i * H * W * C), H * W * C, f.input.values.begin());
    f.label = Plane(H, W);
    std::copy_n(label.values.begin() + static_cast<std::ptrdiff_t>(i * H * W), H * W, f.label.values.begin());
    f.mask = MaskGrid::zeros(H, W);
    std::copy_n(mask.values.begin() + static_cast<std::ptrdiff_t>(i * H * W), H * W, f.mask.values.begin());
    require(f.mask.is_binary(), ErrorCode::parse, "frame " + std::to_string(i) + " has a non-binary mask");
    f.station_count = static_cast<std::size_t>(f.mask.sum());
    a.frames.push_back(std::move(f));
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto it = kv.find("truth." + std::to_string(i));
    if (it == kv.end()) break;
    const WftTensor t = load_wft(dir / it->second);
    require(t.shape == Shape{H, W}, ErrorCode::shape_mismatch, "truth plane extents differ from the grid");
    Plane p(H, W);
    p.values = t.values;
    a.truth.push_back(std::move(p));
  }
  require(a.truth.empty() || a.truth.size() == n, ErrorCode::parse, "manifest lists truth for only some frames");
  return a;
}

}  // namespace smokegrid
