// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0
//
// Flat `key = value` run configuration. Every key has a default; unknown keys
// are rejected. Later assignments override earlier ones.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "smokegrid/grid.hpp"
#include "smokegrid/ingest.hpp"
#include "smokegrid/network.hpp"
#include "smokegrid/synth.hpp"

namespace smokegrid {

struct ConfigKey {
  const char* name;
  const char* default_value;
  const char* help;
};

std::span<const ConfigKey> config_keys();

enum class Precision { float32, float64 };

class RunConfig {
 public:
  RunConfig();

  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  void load_file(const std::filesystem::path& path);

  std::string get_string(const std::string& key) const { return get(key); }
  double get_real(const std::string& key) const;
  long long get_integer(const std::string& key) const;
  std::size_t get_count(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::filesystem::path get_path(const std::string& key) const;

  std::uint64_t seed() const;
  Precision precision() const;
  GridSpec grid() const;
  ChannelRegistry registry() const;
  ComposeOptions compose_options() const;
  SplitRatios split_ratios() const;
  SimConfig sim_config() const;
  NetworkSpec network_spec(std::size_t in_channels) const;
  TrainConfig train_config() const;
  InputMaskPolicy input_mask_policy() const;

  /// All keys as `key = value` lines, in table order.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace smokegrid
