// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0
//
// smokegrid <synth|ingest|train|eval|gradcheck> --config <path> [--key value ...]

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "smokegrid/smokegrid.h"

namespace {

std::string key_table() {
  std::string out = "Configuration keys (--key value):\n";
  for (size_t i = 0; i < sg_config_key_count(); ++i) {
    out += "  " + std::string(sg_config_key_name(i)) + " = " + sg_config_key_default(i) + "\n      " +
           sg_config_key_help(i) + "\n";
  }
  return out;
}

int report(sg_status s) {
  std::fprintf(stderr, "smokegrid: %s: %s\n", sg_status_name(s), sg_last_error());
  return s == SG_CHECK_FAILED ? 1 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"smokegrid: sparse-supervision PM2.5 forecasting"};
  std::string command;
  std::string config_path;
  int threads = 0;
  bool list_keys = false;
  app.add_option("command", command, "synth, ingest, train, eval or gradcheck")
      ->check(CLI::IsMember({"synth", "ingest", "train", "eval", "gradcheck"}));
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--threads", threads, "worker threads (default: SMOKEGRID_THREADS, else 1)");
  app.add_flag("--list-keys", list_keys, "print every configuration key with its default");
  app.allow_extras();
  app.footer("Any configuration key can be overridden with --key value or --key=value.");
  CLI11_PARSE(app, argc, argv);

  if (list_keys) {
    std::fputs(key_table().c_str(), stdout);
    return 0;
  }
  if (command.empty()) {
    std::fputs(app.help().c_str(), stderr);
    return 2;
  }

  sg_config* cfg = nullptr;
  if (sg_status s = sg_config_create(&cfg); s != SG_OK) return report(s);
  struct Guard {
    sg_config* c;
    ~Guard() { sg_config_destroy(c); }
  } guard{cfg};

  if (!config_path.empty())
    if (sg_status s = sg_config_load_file(cfg, config_path.c_str()); s != SG_OK) return report(s);

  const std::vector<std::string> extras = app.remaining();
  for (size_t i = 0; i < extras.size(); ++i) {
    const std::string& arg = extras[i];
    if (arg.rfind("--", 0) != 0 || arg.size() < 3) {
      std::fprintf(stderr, "smokegrid: unexpected argument '%s'\n", arg.c_str());
      return 2;
    }
    std::string key = arg.substr(2), value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else if (i + 1 < extras.size() && extras[i + 1].rfind("--", 0) != 0) {
      value = extras[++i];
    } else {
      value = "true";
    }
    if (sg_status s = sg_config_set(cfg, key.c_str(), value.c_str()); s != SG_OK) return report(s);
  }
  if (threads > 0)
    if (sg_status s = sg_config_set(cfg, "threads", std::to_string(threads).c_str()); s != SG_OK) return report(s);

  if (sg_status s = sg_run(command.c_str(), cfg); s != SG_OK) return report(s);
  return 0;
}
