// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "smokegrid/smokegrid.h"

#include <cstring>
#include <iostream>
#include <memory>
#include <new>
#include <string>
#include <variant>

#include "smokegrid/archive.hpp"
#include "smokegrid/commands.hpp"
#include "smokegrid/config.hpp"
#include "smokegrid/error.hpp"
#include "smokegrid/network.hpp"
#include "smokegrid/parallel.hpp"

struct sg_config {
  smokegrid::RunConfig config;
};

struct sg_archive {
  smokegrid::FrameArchive archive;
};

struct sg_model {
  smokegrid::NetworkSpec spec;
  smokegrid::InputMaskPolicy policy = smokegrid::InputMaskPolicy::observed;
  std::variant<smokegrid::ParamStore<float>, smokegrid::ParamStore<double>> params;
};

namespace {

thread_local std::string g_last_error;

sg_status to_status(smokegrid::ErrorCode code) {
  using smokegrid::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return SG_INVALID_ARGUMENT;
    case ErrorCode::shape_mismatch: return SG_SHAPE_MISMATCH;
    case ErrorCode::io: return SG_IO;
    case ErrorCode::parse: return SG_PARSE;
    case ErrorCode::numerical: return SG_NUMERICAL;
    case ErrorCode::state: return SG_STATE;
  }
  return SG_INTERNAL;
}

template <typename F>
sg_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const smokegrid::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SG_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SG_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SG_INTERNAL;
  }
}

sg_status null_argument(const char* what) {
  g_last_error = std::string(what) + " is null";
  return SG_INVALID_ARGUMENT;
}

sg_status copy_plane(const std::vector<double>& values, double* out, size_t count) {
  if (!out) return null_argument("output buffer");
  if (count < values.size()) {
    g_last_error = "output buffer holds " + std::to_string(count) + " values, " + std::to_string(values.size()) +
                   " needed";
    return SG_SHAPE_MISMATCH;
  }
  std::memcpy(out, values.data(), values.size() * sizeof(double));
  return SG_OK;
}

sg_status check_frame(const sg_archive* a, size_t frame) {
  if (!a) return null_argument("archive");
  if (frame >= a->archive.frames.size()) {
    g_last_error = "frame " + std::to_string(frame) + " out of range";
    return SG_INVALID_ARGUMENT;
  }
  return SG_OK;
}

}  // namespace

extern "C" {

const char* sg_version(void) { return "1.0.0"; }

const char* sg_last_error(void) { return g_last_error.c_str(); }

const char* sg_status_name(sg_status status) {
  switch (status) {
    case SG_OK: return "ok";
    case SG_INVALID_ARGUMENT: return "invalid argument";
    case SG_SHAPE_MISMATCH: return "shape mismatch";
    case SG_IO: return "i/o error";
    case SG_PARSE: return "parse error";
    case SG_NUMERICAL: return "numerical error";
    case SG_STATE: return "invalid state";
    case SG_CHECK_FAILED: return "check failed";
    case SG_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void sg_set_threads(int n) { smokegrid::set_thread_count(smokegrid::resolve_thread_count(n)); }

int sg_threads(void) { return smokegrid::thread_count(); }

sg_status sg_config_create(sg_config** out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new sg_config;
    return SG_OK;
  });
}

void sg_config_destroy(sg_config* config) { delete config; }

sg_status sg_config_load_file(sg_config* config, const char* path) {
  if (!config) return null_argument("config");
  if (!path) return null_argument("path");
  return guarded([&] {
    config->config.load_file(path);
    return SG_OK;
  });
}

sg_status sg_config_set(sg_config* config, const char* key, const char* value) {
  if (!config) return null_argument("config");
  if (!key || !value) return null_argument("key or value");
  return guarded([&] {
    config->config.set(key, value);
    return SG_OK;
  });
}

sg_status sg_config_get(const sg_config* config, const char* key, char* buffer, size_t size, size_t* needed) {
  if (!config) return null_argument("config");
  if (!key) return null_argument("key");
  return guarded([&] {
    const std::string& v = config->config.get(key);
    if (needed) *needed = v.size() + 1;
    if (!buffer || size < v.size() + 1) {
      g_last_error = "buffer too small for the value of '" + std::string(key) + "'";
      return SG_INVALID_ARGUMENT;
    }
    std::memcpy(buffer, v.c_str(), v.size() + 1);
    return SG_OK;
  });
}

size_t sg_config_key_count(void) { return smokegrid::config_keys().size(); }

const char* sg_config_key_name(size_t i) {
  const auto keys = smokegrid::config_keys();
  return i < keys.size() ? keys[i].name : nullptr;
}

const char* sg_config_key_default(size_t i) {
  const auto keys = smokegrid::config_keys();
  return i < keys.size() ? keys[i].default_value : nullptr;
}

const char* sg_config_key_help(size_t i) {
  const auto keys = smokegrid::config_keys();
  return i < keys.size() ? keys[i].help : nullptr;
}

sg_status sg_run(const char* command, const sg_config* config) {
  if (!command) return null_argument("command");
  if (!config) return null_argument("config");
  return guarded([&] {
    const int rc = smokegrid::run_command(command, config->config, std::cout, std::cerr);
    std::cout.flush();
    if (rc != 0) {
      g_last_error = std::string(command) + " reported failure";
      return SG_CHECK_FAILED;
    }
    return SG_OK;
  });
}

sg_status sg_archive_open(const char* dir, sg_archive** out) {
  if (!dir) return null_argument("dir");
  if (!out) return null_argument("out");
  return guarded([&] {
    auto a = std::make_unique<sg_archive>();
    a->archive = smokegrid::load_archive(dir);
    *out = a.release();
    return SG_OK;
  });
}

void sg_archive_destroy(sg_archive* archive) { delete archive; }

size_t sg_archive_frames(const sg_archive* a) { return a ? a->archive.frames.size() : 0; }
size_t sg_archive_rows(const sg_archive* a) { return a ? a->archive.grid.rows : 0; }
size_t sg_archive_cols(const sg_archive* a) { return a ? a->archive.grid.cols : 0; }
size_t sg_archive_channels(const sg_archive* a) { return a ? a->archive.registry.size() : 0; }
int sg_archive_has_truth(const sg_archive* a) { return a && a->archive.has_truth() ? 1 : 0; }

sg_status sg_archive_time(const sg_archive* a, size_t frame, long long* out) {
  if (sg_status s = check_frame(a, frame); s != SG_OK) return s;
  if (!out) return null_argument("out");
  *out = a->archive.frames[frame].time;
  return SG_OK;
}

sg_status sg_archive_label(const sg_archive* a, size_t frame, double* out, size_t count) {
  if (sg_status s = check_frame(a, frame); s != SG_OK) return s;
  return copy_plane(a->archive.frames[frame].label.values, out, count);
}

sg_status sg_archive_mask(const sg_archive* a, size_t frame, double* out, size_t count) {
  if (sg_status s = check_frame(a, frame); s != SG_OK) return s;
  return copy_plane(a->archive.frames[frame].mask.values, out, count);
}

sg_status sg_archive_truth(const sg_archive* a, size_t frame, double* out, size_t count) {
  if (sg_status s = check_frame(a, frame); s != SG_OK) return s;
  if (!a->archive.has_truth()) {
    g_last_error = "archive has no dense truth";
    return SG_STATE;
  }
  return copy_plane(a->archive.truth[frame].values, out, count);
}

sg_status sg_model_load(const char* checkpoint, sg_model** out) {
  if (!checkpoint) return null_argument("checkpoint");
  if (!out) return null_argument("out");
  return guarded([&] {
    auto m = std::make_unique<sg_model>();
    const auto info = smokegrid::read_checkpoint_info(checkpoint);
    if (info.dtype == smokegrid::DType::float32)
      m->params = smokegrid::load_checkpoint<float>(checkpoint, m->spec);
    else
      m->params = smokegrid::load_checkpoint<double>(checkpoint, m->spec);
    *out = m.release();
    return SG_OK;
  });
}

void sg_model_destroy(sg_model* model) { delete model; }

size_t sg_model_in_channels(const sg_model* model) { return model ? model->spec.in_channels : 0; }

sg_status sg_model_predict(const sg_model* model, const sg_archive* a, size_t frame, double* out, size_t count) {
  if (!model) return null_argument("model");
  if (sg_status s = check_frame(a, frame); s != SG_OK) return s;
  return guarded([&] {
    const auto& f = a->archive.frames[frame];
    const smokegrid::Plane p = std::visit(
        [&](const auto& params) {
          using T = typename std::decay_t<decltype(params)>::value_type;
          return smokegrid::predict(params, model->spec,
                                    smokegrid::make_example<T>(f, a->archive.registry, model->policy), T(1e-8));
        },
        model->params);
    return copy_plane(p.values, out, count);
  });
}

sg_status sg_latlon_to_cell(const double corners[8], size_t rows, size_t cols, double lat, double lon, size_t* row,
                            size_t* col, int* inside) {
  if (!corners || !row || !col || !inside) return null_argument("argument");
  return guarded([&] {
    smokegrid::GridSpec g;
    g.nw = {corners[0], corners[1]};
    g.sw = {corners[2], corners[3]};
    g.ne = {corners[4], corners[5]};
    g.se = {corners[6], corners[7]};
    g.rows = rows;
    g.cols = cols;
    g.validate();
    const auto cell = smokegrid::latlon_to_cell(g, lat, lon);
    *inside = cell ? 1 : 0;
    *row = cell ? cell->row : 0;
    *col = cell ? cell->col : 0;
    return SG_OK;
  });
}

}  // extern "C"
