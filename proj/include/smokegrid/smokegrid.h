/* Copyright (c) 2026 The smokegrid Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the smokegrid library. All handles are opaque. Functions
 * return SG_OK or an error code; sg_last_error() describes the most recent
 * failure on the calling thread.
 */

#ifndef SMOKEGRID_H_
#define SMOKEGRID_H_

#include <stddef.h>

#if defined(_WIN32)
#define SG_API __declspec(dllexport)
#elif defined(__GNUC__)
#define SG_API __attribute__((visibility("default")))
#else
#define SG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sg_status {
  SG_OK = 0,
  SG_INVALID_ARGUMENT = 1,
  SG_SHAPE_MISMATCH = 2,
  SG_IO = 3,
  SG_PARSE = 4,
  SG_NUMERICAL = 5,
  SG_STATE = 6,
  SG_CHECK_FAILED = 7, /* a command ran but reported failure (e.g. gradcheck) */
  SG_INTERNAL = 100
} sg_status;

typedef struct sg_config sg_config;
typedef struct sg_archive sg_archive;
typedef struct sg_model sg_model;

SG_API const char* sg_version(void);
SG_API const char* sg_last_error(void);
SG_API const char* sg_status_name(sg_status status);

/* Worker threads for numeric kernels; n <= 0 falls back to SMOKEGRID_THREADS, then 1. */
SG_API void sg_set_threads(int n);
SG_API int sg_threads(void);

/* Configuration */
SG_API sg_status sg_config_create(sg_config** out);
SG_API void sg_config_destroy(sg_config* config);
SG_API sg_status sg_config_load_file(sg_config* config, const char* path);
SG_API sg_status sg_config_set(sg_config* config, const char* key, const char* value);
/* Copies the value including the terminator; *needed receives the required size. */
SG_API sg_status sg_config_get(const sg_config* config, const char* key, char* buffer, size_t size, size_t* needed);
SG_API size_t sg_config_key_count(void);
SG_API const char* sg_config_key_name(size_t index);
SG_API const char* sg_config_key_default(size_t index);
SG_API const char* sg_config_key_help(size_t index);

/* Runs synth, ingest, train, eval or gradcheck. Data goes to stdout and files,
 * diagnostics to stderr. */
SG_API sg_status sg_run(const char* command, const sg_config* config);

/* Frame archives */
SG_API sg_status sg_archive_open(const char* dir, sg_archive** out);
SG_API void sg_archive_destroy(sg_archive* archive);
SG_API size_t sg_archive_frames(const sg_archive* archive);
SG_API size_t sg_archive_rows(const sg_archive* archive);
SG_API size_t sg_archive_cols(const sg_archive* archive);
SG_API size_t sg_archive_channels(const sg_archive* archive);
SG_API int sg_archive_has_truth(const sg_archive* archive);
/* Seconds since the Unix epoch. */
SG_API sg_status sg_archive_time(const sg_archive* archive, size_t frame, long long* out);
/* rows*cols values, row-major. Labels are log1p(ug/m3); truth is ug/m3. */
SG_API sg_status sg_archive_label(const sg_archive* archive, size_t frame, double* out, size_t count);
SG_API sg_status sg_archive_mask(const sg_archive* archive, size_t frame, double* out, size_t count);
SG_API sg_status sg_archive_truth(const sg_archive* archive, size_t frame, double* out, size_t count);

/* Trained models */
SG_API sg_status sg_model_load(const char* checkpoint, sg_model** out);
SG_API void sg_model_destroy(sg_model* model);
SG_API size_t sg_model_in_channels(const sg_model* model);
/* PM2.5 prediction in ug/m3 for one archive frame; rows*cols values. */
SG_API sg_status sg_model_predict(const sg_model* model, const sg_archive* archive, size_t frame, double* out,
                                  size_t count);

/* Grid geometry. corners = {nw_lat, nw_lon, sw_lat, sw_lon, ne_lat, ne_lon, se_lat, se_lon}.
 * *inside is 0 for points outside the quadrilateral. */
SG_API sg_status sg_latlon_to_cell(const double corners[8], size_t rows, size_t cols, double lat, double lon,
                                   size_t* row, size_t* col, int* inside);

#ifdef __cplusplus
}
#endif

#endif /* SMOKEGRID_H_ */
