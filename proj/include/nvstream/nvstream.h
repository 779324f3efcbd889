/* Copyright Contributors to the nvstream project
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the nvstream engine. Functions return an nvs_status; on
 * failure nvs_last_error() describes the problem (per thread). Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with nvs_free().
 */
#ifndef NVSTREAM_NVSTREAM_H
#define NVSTREAM_NVSTREAM_H

#include <stddef.h>
#include <stdint.h>

#if defined(NVS_BUILDING_LIBRARY)
#define NVS_API __attribute__((visibility("default")))
#else
#define NVS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct nvs_engine nvs_engine;

typedef enum nvs_status {
    NVS_OK = 0,
    NVS_ERR_INVALID_ARGUMENT = 1,
    NVS_ERR_CONFIG = 2,
    NVS_ERR_IO = 3,
    NVS_ERR_STAGE = 4,
    NVS_ERR_STREAM = 5,
    NVS_ERR_INTERNAL = 6
} nvs_status;

enum { NVS_STAGE_COUNT = 5 };

/* Stage order in stage_mean_ms: camera pose, spatial, rendering,
 * interpolation, super-resolution. */
typedef struct nvs_run_summary {
    int64_t input_frames;
    int64_t emitted_frames;
    int64_t spatial_runs;
    int64_t dropped_snippets;
    int64_t trailing_frame; /* -1 when every input frame was paired */
    int32_t output_width;
    int32_t output_height;
    int32_t target_views;
    int32_t lossy_input;
    double stage_mean_ms[NVS_STAGE_COUNT];
    double component_sum_ms;
    double delay_ms;
    int32_t over_budget;
    double amortized_ms;
    double wall_ms;
} nvs_run_summary;

typedef struct nvs_pose_metrics {
    double rra;
    double rta;
    double auc_30;
    double tau_deg;
    int64_t pairs;
} nvs_pose_metrics;

typedef void (*nvs_ready_fn)(uint16_t port, void *user);

NVS_API const char *nvs_version(void);
NVS_API const char *nvs_status_name(nvs_status status);
NVS_API const char *nvs_last_error(void);
NVS_API void nvs_free(void *text);

/* config_path may be NULL for the built-in defaults. */
NVS_API nvs_status nvs_engine_create(const char *config_path, nvs_engine **out);
NVS_API void nvs_engine_destroy(nvs_engine *engine);

/* Sets a dotted config key; value is parsed as JSON, else taken as a
 * string. */
NVS_API nvs_status nvs_engine_set(nvs_engine *engine, const char *key, const char *value);
/* Current configuration as JSON. */
NVS_API nvs_status nvs_engine_config(const nvs_engine *engine, char **json_out);

/* out_dir may be NULL (frames discarded). summary and report may be NULL. */
NVS_API nvs_status nvs_engine_run(nvs_engine *engine, const char *out_dir,
                                  nvs_run_summary *summary, char **report);
NVS_API nvs_status nvs_engine_bench(nvs_engine *engine, char **report);
/* Blocks until nvs_engine_stop(). ready (may be NULL) receives the bound
 * port from the serving thread. */
NVS_API nvs_status nvs_engine_serve(nvs_engine *engine, nvs_ready_fn ready, void *user);
/* Safe to call from any thread. */
NVS_API void nvs_engine_stop(nvs_engine *engine);

/* Writes a synthetic dataset from the engine's synth.* settings at
 * pipeline.resolution. */
NVS_API nvs_status nvs_synth_write(nvs_engine *engine, const char *out_dir);

NVS_API nvs_status nvs_metrics_compare(const char *pred_dir, const char *gt_dir,
                                       double *mean_psnr, char **table);
/* pairs: "all" or "consecutive". */
NVS_API nvs_status nvs_metrics_pose(const char *pred_file, const char *gt_file, const char *pairs,
                                    double tau_deg, nvs_pose_metrics *out, char **table);

#ifdef __cplusplus
}
#endif

#endif /* NVSTREAM_NVSTREAM_H */
