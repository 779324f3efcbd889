// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include <nvstream/nvstream.h>

#include "common/error.hpp"
#include "engine/engine.hpp"
#include "io/report.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

struct nvs_engine {
    nvs::Engine engine;
};

namespace {

thread_local std::string g_last_error;

template <typename F> nvs_status guard(F &&fn) {
    try {
        fn();
        g_last_error.clear();
        return NVS_OK;
    } catch (const nvs::ConfigError &e) {
        g_last_error = e.what();
        return NVS_ERR_CONFIG;
    } catch (const nvs::IoError &e) {
        g_last_error = e.what();
        return NVS_ERR_IO;
    } catch (const nvs::StageError &e) {
        g_last_error = e.what();
        return NVS_ERR_STAGE;
    } catch (const nvs::StreamError &e) {
        g_last_error = e.what();
        return NVS_ERR_STREAM;
    } catch (const nvs::InvalidArgument &e) {
        g_last_error = e.what();
        return NVS_ERR_INVALID_ARGUMENT;
    } catch (const std::exception &e) {
        g_last_error = e.what();
        return NVS_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return NVS_ERR_INTERNAL;
    }
}

void require(bool ok, const char *what) {
    if (!ok)
        throw nvs::InvalidArgument(what);
}

char *dup_text(const std::string &s) {
    char *out = static_cast<char *>(std::malloc(s.size() + 1));
    if (!out)
        throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

} // namespace

extern "C" {

NVS_API const char *nvs_version(void) { return "0.1.0"; }

NVS_API const char *nvs_status_name(nvs_status status) {
    switch (status) {
    case NVS_OK:
        return "ok";
    case NVS_ERR_INVALID_ARGUMENT:
        return "invalid argument";
    case NVS_ERR_CONFIG:
        return "configuration error";
    case NVS_ERR_IO:
        return "I/O error";
    case NVS_ERR_STAGE:
        return "stage failure";
    case NVS_ERR_STREAM:
        return "stream consistency violation";
    case NVS_ERR_INTERNAL:
        return "internal error";
    }
    return "unknown status";
}

NVS_API const char *nvs_last_error(void) { return g_last_error.c_str(); }

NVS_API void nvs_free(void *text) { std::free(text); }

NVS_API nvs_status nvs_engine_create(const char *config_path, nvs_engine **out) {
    return guard([&] {
        require(out != nullptr, "nvs_engine_create: out is NULL");
        *out = nullptr;
        nvs::Config cfg = config_path ? nvs::Config::from_file(config_path) : nvs::Config();
        *out = new nvs_engine{nvs::Engine(std::move(cfg))};
    });
}

NVS_API void nvs_engine_destroy(nvs_engine *engine) { delete engine; }

NVS_API nvs_status nvs_engine_set(nvs_engine *engine, const char *key, const char *value) {
    return guard([&] {
        require(engine && key && value, "nvs_engine_set: NULL argument");
        engine->engine.config().set_from_string(key, value);
    });
}

NVS_API nvs_status nvs_engine_config(const nvs_engine *engine, char **json_out) {
    return guard([&] {
        require(engine && json_out, "nvs_engine_config: NULL argument");
        *json_out = dup_text(engine->engine.config().json().dump(2));
    });
}

NVS_API nvs_status nvs_engine_run(nvs_engine *engine, const char *out_dir,
                                  nvs_run_summary *summary, char **report) {
    return guard([&] {
        require(engine != nullptr, "nvs_engine_run: engine is NULL");
        std::optional<std::filesystem::path> dir;
        if (out_dir)
            dir = out_dir;
        const nvs::RunSummary s = engine->engine.run(dir);
        if (summary) {
            *summary = {};
            summary->input_frames = s.input_frames;
            summary->emitted_frames = static_cast<int64_t>(s.emitted_frames);
            summary->spatial_runs = static_cast<int64_t>(s.spatial_runs);
            summary->dropped_snippets = static_cast<int64_t>(s.dropped_snippets);
            summary->trailing_frame = s.trailing ? *s.trailing : -1;
            summary->output_width = s.output_resolution.width;
            summary->output_height = s.output_resolution.height;
            summary->target_views = static_cast<int32_t>(s.target_views);
            summary->lossy_input = s.lossy_input ? 1 : 0;
            for (int i = 0; i < NVS_STAGE_COUNT; ++i)
                summary->stage_mean_ms[i] = s.latency.stage_mean_ms[static_cast<std::size_t>(i)];
            summary->component_sum_ms = s.latency.component_sum_ms;
            summary->delay_ms = s.latency.delay_ms;
            summary->over_budget = s.latency.over_budget ? 1 : 0;
            summary->amortized_ms = s.latency.amortized_ms;
            summary->wall_ms = s.latency.wall_ms;
        }
        if (report)
            *report = dup_text(nvs::format_run_summary(s) + "\n" + s.table);
    });
}

NVS_API nvs_status nvs_engine_bench(nvs_engine *engine, char **report) {
    return guard([&] {
        require(engine && report, "nvs_engine_bench: NULL argument");
        *report = dup_text(engine->engine.bench());
    });
}

NVS_API nvs_status nvs_engine_serve(nvs_engine *engine, nvs_ready_fn ready, void *user) {
    return guard([&] {
        require(engine != nullptr, "nvs_engine_serve: engine is NULL");
        engine->engine.serve([&](std::uint16_t port) {
            if (ready)
                ready(port, user);
        });
    });
}

NVS_API void nvs_engine_stop(nvs_engine *engine) {
    if (engine)
        engine->engine.stop();
}

NVS_API nvs_status nvs_synth_write(nvs_engine *engine, const char *out_dir) {
    return guard([&] {
        require(engine && out_dir, "nvs_synth_write: NULL argument");
        const auto &cfg = engine->engine.config();
        const nvs::SyntheticScene scene(nvs::SyntheticSceneSpec::from_config(cfg));
        nvs::write_synthetic_dataset(
            scene, out_dir,
            nvs::parse_resolution(cfg.get<std::string>("pipeline.resolution"), "pipeline.resolution"));
    });
}

NVS_API nvs_status nvs_metrics_compare(const char *pred_dir, const char *gt_dir, double *mean_psnr,
                                       char **table) {
    return guard([&] {
        require(pred_dir && gt_dir, "nvs_metrics_compare: NULL directory");
        const auto rows = nvs::compare_frame_dirs(pred_dir, gt_dir);
        if (mean_psnr) {
            double sum = 0.0;
            for (const auto &r : rows)
                sum += r.psnr_db;
            *mean_psnr = sum / static_cast<double>(rows.size());
        }
        if (table)
            *table = dup_text(nvs::format_quality_table(rows));
    });
}

NVS_API nvs_status nvs_metrics_pose(const char *pred_file, const char *gt_file, const char *pairs,
                                    double tau_deg, nvs_pose_metrics *out, char **table) {
    return guard([&] {
        require(pred_file && gt_file, "nvs_metrics_pose: NULL file");
        const auto report = nvs::compare_pose_files(pred_file, gt_file,
                                                    nvs::parse_pair_set(pairs ? pairs : "all"), tau_deg);
        if (out) {
            out->rra = report.rra;
            out->rta = report.rta;
            out->auc_30 = report.auc_30;
            out->tau_deg = report.tau_deg;
            out->pairs = static_cast<int64_t>(report.pairs.size());
        }
        if (table)
            *table = dup_text(nvs::format_pose_table(report));
    });
}

} // extern "C"
