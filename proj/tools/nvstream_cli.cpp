// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

// nvstream command-line front end, built on the C API.
//
// Exit codes: 0 success, 1 runtime failure (I/O, stage, stream), 2 usage or
// configuration error.

#include <nvstream/nvstream.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

nvs_engine *g_serving = nullptr;

void on_signal(int) {
    if (g_serving)
        nvs_engine_stop(g_serving);
}

struct EngineDeleter {
    void operator()(nvs_engine *e) const { nvs_engine_destroy(e); }
};
using EnginePtr = std::unique_ptr<nvs_engine, EngineDeleter>;

struct TextDeleter {
    void operator()(char *p) const { nvs_free(p); }
};
using Text = std::unique_ptr<char, TextDeleter>;

struct Failure {
    int code;
};

int exit_code(nvs_status s) {
    return (s == NVS_ERR_CONFIG || s == NVS_ERR_INVALID_ARGUMENT) ? kExitUsage : kExitFailure;
}

void check(nvs_status s) {
    if (s != NVS_OK) {
        std::fprintf(stderr, "nvstream: %s: %s\n", nvs_status_name(s), nvs_last_error());
        throw Failure{exit_code(s)};
    }
}

// Options shared by the engine subcommands.
struct EngineArgs {
    std::string config;
    std::vector<std::string> sets;
    std::string input;
    std::string views;
    std::vector<std::string> targets;
    std::string res;
};

void add_engine_options(CLI::App *cmd, EngineArgs &a) {
    cmd->add_option("-c,--config", a.config, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--set", a.sets, "Override a config key, e.g. --set stages.sr.impl=bicubic");
    cmd->add_option("--input", a.input, "Dataset root (input.root); synthetic input when unset");
    cmd->add_option("--views", a.views, "Comma-separated input view indices (input.views)");
    cmd->add_option("--target", a.targets, "Target pose file (pipeline.targets), repeatable");
    cmd->add_option("--res", a.res, "Render resolution WxH (pipeline.resolution)");
}

void set(nvs_engine *e, const std::string &key, const std::string &value) {
    check(nvs_engine_set(e, key.c_str(), value.c_str()));
}

EnginePtr make_engine(const EngineArgs &a) {
    nvs_engine *raw = nullptr;
    check(nvs_engine_create(a.config.empty() ? nullptr : a.config.c_str(), &raw));
    EnginePtr e(raw);
    if (!a.input.empty())
        set(e.get(), "input.root", nlohmann::json(a.input).dump());
    if (!a.views.empty())
        set(e.get(), "input.views", "[" + a.views + "]");
    if (!a.targets.empty())
        set(e.get(), "pipeline.targets", nlohmann::json(a.targets).dump());
    if (!a.res.empty())
        set(e.get(), "pipeline.resolution", nlohmann::json(a.res).dump());
    for (const auto &kv : a.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            std::fprintf(stderr, "nvstream: --set expects key=value, got '%s'\n", kv.c_str());
            throw Failure{kExitUsage};
        }
        set(e.get(), kv.substr(0, eq), kv.substr(eq + 1));
    }
    return e;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"nvstream: real-time novel-view streaming engine"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(nvs_version()));

    EngineArgs run_args, bench_args, serve_args, synth_args;

    auto *run = app.add_subcommand("run", "Stream an input through the pipeline and write frames");
    add_engine_options(run, run_args);
    std::string out_dir, trailing;
    run->add_option("-o,--out", out_dir, "Output directory");
    run->add_option("--trailing", trailing, "Trailing-frame policy: drop | passthrough")
        ->check(CLI::IsMember({"drop", "passthrough"}));

    auto *bench = app.add_subcommand("bench", "Per-component runtime over bench.resolutions");
    add_engine_options(bench, bench_args);

    auto *serve = app.add_subcommand("serve", "Stream to viewers over the wire protocol");
    add_engine_options(serve, serve_args);
    std::string host;
    int port = -1;
    serve->add_option("--host", host, "Bind address (serve.host)");
    serve->add_option("--port", port, "Port, 0 for any (serve.port)")->check(CLI::Range(0, 65535));

    auto *metrics = app.add_subcommand("metrics", "PSNR and pose-error reports from stored outputs");
    std::string pred, gt, pred_poses, gt_poses, pairs = "all";
    double tau = 5.0;
    metrics->add_option("--pred", pred, "Predicted frames directory");
    metrics->add_option("--gt", gt, "Reference frames directory");
    metrics->add_option("--pred-poses", pred_poses, "Predicted pose file");
    metrics->add_option("--gt-poses", gt_poses, "Reference pose file");
    metrics->add_option("--pairs", pairs, "Pose pairs: all | consecutive")
        ->check(CLI::IsMember({"all", "consecutive"}));
    metrics->add_option("--tau", tau, "Accuracy threshold in degrees")->check(CLI::PositiveNumber);

    auto *synth = app.add_subcommand("synth", "Write a synthetic dataset (synth.* keys)");
    add_engine_options(synth, synth_args);
    std::string synth_out;
    synth->add_option("-o,--out", synth_out, "Dataset directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*run) {
            auto e = make_engine(run_args);
            if (!trailing.empty())
                set(e.get(), "pipeline.trailing", nlohmann::json(trailing).dump());
            char *report = nullptr;
            check(nvs_engine_run(e.get(), out_dir.empty() ? nullptr : out_dir.c_str(), nullptr,
                                 &report));
            Text text(report);
            std::fputs(text.get(), stdout);
            if (!out_dir.empty())
                std::printf("\nwrote %s\n", out_dir.c_str());
        } else if (*bench) {
            auto e = make_engine(bench_args);
            char *report = nullptr;
            check(nvs_engine_bench(e.get(), &report));
            Text text(report);
            std::fputs(text.get(), stdout);
        } else if (*serve) {
            auto e = make_engine(serve_args);
            if (!host.empty())
                set(e.get(), "serve.host", nlohmann::json(host).dump());
            if (port >= 0)
                set(e.get(), "serve.port", std::to_string(port));
            g_serving = e.get();
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            const nvs_status s = nvs_engine_serve(
                e.get(),
                [](std::uint16_t p, void *) {
                    std::printf("serving on port %u (raw TCP or WebSocket)\n", p);
                    std::fflush(stdout);
                },
                nullptr);
            g_serving = nullptr;
            check(s);
        } else if (*metrics) {
            const bool frames = !pred.empty() || !gt.empty();
            const bool poses = !pred_poses.empty() || !gt_poses.empty();
            if (!frames && !poses) {
                std::fprintf(stderr, "nvstream metrics: give --pred/--gt and/or --pred-poses/--gt-poses\n");
                return kExitUsage;
            }
            if (frames) {
                if (pred.empty() || gt.empty()) {
                    std::fprintf(stderr, "nvstream metrics: --pred and --gt go together\n");
                    return kExitUsage;
                }
                char *table = nullptr;
                check(nvs_metrics_compare(pred.c_str(), gt.c_str(), nullptr, &table));
                Text text(table);
                std::fputs(text.get(), stdout);
            }
            if (poses) {
                if (pred_poses.empty() || gt_poses.empty()) {
                    std::fprintf(stderr, "nvstream metrics: --pred-poses and --gt-poses go together\n");
                    return kExitUsage;
                }
                char *table = nullptr;
                check(nvs_metrics_pose(pred_poses.c_str(), gt_poses.c_str(), pairs.c_str(), tau,
                                       nullptr, &table));
                Text text(table);
                std::fputs(text.get(), stdout);
            }
        } else if (*synth) {
            auto e = make_engine(synth_args);
            check(nvs_synth_write(e.get(), synth_out.c_str()));
            std::printf("wrote synthetic dataset to %s\n", synth_out.c_str());
        }
    } catch (const Failure &f) {
        return f.code;
    }
    return 0;
}
