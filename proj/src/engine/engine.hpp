// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "io/config.hpp"
#include "io/pose_file.hpp"
#include "io/synthetic.hpp"
#include "stream/pipeline.hpp"

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace nvs {

// Everything a stream needs, resolved from a Config. Input comes from
// input.root when set, from the synthetic generator otherwise.
struct StreamSetup {
    std::function<std::unique_ptr<FrameSource>()> open_source;
    // Selected input cameras, intrinsics at the input resolution.
    Rig rig;
    std::vector<PoseRecord> target_poses;
    // Target cameras at the render resolution.
    std::vector<CameraView> targets;
    SceneGenerator scenes;
    std::shared_ptr<const SyntheticScene> synthetic;
    Resolution input_resolution;
    Resolution render_resolution;
    bool lossy_input = false;
    std::int64_t frames = 0;
    std::shared_ptr<const PosePredictor> predictor;
    PipelineOptions options;
};

StreamSetup prepare_stream(const Config &cfg);

std::vector<int> parse_view_list(const std::string &text);

struct RunSummary {
    std::int64_t input_frames = 0;
    std::size_t emitted_frames = 0;
    std::size_t spatial_runs = 0;
    std::size_t dropped_snippets = 0;
    std::optional<std::int64_t> trailing;
    Resolution output_resolution;
    std::size_t target_views = 0;
    bool lossy_input = false;
    LatencyReport latency;
    std::string table;
};

std::string format_run_summary(const RunSummary &s);

class Engine {
public:
    explicit Engine(Config cfg = {});

    Config &config() { return cfg_; }
    const Config &config() const { return cfg_; }

    // Runs the configured stream. With an output directory, writes
    // view_<j>/frame_<%06d>.png per target, report.txt, summary.json and
    // rig.json (the resolved input poses).
    RunSummary run(const std::optional<std::filesystem::path> &out_dir = std::nullopt);

    // Runs the stream at every bench.resolutions entry and returns the
    // per-component and amortized-runtime tables.
    std::string bench();

    // Streams to viewer clients until stop(); `on_ready` receives the bound
    // port once the listener is up.
    void serve(const std::function<void(std::uint16_t)> &on_ready = {});

    // Thread-safe; ends run(), bench() or serve() at the next frame.
    void stop() { stop_ = true; }
    bool stopping() const { return stop_; }

private:
    Config cfg_;
    std::atomic<bool> stop_{false};
};

} // namespace nvs
