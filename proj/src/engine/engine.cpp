// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "engine/engine.hpp"

#include "common/error.hpp"
#include "engine/registry.hpp"
#include "io/dataset.hpp"
#include "io/image_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nvs {

namespace fs = std::filesystem;

std::vector<int> parse_view_list(const std::string &text) {
    std::vector<int> views;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(item, &used);
            if (used != item.size() || v < 0)
                throw std::invalid_argument(item);
            views.push_back(v);
        } catch (const std::logic_error &) {
            throw ConfigError("bad view list '" + text + "': expected comma-separated indices");
        }
    }
    if (views.empty())
        throw ConfigError("empty view list");
    return views;
}

namespace {

std::vector<PoseRecord> select_poses(const std::vector<PoseRecord> &all,
                                     const std::vector<std::size_t> &positions,
                                     const std::string &what) {
    std::vector<PoseRecord> out;
    for (std::size_t p : positions) {
        if (p >= all.size())
            throw IoError(what + " has no pose for input view position " + std::to_string(p));
        out.push_back(all[p]);
    }
    return out;
}

} // namespace

StreamSetup prepare_stream(const Config &cfg) {
    StreamSetup s;
    s.render_resolution = parse_resolution(cfg.get<std::string>("pipeline.resolution"),
                                           "pipeline.resolution");
    const auto views = cfg.get<std::vector<int>>("input.views");
    if (views.size() < 2)
        throw ConfigError("config key 'input.views' (" + cfg.origin("input.views") +
                          ") must select at least two views");
    const auto root = cfg.get<std::string>("input.root");
    const RasterOptions raster = raster_options(cfg);

    std::vector<PoseRecord> all_poses;
    std::vector<std::size_t> positions;
    std::vector<PoseRecord> default_targets;
    if (root.empty()) {
        auto scene = std::make_shared<const SyntheticScene>(SyntheticSceneSpec::from_config(cfg));
        for (int v : views)
            if (v >= scene->spec().cameras)
                throw ConfigError("config key 'input.views' (" + cfg.origin("input.views") +
                                  "): view " + std::to_string(v) + " is not on the " +
                                  std::to_string(scene->spec().cameras) + "-camera synthetic ring");
        s.synthetic = scene;
        s.input_resolution = s.render_resolution;
        s.frames = scene->spec().frames;
        s.scenes = [scene](std::int64_t t) { return scene->at(t); };
        s.open_source = [scene, res = s.input_resolution, views, raster] {
            return std::make_unique<SyntheticFrameSource>(scene, res, views, raster);
        };
        all_poses = scene->ring();
        for (int v : views)
            positions.push_back(static_cast<std::size_t>(v));
        default_targets = {scene->target()};
    } else {
        auto info = std::make_shared<const DatasetInfo>(inspect_dataset(root));
        for (int v : views) {
            const auto it = std::find(info->views.begin(), info->views.end(), v);
            if (it == info->views.end())
                throw ConfigError("config key 'input.views' (" + cfg.origin("input.views") +
                                  "): " + root + " has no " + view_dir_name(v));
            positions.push_back(static_cast<std::size_t>(it - info->views.begin()));
        }
        s.input_resolution = info->resolution;
        s.lossy_input = info->lossy;
        s.frames = info->frames;
        if (info->has_scenes)
            s.scenes = dataset_scene_generator(root);
        s.open_source = [info, views] { return std::make_unique<DatasetSource>(*info, views); };
        if (info->poses)
            all_poses = *info->poses;
        if (info->targets)
            default_targets = *info->targets;
    }

    const auto pose_file = cfg.get<std::string>("poses.file");
    if (!pose_file.empty())
        all_poses = read_pose_file(pose_file);
    if (all_poses.empty())
        throw IoError("no input camera poses: add poses.json to the dataset or set poses.file");
    s.rig = make_rig(select_poses(all_poses, positions, pose_file.empty() ? "rig" : pose_file),
                     s.input_resolution);

    for (const auto &file : cfg.get<std::vector<std::string>>("pipeline.targets"))
        for (auto &p : read_pose_file(file))
            s.target_poses.push_back(p);
    if (s.target_poses.empty())
        s.target_poses = default_targets;
    if (s.target_poses.empty())
        throw ConfigError("no target viewpoints: set pipeline.targets or add target.pose to the "
                          "dataset");
    s.targets = make_rig(s.target_poses, s.render_resolution);

    const auto pose_source = cfg.get<std::string>("poses.source");
    if (pose_source == "predictor")
        s.predictor = std::make_shared<PassthroughPosePredictor>();
    else if (pose_source != "file")
        throw ConfigError("config key 'poses.source' (" + cfg.origin("poses.source") +
                          "): unknown pose source '" + pose_source + "' (file | predictor)");

    s.options.resolution = s.render_resolution;
    s.options.input_fps = cfg.get<double>("input.fps");
    if (!(s.options.input_fps > 0.0))
        throw ConfigError("config key 'input.fps' (" + cfg.origin("input.fps") +
                          ") must be positive");
    try {
        s.options.trailing = parse_trailing_policy(cfg.get<std::string>("pipeline.trailing"));
    } catch (const ConfigError &e) {
        throw ConfigError("config key 'pipeline.trailing' (" + cfg.origin("pipeline.trailing") +
                          "): " + e.what());
    }
    s.options.pipelined = cfg.get<bool>("pipeline.pipelined");
    s.options.live = cfg.get<bool>("pipeline.live");
    return s;
}

std::string format_run_summary(const RunSummary &s) {
    std::string out;
    char line[200];
    std::snprintf(line, sizeof line, "input frames: %lld\nemitted frames: %zu at %dx%d, %zu view(s)\n",
                  static_cast<long long>(s.input_frames), s.emitted_frames,
                  s.output_resolution.width, s.output_resolution.height, s.target_views);
    out += line;
    std::snprintf(line, sizeof line, "spatial passes: %zu\n", s.spatial_runs);
    out += line;
    if (s.trailing) {
        std::snprintf(line, sizeof line, "trailing frame: %lld (no keyframe partner)\n",
                      static_cast<long long>(*s.trailing));
        out += line;
    }
    if (s.dropped_snippets > 0) {
        std::snprintf(line, sizeof line, "dropped snippets (backpressure): %zu\n", s.dropped_snippets);
        out += line;
    }
    if (s.lossy_input)
        out += "note: input frames are lossy (JPEG)\n";
    return out;
}

namespace {

void write_text(const fs::path &path, const std::string &text) {
    std::ofstream out(path);
    if (!out || !(out << text))
        throw IoError("cannot write " + path.string());
}

RunSummary summarize(const PipelineResult &r, const StreamSetup &s, double budget_ms) {
    RunSummary sum;
    sum.input_frames = r.input_frames;
    sum.emitted_frames = r.emitted_frames;
    sum.spatial_runs = r.spatial_runs;
    sum.dropped_snippets = r.dropped_snippets;
    sum.trailing = r.trailing;
    sum.output_resolution = {s.render_resolution.width * 2, s.render_resolution.height * 2};
    sum.target_views = s.targets.size();
    sum.lossy_input = s.lossy_input;
    // A stop request can end the stream before any stage ran.
    if (r.emitted_frames == 0) {
        sum.table = "no frames emitted\n";
        return sum;
    }
    sum.latency = latency_report(r.ledger, budget_ms);
    sum.table = format_latency_table(sum.latency);
    return sum;
}

} // namespace

Engine::Engine(Config cfg) : cfg_(std::move(cfg)) {}

RunSummary Engine::run(const std::optional<fs::path> &out_dir) {
    stop_ = false;
    StreamSetup setup = prepare_stream(cfg_);
    const StageSet stages = make_stages(cfg_, setup.scenes);
    auto source = setup.open_source();

    PipelineHooks hooks;
    hooks.should_stop = [this] { return stop_.load(); };
    hooks.log = [](const std::string &msg) { std::fprintf(stderr, "nvstream: %s\n", msg.c_str()); };
    if (out_dir) {
        for (std::size_t j = 0; j < setup.targets.size(); ++j)
            fs::create_directories(*out_dir / view_dir_name(static_cast<int>(j)));
        hooks.sink = [dir = *out_dir](const NovelFrame &f) {
            for (std::size_t j = 0; j < f.views.size(); ++j)
                write_png(dir / view_dir_name(static_cast<int>(j)) / frame_file_name(f.t),
                          f.views[j].to_rgb8());
        };
    } else {
        hooks.sink = [](const NovelFrame &) {};
    }

    const PipelineResult result = run_pipeline(*source, setup.rig, setup.targets, stages,
                                               setup.options, hooks, setup.predictor.get());
    RunSummary sum = summarize(result, setup, cfg_.get<double>("latency.budget_ms"));

    if (out_dir) {
        write_text(*out_dir / "report.txt", format_run_summary(sum) + "\n" + sum.table);
        nlohmann::json doc;
        doc["input_frames"] = sum.input_frames;
        doc["emitted_frames"] = sum.emitted_frames;
        doc["spatial_runs"] = sum.spatial_runs;
        doc["dropped_snippets"] = sum.dropped_snippets;
        doc["trailing"] = sum.trailing ? nlohmann::json(*sum.trailing) : nlohmann::json(nullptr);
        doc["output_resolution"] = format_resolution(sum.output_resolution);
        doc["lossy_input"] = sum.lossy_input;
        nlohmann::json stages_ms;
        for (auto id : kAllStages)
            stages_ms[to_string(id)] = sum.latency.stage_mean_ms[static_cast<std::size_t>(id)];
        doc["stage_mean_ms"] = stages_ms;
        doc["component_sum_ms"] = sum.latency.component_sum_ms;
        doc["delay_ms"] = sum.latency.delay_ms;
        doc["over_budget"] = sum.latency.over_budget;
        doc["amortized_ms"] = sum.latency.amortized_ms;
        doc["wall_ms"] = sum.latency.wall_ms;
        write_text(*out_dir / "summary.json", doc.dump(2) + "\n");

        std::vector<PoseRecord> resolved;
        for (const auto &cam : result.rig)
            resolved.push_back({cam.extrinsics, cam.intrinsics.focal_x / setup.input_resolution.width});
        write_pose_file(*out_dir / "rig.json", resolved);
    }
    return sum;
}

std::string Engine::bench() {
    stop_ = false;
    const auto resolutions = cfg_.get<std::vector<std::string>>("bench.resolutions");
    if (resolutions.empty())
        throw ConfigError("config key 'bench.resolutions' (" + cfg_.origin("bench.resolutions") +
                          ") is empty");
    const int frames = cfg_.get<int>("bench.frames");
    std::string details;
    std::string summary = "| Render    | Output    | Amortized (ms/frame) | Output fps | Delay (ms) |\n"
                          "|-----------|-----------|----------------------|------------|------------|\n";
    for (const auto &res_text : resolutions) {
        Config c = cfg_;
        c.set("pipeline.resolution", res_text, "bench.resolutions");
        if (c.get<std::string>("input.root").empty())
            c.set("synth.frames", frames, "bench.frames");
        Engine sub(c);
        const RunSummary s = sub.run();
        if (stop_)
            break;
        const Resolution res = parse_resolution(res_text, "bench.resolutions");
        details += "## " + format_resolution(res) + " -> " + format_resolution(s.output_resolution) +
                   " (" + std::to_string(s.emitted_frames) + " frames)\n\n" + s.table + "\n";
        char line[200];
        std::snprintf(line, sizeof line, "| %-9s | %-9s | %20.2f | %10.1f | %10.1f |\n",
                      format_resolution(res).c_str(), format_resolution(s.output_resolution).c_str(),
                      s.latency.amortized_ms, s.latency.output_fps, s.latency.delay_ms);
        summary += line;
    }
    return details + summary;
}

} // namespace nvs
