// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "stages/stages.hpp"
#include "stream/latency.hpp"
#include "stream/scheduler.hpp"

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nvs {

// Pull-based source of synchronized multi-view frames, indices 0, 1, 2, ...
class FrameSource {
public:
    virtual ~FrameSource() = default;
    // nullopt once exhausted.
    virtual std::optional<MultiViewFrame> next() = 0;
    virtual std::size_t view_count() const = 0;
};

// In-memory source, mostly for tests.
class VectorFrameSource final : public FrameSource {
public:
    explicit VectorFrameSource(std::vector<MultiViewFrame> frames);
    std::optional<MultiViewFrame> next() override;
    std::size_t view_count() const override;

private:
    std::vector<MultiViewFrame> frames_;
    std::size_t next_ = 0;
};

// Releases frame t of the wrapped source no earlier than t / fps seconds
// after the first frame, like a live capture.
class PacedFrameSource final : public FrameSource {
public:
    PacedFrameSource(std::unique_ptr<FrameSource> inner, double fps);
    std::optional<MultiViewFrame> next() override;
    std::size_t view_count() const override { return inner_->view_count(); }

private:
    std::unique_ptr<FrameSource> inner_;
    double interval_ms_;
    std::optional<std::chrono::steady_clock::time_point> start_;
};

// Resolves the input camera rig from the first frame. Runs once per stream:
// cameras are static, so poses are never re-estimated.
class PosePredictor {
public:
    virtual ~PosePredictor() = default;
    virtual std::string name() const = 0;
    virtual Rig predict(const MultiViewFrame &first, const Rig &calibrated) const = 0;
};

// Returns the calibrated rig unchanged. Placeholder for a learned pose model.
class PassthroughPosePredictor final : public PosePredictor {
public:
    std::string name() const override { return "passthrough"; }
    Rig predict(const MultiViewFrame &first, const Rig &calibrated) const override;
};

enum class TrailingPolicy { drop, passthrough };

TrailingPolicy parse_trailing_policy(const std::string &name);

struct StageSet {
    std::shared_ptr<const SpatialStage> spatial;
    std::shared_ptr<const InterpolationStage> inter;
    std::shared_ptr<const SuperResStage> sr;
};

struct PipelineOptions {
    // Spatial render size; the stream is emitted at twice this.
    Resolution resolution{128, 96};
    double input_fps = 30.0;
    TrailingPolicy trailing = TrailingPolicy::drop;
    // Overlap the next keyframe's spatial pass with the current snippet.
    bool pipelined = true;
    // Live input: snippets slower than two input intervals drop the
    // following keyframe pair so the stream keeps up.
    bool live = false;
};

struct PipelineHooks {
    // Receives every emitted frame in order. Without a sink, frames are
    // collected into PipelineResult::frames.
    std::function<void(const NovelFrame &)> sink;
    // Polled at each snippet boundary; a value replaces the target views.
    std::function<std::optional<std::vector<CameraView>>()> poll_targets;
    // Called after every emitted snippet.
    std::function<void(const LatencyLedger &)> on_snippet;
    std::function<bool()> should_stop;
    std::function<void(const std::string &)> log;
};

struct PipelineResult {
    std::vector<NovelFrame> frames;
    LatencyLedger ledger;
    Rig rig;
    std::int64_t input_frames = 0;
    std::size_t emitted_frames = 0;
    std::size_t spatial_runs = 0;
    std::size_t dropped_snippets = 0;
    std::size_t target_changes = 0;
    std::optional<std::int64_t> trailing;
    // Preprocessing (pose resolution) excluded.
    double wall_ms = 0.0;
};

// Streams `source` through spatial -> interpolation -> super-resolution.
// The rig is resolved once from the first frame (through `predictor` when
// given). Each even keyframe runs the spatial stage once and is shared by
// the two snippets that contain it. A source that ends mid-snippet flushes
// the completed snippets; a stage failure raises StageError naming it.
PipelineResult run_pipeline(FrameSource &source, const Rig &rig, std::vector<CameraView> targets,
                            const StageSet &stages, const PipelineOptions &options,
                            const PipelineHooks &hooks = {},
                            const PosePredictor *predictor = nullptr);

} // namespace nvs
