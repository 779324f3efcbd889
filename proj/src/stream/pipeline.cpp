// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "stream/pipeline.hpp"

#include "common/error.hpp"
#include "common/timer.hpp"

#include <future>
#include <thread>

namespace nvs {

VectorFrameSource::VectorFrameSource(std::vector<MultiViewFrame> frames)
    : frames_(std::move(frames)) {}

std::optional<MultiViewFrame> VectorFrameSource::next() {
    if (next_ >= frames_.size())
        return std::nullopt;
    return frames_[next_++];
}

std::size_t VectorFrameSource::view_count() const {
    return frames_.empty() ? 0 : frames_.front().views.size();
}

PacedFrameSource::PacedFrameSource(std::unique_ptr<FrameSource> inner, double fps)
    : inner_(std::move(inner)), interval_ms_(1000.0 / fps) {
    NVS_REQUIRE(inner_ != nullptr, "paced source needs an inner source");
    NVS_REQUIRE(fps > 0.0, "input fps must be positive");
}

std::optional<MultiViewFrame> PacedFrameSource::next() {
    auto f = inner_->next();
    if (!f)
        return f;
    const auto now = std::chrono::steady_clock::now();
    if (!start_)
        start_ = now;
    const auto due = *start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                   std::chrono::duration<double, std::milli>(interval_ms_ * static_cast<double>(f->t)));
    if (due > now)
        std::this_thread::sleep_until(due);
    return f;
}

Rig PassthroughPosePredictor::predict(const MultiViewFrame &, const Rig &calibrated) const {
    return calibrated;
}

TrailingPolicy parse_trailing_policy(const std::string &name) {
    if (name == "drop")
        return TrailingPolicy::drop;
    if (name == "passthrough")
        return TrailingPolicy::passthrough;
    throw ConfigError("unknown trailing-frame policy '" + name + "' (drop | passthrough)");
}

namespace {

template <typename F> auto guarded(const std::string &stage, F &&fn) {
    try {
        return fn();
    } catch (const StageError &) {
        throw;
    } catch (const std::exception &e) {
        throw StageError(stage, e.what());
    }
}

struct Keyframe {
    MultiViewFrame input;
    SpatialStageOutput output;
    std::uint64_t target_version = 0;
};

class Runner {
public:
    Runner(FrameSource &source, std::vector<CameraView> targets, const StageSet &stages,
           const PipelineOptions &opts, const PipelineHooks &hooks, PipelineResult &result)
        : source_(source), targets_(std::move(targets)), stages_(stages), opts_(opts),
          hooks_(hooks), result_(result) {}

    void run(const PosePredictor *predictor, const Rig &calibrated);

private:
    std::optional<MultiViewFrame> pull();
    std::optional<MultiViewFrame> fetch_keyframe();
    Keyframe spatial_pass(MultiViewFrame f, std::vector<CameraView> targets,
                          std::uint64_t version) const;
    void account(const Keyframe &k);
    void refresh(Keyframe &k);
    void emit(NovelFrame f);
    void log(const std::string &msg) const {
        if (hooks_.log)
            hooks_.log(msg);
    }

    FrameSource &source_;
    std::vector<CameraView> targets_;
    std::uint64_t target_version_ = 0;
    const StageSet &stages_;
    const PipelineOptions &opts_;
    const PipelineHooks &hooks_;
    PipelineResult &result_;
    Rig rig_;
    std::int64_t next_input_ = 0;
    bool exhausted_ = false;
    // Time spent blocked on the source; a paced source is not backpressure.
    double source_wait_ms_ = 0.0;
    bool stopped_ = false;
};

std::optional<MultiViewFrame> Runner::pull() {
    if (exhausted_)
        return std::nullopt;
    if (hooks_.should_stop && hooks_.should_stop()) {
        exhausted_ = true;
        stopped_ = true;
        return std::nullopt;
    }
    StopWatch wait;
    auto f = source_.next();
    source_wait_ms_ += wait.elapsed_ms();
    if (!f) {
        exhausted_ = true;
        return std::nullopt;
    }
    if (f->t != next_input_)
        throw StreamError("source delivered frame " + std::to_string(f->t) + ", expected " +
                          std::to_string(next_input_));
    ++next_input_;
    return f;
}

// Reads the odd frame and the keyframe after it. An odd frame without a
// partner is the stream's trailing frame.
std::optional<MultiViewFrame> Runner::fetch_keyframe() {
    auto odd = pull();
    if (!odd)
        return std::nullopt;
    auto key = pull();
    if (!key) {
        result_.trailing = odd->t;
        return std::nullopt;
    }
    return key;
}

Keyframe Runner::spatial_pass(MultiViewFrame f, std::vector<CameraView> targets,
                              std::uint64_t version) const {
    auto out = guarded(stages_.spatial->name(),
                       [&] { return stages_.spatial->run(f, rig_, targets, opts_.resolution); });
    return {std::move(f), std::move(out), version};
}

void Runner::account(const Keyframe &k) {
    result_.ledger.record(StageId::spatial, k.output.reconstruct_ms);
    result_.ledger.record(StageId::rendering, k.output.render_ms);
    ++result_.spatial_runs;
}

// Brings a keyframe's renders up to the current targets.
void Runner::refresh(Keyframe &k) {
    if (k.target_version == target_version_)
        return;
    if (k.output.scene) {
        StopWatch watch;
        k.output.rendered = render_targets(*k.output.scene, targets_, opts_.resolution, k.input.t);
        result_.ledger.record(StageId::rendering, watch.elapsed_ms());
    } else {
        Keyframe again = spatial_pass(k.input, targets_, target_version_);
        result_.ledger.record(StageId::spatial, again.output.reconstruct_ms);
        result_.ledger.record(StageId::rendering, again.output.render_ms);
        k.output = std::move(again.output);
    }
    k.target_version = target_version_;
}

void Runner::emit(NovelFrame f) {
    ++result_.emitted_frames;
    if (hooks_.sink)
        hooks_.sink(f);
    else
        result_.frames.push_back(std::move(f));
}

void Runner::run(const PosePredictor *predictor, const Rig &calibrated) {
    NVS_REQUIRE(stages_.spatial && stages_.inter && stages_.sr, "pipeline needs all three stages");
    NVS_REQUIRE(!targets_.empty(), "pipeline needs at least one target view");

    auto first_frame = pull();
    if (!first_frame && stopped_)
        return;
    if (!first_frame)
        throw InvalidArgument("frame source is empty");

    // Pose resolution at t = 0 is preprocessing: timed, but not part of the
    // amortized wall time.
    StopWatch pose_watch;
    rig_ = predictor ? guarded(predictor->name(), [&] { return predictor->predict(*first_frame, calibrated); })
                     : calibrated;
    if (rig_.size() != first_frame->views.size())
        throw InvalidArgument("rig has " + std::to_string(rig_.size()) + " cameras for " +
                              std::to_string(first_frame->views.size()) + " input views");
    for (const auto &cam : rig_)
        validate_extrinsics(cam.extrinsics);
    result_.ledger.record(StageId::camera_pose, pose_watch.elapsed_ms());
    result_.rig = rig_;

    StopWatch wall;
    StreamState state;
    Keyframe lo = spatial_pass(std::move(*first_frame), targets_, target_version_);
    account(lo);
    bool first = true;
    std::size_t snippets = 0;
    NovelFrame lo_upscaled;
    std::future<Keyframe> pending;

    const double interval = result_.ledger.input_interval_ms();
    for (;;) {
        StopWatch snippet_watch;
        const double waited_before = source_wait_ms_;
        // Targets change only between snippets; polling before the keyframe
        // pass lets an unpipelined run render it with the new targets.
        if (hooks_.poll_targets) {
            if (auto next = hooks_.poll_targets()) {
                NVS_REQUIRE(!next->empty(), "target update needs at least one view");
                targets_ = std::move(*next);
                ++target_version_;
                ++result_.target_changes;
            }
        }
        Keyframe hi;
        if (pending.valid()) {
            hi = pending.get();
        } else {
            auto key = fetch_keyframe();
            if (!key)
                break;
            hi = spatial_pass(std::move(*key), targets_, target_version_);
        }
        account(hi);

        refresh(lo);
        refresh(hi);

        if (opts_.pipelined)
            if (auto key = fetch_keyframe())
                pending = std::async(std::launch::async, &Runner::spatial_pass, this,
                                     std::move(*key), targets_, target_version_);

        StopWatch watch;
        NovelFrame mid = guarded(stages_.inter->name(),
                                 [&] { return stages_.inter->run(lo.output.rendered, hi.output.rendered); });
        result_.ledger.record(StageId::interpolation, watch.elapsed_ms());

        std::vector<NovelFrame> batch;
        if (first)
            batch.push_back(lo.output.rendered);
        batch.push_back(std::move(mid));
        batch.push_back(hi.output.rendered);
        watch.reset();
        auto up = guarded(stages_.sr->name(), [&] { return stages_.sr->run(batch); });
        result_.ledger.record(StageId::superres, watch.elapsed_ms());

        const SnippetPlan plan = make_snippet(lo.input.t, first);
        std::array<NovelFrame, 3> frames;
        if (first) {
            frames = {std::move(up[0]), std::move(up[1]), std::move(up[2])};
        } else {
            // The shared keyframe was emitted with the previous snippet.
            frames = {std::move(lo_upscaled), std::move(up[0]), std::move(up[1])};
        }
        lo_upscaled = frames[2];
        for (auto &f : state.emit_snippet(plan, std::move(frames)))
            emit(std::move(f));
        ++snippets;
        first = false;
        if (hooks_.on_snippet)
            hooks_.on_snippet(result_.ledger);

        const double snippet_ms = snippet_watch.elapsed_ms() - (source_wait_ms_ - waited_before);
        if (opts_.live && snippet_ms > 2.0 * interval && (pending.valid() || !exhausted_)) {
            // Skip the snippet after this one; its keyframe pair is already
            // stale. The stream restarts from the following keyframe.
            Keyframe next;
            if (pending.valid()) {
                next = pending.get();
            } else {
                auto key = fetch_keyframe();
                if (!key) {
                    lo = std::move(hi);
                    break;
                }
                next = spatial_pass(std::move(*key), targets_, target_version_);
            }
            account(next);
            ++result_.dropped_snippets;
            log("snippet " + std::to_string(plan.keyframe_lo) + " took " +
                std::to_string(snippet_ms) + " ms (> 2 input intervals); dropping frames " +
                std::to_string(hi.input.t + 1) + ".." + std::to_string(next.input.t - 1));
            state.skip_to(next.input.t);
            lo = std::move(next);
            first = true;
            continue;
        }
        lo = std::move(hi);
    }

    if (snippets == 0 && result_.dropped_snippets == 0 && !stopped_)
        throw InvalidArgument("a stream needs at least 3 input frames, got " +
                              std::to_string(next_input_));
    if (result_.trailing) {
        if (opts_.trailing == TrailingPolicy::passthrough && !first &&
            *result_.trailing == state.next_emit_index()) {
            NovelFrame dup = lo_upscaled;
            dup.t = *result_.trailing;
            emit(state.emit_single(std::move(dup)));
            log("trailing frame " + std::to_string(*result_.trailing) +
                " emitted as a copy of the last keyframe");
        } else {
            log("trailing frame " + std::to_string(*result_.trailing) + " has no keyframe partner; dropped");
        }
    }
    result_.input_frames = next_input_;
    result_.wall_ms = wall.elapsed_ms();
    result_.ledger.set_totals(result_.wall_ms, result_.emitted_frames);
}

} // namespace

PipelineResult run_pipeline(FrameSource &source, const Rig &rig, std::vector<CameraView> targets,
                            const StageSet &stages, const PipelineOptions &options,
                            const PipelineHooks &hooks, const PosePredictor *predictor) {
    PipelineResult result;
    result.ledger = LatencyLedger(options.input_fps);
    Runner runner(source, std::move(targets), stages, options, hooks, result);
    runner.run(predictor, rig);
    return result;
}

} // namespace nvs
