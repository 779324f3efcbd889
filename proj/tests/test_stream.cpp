// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "common/error.hpp"
#include "io/synthetic.hpp"
#include "oracles.hpp"
#include "stream/latency.hpp"
#include "stream/pipeline.hpp"
#include "stream/scheduler.hpp"

#include <doctest.h>

#include <atomic>
#include <set>
#include <thread>

using namespace nvs;

namespace {

NovelFrame keyed(std::int64_t t) { return NovelFrame{{FrameBuffer(2, 2)}, t, Provenance::keyframe}; }

std::array<NovelFrame, 3> snippet_frames(std::int64_t lo) {
    return {keyed(lo), keyed(lo + 1), keyed(lo + 2)};
}

// Cheap spatial stage whose output encodes the frame index, so emission
// order can be read back from the pixels. Counts its calls.
class IndexStage final : public SpatialStage {
public:
    explicit IndexStage(std::chrono::milliseconds delay = {}, bool with_scene = false)
        : delay_(delay), with_scene_(with_scene) {}
    std::string name() const override { return "index"; }
    int calls() const { return calls_.load(); }

protected:
    SpatialStageOutput process(const MultiViewFrame &f, const Rig &, std::span<const CameraView> targets,
                               Resolution res) const override {
        ++calls_;
        if (delay_.count() > 0)
            std::this_thread::sleep_for(delay_);
        SpatialStageOutput out;
        out.rendered.t = f.t;
        for (std::size_t j = 0; j < targets.size(); ++j) {
            const float v = static_cast<float>(f.t) / 1000.f + 0.1f * static_cast<float>(targets[j].intrinsics.focal_x > 100.0);
            out.rendered.views.emplace_back(res.width, res.height, Rgb{v, v, v});
        }
        if (with_scene_)
            out.scene = GaussianScene{};
        return out;
    }

private:
    std::chrono::milliseconds delay_;
    bool with_scene_;
    mutable std::atomic<int> calls_{0};
};

class ThrowingInterpolator final : public InterpolationStage {
public:
    std::string name() const override { return "flaky"; }

protected:
    NovelFrame process(const NovelFrame &, const NovelFrame &) const override {
        throw std::runtime_error("model crashed");
    }
};

class CountingPredictor final : public PosePredictor {
public:
    std::string name() const override { return "counting"; }
    Rig predict(const MultiViewFrame &, const Rig &calibrated) const override {
        ++calls;
        return calibrated;
    }
    mutable int calls = 0;
};

std::vector<MultiViewFrame> blank_frames(std::int64_t n, Resolution res = {4, 3}) {
    std::vector<MultiViewFrame> out;
    for (std::int64_t t = 0; t < n; ++t)
        out.push_back({{FrameBuffer(res.width, res.height), FrameBuffer(res.width, res.height)}, t});
    return out;
}

Rig blank_rig(Resolution res = {4, 3}) {
    const CameraView c{look_at(Vec3(0, 0, -4), Vec3::Zero()), intrinsics_from_normalized(0.8, res.width, res.height)};
    return {c, c};
}

StageSet stages_with(std::shared_ptr<const SpatialStage> spatial) {
    return {std::move(spatial), std::make_shared<BlendInterpolator>(), std::make_shared<BicubicSuperRes>()};
}

PipelineHooks logging_to(std::vector<std::string> &logs) {
    PipelineHooks h;
    h.log = [&logs](const std::string &m) { logs.push_back(m); };
    return h;
}

std::vector<std::int64_t> indices(const std::vector<NovelFrame> &frames) {
    std::vector<std::int64_t> out;
    for (const auto &f : frames)
        out.push_back(f.t);
    return out;
}

} // namespace

TEST_CASE("snippet planning") {
    SUBCASE("small inputs") {
        CHECK(plan_snippets(3).snippets == std::vector<SnippetPlan>{{0, 1, 2, true}});
        CHECK_FALSE(plan_snippets(3).trailing);
        CHECK(plan_snippets(5).snippets == std::vector<SnippetPlan>{{0, 1, 2, true}, {2, 3, 4, false}});
        CHECK(plan_snippets(4).trailing == 3);
        CHECK_THROWS_AS(plan_snippets(2), InvalidArgument);
        CHECK_THROWS_AS(make_snippet(3, false), InvalidArgument);
        CHECK_THROWS_AS(make_snippet(-2, true), InvalidArgument);
    }
    SUBCASE("300 frames") {
        const auto plan = plan_snippets(300);
        CHECK(plan.snippets.size() == 149);
        CHECK(plan.snippets.back() == SnippetPlan{296, 297, 298, false});
        CHECK(plan.trailing == 299);
        // Cross-check against direct enumeration of even keyframes with a
        // successor pair.
        std::int64_t count = 0;
        for (std::int64_t t = 0; t + 2 < 300; t += 2)
            ++count;
        CHECK(static_cast<std::int64_t>(plan.snippets.size()) == count);
    }
}

TEST_CASE("stream emission is unit stride with no duplicates") {
    for (std::int64_t n = 3; n <= 2000; ++n) {
        const auto plan = plan_snippets(n);
        StreamState state;
        std::vector<std::int64_t> emitted;
        std::size_t per_first = 0, per_later = 0;
        for (const auto &s : plan.snippets) {
            const auto out = state.emit_snippet(s, snippet_frames(s.keyframe_lo));
            (s.is_first ? per_first : per_later) += out.size();
            for (const auto &f : out)
                emitted.push_back(f.t);
        }
        REQUIRE(per_first == 3);
        REQUIRE(per_later == 2 * (plan.snippets.size() - 1));
        const auto want = oracle::simulate_stream(n);
        REQUIRE(emitted.size() == want.size());
        for (std::size_t i = 0; i < emitted.size(); ++i)
            REQUIRE(emitted[i] == static_cast<std::int64_t>(i));
        REQUIRE(std::equal(emitted.begin(), emitted.end(), want.begin()));
    }
    const auto plan = plan_snippets(300);
    StreamState state;
    for (const auto &s : plan.snippets)
        state.emit_snippet(s, snippet_frames(s.keyframe_lo));
    CHECK(state.emitted() == 299);
}

TEST_CASE("stream state rejects out-of-order emission") {
    StreamState state;
    CHECK_THROWS_AS(state.emit_snippet(make_snippet(2, true), snippet_frames(2)), StreamError);
    state.emit_snippet(make_snippet(0, true), snippet_frames(0));
    // Repeating the first snippet would duplicate frames.
    CHECK_THROWS_AS(state.emit_snippet(make_snippet(0, true), snippet_frames(0)), StreamError);
    // A later snippet given mismatched frames.
    CHECK_THROWS_AS(state.emit_snippet(make_snippet(2, false), snippet_frames(4)), StreamError);
    CHECK(state.emit_snippet(make_snippet(2, false), snippet_frames(2)).size() == 2);
    CHECK_THROWS_AS(state.emit_single(keyed(7)), StreamError);
    CHECK(state.emit_single(keyed(5)).t == 5);
    CHECK_THROWS_AS(state.skip_to(3), StreamError);
    state.skip_to(8);
    CHECK(state.emit_snippet(make_snippet(8, true), snippet_frames(8)).size() == 3);
    CHECK(state.next_emit_index() == 11);
}

TEST_CASE("latency arithmetic") {
    SUBCASE("published component means") {
        LatencyLedger ledger(30.0);
        ledger.record(StageId::camera_pose, 1.5);
        ledger.record(StageId::spatial, 52.1);
        ledger.record(StageId::rendering, 9.6);
        ledger.record(StageId::interpolation, 19.3);
        ledger.record(StageId::superres, 0.6);
        const auto r = latency_report(ledger);
        CHECK(r.component_sum_ms == doctest::Approx(83.1).epsilon(1e-12));
        CHECK(r.delay_ms == doctest::Approx(2000.0 / 30.0 + 83.1).epsilon(1e-12));
        CHECK(std::abs(r.delay_ms - 149.8) < 0.05);
        CHECK_FALSE(r.over_budget);
        const std::string table = format_latency_table(r);
        CHECK(table.find("83.1") != std::string::npos);
        CHECK(table.find("149.8") != std::string::npos);
        CHECK(table.find("Spatial") != std::string::npos);
    }
    SUBCASE("means over several samples") {
        LatencyLedger ledger(10.0);
        for (auto s : kAllStages)
            ledger.record(s, 1.0);
        ledger.record(StageId::spatial, 3.0);
        CHECK(ledger.mean(StageId::spatial) == 2.0);
        CHECK(latency_report(ledger).component_sum_ms == 6.0);
    }
    SUBCASE("zero-cost stages leave exactly two input intervals") {
        LatencyLedger ledger(25.0);
        for (auto s : kAllStages)
            ledger.record(s, 0.0);
        CHECK(latency_report(ledger).delay_ms == 80.0);
    }
    SUBCASE("budget flag and amortized time") {
        LatencyLedger ledger(30.0);
        for (auto s : kAllStages)
            ledger.record(s, 200.0);
        ledger.set_totals(500.0, 20);
        const auto r = latency_report(ledger, 1000.0);
        CHECK(r.over_budget);
        CHECK(r.amortized_ms == 25.0);
        CHECK(r.output_fps == 40.0);
    }
    SUBCASE("invalid input") {
        LatencyLedger ledger;
        CHECK_THROWS_AS(ledger.record(StageId::spatial, -1.0), InvalidArgument);
        CHECK_THROWS_AS(ledger.record(StageId::spatial, std::nan("")), InvalidArgument);
        CHECK_THROWS_AS(latency_report(ledger), InvalidArgument);
        ledger.record(StageId::spatial, 1.0);
        CHECK_THROWS_AS(latency_report(ledger), InvalidArgument);
        CHECK_THROWS_AS(LatencyLedger(0.0), InvalidArgument);
    }
}

TEST_CASE("pipeline on a short synthetic scene") {
    SyntheticSceneSpec spec;
    spec.gaussians = 32;
    spec.frames = 5;
    spec.cameras = 2;
    auto synth = std::make_shared<SyntheticScene>(spec);
    const Resolution res{24, 18};
    SyntheticFrameSource source(synth, res, {0, 1});
    const Rig rig = make_rig(synth->ring(), res);
    const OracleSpatialStage oracle_stage([&](std::int64_t t) { return synth->at(t); });
    const auto stages = stages_with(std::make_shared<OracleSpatialStage>([synth](std::int64_t t) { return synth->at(t); }));
    const std::vector<CameraView> targets{synth->target().view(res), synth->ring_pose(30).view(res)};
    const auto result = run_pipeline(source, rig, targets, stages, {.resolution = res});
    CHECK(result.emitted_frames == 5);
    CHECK(indices(result.frames) == std::vector<std::int64_t>{0, 1, 2, 3, 4});
    for (const auto &f : result.frames) {
        REQUIRE(f.views.size() == 2);
        CHECK(f.resolution() == Resolution{48, 36});
    }
    CHECK(result.spatial_runs == 3);
    CHECK_FALSE(result.trailing);
    // Keyframe output is the bicubic upscale of the direct render.
    const FrameBuffer direct = rasterize(synth->at(2), targets[0].extrinsics, targets[0].intrinsics, 24, 18);
    CHECK(result.frames[2].views[0] == BicubicSuperRes::upscale(direct));
    CHECK(result.ledger.samples(StageId::camera_pose).size() == 1);
}

TEST_CASE("each keyframe runs the spatial stage once") {
    for (bool pipelined : {true, false}) {
        auto stage = std::make_shared<IndexStage>();
        VectorFrameSource source(blank_frames(300));
        PipelineOptions opts{.resolution = {4, 3}, .pipelined = pipelined};
        const auto r = run_pipeline(source, blank_rig(), {blank_rig()[0]}, stages_with(stage), opts);
        CHECK(stage->calls() == 150);
        CHECK(r.spatial_runs == 150);
        CHECK(r.emitted_frames == 299);
        CHECK(r.trailing == 299);
        const auto idx = indices(r.frames);
        for (std::size_t i = 0; i < idx.size(); ++i)
            REQUIRE(idx[i] == static_cast<std::int64_t>(i));
    }
}

TEST_CASE("static scene gives a constant stream") {
    SyntheticSceneSpec spec;
    spec.gaussians = 64;
    spec.frames = 9;
    spec.cameras = 2;
    spec.velocity = 0.0;
    spec.amplitude = 0.0;
    auto synth = std::make_shared<SyntheticScene>(spec);
    const Resolution res{32, 24};
    SyntheticFrameSource source(synth, res, {0, 1});
    const auto stages = stages_with(std::make_shared<OracleSpatialStage>([synth](std::int64_t t) { return synth->at(t); }));
    const auto r = run_pipeline(source, make_rig(synth->ring(), res), {synth->target().view(res)}, stages,
                                {.resolution = res});
    REQUIRE(r.emitted_frames == 9);
    const FrameBuffer &key = r.frames[0].views[0];
    for (const auto &f : r.frames)
        for (std::size_t i = 0; i < key.data().size(); ++i)
            REQUIRE(std::abs(f.views[0].data()[i] - key.data()[i]) <= 1e-5f);
}

TEST_CASE("trailing frame policy") {
    for (auto policy : {TrailingPolicy::drop, TrailingPolicy::passthrough}) {
        VectorFrameSource source(blank_frames(6));
        std::vector<std::string> logs;
        const auto r = run_pipeline(source, blank_rig(), {blank_rig()[0]}, stages_with(std::make_shared<IndexStage>()),
                                    {.resolution = {4, 3}, .trailing = policy},
                                    logging_to(logs));
        CHECK(r.trailing == 5);
        CHECK(r.input_frames == 6);
        CHECK_FALSE(logs.empty());
        if (policy == TrailingPolicy::drop) {
            CHECK(r.emitted_frames == 5);
        } else {
            REQUIRE(r.emitted_frames == 6);
            CHECK(r.frames[5].t == 5);
            CHECK(r.frames[5].views[0] == r.frames[4].views[0]);
        }
    }
    CHECK(parse_trailing_policy("passthrough") == TrailingPolicy::passthrough);
    CHECK_THROWS_AS(parse_trailing_policy("repeat"), ConfigError);
}

TEST_CASE("too few frames") {
    for (int n : {0, 1, 2}) {
        VectorFrameSource source(blank_frames(n));
        CHECK_THROWS_AS(run_pipeline(source, blank_rig(), {blank_rig()[0]},
                                     stages_with(std::make_shared<IndexStage>()), {.resolution = {4, 3}}),
                        InvalidArgument);
    }
}

TEST_CASE("stage failures name the stage") {
    VectorFrameSource source(blank_frames(5));
    StageSet stages = stages_with(std::make_shared<IndexStage>());
    stages.inter = std::make_shared<ThrowingInterpolator>();
    try {
        run_pipeline(source, blank_rig(), {blank_rig()[0]}, stages, {.resolution = {4, 3}});
        FAIL("expected a StageError");
    } catch (const StageError &e) {
        CHECK(e.stage() == "flaky");
        CHECK(std::string(e.what()).find("model crashed") != std::string::npos);
    }
}

TEST_CASE("rig is resolved once through the predictor") {
    VectorFrameSource source(blank_frames(11));
    CountingPredictor predictor;
    const auto r = run_pipeline(source, blank_rig(), {blank_rig()[0]}, stages_with(std::make_shared<IndexStage>()),
                                {.resolution = {4, 3}}, {}, &predictor);
    CHECK(predictor.calls == 1);
    CHECK(r.rig == blank_rig());
    CHECK(r.ledger.samples(StageId::camera_pose).size() == 1);

    VectorFrameSource again(blank_frames(5));
    Rig wrong = blank_rig();
    wrong.pop_back();
    CHECK_THROWS_AS(run_pipeline(again, wrong, {blank_rig()[0]}, stages_with(std::make_shared<IndexStage>()),
                                 {.resolution = {4, 3}}),
                    InvalidArgument);
}

TEST_CASE("target changes apply at snippet boundaries") {
    for (bool with_scene : {false, true}) {
        auto stage = std::make_shared<IndexStage>(std::chrono::milliseconds(0), with_scene);
        VectorFrameSource source(blank_frames(9));
        CameraView wide = blank_rig()[0];
        wide.intrinsics.focal_x = 500.0;
        int polls = 0;
        PipelineHooks hooks;
        hooks.poll_targets = [&]() -> std::optional<std::vector<CameraView>> {
            if (++polls == 2)
                return std::vector<CameraView>{wide};
            return std::nullopt;
        };
        const auto r = run_pipeline(source, blank_rig(), {blank_rig()[0]}, stages_with(stage),
                                    {.resolution = {4, 3}, .pipelined = false}, hooks);
        CHECK(r.target_changes == 1);
        REQUIRE(r.emitted_frames == 9);
        // The first snippet (0..2) used the old target. Keyframe 4 is
        // reconstructed after the change and carries the +0.1 marker.
        CHECK(r.frames[2].views[0].at(0, 0, 0) == doctest::Approx(0.002f));
        CHECK(r.frames[4].views[0].at(0, 0, 0) == doctest::Approx(0.104f));
        CHECK(r.spatial_runs == 5);
        if (!with_scene) {
            // Cached keyframe 2 has no scene, so it is reconstructed again.
            CHECK(stage->calls() == 6);
            CHECK(r.frames[3].views[0].at(0, 0, 0) == doctest::Approx(0.103f));
        } else {
            // Keyframe 2 is re-rendered from its (empty) scene instead.
            CHECK(stage->calls() == 5);
            CHECK(r.frames[3].views[0].at(0, 0, 0) == doctest::Approx(0.052f));
        }
    }
}

TEST_CASE("live input drops a snippet when processing falls behind") {
    auto stage = std::make_shared<IndexStage>(std::chrono::milliseconds(30));
    VectorFrameSource source(blank_frames(21));
    std::vector<std::string> logs;
    PipelineOptions opts{.resolution = {4, 3}, .input_fps = 1000.0, .pipelined = false, .live = true};
    const auto r = run_pipeline(source, blank_rig(), {blank_rig()[0]}, stages_with(stage), opts,
                                logging_to(logs));
    CHECK(r.dropped_snippets > 0);
    CHECK_FALSE(logs.empty());
    const auto idx = indices(r.frames);
    std::set<std::int64_t> unique(idx.begin(), idx.end());
    CHECK(unique.size() == idx.size());
    CHECK(std::is_sorted(idx.begin(), idx.end()));
    // Emitted output still comes in whole snippets: each frame's pixels
    // encode its own index (keyframes exactly, middles as a blend).
    for (const auto &f : r.frames)
        CHECK(f.views[0].at(0, 0, 0) == doctest::Approx(static_cast<float>(f.t) / 1000.f).epsilon(1e-3));
    CHECK(r.emitted_frames < 21);

    // Not live: nothing is dropped.
    VectorFrameSource offline(blank_frames(21));
    opts.live = false;
    const auto all = run_pipeline(offline, blank_rig(), {blank_rig()[0]}, stages_with(std::make_shared<IndexStage>()), opts);
    CHECK(all.dropped_snippets == 0);
    CHECK(all.emitted_frames == 21);
}

TEST_CASE("waiting on a paced source is not backpressure") {
    for (bool pipelined : {false, true}) {
        auto inner = std::make_unique<VectorFrameSource>(blank_frames(21));
        PacedFrameSource paced(std::move(inner), 50.0);
        PipelineOptions opts{.resolution = {4, 3}, .input_fps = 50.0, .pipelined = pipelined, .live = true};
        const auto r = run_pipeline(paced, blank_rig(), {blank_rig()[0]}, stages_with(std::make_shared<IndexStage>()),
                                    opts);
        CHECK(r.dropped_snippets == 0);
        CHECK(r.emitted_frames == 21);
    }
}

TEST_CASE("stop request ends the stream early") {
    VectorFrameSource source(blank_frames(101));
    std::size_t seen = 0;
    PipelineHooks hooks;
    hooks.sink = [&](const NovelFrame &) { ++seen; };
    hooks.should_stop = [&] { return seen >= 10; };
    const auto r = run_pipeline(source, blank_rig(), {blank_rig()[0]}, stages_with(std::make_shared<IndexStage>()),
                                {.resolution = {4, 3}}, hooks);
    CHECK(r.frames.empty());
    CHECK(seen == r.emitted_frames);
    CHECK(r.emitted_frames < 101);
}

TEST_CASE("a stop before the first snippet is not an error") {
    for (std::size_t allowed : {0, 1, 2}) {
        VectorFrameSource source(blank_frames(11));
        std::size_t pulls = 0;
        PipelineHooks hooks;
        hooks.should_stop = [&] { return pulls++ >= allowed; };
        const auto r = run_pipeline(source, blank_rig(), {blank_rig()[0]},
                                    stages_with(std::make_shared<IndexStage>()), {.resolution = {4, 3}}, hooks);
        CHECK(r.emitted_frames == 0);
    }
}

TEST_CASE("paced source releases frames no faster than the input rate") {
    auto inner = std::make_unique<VectorFrameSource>(blank_frames(6));
    PacedFrameSource paced(std::move(inner), 100.0);
    const auto start = std::chrono::steady_clock::now();
    int n = 0;
    while (paced.next())
        ++n;
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    CHECK(n == 6);
    CHECK(ms >= 49.0);
}
