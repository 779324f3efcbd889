// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "stages/stages.hpp"

#include "common/error.hpp"
#include "common/timer.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace nvs {

const char *to_string(Provenance p) {
    switch (p) {
    case Provenance::keyframe:
        return "keyframe";
    case Provenance::interpolated:
        return "interpolated";
    case Provenance::upscaled:
        return "upscaled";
    }
    return "?";
}

namespace {

void require_uniform(const std::vector<FrameBuffer> &views, const char *what) {
    for (const auto &v : views) {
        if (v.resolution() != views.front().resolution())
            throw InvalidArgument(std::string(what) + ": views differ in size");
        if (v.empty())
            throw InvalidArgument(std::string(what) + ": empty view");
    }
}

std::string res_text(Resolution r) { return std::to_string(r.width) + "x" + std::to_string(r.height); }

} // namespace

void validate(const MultiViewFrame &f) {
    if (f.views.size() < 2)
        throw InvalidArgument("multi-view frame needs at least 2 views, got " +
                              std::to_string(f.views.size()));
    NVS_REQUIRE(f.t >= 0, "frame index must be nonnegative");
    require_uniform(f.views, "multi-view frame");
}

void validate(const NovelFrame &f) {
    NVS_REQUIRE(!f.views.empty(), "novel frame needs at least one view");
    NVS_REQUIRE(f.t >= 0, "frame index must be nonnegative");
    require_uniform(f.views, "novel frame");
}

NovelFrame render_targets(const GaussianScene &scene, std::span<const CameraView> targets,
                          Resolution res, std::int64_t t, const RasterOptions &opts) {
    NovelFrame out{{}, t, Provenance::keyframe};
    out.views.reserve(targets.size());
    for (const auto &cam : targets)
        out.views.push_back(
            rasterize(scene, cam.extrinsics, cam.intrinsics, res.width, res.height, opts));
    return out;
}

SpatialStageOutput SpatialStage::run(const MultiViewFrame &f, const Rig &rig,
                                     std::span<const CameraView> targets, Resolution res) const {
    validate(f);
    if (rig.size() != f.views.size())
        throw InvalidArgument("rig has " + std::to_string(rig.size()) + " cameras for " +
                              std::to_string(f.views.size()) + " views");
    NVS_REQUIRE(!targets.empty(), "spatial stage needs at least one target view");
    NVS_REQUIRE(res.width >= 1 && res.height >= 1, "render resolution must be positive");

    SpatialStageOutput out = process(f, rig, targets, res);
    const auto &r = out.rendered;
    if (r.views.size() != targets.size() || r.t != f.t)
        throw StageError(name(), "returned " + std::to_string(r.views.size()) + " views at t=" +
                                     std::to_string(r.t) + ", expected " +
                                     std::to_string(targets.size()) + " at t=" + std::to_string(f.t));
    for (const auto &v : r.views)
        if (v.resolution() != res)
            throw StageError(name(), "rendered " + res_text(v.resolution()) + ", expected " +
                                         res_text(res));
    out.rendered.provenance = Provenance::keyframe;
    return out;
}

NovelFrame InterpolationStage::run(const NovelFrame &a, const NovelFrame &b) const {
    validate(a);
    validate(b);
    if (a.views.size() != b.views.size() || a.resolution() != b.resolution())
        throw InvalidArgument("interpolation endpoints differ in view count or size");
    if (b.t != a.t + 2)
        throw InvalidArgument("interpolation endpoints must be two indices apart, got " +
                              std::to_string(a.t) + " and " + std::to_string(b.t));
    NovelFrame mid = process(a, b);
    if (mid.views.size() != a.views.size())
        throw StageError(name(), "returned the wrong number of views");
    for (const auto &v : mid.views)
        if (v.resolution() != a.resolution())
            throw StageError(name(), "returned a view of the wrong size");
    mid.t = a.t + 1;
    mid.provenance = Provenance::interpolated;
    return mid;
}

std::vector<NovelFrame> SuperResStage::run(std::span<const NovelFrame> frames) const {
    NVS_REQUIRE(!frames.empty(), "super-resolution needs at least one frame");
    for (const auto &f : frames) {
        validate(f);
        if (f.resolution() != frames.front().resolution())
            throw InvalidArgument("super-resolution inputs differ in size");
    }
    auto out = process(frames);
    if (out.size() != frames.size())
        throw StageError(name(), "returned the wrong number of frames");
    const Resolution want{frames.front().resolution().width * 2,
                          frames.front().resolution().height * 2};
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].views.size() != frames[i].views.size())
            throw StageError(name(), "returned the wrong number of views");
        for (const auto &v : out[i].views)
            if (v.resolution() != want)
                throw StageError(name(), "produced " + res_text(v.resolution()) + ", expected " +
                                             res_text(want));
        out[i].t = frames[i].t;
        out[i].provenance = Provenance::upscaled;
    }
    return out;
}

// ---------------------------------------------------------------------------

OracleSpatialStage::OracleSpatialStage(SceneGenerator generator, RasterOptions raster)
    : generator_(std::move(generator)), raster_(raster) {
    NVS_REQUIRE(static_cast<bool>(generator_), "oracle stage needs a scene generator");
}

SpatialStageOutput OracleSpatialStage::process(const MultiViewFrame &f, const Rig &,
                                               std::span<const CameraView> targets,
                                               Resolution res) const {
    SpatialStageOutput out;
    StopWatch watch;
    out.scene = generator_(f.t);
    out.reconstruct_ms = watch.elapsed_ms();
    watch.reset();
    out.rendered = render_targets(*out.scene, targets, res, f.t, raster_);
    out.render_ms = watch.elapsed_ms();
    return out;
}

ConstantDepthStage::ConstantDepthStage() : ConstantDepthStage(Options{}) {}

ConstantDepthStage::ConstantDepthStage(Options opts) : opts_(opts) {
    NVS_REQUIRE(opts_.footprint > 0.0, "footprint must be positive");
    NVS_REQUIRE(opts_.opacity > 0.0 && opts_.opacity <= 1.0, "opacity must lie in (0, 1]");
}

GaussianScene ConstantDepthStage::reconstruct(const MultiViewFrame &f, const Rig &rig) const {
    const FrameBuffer &view = f.views.front();
    const CameraView &cam = rig.front();
    const double depth = opts_.depth > 0.0 ? opts_.depth : cam.extrinsics.center().norm();
    NVS_REQUIRE(depth > kNearPlane, "constant-depth plane must lie in front of the camera");

    PointMap pm = PointMap::filled(view.width(), view.height());
    const Extrinsics to_world = cam.extrinsics.inverse();
    const Intrinsics &k = cam.intrinsics;
    for (int y = 0; y < view.height(); ++y)
        for (int x = 0; x < view.width(); ++x) {
            const Vec3 p((x + 0.5 - k.c_x) / k.focal_x * depth, (y + 0.5 - k.c_y) / k.focal_y * depth,
                         depth);
            pm.points[static_cast<std::size_t>(y) * view.width() + x] = to_world.to_camera(p);
        }

    InitOptions init;
    init.sh_degree = opts_.sh_degree;
    init.opacity = opts_.opacity;
    init.source = cam.extrinsics;
    init.pixel_angle = 1.0 / k.focal_x;
    init.footprint = opts_.footprint;
    GaussianScene scene = gaussians_from_pointmap(pm, view, init);
    scene.background = opts_.background;
    return scene;
}

SpatialStageOutput ConstantDepthStage::process(const MultiViewFrame &f, const Rig &rig,
                                               std::span<const CameraView> targets,
                                               Resolution res) const {
    SpatialStageOutput out;
    StopWatch watch;
    out.scene = reconstruct(f, rig);
    out.reconstruct_ms = watch.elapsed_ms();
    watch.reset();
    out.rendered = render_targets(*out.scene, targets, res, f.t, opts_.raster);
    out.render_ms = watch.elapsed_ms();
    return out;
}

NovelFrame BlendInterpolator::process(const NovelFrame &a, const NovelFrame &b) const {
    NovelFrame mid{{}, a.t + 1, Provenance::interpolated};
    mid.views.reserve(a.views.size());
    for (std::size_t v = 0; v < a.views.size(); ++v) {
        FrameBuffer out(a.views[v].width(), a.views[v].height());
        const auto &da = a.views[v].data();
        const auto &db = b.views[v].data();
        auto &dst = out.data();
        for (std::size_t i = 0; i < dst.size(); ++i)
            dst[i] = 0.5f * da[i] + 0.5f * db[i];
        mid.views.push_back(std::move(out));
    }
    return mid;
}

namespace {

// Keys cubic kernel with a = -0.5.
double cubic(double x) {
    x = std::abs(x);
    if (x <= 1.0)
        return (1.5 * x - 2.5) * x * x + 1.0;
    if (x < 2.0)
        return ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0;
    return 0.0;
}

// Output sample o maps to source position o / 2 - 0.25: even outputs sit a
// quarter pixel left of a source center, odd ones a quarter pixel right.
struct Taps {
    std::array<int, 4> index;
    std::array<double, 4> weight;
};

Taps taps_for(int o, int extent) {
    const double src = 0.5 * o - 0.25;
    const int base = static_cast<int>(std::floor(src));
    const double frac = src - base;
    Taps t;
    for (int i = 0; i < 4; ++i) {
        t.index[i] = std::clamp(base - 1 + i, 0, extent - 1);
        t.weight[i] = cubic(frac - (i - 1));
    }
    return t;
}

} // namespace

FrameBuffer BicubicSuperRes::upscale(const FrameBuffer &in) {
    const int w = in.width(), h = in.height();
    const int ow = 2 * w, oh = 2 * h;
    std::vector<Taps> xt(ow), yt(oh);
    for (int x = 0; x < ow; ++x)
        xt[x] = taps_for(x, w);
    for (int y = 0; y < oh; ++y)
        yt[y] = taps_for(y, h);

    // Horizontal pass into a (2w x h) double buffer, then vertical.
    std::vector<double> tmp(static_cast<std::size_t>(ow) * h * 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x)
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int i = 0; i < 4; ++i)
                    acc += xt[x].weight[i] * in.at(xt[x].index[i], y, c);
                tmp[(static_cast<std::size_t>(y) * ow + x) * 3 + c] = acc;
            }
    FrameBuffer out(ow, oh);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x)
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int i = 0; i < 4; ++i)
                    acc += yt[y].weight[i] *
                           tmp[(static_cast<std::size_t>(yt[y].index[i]) * ow + x) * 3 + c];
                out.at(x, y, c) = static_cast<float>(std::clamp(acc, 0.0, 1.0));
            }
    return out;
}

std::vector<NovelFrame> BicubicSuperRes::process(std::span<const NovelFrame> frames) const {
    std::vector<NovelFrame> out;
    out.reserve(frames.size());
    for (const auto &f : frames) {
        NovelFrame up{{}, f.t, Provenance::upscaled};
        up.views.reserve(f.views.size());
        for (const auto &v : f.views)
            up.views.push_back(upscale(v));
        out.push_back(std::move(up));
    }
    return out;
}

} // namespace nvs
