// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "camera/camera.hpp"
#include "scene/framebuffer.hpp"
#include "scene/gaussian.hpp"
#include "scene/rasterizer.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nvs {

// n synchronized input views captured at input index t.
struct MultiViewFrame {
    std::vector<FrameBuffer> views;
    std::int64_t t = 0;
};

enum class Provenance { keyframe, interpolated, upscaled };

const char *to_string(Provenance p);

// m novel-viewpoint renders for index t.
struct NovelFrame {
    std::vector<FrameBuffer> views;
    std::int64_t t = 0;
    Provenance provenance = Provenance::keyframe;

    Resolution resolution() const { return views.empty() ? Resolution{} : views[0].resolution(); }
};

// Throw InvalidArgument unless every view shares one size (and n >= 2 /
// m >= 1 respectively).
void validate(const MultiViewFrame &f);
void validate(const NovelFrame &f);

struct SpatialStageOutput {
    // Empty for stages that only return pixels (external models).
    std::optional<GaussianScene> scene;
    NovelFrame rendered;
    double reconstruct_ms = 0.0;
    double render_ms = 0.0;
};

// Renders `scene` from every target at `res`, as a keyframe at index t.
NovelFrame render_targets(const GaussianScene &scene, std::span<const CameraView> targets,
                          Resolution res, std::int64_t t, const RasterOptions &opts = {});

// f'_t = Sp(f_t). Implementations are interchangeable; run() checks the
// contract on both sides of the call. Implementations must not keep
// observable state between calls.
class SpatialStage {
public:
    virtual ~SpatialStage() = default;
    virtual std::string name() const = 0;

    SpatialStageOutput run(const MultiViewFrame &f, const Rig &rig,
                           std::span<const CameraView> targets, Resolution res) const;

protected:
    virtual SpatialStageOutput process(const MultiViewFrame &f, const Rig &rig,
                                       std::span<const CameraView> targets,
                                       Resolution res) const = 0;
};

// f''_{t+1} = Inter(f'_t, f'_{t+2}); the endpoints pass through unchanged,
// so only the middle frame is returned.
class InterpolationStage {
public:
    virtual ~InterpolationStage() = default;
    virtual std::string name() const = 0;

    NovelFrame run(const NovelFrame &a, const NovelFrame &b) const;

protected:
    virtual NovelFrame process(const NovelFrame &a, const NovelFrame &b) const = 0;
};

// Exactly 2x upscaling in both dimensions.
class SuperResStage {
public:
    virtual ~SuperResStage() = default;
    virtual std::string name() const = 0;

    std::vector<NovelFrame> run(std::span<const NovelFrame> frames) const;

protected:
    virtual std::vector<NovelFrame> process(std::span<const NovelFrame> frames) const = 0;
};

// ---------------------------------------------------------------------------
// Reference implementations

using SceneGenerator = std::function<GaussianScene(std::int64_t t)>;

// Returns the ground-truth scene for index t and renders it. Used to test
// the pipeline end to end without a learned reconstruction model.
class OracleSpatialStage final : public SpatialStage {
public:
    explicit OracleSpatialStage(SceneGenerator generator, RasterOptions raster = {});
    std::string name() const override { return "oracle"; }

protected:
    SpatialStageOutput process(const MultiViewFrame &f, const Rig &rig,
                               std::span<const CameraView> targets, Resolution res) const override;

private:
    SceneGenerator generator_;
    RasterOptions raster_;
};

// Back-projects the first input view onto a plane of constant depth and
// splats it. Geometry-free baseline.
class ConstantDepthStage final : public SpatialStage {
public:
    struct Options {
        // <= 0: distance from the first camera's center to the world origin.
        double depth = 0.0;
        double footprint = 0.5;
        double opacity = 0.8;
        int sh_degree = 0;
        Rgb background = {0.f, 0.f, 0.f};
        RasterOptions raster;
    };

    ConstantDepthStage();
    explicit ConstantDepthStage(Options opts);
    std::string name() const override { return "constant_depth"; }

    // The scene this stage builds for a frame (exposed for tests).
    GaussianScene reconstruct(const MultiViewFrame &f, const Rig &rig) const;

protected:
    SpatialStageOutput process(const MultiViewFrame &f, const Rig &rig,
                               std::span<const CameraView> targets, Resolution res) const override;

private:
    Options opts_;
};

// Per-pixel midpoint 0.5 * a + 0.5 * b, each view independently.
class BlendInterpolator final : public InterpolationStage {
public:
    std::string name() const override { return "blend"; }

protected:
    NovelFrame process(const NovelFrame &a, const NovelFrame &b) const override;
};

// Separable Keys cubic (a = -0.5) with clamped borders; output clamped to
// [0, 1].
class BicubicSuperRes final : public SuperResStage {
public:
    std::string name() const override { return "bicubic"; }

    static FrameBuffer upscale(const FrameBuffer &in);

protected:
    std::vector<NovelFrame> process(std::span<const NovelFrame> frames) const override;
};

} // namespace nvs
