// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "scene/gaussian.hpp"

#include <array>
#include <optional>
#include <vector>

namespace nvs {

// Contributions below this alpha are skipped; a pixel stops compositing once
// its transmittance falls below kMinTransmittance.
inline constexpr double kMinAlpha = 1.0 / 255.0;
inline constexpr double kMinTransmittance = 1.0 / 255.0;
inline constexpr double kMaxAlpha = 0.99;
inline constexpr int kTileSize = 16;

// A primitive after projection to the image plane.
struct ProjectedSplat {
    int index = 0;
    Vec2 center = Vec2::Zero();
    Mat2 cov = Mat2::Identity();
    // Inverse covariance packed as (a, b, c) for a*dx^2 + 2*b*dx*dy + c*dy^2.
    std::array<double, 3> conic{};
    double depth = 0.0;
    std::array<double, 3> color{};
    double opacity = 0.0;
    // Pixel radius beyond which opacity * exp(-power) < kMinAlpha.
    double radius = 0.0;
};

// nullopt if the primitive is behind the near plane or can never reach
// kMinAlpha.
std::optional<ProjectedSplat> project_splat(const GaussianPrimitive &g, int index,
                                            int sh_degree, const Extrinsics &e,
                                            const Intrinsics &k);

// Clamped alpha of a splat at pixel position (px, py); 0 when the Gaussian
// power is negative.
double splat_alpha(const ProjectedSplat &s, double px, double py);

struct RasterOptions {
    int tile_size = kTileSize;
    unsigned threads = 0; // 0 selects std::thread::hardware_concurrency()
};

struct RasterOutput {
    FrameBuffer image;
    // Per-pixel color accumulated from splats, before the background term.
    std::vector<double> composited;
    std::vector<double> transmittance;
};

// Tile-based front-to-back compositing of depth-sorted splats. Pixel centers
// sit at (x + 0.5, y + 0.5). Output is bit-identical for any thread count.
RasterOutput rasterize_detailed(const GaussianScene &scene, const Extrinsics &e,
                                const Intrinsics &k, int width, int height,
                                const RasterOptions &opts = {});

FrameBuffer rasterize(const GaussianScene &scene, const Extrinsics &e, const Intrinsics &k,
                      int width, int height, const RasterOptions &opts = {});

} // namespace nvs
