// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "scene/rasterizer.hpp"

#include "common/error.hpp"
#include "scene/sh.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace nvs {

std::optional<ProjectedSplat> project_splat(const GaussianPrimitive &g, int index,
                                            int sh_degree, const Extrinsics &e,
                                            const Intrinsics &k) {
    const auto proj = project_point(g.mean, e, k);
    if (!proj)
        return std::nullopt;
    const double reach = 255.0 * g.opacity;
    if (reach <= 1.0)
        return std::nullopt;

    const auto cov = project_covariance(g, e, k);
    const double det = cov->determinant();
    if (!(det > 0.0))
        return std::nullopt;

    ProjectedSplat s;
    s.index = index;
    s.center = Vec2(proj->u, proj->v);
    s.cov = *cov;
    s.conic = {(*cov)(1, 1) / det, -(*cov)(0, 1) / det, (*cov)(0, 0) / det};
    s.depth = proj->depth;
    s.opacity = g.opacity;

    const double mid = 0.5 * ((*cov)(0, 0) + (*cov)(1, 1));
    const double lambda_max = mid + std::sqrt(std::max(0.0, mid * mid - det));
    // One pixel of margin keeps the cut strictly outside the alpha cutoff.
    s.radius = std::sqrt(2.0 * std::log(reach) * lambda_max) + 1.0;
    if (!s.center.allFinite() || !std::isfinite(s.radius))
        return std::nullopt;

    const Vec3 dir = (g.mean - e.center()).normalized();
    const auto rgb = evaluate_sh_unclamped(g.sh, sh_degree, dir);
    for (int c = 0; c < 3; ++c)
        s.color[c] = std::clamp(rgb[c], 0.0, 1.0);
    return s;
}

double splat_alpha(const ProjectedSplat &s, double px, double py) {
    const double dx = px - s.center.x();
    const double dy = py - s.center.y();
    const double power =
        0.5 * (s.conic[0] * dx * dx + s.conic[2] * dy * dy) + s.conic[1] * dx * dy;
    if (power < 0.0)
        return 0.0;
    return std::min(kMaxAlpha, s.opacity * std::exp(-power));
}

namespace {

struct TileGrid {
    int tile_size;
    int cols;
    int rows;
};

void composite_tile(const TileGrid &grid, int tile, const std::vector<ProjectedSplat> &splats,
                    const std::vector<int> &list, const Rgb &bg, int width, int height,
                    RasterOutput &out) {
    const int tx = tile % grid.cols;
    const int ty = tile / grid.cols;
    const int x0 = tx * grid.tile_size, y0 = ty * grid.tile_size;
    const int x1 = std::min(width, x0 + grid.tile_size);
    const int y1 = std::min(height, y0 + grid.tile_size);

    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            double t = 1.0;
            double acc[3] = {0.0, 0.0, 0.0};
            for (int id : list) {
                const ProjectedSplat &s = splats[id];
                const double alpha = splat_alpha(s, px, py);
                if (alpha < kMinAlpha)
                    continue;
                for (int c = 0; c < 3; ++c)
                    acc[c] += t * alpha * s.color[c];
                t *= 1.0 - alpha;
                if (t < kMinTransmittance)
                    break;
            }
            const std::size_t p = static_cast<std::size_t>(y) * width + x;
            out.transmittance[p] = t;
            for (int c = 0; c < 3; ++c) {
                out.composited[p * 3 + c] = acc[c];
                out.image.at(x, y, c) = static_cast<float>(acc[c] + t * bg[c]);
            }
        }
    }
}

} // namespace

RasterOutput rasterize_detailed(const GaussianScene &scene, const Extrinsics &e,
                                const Intrinsics &k, int width, int height,
                                const RasterOptions &opts) {
    NVS_REQUIRE(width >= 1 && height >= 1, "render size must be at least 1x1");
    NVS_REQUIRE(k.focal_x > 0.0 && k.focal_y > 0.0, "render intrinsics need positive focal");
    NVS_REQUIRE(opts.tile_size >= 1, "tile size must be positive");
    validate_extrinsics(e);

    const std::size_t npix = static_cast<std::size_t>(width) * height;
    RasterOutput out{FrameBuffer(width, height), std::vector<double>(npix * 3, 0.0),
                     std::vector<double>(npix, 1.0)};

    std::vector<ProjectedSplat> splats;
    splats.reserve(scene.size());
    for (std::size_t i = 0; i < scene.size(); ++i) {
        if (auto s = project_splat(scene.primitives[i], static_cast<int>(i), scene.sh_degree, e, k))
            splats.push_back(*s);
    }
    // Near to far; equal depths keep primitive order.
    std::sort(splats.begin(), splats.end(), [](const ProjectedSplat &a, const ProjectedSplat &b) {
        return a.depth < b.depth || (a.depth == b.depth && a.index < b.index);
    });

    const TileGrid grid{opts.tile_size, (width + opts.tile_size - 1) / opts.tile_size,
                        (height + opts.tile_size - 1) / opts.tile_size};
    const int ntiles = grid.cols * grid.rows;
    std::vector<std::vector<int>> lists(ntiles);
    for (int id = 0; id < static_cast<int>(splats.size()); ++id) {
        const ProjectedSplat &s = splats[id];
        const double ts = grid.tile_size;
        const double lo_x = std::floor((s.center.x() - s.radius) / ts);
        const double hi_x = std::floor((s.center.x() + s.radius) / ts);
        const double lo_y = std::floor((s.center.y() - s.radius) / ts);
        const double hi_y = std::floor((s.center.y() + s.radius) / ts);
        if (hi_x < 0.0 || hi_y < 0.0 || lo_x >= grid.cols || lo_y >= grid.rows)
            continue;
        const int tx0 = static_cast<int>(std::max(0.0, lo_x));
        const int ty0 = static_cast<int>(std::max(0.0, lo_y));
        const int tx1 = static_cast<int>(std::min<double>(grid.cols - 1, hi_x));
        const int ty1 = static_cast<int>(std::min<double>(grid.rows - 1, hi_y));
        for (int ty = ty0; ty <= ty1; ++ty)
            for (int tx = tx0; tx <= tx1; ++tx)
                lists[ty * grid.cols + tx].push_back(id);
    }

    unsigned threads = opts.threads ? opts.threads : std::thread::hardware_concurrency();
    threads = std::clamp<unsigned>(threads, 1u, static_cast<unsigned>(ntiles));

    std::atomic<int> next{0};
    auto worker = [&] {
        for (int tile = next++; tile < ntiles; tile = next++)
            composite_tile(grid, tile, splats, lists[tile], scene.background, width, height, out);
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned i = 0; i < threads; ++i)
            pool.emplace_back(worker);
    }
    return out;
}

FrameBuffer rasterize(const GaussianScene &scene, const Extrinsics &e, const Intrinsics &k,
                      int width, int height, const RasterOptions &opts) {
    return std::move(rasterize_detailed(scene, e, k, width, height, opts).image);
}

} // namespace nvs
