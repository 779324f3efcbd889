// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "scene/gaussian.hpp"

#include "common/error.hpp"
#include "scene/sh.hpp"

#include <cmath>
#include <string>

namespace nvs {

void validate(const GaussianPrimitive &g, int sh_degree) {
    if (!g.mean.allFinite())
        throw InvalidArgument("gaussian mean must be finite");
    if (!(g.scale.minCoeff() > 0.0) || !g.scale.allFinite())
        throw InvalidArgument("gaussian scale components must be positive");
    if (!(g.opacity >= 0.0 && g.opacity <= 1.0))
        throw InvalidArgument("gaussian opacity must lie in [0, 1]");
    (void)g.rotation.normalized();
    if (g.sh.size() != static_cast<std::size_t>(sh_coeff_count(sh_degree)))
        throw InvalidArgument("gaussian has " + std::to_string(g.sh.size()) +
                              " SH coefficients, degree " + std::to_string(sh_degree) +
                              " needs " + std::to_string(sh_coeff_count(sh_degree)));
}

void validate(const GaussianScene &scene) {
    if (scene.sh_degree < 0 || scene.sh_degree > kMaxShDegree)
        throw InvalidArgument("scene SH degree must be in [0, 3]");
    for (const auto &g : scene.primitives)
        validate(g, scene.sh_degree);
}

GaussianPrimitive make_flat_gaussian(const Vec3 &mean, const Vec3 &scale, double opacity,
                                     const Rgb &color, int sh_degree,
                                     const Quaternion &rotation) {
    GaussianPrimitive g;
    g.mean = mean;
    g.rotation = rotation;
    g.scale = scale;
    g.opacity = opacity;
    g.sh.assign(sh_coeff_count(sh_degree), 0.0);
    for (int c = 0; c < 3; ++c)
        g.sh[c] = sh_dc_from_color(color[c]);
    return g;
}

Mat3 covariance_3d(const Quaternion &rotation, const Vec3 &scale) {
    NVS_REQUIRE(scale.minCoeff() > 0.0, "covariance scale components must be positive");
    const Mat3 m = quat_to_rotation(rotation) * scale.asDiagonal();
    return m * m.transpose();
}

Mat23 pinhole_jacobian(const Vec3 &p, const Intrinsics &k) {
    const double iz = 1.0 / p.z();
    Mat23 j;
    j << k.focal_x * iz, 0.0, -k.focal_x * p.x() * iz * iz, //
        0.0, k.focal_y * iz, -k.focal_y * p.y() * iz * iz;
    return j;
}

std::optional<Mat2> project_covariance(const GaussianPrimitive &g, const Extrinsics &e,
                                       const Intrinsics &k, double dilation) {
    const Vec3 p = e.to_camera(g.mean);
    if (!(p.z() > kNearPlane))
        return std::nullopt;
    const Mat23 t = pinhole_jacobian(p, k) * e.rotation;
    Mat2 cov = t * covariance_3d(g.rotation, g.scale) * t.transpose();
    // Exact symmetry so downstream eigen/conic math sees a symmetric matrix.
    cov(1, 0) = cov(0, 1);
    cov(0, 0) += dilation;
    cov(1, 1) += dilation;
    return cov;
}

PointMap PointMap::filled(int width, int height) {
    NVS_REQUIRE(width >= 0 && height >= 0, "point map dimensions must be nonnegative");
    const std::size_t n = static_cast<std::size_t>(width) * height;
    return {width, height, std::vector<Vec3>(n, Vec3::Zero()), std::vector<std::uint8_t>(n, 1)};
}

GaussianScene gaussians_from_pointmap(const PointMap &pm, const FrameBuffer &colors,
                                      const InitOptions &opts) {
    if (pm.width != colors.width() || pm.height != colors.height())
        throw InvalidArgument("point map is " + std::to_string(pm.width) + "x" +
                              std::to_string(pm.height) + " but colors are " +
                              std::to_string(colors.width()) + "x" +
                              std::to_string(colors.height()));
    const std::size_t n = static_cast<std::size_t>(pm.width) * pm.height;
    NVS_REQUIRE(pm.points.size() == n && pm.valid.size() == n,
                "point map storage does not match its dimensions");
    NVS_REQUIRE(opts.pixel_angle > 0.0 && opts.footprint > 0.0,
                "pixel angle and footprint must be positive");

    GaussianScene scene;
    scene.sh_degree = opts.sh_degree;
    scene.primitives.reserve(n);
    for (int y = 0; y < pm.height; ++y) {
        for (int x = 0; x < pm.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * pm.width + x;
            if (!pm.valid[i])
                continue;
            const double depth = opts.source.to_camera(pm.points[i]).z();
            if (!(depth > kNearPlane))
                continue;
            const double s = depth * opts.pixel_angle * opts.footprint;
            scene.primitives.push_back(make_flat_gaussian(pm.points[i], Vec3::Constant(s),
                                                          opts.opacity, colors.pixel(x, y),
                                                          opts.sh_degree));
        }
    }
    return scene;
}

} // namespace nvs
