// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "camera/camera.hpp"
#include "scene/framebuffer.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace nvs {

using Mat2 = Eigen::Matrix2d;
using Mat23 = Eigen::Matrix<double, 2, 3>;

// Added to the projected covariance diagonal (px^2) as an anti-aliasing floor.
inline constexpr double kLowPassDilation = 0.3;

struct GaussianPrimitive {
    Vec3 mean = Vec3::Zero();
    Quaternion rotation;
    Vec3 scale = Vec3::Ones();
    double opacity = 1.0;
    std::vector<double> sh; // 3 * (degree + 1)^2, basis-major

    bool operator==(const GaussianPrimitive &) const = default;
};

struct GaussianScene {
    int sh_degree = 1;
    std::vector<GaussianPrimitive> primitives;
    Rgb background = {0.f, 0.f, 0.f};

    std::size_t size() const { return primitives.size(); }
    bool operator==(const GaussianScene &) const = default;
};

// Throws InvalidArgument on nonpositive scale, opacity outside [0, 1], a
// zero quaternion or an SH vector of the wrong length.
void validate(const GaussianPrimitive &g, int sh_degree);
void validate(const GaussianScene &scene);

// A primitive with a flat color (DC term only, higher bands zero).
GaussianPrimitive make_flat_gaussian(const Vec3 &mean, const Vec3 &scale, double opacity,
                                     const Rgb &color, int sh_degree,
                                     const Quaternion &rotation = {});

// Sigma = R S S^T R^T.
Mat3 covariance_3d(const Quaternion &rotation, const Vec3 &scale);

// d(u, v) / d(camera-space point) for the pinhole model.
Mat23 pinhole_jacobian(const Vec3 &camera_point, const Intrinsics &k);

// Screen-space covariance J W Sigma W^T J^T + dilation * I, or nullopt when
// the mean is behind the near plane.
std::optional<Mat2> project_covariance(const GaussianPrimitive &g, const Extrinsics &e,
                                       const Intrinsics &k, double dilation = kLowPassDilation);

struct PointMap {
    int width = 0;
    int height = 0;
    std::vector<Vec3> points;        // row-major, width * height
    std::vector<std::uint8_t> valid; // same layout; 0 entries are skipped

    static PointMap filled(int width, int height);
};

struct InitOptions {
    int sh_degree = 1;
    double opacity = 0.8;
    // Camera the point map was observed from; depth is measured along its z.
    Extrinsics source;
    // Angular size of one source pixel (radians), typically 1 / focal_x.
    double pixel_angle = 1e-2;
    // Splat standard deviation as a fraction of the pixel footprint.
    double footprint = 0.5;
};

// One isotropic primitive per valid point, colored from the matching pixel.
GaussianScene gaussians_from_pointmap(const PointMap &pm, const FrameBuffer &colors,
                                      const InitOptions &opts = {});

} // namespace nvs
