// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "scene/sh.hpp"

#include "common/error.hpp"

#include <algorithm>
#include <string>

namespace nvs {

namespace {

constexpr double kC0 = 0.28209479177387814;
constexpr double kC1 = 0.4886025119029199;
constexpr double kC2[] = {1.0925484305920792, 1.0925484305920792, 0.31539156525252005,
                          1.0925484305920792, 0.5462742152960396};
constexpr double kC3[] = {0.5900435899266435, 2.890611442640554, 0.4570457994644658,
                          0.3731763325901154, 0.4570457994644658, 1.445305721320277,
                          0.5900435899266435};

void check_degree(int degree) {
    if (degree < 0 || degree > kMaxShDegree)
        throw InvalidArgument("SH degree must be in [0, 3], got " + std::to_string(degree));
}

} // namespace

std::array<double, 16> sh_basis(int degree, const Vec3 &dir) {
    check_degree(degree);
    std::array<double, 16> b{};
    b[0] = kC0;
    if (degree < 1)
        return b;
    const double x = dir.x(), y = dir.y(), z = dir.z();
    b[1] = kC1 * y;
    b[2] = kC1 * z;
    b[3] = kC1 * x;
    if (degree < 2)
        return b;
    const double xx = x * x, yy = y * y, zz = z * z;
    b[4] = kC2[0] * x * y;
    b[5] = kC2[1] * y * z;
    b[6] = kC2[2] * (2.0 * zz - xx - yy);
    b[7] = kC2[3] * x * z;
    b[8] = kC2[4] * (xx - yy);
    if (degree < 3)
        return b;
    b[9] = kC3[0] * y * (3.0 * xx - yy);
    b[10] = kC3[1] * x * y * z;
    b[11] = kC3[2] * y * (4.0 * zz - xx - yy);
    b[12] = kC3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
    b[13] = kC3[4] * x * (4.0 * zz - xx - yy);
    b[14] = kC3[5] * z * (xx - yy);
    b[15] = kC3[6] * x * (xx - 3.0 * yy);
    return b;
}

std::array<double, 3> evaluate_sh_unclamped(std::span<const double> coeffs, int degree,
                                            const Vec3 &dir) {
    check_degree(degree);
    if (coeffs.size() != static_cast<std::size_t>(sh_coeff_count(degree)))
        throw InvalidArgument("SH coefficient count " + std::to_string(coeffs.size()) +
                              " does not match degree " + std::to_string(degree));
    const auto basis = sh_basis(degree, dir);
    std::array<double, 3> rgb{0.5, 0.5, 0.5};
    for (int k = 0; k < sh_basis_count(degree); ++k)
        for (int c = 0; c < 3; ++c)
            rgb[c] += basis[k] * coeffs[3 * k + c];
    return rgb;
}

Rgb evaluate_sh(std::span<const double> coeffs, int degree, const Vec3 &dir) {
    const auto v = evaluate_sh_unclamped(coeffs, degree, dir);
    return {static_cast<float>(std::clamp(v[0], 0.0, 1.0)),
            static_cast<float>(std::clamp(v[1], 0.0, 1.0)),
            static_cast<float>(std::clamp(v[2], 0.0, 1.0))};
}

double sh_dc_from_color(double value) { return (value - 0.5) / kC0; }

} // namespace nvs
