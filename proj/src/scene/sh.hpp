// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "camera/camera.hpp"
#include "scene/framebuffer.hpp"

#include <array>
#include <span>

namespace nvs {

inline constexpr int kMaxShDegree = 3;

constexpr int sh_basis_count(int degree) { return (degree + 1) * (degree + 1); }
constexpr int sh_coeff_count(int degree) { return 3 * sh_basis_count(degree); }

// Real spherical-harmonic basis (no Condon-Shortley phase) up to `degree`,
// evaluated at a unit direction. Entries past (degree+1)^2 are zero.
std::array<double, 16> sh_basis(int degree, const Vec3 &dir);

// Coefficients are laid out basis-major: coeffs[3 * k + channel]. Colors are
// offset by 0.5 so an all-zero coefficient set renders mid gray.
std::array<double, 3> evaluate_sh_unclamped(std::span<const double> coeffs, int degree,
                                            const Vec3 &dir);

// As above, clamped to [0, 1]. Throws InvalidArgument on a length mismatch.
Rgb evaluate_sh(std::span<const double> coeffs, int degree, const Vec3 &dir);

// DC coefficient that reproduces `value` for a degree-0 expansion.
double sh_dc_from_color(double value);

} // namespace nvs
