// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "scene/framebuffer.hpp"

#include <span>
#include <string>

namespace nvs {

// Reported for identical images so stream averages stay finite.
inline constexpr double kPsnrCap = 99.0;

double mse(const FrameBuffer &a, const FrameBuffer &b);

// Peak 1.0; min(kPsnrCap, 10 log10(1 / MSE)).
double psnr(const FrameBuffer &a, const FrameBuffer &b);

// Arithmetic mean of per-frame PSNR.
double stream_psnr(std::span<const FrameBuffer> outputs, std::span<const FrameBuffer> references);

// Mean structural similarity over 8x8 windows (stride 4, edge windows clamped
// to the border), averaged over channels.
double ssim(const FrameBuffer &a, const FrameBuffer &b);

struct LossConfig {
    double lambda_mse = 1.0;
    double lambda_perceptual = 0.0;
    // "none" contributes 0; "dssim" uses (1 - SSIM) / 2.
    std::string perceptual_impl = "none";
};

// lambda_mse * MSE + lambda_perceptual * perceptual(pred, target).
double loss_eval(const FrameBuffer &pred, const FrameBuffer &target, const LossConfig &cfg);

} // namespace nvs
