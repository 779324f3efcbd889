// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "metrics/metrics.hpp"

#include "common/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace nvs {

namespace {

void require_same_shape(const FrameBuffer &a, const FrameBuffer &b) {
    if (a.width() != b.width() || a.height() != b.height())
        throw InvalidArgument("image sizes differ: " + std::to_string(a.width()) + "x" +
                              std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                              "x" + std::to_string(b.height()));
    NVS_REQUIRE(!a.empty(), "images are empty");
}

// Window statistics for one channel of one window.
double window_ssim(const FrameBuffer &a, const FrameBuffer &b, int x0, int y0, int size, int c) {
    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    const int wx = std::min(size, a.width()), wy = std::min(size, a.height());
    const double n = static_cast<double>(wx) * wy;
    double ma = 0, mb = 0;
    for (int y = y0; y < y0 + wy; ++y)
        for (int x = x0; x < x0 + wx; ++x) {
            ma += a.at(x, y, c);
            mb += b.at(x, y, c);
        }
    ma /= n;
    mb /= n;
    double va = 0, vb = 0, cov = 0;
    for (int y = y0; y < y0 + wy; ++y)
        for (int x = x0; x < x0 + wx; ++x) {
            const double da = a.at(x, y, c) - ma, db = b.at(x, y, c) - mb;
            va += da * da;
            vb += db * db;
            cov += da * db;
        }
    va /= n;
    vb /= n;
    cov /= n;
    return ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
}

std::vector<int> window_origins(int extent, int size, int stride) {
    std::vector<int> out;
    const int last = std::max(0, extent - size);
    for (int o = 0; o < last; o += stride)
        out.push_back(o);
    out.push_back(last);
    return out;
}

} // namespace

double mse(const FrameBuffer &a, const FrameBuffer &b) {
    require_same_shape(a, b);
    const auto &da = a.data();
    const auto &db = b.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < da.size(); ++i) {
        const double d = static_cast<double>(da[i]) - static_cast<double>(db[i]);
        sum += d * d;
    }
    return sum / static_cast<double>(da.size());
}

double psnr(const FrameBuffer &a, const FrameBuffer &b) {
    const double m = mse(a, b);
    if (m <= 0.0)
        return kPsnrCap;
    return std::min(kPsnrCap, -10.0 * std::log10(m));
}

double stream_psnr(std::span<const FrameBuffer> outputs, std::span<const FrameBuffer> references) {
    if (outputs.size() != references.size())
        throw InvalidArgument("stream lengths differ: " + std::to_string(outputs.size()) + " vs " +
                              std::to_string(references.size()));
    NVS_REQUIRE(!outputs.empty(), "stream_psnr needs at least one frame");
    double sum = 0.0;
    for (std::size_t i = 0; i < outputs.size(); ++i)
        sum += psnr(outputs[i], references[i]);
    return sum / static_cast<double>(outputs.size());
}

double ssim(const FrameBuffer &a, const FrameBuffer &b) {
    require_same_shape(a, b);
    constexpr int kWindow = 8, kStride = 4;
    const auto xs = window_origins(a.width(), kWindow, kStride);
    const auto ys = window_origins(a.height(), kWindow, kStride);
    double sum = 0.0;
    for (int y : ys)
        for (int x : xs)
            for (int c = 0; c < 3; ++c)
                sum += window_ssim(a, b, x, y, kWindow, c);
    return sum / static_cast<double>(xs.size() * ys.size() * 3);
}

double loss_eval(const FrameBuffer &pred, const FrameBuffer &target, const LossConfig &cfg) {
    if (cfg.perceptual_impl != "none" && cfg.perceptual_impl != "dssim")
        throw ConfigError("unknown perceptual term '" + cfg.perceptual_impl +
                          "' (expected none or dssim)");
    NVS_REQUIRE(cfg.lambda_mse >= 0.0 && cfg.lambda_perceptual >= 0.0,
                "loss weights must be nonnegative");
    NVS_REQUIRE(cfg.lambda_mse > 0.0 || cfg.lambda_perceptual > 0.0,
                "at least one loss weight must be positive");
    double loss = cfg.lambda_mse * mse(pred, target);
    // DSSIM of identical images is 0 by definition; skip the rounding noise.
    if (cfg.perceptual_impl == "dssim" && cfg.lambda_perceptual > 0.0 && !(pred == target))
        loss += cfg.lambda_perceptual * std::max(0.0, 0.5 * (1.0 - ssim(pred, target)));
    return loss;
}

} // namespace nvs
