// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "common/error.hpp"
#include "io/synthetic.hpp"
#include "metrics/metrics.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace nvs;

TEST_CASE("PSNR closed forms") {
    const FrameBuffer a(16, 16, {0.f, 0.f, 0.f});
    CHECK(psnr(a, a) == kPsnrCap);
    // 0.1f is the nearest float to 0.1; the residual moves PSNR by ~1e-7 dB.
    const FrameBuffer b(16, 16, {0.1f, 0.1f, 0.1f});
    CHECK(mse(a, b) == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(std::abs(psnr(a, b) - 20.0) < 1e-6);
    CHECK_THROWS_AS(psnr(a, FrameBuffer(8, 16)), InvalidArgument);
    CHECK_THROWS_AS(psnr(FrameBuffer(), FrameBuffer()), InvalidArgument);
}

TEST_CASE("PSNR matches the long-double oracle") {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 20; ++i) {
        const FrameBuffer a = oracle::random_image(rng, 31, 17);
        FrameBuffer b = a;
        std::normal_distribution<float> noise(0.f, 0.02f);
        for (auto &v : b.data())
            v += noise(rng);
        CHECK(std::abs(psnr(a, b) - oracle::psnr(a, b)) < 1e-9);
        CHECK(std::abs(mse(a, b) - static_cast<double>(oracle::mse(a, b))) < 1e-15);
    }
}

TEST_CASE("stream PSNR is the arithmetic mean of frame PSNR") {
    const FrameBuffer ref(8, 8, {0.f, 0.f, 0.f});
    const float d30 = static_cast<float>(std::sqrt(1e-3));
    const std::vector<FrameBuffer> out{FrameBuffer(8, 8, {0.1f, 0.1f, 0.1f}), FrameBuffer(8, 8, {d30, d30, d30})};
    const std::vector<FrameBuffer> refs{ref, ref};
    CHECK(stream_psnr(out, refs) == doctest::Approx(25.0).epsilon(1e-6));
    const std::vector<FrameBuffer> same{ref, ref, ref};
    CHECK(stream_psnr(same, same) == kPsnrCap);
    CHECK_THROWS_AS(stream_psnr(same, refs), InvalidArgument);
}

TEST_CASE("stream PSNR over a synthetic run equals independently computed frame values") {
    SyntheticSceneSpec spec;
    spec.gaussians = 24;
    spec.frames = 300;
    const SyntheticScene synth(spec);
    const Resolution res{20, 16};
    const CameraView target = synth.target().view(res);
    const CameraView target2x = synth.target().view({40, 32});
    std::vector<FrameBuffer> outputs, refs;
    for (std::int64_t t = 0; t < spec.frames; ++t) {
        outputs.push_back(BicubicSuperRes::upscale(
            rasterize(synth.at(t), target.extrinsics, target.intrinsics, res.width, res.height)));
        refs.push_back(rasterize(synth.at(t), target2x.extrinsics, target2x.intrinsics, 40, 32));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < outputs.size(); ++i)
        sum += oracle::psnr(outputs[i], refs[i]);
    CHECK(stream_psnr(outputs, refs) == doctest::Approx(sum / 300.0).epsilon(1e-9));
}

TEST_CASE("SSIM") {
    std::mt19937_64 rng(42);
    const FrameBuffer a = oracle::random_image(rng, 24, 20);
    CHECK(ssim(a, a) == doctest::Approx(1.0));
    FrameBuffer b = a;
    for (auto &v : b.data())
        v = 1.f - v;
    CHECK(ssim(a, b) < 0.5);
    // Symmetric in its arguments.
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)));
}

TEST_CASE("loss") {
    std::mt19937_64 rng(43);
    const FrameBuffer pred = oracle::random_image(rng, 16, 12);
    const FrameBuffer target = oracle::random_image(rng, 16, 12);

    SUBCASE("zero at identity for any weights") {
        for (double lm : {0.0, 0.5, 2.0})
            for (double lp : {0.0, 0.3, 1.0}) {
                if (lm == 0.0 && lp == 0.0)
                    continue;
                const LossConfig cfg{lm, lp, lp > 0.0 ? "dssim" : "none"};
                CHECK(loss_eval(pred, pred, cfg) == doctest::Approx(0.0));
            }
    }
    SUBCASE("MSE term alone") {
        const FrameBuffer z(8, 8, {0.f, 0.f, 0.f}), t(8, 8, {0.1f, 0.1f, 0.1f});
        CHECK(loss_eval(z, t, {1.0, 0.0, "none"}) == doctest::Approx(0.01).epsilon(1e-6));
    }
    SUBCASE("linear in each weight") {
        const double one = loss_eval(pred, target, {1.0, 0.0, "none"});
        CHECK(loss_eval(pred, target, {2.0, 0.0, "none"}) == doctest::Approx(2.0 * one).epsilon(1e-12));
        const double p1 = loss_eval(pred, target, {1.0, 1.0, "dssim"});
        const double p3 = loss_eval(pred, target, {1.0, 3.0, "dssim"});
        const double dssim = (1.0 - ssim(pred, target)) / 2.0;
        CHECK(p1 == doctest::Approx(one + dssim).epsilon(1e-12));
        CHECK(p3 - p1 == doctest::Approx(2.0 * dssim).epsilon(1e-9));
    }
    SUBCASE("configuration errors") {
        CHECK_THROWS_AS(loss_eval(pred, target, {1.0, 1.0, "lpips"}), ConfigError);
        CHECK_THROWS_AS(loss_eval(pred, target, {-1.0, 0.0, "none"}), InvalidArgument);
        CHECK_THROWS_AS(loss_eval(pred, target, {0.0, 0.0, "none"}), InvalidArgument);
    }
}
