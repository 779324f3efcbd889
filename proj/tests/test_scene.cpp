// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "common/error.hpp"
#include "oracles.hpp"
#include "random_scene.hpp"
#include "scene/rasterizer.hpp"
#include "scene/scene_file.hpp"
#include "scene/sh.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>

using namespace nvs;

namespace {

Vec3 random_direction(std::mt19937_64 &rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return Vec3(n(rng), n(rng), n(rng)).normalized();
}

float max_channel_diff(const FrameBuffer &a, const FrameBuffer &b) {
    float d = 0.f;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
    return d;
}

} // namespace

TEST_CASE("spherical harmonics basis") {
    std::mt19937_64 rng(21);

    SUBCASE("matches the associated-Legendre construction up to degree 3") {
        for (int i = 0; i < 200; ++i) {
            const Vec3 d = random_direction(rng);
            const auto b = sh_basis(3, d);
            int k = 0;
            for (int l = 0; l <= 3; ++l)
                for (int m = -l; m <= l; ++m, ++k)
                    CHECK(b[static_cast<std::size_t>(k)] == doctest::Approx(oracle::real_sh(l, m, d)).epsilon(1e-12));
        }
    }

    SUBCASE("entries past the requested degree are zero") {
        const auto b = sh_basis(1, random_direction(rng));
        for (std::size_t k = 4; k < b.size(); ++k)
            CHECK(b[k] == 0.0);
        CHECK_THROWS_AS(sh_basis(4, Vec3(0, 0, 1)), InvalidArgument);
    }

    SUBCASE("degree 0 does not depend on direction") {
        const std::vector<double> c{0.3, -0.2, 0.9};
        const Rgb a = evaluate_sh(c, 0, random_direction(rng));
        const Rgb b = evaluate_sh(c, 0, random_direction(rng));
        CHECK(a == b);
        CHECK(a[0] == doctest::Approx(0.5 + 0.3 * 0.28209479177387814));
    }

    SUBCASE("the degree-1 band is odd") {
        std::vector<double> c(12, 0.0);
        for (std::size_t k = 3; k < 12; ++k)
            c[k] = std::normal_distribution<double>(0, 0.3)(rng);
        const Vec3 d = random_direction(rng);
        const auto plus = evaluate_sh_unclamped(c, 1, d);
        const auto minus = evaluate_sh_unclamped(c, 1, -d);
        for (int ch = 0; ch < 3; ++ch)
            CHECK(plus[static_cast<std::size_t>(ch)] - 0.5 == doctest::Approx(-(minus[static_cast<std::size_t>(ch)] - 0.5)).epsilon(1e-12));
    }

    SUBCASE("evaluated colour matches the oracle and is clamped") {
        for (int degree = 0; degree <= 3; ++degree) {
            std::vector<double> c(static_cast<std::size_t>(sh_coeff_count(degree)));
            for (auto &v : c)
                v = std::normal_distribution<double>(0, 1.0)(rng);
            const Vec3 d = random_direction(rng);
            const Rgb got = evaluate_sh(c, degree, d);
            const auto want = oracle::sh_color(c, degree, d);
            for (std::size_t ch = 0; ch < 3; ++ch) {
                CHECK(got[ch] == doctest::Approx(want[ch]).epsilon(1e-6));
                CHECK(got[ch] >= 0.f);
                CHECK(got[ch] <= 1.f);
            }
        }
        CHECK_THROWS_AS(evaluate_sh(std::vector<double>(5), 1, Vec3(0, 0, 1)), InvalidArgument);
    }

    SUBCASE("DC round trip") {
        for (double v : {0.0, 0.25, 0.5, 1.0})
            CHECK(0.5 + sh_dc_from_color(v) * 0.28209479177387814 == doctest::Approx(v));
    }
}

TEST_CASE("3D covariance") {
    CHECK(covariance_3d({}, Vec3(1, 1, 1)) == Mat3::Identity());
    CHECK(covariance_3d({}, Vec3(2, 1, 1)) == Vec3(4, 1, 1).asDiagonal().toDenseMatrix());
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> u(0.05, 2.0);
    for (int i = 0; i < 100; ++i) {
        std::normal_distribution<double> n;
        const Quaternion q = Quaternion{n(rng), n(rng), n(rng), n(rng)}.normalized();
        const Vec3 s(u(rng), u(rng), u(rng));
        const Mat3 R = oracle::rotation_from_quaternion(q.w, q.x, q.y, q.z);
        const Mat3 want = R * Mat3(s.cwiseProduct(s).asDiagonal()) * R.transpose();
        CHECK((covariance_3d(q, s) - want).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("screen-space covariance") {
    const Intrinsics k{100, 100, 32, 32};

    SUBCASE("Jacobian matches central differences of the projection") {
        std::mt19937_64 rng(23);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int i = 0; i < 50; ++i) {
            const Vec3 p(u(rng), u(rng), 2.0 + u(rng));
            const Mat23 J = pinhole_jacobian(p, k);
            const double h = 1e-6;
            for (int a = 0; a < 3; ++a) {
                Vec3 dp = Vec3::Zero();
                dp[a] = h;
                const auto hi = project_point(p + dp, Extrinsics::identity(), k);
                const auto lo = project_point(p - dp, Extrinsics::identity(), k);
                const double du = (hi->u - lo->u) / (2 * h), dv = (hi->v - lo->v) / (2 * h);
                CHECK(std::abs(J(0, a) - du) <= 1e-4 * std::max(1.0, std::abs(du)));
                CHECK(std::abs(J(1, a) - dv) <= 1e-4 * std::max(1.0, std::abs(dv)));
            }
        }
    }

    SUBCASE("isotropic on-axis Gaussian stays isotropic and scales with 1/depth^2") {
        GaussianPrimitive g = make_flat_gaussian(Vec3(0, 0, 3), Vec3::Constant(0.1), 0.8,
                                                 {1, 1, 1}, 0);
        const auto near = project_covariance(g, Extrinsics::identity(), k, 0.0);
        REQUIRE(near);
        CHECK(std::abs((*near)(0, 1)) < 1e-9);
        CHECK((*near)(0, 0) == doctest::Approx((*near)(1, 1)));
        g.mean.z() = 6.0;
        const auto far = project_covariance(g, Extrinsics::identity(), k, 0.0);
        REQUIRE(far);
        CHECK((*far)(0, 0) == doctest::Approx((*near)(0, 0) / 4.0).epsilon(1e-12));
        const auto dilated = project_covariance(g, Extrinsics::identity(), k);
        CHECK((*dilated)(0, 0) - (*far)(0, 0) == doctest::Approx(kLowPassDilation));
        g.mean.z() = -1.0;
        CHECK_FALSE(project_covariance(g, Extrinsics::identity(), k));
    }
}

TEST_CASE("Gaussians from a point map") {
    SUBCASE("single red point") {
        PointMap pm = PointMap::filled(1, 1);
        pm.points[0] = Vec3(0, 0, 5);
        FrameBuffer colors(1, 1, {1.f, 0.f, 0.f});
        const GaussianScene s = gaussians_from_pointmap(pm, colors, InitOptions{.sh_degree = 0, .opacity = 0.8, .source = {}, .pixel_angle = 1e-2, .footprint = 0.5});
        REQUIRE(s.size() == 1);
        CHECK(s.primitives[0].mean == Vec3(0, 0, 5));
        const Rgb c = evaluate_sh(s.primitives[0].sh, 0, Vec3(0, 0, 1));
        CHECK(c[0] == doctest::Approx(1.0));
        CHECK(c[1] == doctest::Approx(0.0));
        CHECK(c[2] == doctest::Approx(0.0));
    }
    SUBCASE("one primitive per valid pixel") {
        PointMap pm = PointMap::filled(7, 5);
        for (auto &p : pm.points)
            p = Vec3(0, 0, 2);
        CHECK(gaussians_from_pointmap(pm, FrameBuffer(7, 5)).size() == 35);
        pm.valid[3] = 0;
        CHECK(gaussians_from_pointmap(pm, FrameBuffer(7, 5)).size() == 34);
        CHECK_THROWS_AS(gaussians_from_pointmap(pm, FrameBuffer(6, 5)), InvalidArgument);
    }
    SUBCASE("scale grows linearly with depth") {
        PointMap pm = PointMap::filled(2, 1);
        pm.points[0] = Vec3(0, 0, 1);
        pm.points[1] = Vec3(0.1, 0, 2);
        const GaussianScene s = gaussians_from_pointmap(pm, FrameBuffer(2, 1));
        REQUIRE(s.size() == 2);
        CHECK(s.primitives[1].scale.x() == doctest::Approx(2.0 * s.primitives[0].scale.x()));
    }
}

TEST_CASE("rasterizer closed-form cases") {
    const Intrinsics k = intrinsics_from_normalized(1.0, 33, 33);

    SUBCASE("empty scene renders the background") {
        GaussianScene s;
        s.background = {0.2f, 0.4f, 0.6f};
        const FrameBuffer f = rasterize(s, Extrinsics::identity(), k, 33, 33);
        for (int y = 0; y < 33; ++y)
            for (int x = 0; x < 33; ++x)
                CHECK(f.pixel(x, y) == s.background);
    }

    SUBCASE("one opaque on-axis Gaussian shows its colour at the centre") {
        GaussianScene s;
        s.sh_degree = 0;
        s.primitives.push_back(make_flat_gaussian(Vec3(0, 0, 4), Vec3::Constant(0.5), 1.0,
                                                  {0.2f, 0.7f, 0.9f}, 0));
        const FrameBuffer f = rasterize(s, Extrinsics::identity(), k, 33, 33);
        const Rgb c = f.pixel(16, 16);
        CHECK(c[0] == doctest::Approx(0.2).epsilon(0.01));
        CHECK(c[1] == doctest::Approx(0.7).epsilon(0.01));
        CHECK(c[2] == doctest::Approx(0.9).epsilon(0.01));
    }

    SUBCASE("nearer Gaussian wins") {
        GaussianScene s;
        s.sh_degree = 0;
        // Listed far-first so order in the array does not decide.
        s.primitives.push_back(make_flat_gaussian(Vec3(0, 0, 2), Vec3::Constant(1.0), 1.0, {0, 0, 1}, 0));
        s.primitives.push_back(make_flat_gaussian(Vec3(0, 0, 1), Vec3::Constant(0.5), 1.0, {1, 0, 0}, 0));
        const FrameBuffer f = rasterize(s, Extrinsics::identity(), k, 33, 33);
        const Rgb c = f.pixel(16, 16);
        CHECK(c[0] > 0.95f);
        CHECK(c[2] < 0.05f);
        const FrameBuffer ref = oracle::brute_force_render(s, Mat3::Identity(), Vec3::Zero(),
                                                           k.focal_x, k.focal_y, k.c_x, k.c_y, 33, 33);
        CHECK(max_channel_diff(f, ref) < 1e-4f);
    }

    SUBCASE("composited colour plus transmittance times background is the pixel") {
        std::mt19937_64 rng(24);
        const auto v = testing_support::random_view(rng, 32, 24);
        const RasterOutput out = rasterize_detailed(v.scene, v.extrinsics, v.intrinsics, v.width, v.height);
        for (int y = 0; y < v.height; ++y)
            for (int x = 0; x < v.width; ++x) {
                const std::size_t p = static_cast<std::size_t>(y) * v.width + x;
                CHECK(out.transmittance[p] >= 0.0);
                CHECK(out.transmittance[p] <= 1.0);
                for (int c = 0; c < 3; ++c)
                    CHECK(out.image.at(x, y, c) ==
                          doctest::Approx(out.composited[p * 3 + c] +
                                          out.transmittance[p] * v.scene.background[static_cast<std::size_t>(c)])
                              .epsilon(1e-6));
            }
    }

    SUBCASE("bad arguments") {
        GaussianScene s;
        CHECK_THROWS_AS(rasterize(s, Extrinsics::identity(), k, 0, 10), InvalidArgument);
        CHECK_THROWS_AS(rasterize(s, Extrinsics::identity(), Intrinsics{0, 1, 0, 0}, 4, 4), InvalidArgument);
    }
}

TEST_CASE("rasterizer matches the brute-force oracle on random scenes") {
    std::mt19937_64 rng(25);
    for (int i = 0; i < 40; ++i) {
        const auto v = testing_support::random_view(rng, 48, 40);
        const FrameBuffer got = rasterize(v.scene, v.extrinsics, v.intrinsics, v.width, v.height);
        const FrameBuffer want = oracle::brute_force_render(
            v.scene, v.extrinsics.rotation, v.extrinsics.translation, v.intrinsics.focal_x,
            v.intrinsics.focal_y, v.intrinsics.c_x, v.intrinsics.c_y, v.width, v.height);
        CHECK(max_channel_diff(got, want) < 1e-4f);
    }
}

TEST_CASE("rasterizer output does not depend on thread count or tile size") {
    std::mt19937_64 rng(26);
    const auto v = testing_support::random_view(rng, 64, 64);
    const FrameBuffer a = rasterize(v.scene, v.extrinsics, v.intrinsics, v.width, v.height, {16, 1});
    const FrameBuffer b = rasterize(v.scene, v.extrinsics, v.intrinsics, v.width, v.height, {16, 4});
    const FrameBuffer c = rasterize(v.scene, v.extrinsics, v.intrinsics, v.width, v.height, {7, 3});
    CHECK(a == b);
    CHECK(a == c);
}

TEST_CASE("scene snapshots") {
    std::mt19937_64 rng(27);
    auto v = testing_support::random_view(rng, 20, 8, 3);
    // Snapshots store f32; make every parameter representable first.
    auto to_f32 = [](double x) { return static_cast<double>(static_cast<float>(x)); };
    for (auto &g : v.scene.primitives) {
        for (int a = 0; a < 3; ++a) {
            g.mean[a] = to_f32(g.mean[a]);
            g.scale[a] = to_f32(g.scale[a]);
        }
        g.rotation = {to_f32(g.rotation.w), to_f32(g.rotation.x), to_f32(g.rotation.y), to_f32(g.rotation.z)};
        g.opacity = to_f32(g.opacity);
        for (auto &c : g.sh)
            c = to_f32(c);
    }
    v.scene.background = {0, 0, 0};

    SUBCASE("encode and decode") {
        const auto bytes = encode_scene(v.scene);
        CHECK(decode_scene(bytes) == v.scene);
    }
    SUBCASE("file round trip") {
        const auto path = std::filesystem::temp_directory_path() / "nvs_test_scene.gsc";
        write_scene_file(path, v.scene);
        CHECK(read_scene_file(path) == v.scene);
        std::filesystem::remove(path);
    }
    SUBCASE("malformed input") {
        auto bytes = encode_scene(v.scene);
        auto bad_magic = bytes;
        bad_magic[0] = 'X';
        CHECK_THROWS_AS(decode_scene(bad_magic), IoError);
        if (!v.scene.primitives.empty()) {
            bytes.pop_back();
            CHECK_THROWS_AS(decode_scene(bytes), IoError);
        }
        CHECK_THROWS_AS(read_scene_file("/nonexistent/x.gsc"), IoError);
    }
}
