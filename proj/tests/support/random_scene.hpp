// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "camera/camera.hpp"
#include "scene/gaussian.hpp"
#include "scene/sh.hpp"

#include <random>

namespace testing_support {

struct RandomView {
    nvs::GaussianScene scene;
    nvs::Extrinsics extrinsics;
    nvs::Intrinsics intrinsics;
    int width = 0;
    int height = 0;
};

// Up to `max_gaussians` primitives in a unit ball, seen from a random camera
// about four units away.
inline RandomView random_view(std::mt19937_64 &rng, int max_gaussians = 64, int max_size = 64,
                              int max_degree = 1) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };

    RandomView v;
    v.width = std::uniform_int_distribution<int>(8, max_size)(rng);
    v.height = std::uniform_int_distribution<int>(8, max_size)(rng);
    v.scene.sh_degree = std::uniform_int_distribution<int>(0, max_degree)(rng);
    v.scene.background = {static_cast<float>(u(rng)), static_cast<float>(u(rng)),
                          static_cast<float>(u(rng))};

    const int count = std::uniform_int_distribution<int>(0, max_gaussians)(rng);
    for (int i = 0; i < count; ++i) {
        nvs::GaussianPrimitive g;
        nvs::Vec3 p(n(rng), n(rng), n(rng));
        g.mean = p.normalized() * std::cbrt(u(rng));
        g.rotation = nvs::Quaternion{n(rng), n(rng), n(rng), n(rng)}.normalized();
        g.scale = nvs::Vec3(uniform(0.02, 0.3), uniform(0.02, 0.3), uniform(0.02, 0.3));
        g.opacity = uniform(0.0, 1.0);
        g.sh.resize(static_cast<std::size_t>(nvs::sh_coeff_count(v.scene.sh_degree)));
        for (std::size_t k = 0; k < g.sh.size(); ++k)
            g.sh[k] = k < 3 ? uniform(-1.8, 1.8) : 0.4 * n(rng);
        v.scene.primitives.push_back(std::move(g));
    }

    nvs::Vec3 eye(n(rng), 0.5 * n(rng), n(rng));
    eye = eye.normalized() * uniform(3.0, 5.0);
    v.extrinsics = nvs::look_at(eye, nvs::Vec3(uniform(-0.2, 0.2), uniform(-0.2, 0.2), 0.0));
    v.intrinsics = nvs::intrinsics_from_normalized(uniform(0.6, 1.4), v.width, v.height);
    return v;
}

} // namespace testing_support
