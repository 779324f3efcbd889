// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "io/config.hpp"
#include "io/pose_file.hpp"
#include "scene/gaussian.hpp"
#include "scene/rasterizer.hpp"
#include "stream/pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace nvs {

// Seeded moving Gaussian cloud around the origin, watched by a camera ring.
// Each primitive moves as mean0 + velocity * t + amplitude * sin(2 pi
// frequency t + phase) along its own random directions.
struct SyntheticSceneSpec {
    std::uint64_t seed = 7;
    int gaussians = 128;
    int frames = 50;
    // Input cameras on a semicircle of `radius` in the x-z plane, spanning
    // arc_deg and facing the origin.
    int cameras = 8;
    double radius = 4.0;
    double arc_deg = 180.0;
    double focal = 0.8;
    // Per-frame speed and oscillation, in scene units.
    double velocity = 0.004;
    double amplitude = 0.02;
    double frequency = 0.1;
    // Target viewpoint angle on the same ring (0 = ring center).
    double target_deg = 0.0;
    // Radius of the ball holding the primitive means.
    double extent = 1.0;
    int sh_degree = 1;
    Rgb background = {0.f, 0.f, 0.f};

    static SyntheticSceneSpec from_config(const Config &cfg);
    void validate() const;
};

class SyntheticScene {
public:
    explicit SyntheticScene(SyntheticSceneSpec spec);

    const SyntheticSceneSpec &spec() const { return spec_; }
    GaussianScene at(std::int64_t t) const;

    // Camera at `angle_deg` on the ring, looking at the origin.
    PoseRecord ring_pose(double angle_deg) const;
    std::vector<PoseRecord> ring() const;
    PoseRecord target() const { return ring_pose(spec_.target_deg); }
    double camera_angle_deg(int k) const;

    // The selected ring cameras' renders of frame t.
    MultiViewFrame capture(std::int64_t t, Resolution res, const std::vector<int> &views,
                           const RasterOptions &opts = {}) const;

private:
    struct Motion {
        Vec3 velocity;
        Vec3 direction;
        double phase;
    };
    SyntheticSceneSpec spec_;
    GaussianScene base_;
    std::vector<Motion> motion_;
};

// Renders the selected ring cameras on demand.
class SyntheticFrameSource final : public FrameSource {
public:
    SyntheticFrameSource(std::shared_ptr<const SyntheticScene> scene, Resolution res,
                         std::vector<int> views, RasterOptions opts = {});
    std::optional<MultiViewFrame> next() override;
    std::size_t view_count() const override { return views_.size(); }

private:
    std::shared_ptr<const SyntheticScene> scene_;
    Resolution res_;
    std::vector<int> views_;
    RasterOptions opts_;
    std::int64_t next_ = 0;
};

// Writes a dataset directory: view_<k>/frame_%06d.png for every ring camera,
// poses.json, target.pose, scenes/frame_%06d.gsc and the target camera's
// ground truth at twice `res` under gt/view_0/.
void write_synthetic_dataset(const SyntheticScene &scene, const std::filesystem::path &root,
                             Resolution res);

} // namespace nvs
