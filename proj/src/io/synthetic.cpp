// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "io/synthetic.hpp"

#include "common/error.hpp"
#include "io/dataset.hpp"
#include "io/image_io.hpp"
#include "scene/scene_file.hpp"
#include "scene/sh.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace nvs {

SyntheticSceneSpec SyntheticSceneSpec::from_config(const Config &cfg) {
    SyntheticSceneSpec s;
    s.seed = cfg.get<std::uint64_t>("synth.seed");
    s.gaussians = cfg.get<int>("synth.gaussians");
    s.frames = cfg.get<int>("synth.frames");
    s.cameras = cfg.get<int>("synth.cameras");
    s.radius = cfg.get<double>("synth.radius");
    s.arc_deg = cfg.get<double>("synth.arc_deg");
    s.focal = cfg.get<double>("synth.focal");
    s.velocity = cfg.get<double>("synth.velocity");
    s.amplitude = cfg.get<double>("synth.amplitude");
    s.frequency = cfg.get<double>("synth.frequency");
    s.target_deg = cfg.get<double>("synth.target_deg");
    s.extent = cfg.get<double>("synth.extent");
    s.sh_degree = cfg.get<int>("scene.sh_degree");
    const auto bg = cfg.get<std::vector<float>>("scene.background");
    if (bg.size() != 3)
        throw ConfigError("config key 'scene.background' (" + cfg.origin("scene.background") +
                          ") needs 3 values");
    s.background = {bg[0], bg[1], bg[2]};
    s.validate();
    return s;
}

void SyntheticSceneSpec::validate() const {
    NVS_REQUIRE(gaussians >= 1, "synthetic scene needs at least one Gaussian");
    NVS_REQUIRE(frames >= 1, "synthetic scene needs at least one frame");
    NVS_REQUIRE(cameras >= 2, "synthetic rig needs at least two cameras");
    NVS_REQUIRE(radius > extent && extent > 0.0, "ring radius must exceed the scene extent");
    NVS_REQUIRE(arc_deg > 0.0 && arc_deg <= 360.0, "ring arc must lie in (0, 360] degrees");
    NVS_REQUIRE(focal > 0.0, "focal must be positive");
    NVS_REQUIRE(velocity >= 0.0 && amplitude >= 0.0 && frequency >= 0.0,
                "motion parameters must be nonnegative");
    NVS_REQUIRE(sh_degree >= 0 && sh_degree <= kMaxShDegree, "SH degree must lie in [0, 3]");
}

namespace {

Vec3 random_unit(std::mt19937_64 &rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    for (;;) {
        Vec3 v(n(rng), n(rng), n(rng));
        if (v.norm() > 1e-9)
            return v.normalized();
    }
}

} // namespace

SyntheticScene::SyntheticScene(SyntheticSceneSpec spec) : spec_(spec) {
    spec_.validate();
    std::mt19937_64 rng(spec_.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> n01(0.0, 1.0);
    base_.sh_degree = spec_.sh_degree;
    base_.background = spec_.background;
    const int coeffs = sh_basis_count(spec_.sh_degree);
    for (int i = 0; i < spec_.gaussians; ++i) {
        GaussianPrimitive g;
        g.mean = random_unit(rng) * spec_.extent * std::cbrt(u01(rng));
        g.rotation = Quaternion{n01(rng), n01(rng), n01(rng), n01(rng)}.normalized();
        for (int a = 0; a < 3; ++a)
            g.scale[a] = spec_.extent * 0.06 * std::exp(u01(rng) * std::log(3.0));
        g.opacity = 0.4 + 0.5 * u01(rng);
        g.sh.assign(static_cast<std::size_t>(3 * coeffs), 0.0);
        const Rgb color = {static_cast<float>(0.15 + 0.75 * u01(rng)),
                           static_cast<float>(0.15 + 0.75 * u01(rng)),
                           static_cast<float>(0.15 + 0.75 * u01(rng))};
        for (int c = 0; c < 3; ++c)
            g.sh[c] = sh_dc_from_color(color[c]);
        for (int k = 1; k < coeffs; ++k)
            for (int c = 0; c < 3; ++c)
                g.sh[3 * k + c] = 0.08 * n01(rng);
        base_.primitives.push_back(std::move(g));

        Motion m;
        m.velocity = random_unit(rng) * spec_.velocity;
        m.direction = random_unit(rng);
        m.phase = 2.0 * std::numbers::pi * u01(rng);
        motion_.push_back(m);
    }
}

GaussianScene SyntheticScene::at(std::int64_t t) const {
    GaussianScene scene = base_;
    const double tt = static_cast<double>(t);
    for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
        const Motion &m = motion_[i];
        scene.primitives[i].mean +=
            m.velocity * tt +
            m.direction * (spec_.amplitude *
                           std::sin(2.0 * std::numbers::pi * spec_.frequency * tt + m.phase));
    }
    return scene;
}

double SyntheticScene::camera_angle_deg(int k) const {
    NVS_REQUIRE(k >= 0 && k < spec_.cameras, "camera index out of range");
    return -0.5 * spec_.arc_deg + spec_.arc_deg * k / (spec_.cameras - 1);
}

PoseRecord SyntheticScene::ring_pose(double angle_deg) const {
    const double a = angle_deg * std::numbers::pi / 180.0;
    const Vec3 eye(spec_.radius * std::sin(a), 0.0, -spec_.radius * std::cos(a));
    return {look_at(eye, Vec3::Zero()), spec_.focal};
}

std::vector<PoseRecord> SyntheticScene::ring() const {
    std::vector<PoseRecord> out;
    for (int k = 0; k < spec_.cameras; ++k)
        out.push_back(ring_pose(camera_angle_deg(k)));
    return out;
}

MultiViewFrame SyntheticScene::capture(std::int64_t t, Resolution res, const std::vector<int> &views,
                                       const RasterOptions &opts) const {
    const GaussianScene scene = at(t);
    MultiViewFrame f{{}, t};
    for (int k : views) {
        const CameraView cam = ring_pose(camera_angle_deg(k)).view(res);
        f.views.push_back(rasterize(scene, cam.extrinsics, cam.intrinsics, res.width, res.height, opts));
    }
    return f;
}

SyntheticFrameSource::SyntheticFrameSource(std::shared_ptr<const SyntheticScene> scene,
                                           Resolution res, std::vector<int> views,
                                           RasterOptions opts)
    : scene_(std::move(scene)), res_(res), views_(std::move(views)), opts_(opts) {
    NVS_REQUIRE(scene_ != nullptr, "synthetic source needs a scene");
    for (int k : views_)
        NVS_REQUIRE(k >= 0 && k < scene_->spec().cameras,
                    "view " + std::to_string(k) + " is not on the synthetic ring");
}

std::optional<MultiViewFrame> SyntheticFrameSource::next() {
    if (next_ >= scene_->spec().frames)
        return std::nullopt;
    return scene_->capture(next_++, res_, views_, opts_);
}

void write_synthetic_dataset(const SyntheticScene &scene, const std::filesystem::path &root,
                             Resolution res) {
    namespace fs = std::filesystem;
    const auto &spec = scene.spec();
    fs::create_directories(root / "scenes");
    fs::create_directories(root / "gt" / "view_0");
    std::vector<int> all(static_cast<std::size_t>(spec.cameras));
    for (int k = 0; k < spec.cameras; ++k) {
        all[static_cast<std::size_t>(k)] = k;
        fs::create_directories(root / view_dir_name(k));
    }
    write_pose_file(root / "poses.json", scene.ring());
    write_pose_file(root / "target.pose", {scene.target()});

    const Resolution gt_res{res.width * 2, res.height * 2};
    const CameraView gt_cam = scene.target().view(gt_res);
    for (std::int64_t t = 0; t < spec.frames; ++t) {
        const MultiViewFrame f = scene.capture(t, res, all);
        for (int k = 0; k < spec.cameras; ++k)
            write_png(root / view_dir_name(k) / frame_file_name(t),
                      f.views[static_cast<std::size_t>(k)].to_rgb8());
        const GaussianScene s = scene.at(t);
        write_scene_file(root / "scenes" / frame_file_name(t, ".gsc"), s);
        write_png(root / "gt" / "view_0" / frame_file_name(t),
                  rasterize(s, gt_cam.extrinsics, gt_cam.intrinsics, gt_res.width, gt_res.height)
                      .to_rgb8());
    }
}

} // namespace nvs
