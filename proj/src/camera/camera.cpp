// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "camera/camera.hpp"

#include "common/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace nvs {

double Quaternion::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

Quaternion Quaternion::normalized() const {
    const double n = norm();
    if (!std::isfinite(n) || n == 0.0)
        throw InvalidArgument("quaternion must be finite with nonzero norm");
    const double s = (w < 0.0 ? -1.0 : 1.0) / n;
    return {w * s, x * s, y * s, z * s};
}

Mat3 quat_to_rotation(const Quaternion &q) {
    const Quaternion u = q.normalized();
    const double w = u.w, x = u.x, y = u.y, z = u.z;
    Mat3 r;
    r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
        2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
        2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
    return r;
}

Quaternion rotation_to_quat(const Mat3 &m) {
    // Shepperd: pick the largest of the four squared components to divide by.
    const double tr = m.trace();
    Quaternion q;
    if (tr >= m(0, 0) && tr >= m(1, 1) && tr >= m(2, 2)) {
        const double s = 2.0 * std::sqrt(std::max(0.0, 1.0 + tr));
        q = {0.25 * s, (m(2, 1) - m(1, 2)) / s, (m(0, 2) - m(2, 0)) / s, (m(1, 0) - m(0, 1)) / s};
    } else if (m(0, 0) >= m(1, 1) && m(0, 0) >= m(2, 2)) {
        const double s = 2.0 * std::sqrt(std::max(0.0, 1.0 + m(0, 0) - m(1, 1) - m(2, 2)));
        q = {(m(2, 1) - m(1, 2)) / s, 0.25 * s, (m(0, 1) + m(1, 0)) / s, (m(0, 2) + m(2, 0)) / s};
    } else if (m(1, 1) >= m(2, 2)) {
        const double s = 2.0 * std::sqrt(std::max(0.0, 1.0 + m(1, 1) - m(0, 0) - m(2, 2)));
        q = {(m(0, 2) - m(2, 0)) / s, (m(0, 1) + m(1, 0)) / s, 0.25 * s, (m(1, 2) + m(2, 1)) / s};
    } else {
        const double s = 2.0 * std::sqrt(std::max(0.0, 1.0 + m(2, 2) - m(0, 0) - m(1, 1)));
        q = {(m(1, 0) - m(0, 1)) / s, (m(0, 2) + m(2, 0)) / s, (m(1, 2) + m(2, 1)) / s, 0.25 * s};
    }
    return q.normalized();
}

Extrinsics Extrinsics::inverse() const {
    Extrinsics inv;
    inv.rotation = rotation.transpose();
    inv.translation = -inv.rotation * translation;
    return inv;
}

Extrinsics compose(const Extrinsics &a, const Extrinsics &b) {
    return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

void validate_extrinsics(const Extrinsics &e) {
    if (!e.rotation.allFinite() || !e.translation.allFinite())
        throw InvalidArgument("extrinsics contain non-finite values");
    const double orth = (e.rotation.transpose() * e.rotation - Mat3::Identity()).norm();
    const double det = e.rotation.determinant();
    if (det <= 0.0)
        throw InvalidArgument("extrinsic rotation is degenerate (det <= 0)");
    if (orth > 1e-6 || std::abs(det - 1.0) > 1e-6)
        throw InvalidArgument("extrinsic rotation is not orthonormal");
}

Extrinsics look_at(const Vec3 &eye, const Vec3 &target, const Vec3 &up) {
    const Vec3 forward = (target - eye).normalized();
    const Vec3 down = -up;
    Vec3 y = down - down.dot(forward) * forward;
    NVS_REQUIRE(y.norm() > 1e-12, "look_at: up vector parallel to viewing direction");
    y.normalize();
    const Vec3 x = y.cross(forward);
    Extrinsics e;
    e.rotation.row(0) = x.transpose();
    e.rotation.row(1) = y.transpose();
    e.rotation.row(2) = forward.transpose();
    e.translation = -e.rotation * eye;
    return e;
}

Intrinsics intrinsics_from_normalized(double focal, int width, int height) {
    NVS_REQUIRE(std::isfinite(focal) && focal > 0.0, "normalized focal must be positive");
    NVS_REQUIRE(width >= 1 && height >= 1, "image dimensions must be at least 1");
    return {focal * width, focal * height, width / 2.0, height / 2.0};
}

std::array<double, 7> PoseEmbedding::to_array() const {
    return {quaternion.w, quaternion.x, quaternion.y, quaternion.z,
            translation.x(), translation.y(), translation.z()};
}

PoseEmbedding PoseEmbedding::from_array(const std::array<double, 7> &v) {
    return {Quaternion{v[0], v[1], v[2], v[3]}.normalized(), Vec3(v[4], v[5], v[6])};
}

PoseEmbedding pack_pose(const Extrinsics &e, double scale) {
    NVS_REQUIRE(std::isfinite(scale) && scale > 0.0, "pose scale must be positive");
    validate_extrinsics(e);
    return {rotation_to_quat(e.rotation), e.translation / scale};
}

Extrinsics unpack_pose(const PoseEmbedding &p, double scale) {
    NVS_REQUIRE(std::isfinite(scale) && scale > 0.0, "pose scale must be positive");
    NVS_REQUIRE(p.translation.allFinite(), "pose translation must be finite");
    return {quat_to_rotation(p.quaternion), p.translation * scale};
}

std::optional<Projection> project_point(const Vec3 &world, const Extrinsics &e,
                                        const Intrinsics &k) {
    const Vec3 c = e.to_camera(world);
    if (!(c.z() > kNearPlane))
        return std::nullopt;
    return Projection{k.c_x + k.focal_x * c.x() / c.z(), k.c_y + k.focal_y * c.y() / c.z(),
                      c.z()};
}

// ---------------------------------------------------------------------------

double rotation_angle_deg(const Mat3 &a, const Mat3 &b) {
    const Mat3 d = a.transpose() * b;
    // atan2 form keeps precision for small angles where acos would not.
    const Vec3 axis(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1));
    const double s = 0.5 * axis.norm();
    const double c = 0.5 * (d.trace() - 1.0);
    return std::atan2(s, c) * 180.0 / M_PI;
}

double direction_angle_deg(const Vec3 &a, const Vec3 &b) {
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 && nb == 0.0)
        return 0.0;
    if (na == 0.0 || nb == 0.0)
        return 90.0;
    return std::atan2(a.cross(b).norm(), a.dot(b)) * 180.0 / M_PI;
}

std::vector<PairError> relative_pose_errors(const std::vector<Extrinsics> &pred,
                                            const std::vector<Extrinsics> &gt, PairSet pair_set) {
    NVS_REQUIRE(pred.size() == gt.size(), "pose lists differ in length");
    NVS_REQUIRE(pred.size() >= 2, "pose metrics need at least two poses");
    for (const auto &e : pred)
        validate_extrinsics(e);
    for (const auto &e : gt)
        validate_extrinsics(e);

    // Rigid alignment so that aligned[0] == gt[0]. Relative poses are already
    // invariant to it; it matters for anything reading absolute poses.
    const Extrinsics align = compose(pred[0].inverse(), gt[0]);
    std::vector<Extrinsics> aligned;
    aligned.reserve(pred.size());
    for (const auto &e : pred)
        aligned.push_back(compose(e, align));

    const int n = static_cast<int>(pred.size());
    std::vector<PairError> out;
    auto add = [&](int i, int j) {
        const Extrinsics rp = compose(aligned[j], aligned[i].inverse());
        const Extrinsics rg = compose(gt[j], gt[i].inverse());
        out.push_back({i, j, rotation_angle_deg(rp.rotation, rg.rotation),
                       direction_angle_deg(rp.translation, rg.translation)});
    };
    if (pair_set == PairSet::all) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                add(i, j);
    } else {
        for (int i = 0; i + 1 < n; ++i)
            add(i, i + 1);
    }
    return out;
}

PoseErrorReport summarize_pose_errors(std::vector<PairError> pairs, double tau_deg) {
    NVS_REQUIRE(!pairs.empty(), "no pose pairs to summarize");
    NVS_REQUIRE(tau_deg > 0.0, "threshold must be positive");
    const double count = static_cast<double>(pairs.size());
    auto fraction_below = [&](double threshold, bool rotation) {
        std::size_t hits = 0;
        for (const auto &p : pairs)
            hits += (rotation ? p.rotation_deg : p.translation_deg) < threshold;
        return static_cast<double>(hits) / count;
    };

    PoseErrorReport r;
    r.tau_deg = tau_deg;
    r.rra = 100.0 * fraction_below(tau_deg, true);
    r.rta = 100.0 * fraction_below(tau_deg, false);
    double rot = 0.0, trans = 0.0;
    for (int d = 1; d <= 30; ++d) {
        rot += fraction_below(d, true);
        trans += fraction_below(d, false);
    }
    r.auc_30 = 100.0 * 0.5 * (rot + trans) / 30.0;
    r.pairs = std::move(pairs);
    return r;
}

PoseErrorReport pose_error_metrics(const std::vector<Extrinsics> &pred,
                                   const std::vector<Extrinsics> &gt, double tau_deg,
                                   PairSet pairs) {
    return summarize_pose_errors(relative_pose_errors(pred, gt, pairs), tau_deg);
}

} // namespace nvs
