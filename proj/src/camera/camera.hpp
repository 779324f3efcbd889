// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <vector>

namespace nvs {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

// Points closer than this (camera-space z) are culled.
inline constexpr double kNearPlane = 1e-4;

struct Quaternion {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const;

    // Unit length, sign fixed so that w >= 0. Throws InvalidArgument on a
    // zero or non-finite quaternion.
    Quaternion normalized() const;

    bool operator==(const Quaternion &) const = default;
};

// Rotation matrix of q (normalized internally).
Mat3 quat_to_rotation(const Quaternion &q);

// Inverse of quat_to_rotation on proper rotations; returns the canonical
// (w >= 0) representative.
Quaternion rotation_to_quat(const Mat3 &rotation);

// World-to-camera rigid transform: x_cam = rotation * x_world + translation.
// Camera looks down +z, x to the right, y down.
struct Extrinsics {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static Extrinsics identity() { return {}; }

    Vec3 to_camera(const Vec3 &world) const { return rotation * world + translation; }
    Vec3 center() const { return -rotation.transpose() * translation; }
    Extrinsics inverse() const;

    bool operator==(const Extrinsics &) const = default;
};

// Composition a * b (apply b first, then a).
Extrinsics compose(const Extrinsics &a, const Extrinsics &b);

// Throws InvalidArgument unless rotation is orthonormal with det +1 (1e-6).
void validate_extrinsics(const Extrinsics &e);

// Camera at `eye` looking at `target`. `up` is the world direction that should
// appear upward in the image (image y grows downward).
Extrinsics look_at(const Vec3 &eye, const Vec3 &target, const Vec3 &up = Vec3(0, -1, 0));

struct Intrinsics {
    double focal_x = 1.0;
    double focal_y = 1.0;
    double c_x = 0.0;
    double c_y = 0.0;

    // Same camera at an image s times larger in each dimension.
    Intrinsics scaled(double s) const { return {focal_x * s, focal_y * s, c_x * s, c_y * s}; }

    bool operator==(const Intrinsics &) const = default;
};

// Principal point at the image center; focal given as a fraction of the
// image size along each axis.
Intrinsics intrinsics_from_normalized(double focal, int width, int height);

// Seven-component pose code: unit quaternion (w >= 0) followed by the
// translation divided by a scene scale.
struct PoseEmbedding {
    Quaternion quaternion;
    Vec3 translation = Vec3::Zero();

    std::array<double, 7> to_array() const;
    static PoseEmbedding from_array(const std::array<double, 7> &v);
};

PoseEmbedding pack_pose(const Extrinsics &e, double scale = 1.0);
Extrinsics unpack_pose(const PoseEmbedding &p, double scale = 1.0);

struct Projection {
    double u = 0.0;
    double v = 0.0;
    double depth = 0.0;
};

// Pinhole projection; nullopt when the point is at or behind the near plane.
std::optional<Projection> project_point(const Vec3 &world, const Extrinsics &e,
                                        const Intrinsics &k);

struct CameraView {
    Extrinsics extrinsics;
    Intrinsics intrinsics;

    bool operator==(const CameraView &) const = default;
};

using Rig = std::vector<CameraView>;

// ---------------------------------------------------------------------------
// Pose accuracy

enum class PairSet {
    all,         // every unordered pair (i, j), i < j
    consecutive, // (i, i + 1)
};

struct PairError {
    int i = 0;
    int j = 0;
    double rotation_deg = 0.0;
    double translation_deg = 0.0;
};

struct PoseErrorReport {
    double rra = 0.0;    // percent of pairs with rotation error < tau
    double rta = 0.0;    // percent of pairs with translation-direction error < tau
    double auc_30 = 0.0; // mean of rotation and translation accuracy curves over 1..30 deg
    double tau_deg = 5.0;
    std::vector<PairError> pairs;
};

// Angle of the rotation taking a to b, in degrees.
double rotation_angle_deg(const Mat3 &a, const Mat3 &b);

// Angle between two directions in degrees. Two zero vectors agree (0); a zero
// vector against a nonzero one counts as 90.
double direction_angle_deg(const Vec3 &a, const Vec3 &b);

// Relative-pose errors after aligning pred[0] onto gt[0].
std::vector<PairError> relative_pose_errors(const std::vector<Extrinsics> &pred,
                                            const std::vector<Extrinsics> &gt,
                                            PairSet pairs = PairSet::all);

// Accuracy summary for an already computed list of pair errors.
PoseErrorReport summarize_pose_errors(std::vector<PairError> pairs, double tau_deg);

PoseErrorReport pose_error_metrics(const std::vector<Extrinsics> &pred,
                                   const std::vector<Extrinsics> &gt, double tau_deg = 5.0,
                                   PairSet pairs = PairSet::all);

} // namespace nvs
