// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "camera/camera.hpp"
#include "scene/framebuffer.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace nvs {

// A camera pose with a resolution-independent focal length (focal / width).
struct PoseRecord {
    Extrinsics extrinsics;
    double focal = 0.8;

    CameraView view(Resolution res) const;
};

// JSON pose files hold one pose
//   {"quaternion": [w, x, y, z], "translation": [x, y, z], "focal": f, "scale": s}
// or {"poses": [ ... ]}. The translation is stored divided by "scale"
// (default 1). Errors name the file and the pose index.
std::vector<PoseRecord> read_pose_file(const std::filesystem::path &path);
std::vector<PoseRecord> parse_poses(const std::string &text, const std::string &source);
void write_pose_file(const std::filesystem::path &path, const std::vector<PoseRecord> &poses,
                     double scale = 1.0);
std::string format_poses(const std::vector<PoseRecord> &poses, double scale = 1.0);

Rig make_rig(const std::vector<PoseRecord> &poses, Resolution res);

} // namespace nvs
