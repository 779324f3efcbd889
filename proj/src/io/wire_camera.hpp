// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "camera/camera.hpp"
#include "io/wire.hpp"

namespace nvs {

// Camera <-> POSE_UPDATE. The wire carries the pose embedding (translation
// unscaled) and focal_x / width.
wire::PoseUpdate to_pose_update(const CameraView &cam, Resolution res);
// Throws InvalidArgument for a zero quaternion or nonpositive focal.
CameraView from_pose_update(const wire::PoseUpdate &update, Resolution res);

} // namespace nvs
