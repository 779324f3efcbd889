// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "io/wire_camera.hpp"

namespace nvs {

wire::PoseUpdate to_pose_update(const CameraView &cam, Resolution res) {
    const PoseEmbedding p = pack_pose(cam.extrinsics);
    wire::PoseUpdate u;
    u.quaternion = {static_cast<float>(p.quaternion.w), static_cast<float>(p.quaternion.x),
                    static_cast<float>(p.quaternion.y), static_cast<float>(p.quaternion.z)};
    u.translation = {static_cast<float>(p.translation.x()), static_cast<float>(p.translation.y()),
                     static_cast<float>(p.translation.z())};
    u.focal = static_cast<float>(cam.intrinsics.focal_x / res.width);
    return u;
}

CameraView from_pose_update(const wire::PoseUpdate &u, Resolution res) {
    PoseEmbedding p;
    p.quaternion = Quaternion{u.quaternion[0], u.quaternion[1], u.quaternion[2], u.quaternion[3]}
                       .normalized();
    p.translation = Vec3(u.translation[0], u.translation[1], u.translation[2]);
    return {unpack_pose(p), intrinsics_from_normalized(u.focal, res.width, res.height)};
}

} // namespace nvs
