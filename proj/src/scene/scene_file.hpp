// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "scene/gaussian.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace nvs {

// Binary scene snapshot, little-endian:
//   "GSC1" | u32 count | u8 sh_degree |
//   count x { f32 mean[3], f32 quat[4] (w,x,y,z), f32 scale[3], f32 opacity,
//             f32 sh[3 * (deg + 1)^2] }
// Values are stored as f32, so a round trip is exact only for scenes whose
// parameters are already f32-representable.
std::vector<std::uint8_t> encode_scene(const GaussianScene &scene);
GaussianScene decode_scene(std::span<const std::uint8_t> bytes);

void write_scene_file(const std::filesystem::path &path, const GaussianScene &scene);
GaussianScene read_scene_file(const std::filesystem::path &path);

} // namespace nvs
