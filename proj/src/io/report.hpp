// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "camera/camera.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nvs {

struct QualityRow {
    std::string name;
    std::size_t frames = 0;
    double psnr_db = 0.0;
    std::optional<double> amortized_ms;
    bool lossy = false;
};

// Compares two frame directories. If `pred` holds view_<j> subdirectories,
// each is matched with gt/view_<j>; otherwise the two directories are
// compared directly. Frame counts and sizes must agree.
std::vector<QualityRow> compare_frame_dirs(const std::filesystem::path &pred,
                                           const std::filesystem::path &gt);

// | Sequence | Frames | PSNR (dB) | Runtime (ms/frame) | table with a mean row.
std::string format_quality_table(const std::vector<QualityRow> &rows);

PoseErrorReport compare_pose_files(const std::filesystem::path &pred,
                                   const std::filesystem::path &gt, PairSet pairs, double tau_deg);

PairSet parse_pair_set(const std::string &name);

std::string format_pose_table(const PoseErrorReport &report);

} // namespace nvs
