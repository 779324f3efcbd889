// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "common/bounded_queue.hpp"
#include "io/pose_file.hpp"
#include "stages/stages.hpp"
#include "stream/pipeline.hpp"

#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace nvs {

inline constexpr std::size_t kPrefetchFrames = 4;

std::string view_dir_name(int view);
std::string frame_file_name(std::int64_t index, const std::string &ext = ".png");

// On-disk layout:
//   root/view_<k>/frame_<%06d>.png   (JPEG accepted, flagged lossy)
//   root/poses.json                  (optional, one pose per view)
//   root/target.pose                 (optional)
//   root/scenes/frame_<%06d>.gsc     (optional ground-truth scenes)
//   root/gt/view_<j>/frame_<%06d>.png (optional references)
struct DatasetInfo {
    std::filesystem::path root;
    std::vector<int> views;                  // view ids present, ascending
    std::vector<std::vector<std::filesystem::path>> files; // per view, by frame
    std::int64_t frames = 0;
    Resolution resolution;
    bool lossy = false;
    std::optional<std::vector<PoseRecord>> poses; // indexed like `views`
    std::optional<std::vector<PoseRecord>> targets;
    bool has_scenes = false;
};

// Scans the layout and checks that every view has the same frames and that
// the first frames share one size. Errors name the offending view.
DatasetInfo inspect_dataset(const std::filesystem::path &root);

// Frames of the selected views, decoded on a worker thread into a queue of
// kPrefetchFrames multi-view frames.
class DatasetSource final : public FrameSource {
public:
    DatasetSource(DatasetInfo info, std::vector<int> views, std::size_t prefetch = kPrefetchFrames);
    ~DatasetSource() override;

    std::optional<MultiViewFrame> next() override;
    std::size_t view_count() const override { return selected_.size(); }

    const DatasetInfo &info() const { return info_; }
    // Poses of the selected views; throws IoError when the dataset has none.
    std::vector<PoseRecord> selected_poses() const;

private:
    void produce();

    DatasetInfo info_;
    std::vector<std::size_t> selected_; // positions in info_.views
    BoundedQueue<MultiViewFrame> queue_;
    std::exception_ptr error_;
    std::mutex error_mutex_;
    std::jthread worker_;
};

// Reads scenes/frame_<t>.gsc on demand.
SceneGenerator dataset_scene_generator(const std::filesystem::path &root);

// Sorted frame files of a directory of frame_<%06d>.{png,jpg,jpeg} images.
std::vector<std::filesystem::path> list_frames(const std::filesystem::path &dir);

} // namespace nvs
