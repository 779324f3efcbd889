// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "io/dataset.hpp"

#include "common/error.hpp"
#include "io/image_io.hpp"
#include "scene/scene_file.hpp"

#include <algorithm>
#include <cstdio>
#include <regex>

namespace nvs {

namespace fs = std::filesystem;

std::string view_dir_name(int view) { return "view_" + std::to_string(view); }

std::string frame_file_name(std::int64_t index, const std::string &ext) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%06lld", static_cast<long long>(index));
    return buf + ext;
}

std::vector<fs::path> list_frames(const fs::path &dir) {
    static const std::regex pattern(R"(frame_(\d{6,})\.(png|jpg|jpeg|PNG|JPG|JPEG))");
    std::vector<std::pair<std::int64_t, fs::path>> found;
    for (const auto &entry : fs::directory_iterator(dir)) {
        std::smatch m;
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && std::regex_match(name, m, pattern))
            found.emplace_back(std::stoll(m[1].str()), entry.path());
    }
    std::sort(found.begin(), found.end());
    std::vector<fs::path> out;
    for (std::size_t i = 0; i < found.size(); ++i) {
        const auto expected = static_cast<std::int64_t>(i);
        if (found[i].first != expected)
            throw IoError(dir.string() + ": " +
                          (found[i].first > expected
                               ? "missing " + frame_file_name(expected)
                               : "duplicate frame index " + std::to_string(found[i].first)));
        out.push_back(found[i].second);
    }
    return out;
}

DatasetInfo inspect_dataset(const fs::path &root) {
    if (!fs::is_directory(root))
        throw IoError("dataset root " + root.string() + " is not a directory");
    DatasetInfo info;
    info.root = root;
    static const std::regex view_pattern(R"(view_(\d+))");
    for (const auto &entry : fs::directory_iterator(root)) {
        std::smatch m;
        const std::string name = entry.path().filename().string();
        if (entry.is_directory() && std::regex_match(name, m, view_pattern))
            info.views.push_back(std::stoi(m[1].str()));
    }
    std::sort(info.views.begin(), info.views.end());
    if (info.views.empty())
        throw IoError(root.string() + ": no view_<k> directories");

    for (int v : info.views) {
        auto files = list_frames(root / view_dir_name(v));
        if (files.empty())
            throw IoError(root.string() + ": " + view_dir_name(v) + " has no frames");
        if (info.files.empty())
            info.frames = static_cast<std::int64_t>(files.size());
        else if (static_cast<std::int64_t>(files.size()) != info.frames)
            throw IoError(root.string() + ": " + view_dir_name(v) + " has " +
                          std::to_string(files.size()) + " frames, " +
                          view_dir_name(info.views.front()) + " has " + std::to_string(info.frames));
        for (const auto &f : files) {
            const auto ext = f.extension().string();
            if (ext != ".png" && ext != ".PNG")
                info.lossy = true;
        }
        const LoadedImage first = read_image(files.front());
        const Resolution res{first.image.width, first.image.height};
        if (info.files.empty())
            info.resolution = res;
        else if (res != info.resolution)
            throw IoError(root.string() + ": " + view_dir_name(v) + " frames are " +
                          std::to_string(res.width) + "x" + std::to_string(res.height) +
                          ", expected " + std::to_string(info.resolution.width) + "x" +
                          std::to_string(info.resolution.height));
        info.files.push_back(std::move(files));
    }

    if (fs::exists(root / "poses.json")) {
        auto poses = read_pose_file(root / "poses.json");
        if (poses.size() != info.views.size())
            throw IoError((root / "poses.json").string() + " holds " + std::to_string(poses.size()) +
                          " poses for " + std::to_string(info.views.size()) + " views");
        info.poses = std::move(poses);
    }
    if (fs::exists(root / "target.pose"))
        info.targets = read_pose_file(root / "target.pose");
    info.has_scenes = fs::is_directory(root / "scenes");
    return info;
}

DatasetSource::DatasetSource(DatasetInfo info, std::vector<int> views, std::size_t prefetch)
    : info_(std::move(info)), queue_(prefetch) {
    if (views.empty())
        views = info_.views;
    for (int v : views) {
        const auto it = std::find(info_.views.begin(), info_.views.end(), v);
        if (it == info_.views.end())
            throw IoError(info_.root.string() + ": requested " + view_dir_name(v) +
                          " does not exist");
        selected_.push_back(static_cast<std::size_t>(it - info_.views.begin()));
    }
    if (selected_.size() < 2)
        throw InvalidArgument("at least two input views are required, got " +
                              std::to_string(selected_.size()));
    worker_ = std::jthread([this] { produce(); });
}

DatasetSource::~DatasetSource() {
    queue_.close();
    if (worker_.joinable())
        worker_.join();
}

void DatasetSource::produce() {
    try {
        for (std::int64_t t = 0; t < info_.frames; ++t) {
            MultiViewFrame f{{}, t};
            for (std::size_t s : selected_) {
                const auto &path = info_.files[s][static_cast<std::size_t>(t)];
                const LoadedImage img = read_image(path);
                if (img.image.width != info_.resolution.width ||
                    img.image.height != info_.resolution.height)
                    throw IoError(view_dir_name(info_.views[s]) + "/" + path.filename().string() +
                                  " is " + std::to_string(img.image.width) + "x" +
                                  std::to_string(img.image.height) + ", expected " +
                                  std::to_string(info_.resolution.width) + "x" +
                                  std::to_string(info_.resolution.height));
                f.views.push_back(FrameBuffer::from_rgb8(img.image));
            }
            if (!queue_.push(std::move(f)))
                return;
        }
    } catch (...) {
        std::lock_guard lock(error_mutex_);
        error_ = std::current_exception();
    }
    queue_.close();
}

std::optional<MultiViewFrame> DatasetSource::next() {
    auto f = queue_.pop();
    if (!f) {
        std::lock_guard lock(error_mutex_);
        if (error_)
            std::rethrow_exception(error_);
    }
    return f;
}

std::vector<PoseRecord> DatasetSource::selected_poses() const {
    if (!info_.poses)
        throw IoError(info_.root.string() + ": no poses.json");
    std::vector<PoseRecord> out;
    for (std::size_t s : selected_)
        out.push_back((*info_.poses)[s]);
    return out;
}

SceneGenerator dataset_scene_generator(const fs::path &root) {
    return [dir = root / "scenes"](std::int64_t t) {
        return read_scene_file(dir / frame_file_name(t, ".gsc"));
    };
}

} // namespace nvs
