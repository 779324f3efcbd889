// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "scene/framebuffer.hpp"

#include <filesystem>

namespace nvs {

struct LoadedImage {
    Rgb8Image image;
    // True for lossy containers (JPEG).
    bool lossy = false;
};

// 8-bit RGB PNG. Gray, palette, alpha and 16-bit inputs are converted.
Rgb8Image read_png(const std::filesystem::path &path);
void write_png(const std::filesystem::path &path, const Rgb8Image &image);

Rgb8Image read_jpeg(const std::filesystem::path &path);

// Dispatches on the extension (.png, .jpg, .jpeg).
LoadedImage read_image(const std::filesystem::path &path);

} // namespace nvs
