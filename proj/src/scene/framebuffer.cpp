// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "scene/framebuffer.hpp"

#include "common/error.hpp"

#include <algorithm>
#include <cmath>

namespace nvs {

FrameBuffer::FrameBuffer(int width, int height, Rgb fill) : width_(width), height_(height) {
    NVS_REQUIRE(width >= 0 && height >= 0, "framebuffer dimensions must be nonnegative");
    data_.resize(pixel_count() * 3);
    for (std::size_t i = 0; i < pixel_count(); ++i)
        std::copy(fill.begin(), fill.end(), data_.begin() + i * 3);
}

Rgb FrameBuffer::pixel(int x, int y) const {
    const std::size_t i = index(x, y);
    return {data_[i], data_[i + 1], data_[i + 2]};
}

void FrameBuffer::set_pixel(int x, int y, const Rgb &rgb) {
    const std::size_t i = index(x, y);
    data_[i] = rgb[0];
    data_[i + 1] = rgb[1];
    data_[i + 2] = rgb[2];
}

bool FrameBuffer::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

Rgb8Image FrameBuffer::to_rgb8() const {
    Rgb8Image out{width_, height_, std::vector<std::uint8_t>(data_.size())};
    for (std::size_t i = 0; i < data_.size(); ++i) {
        const float v = std::clamp(data_[i], 0.f, 1.f);
        out.pixels[i] = static_cast<std::uint8_t>(std::lround(v * 255.f));
    }
    return out;
}

FrameBuffer FrameBuffer::from_rgb8(const Rgb8Image &image) {
    NVS_REQUIRE(image.pixels.size() == static_cast<std::size_t>(image.width) * image.height * 3,
                "rgb8 payload size does not match its dimensions");
    FrameBuffer fb(image.width, image.height);
    for (std::size_t i = 0; i < image.pixels.size(); ++i)
        fb.data_[i] = image.pixels[i] / 255.f;
    return fb;
}

} // namespace nvs
