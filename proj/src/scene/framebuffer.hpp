// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace nvs {

using Rgb = std::array<float, 3>;

struct Resolution {
    int width = 0;
    int height = 0;

    bool operator==(const Resolution &) const = default;
};

// Packed 8-bit RGB, row-major. Used at the file and wire boundaries only.
struct Rgb8Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    bool operator==(const Rgb8Image &) const = default;
};

// Row-major interleaved RGB in linear [0, 1].
class FrameBuffer {
public:
    FrameBuffer() = default;
    FrameBuffer(int width, int height, Rgb fill = {0.f, 0.f, 0.f});

    int width() const { return width_; }
    int height() const { return height_; }
    Resolution resolution() const { return {width_, height_}; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
    bool empty() const { return pixel_count() == 0; }

    float &at(int x, int y, int c) { return data_[index(x, y) + c]; }
    float at(int x, int y, int c) const { return data_[index(x, y) + c]; }
    Rgb pixel(int x, int y) const;
    void set_pixel(int x, int y, const Rgb &rgb);

    std::vector<float> &data() { return data_; }
    const std::vector<float> &data() const { return data_; }

    bool all_finite() const;

    // Round-to-nearest after clamping to [0, 1].
    Rgb8Image to_rgb8() const;
    static FrameBuffer from_rgb8(const Rgb8Image &image);

    bool operator==(const FrameBuffer &) const = default;

private:
    std::size_t index(int x, int y) const {
        return (static_cast<std::size_t>(y) * width_ + x) * 3;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<float> data_;
};

} // namespace nvs
