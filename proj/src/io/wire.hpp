// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "scene/framebuffer.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace nvs::wire {

// Every message on the wire is
//   u32 length | u8 type | payload
// little-endian, where `length` counts the type byte plus the payload.
enum class MessageType : std::uint8_t {
    frame = 1,       // engine -> client (and both ways for external stages)
    pose_update = 2, // client -> engine
    stats = 3,       // engine -> client
};

inline constexpr std::uint32_t kMaxMessageBytes = 64u << 20;

// u32 frame_index | u16 width | u16 height | RGB8 payload (width*height*3).
// A 0x0 frame terminates a batch in the external-stage exchange.
struct Frame {
    std::uint32_t frame_index = 0;
    Rgb8Image image;

    bool is_end_of_batch() const { return image.width == 0 && image.height == 0; }
    bool operator==(const Frame &) const = default;
};

// f32 quaternion (w, x, y, z) | f32 translation[3] | f32 normalized focal.
struct PoseUpdate {
    std::array<float, 4> quaternion{1.f, 0.f, 0.f, 0.f};
    std::array<float, 3> translation{};
    float focal = 0.8f;

    bool operator==(const PoseUpdate &) const = default;
};

// f32 stage means (camera pose, spatial, rendering, interpolation,
// super-resolution) in ms | f32 delay ms | f32 fps.
struct Stats {
    std::array<float, 5> stage_ms{};
    float delay_ms = 0.f;
    float fps = 0.f;

    bool operator==(const Stats &) const = default;
};

using Message = std::variant<Frame, PoseUpdate, Stats>;

Frame end_of_batch(std::uint32_t frame_index = 0);

std::vector<std::uint8_t> encode(const Message &message);

// Decodes one complete message (length prefix included). Throws IoError on a
// malformed or truncated buffer.
Message decode(std::span<const std::uint8_t> bytes);

// Incremental decoder for a byte stream.
class Decoder {
public:
    void feed(std::span<const std::uint8_t> bytes);
    // Next complete message, if buffered.
    std::optional<Message> next();
    std::size_t buffered() const { return buffer_.size() - offset_; }

private:
    std::vector<std::uint8_t> buffer_;
    std::size_t offset_ = 0;
};

} // namespace nvs::wire
