// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "io/wire.hpp"

#include "common/bytes.hpp"

#include <type_traits>

namespace nvs::wire {

Frame end_of_batch(std::uint32_t frame_index) { return Frame{frame_index, Rgb8Image{}}; }

std::vector<std::uint8_t> encode(const Message &message) {
    ByteWriter w;
    w.put(std::uint32_t{0});
    std::visit(
        [&](const auto &m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Frame>) {
                const auto &img = m.image;
                if (img.width < 0 || img.height < 0 || img.width > 0xFFFF || img.height > 0xFFFF)
                    throw InvalidArgument("frame dimensions do not fit the wire format");
                if (img.pixels.size() != static_cast<std::size_t>(img.width) * img.height * 3)
                    throw InvalidArgument("frame payload size does not match its dimensions");
                w.put(static_cast<std::uint8_t>(MessageType::frame));
                w.put(m.frame_index);
                w.put(static_cast<std::uint16_t>(img.width));
                w.put(static_cast<std::uint16_t>(img.height));
                w.put_bytes(img.pixels);
            } else if constexpr (std::is_same_v<T, PoseUpdate>) {
                w.put(static_cast<std::uint8_t>(MessageType::pose_update));
                for (float v : m.quaternion)
                    w.put(v);
                for (float v : m.translation)
                    w.put(v);
                w.put(m.focal);
            } else {
                w.put(static_cast<std::uint8_t>(MessageType::stats));
                for (float v : m.stage_ms)
                    w.put(v);
                w.put(m.delay_ms);
                w.put(m.fps);
            }
        },
        message);
    auto bytes = w.take();
    const auto length = static_cast<std::uint32_t>(bytes.size() - 4);
    if (length > kMaxMessageBytes)
        throw InvalidArgument("message exceeds the wire size limit");
    std::memcpy(bytes.data(), &length, 4);
    return bytes;
}

Message decode(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "wire message");
    const auto length = r.get<std::uint32_t>();
    if (length == 0 || length > kMaxMessageBytes)
        throw IoError("wire message: invalid length " + std::to_string(length));
    if (r.remaining() != length)
        throw IoError("wire message: length field says " + std::to_string(length) + " bytes, got " +
                      std::to_string(r.remaining()));
    const auto type = r.get<std::uint8_t>();
    switch (static_cast<MessageType>(type)) {
    case MessageType::frame: {
        Frame f;
        f.frame_index = r.get<std::uint32_t>();
        f.image.width = r.get<std::uint16_t>();
        f.image.height = r.get<std::uint16_t>();
        const std::size_t n = static_cast<std::size_t>(f.image.width) * f.image.height * 3;
        if (r.remaining() != n)
            throw IoError("wire message: FRAME payload is " + std::to_string(r.remaining()) +
                          " bytes, expected " + std::to_string(n));
        const auto px = r.get_bytes(n);
        f.image.pixels.assign(px.begin(), px.end());
        return f;
    }
    case MessageType::pose_update: {
        PoseUpdate p;
        for (float &v : p.quaternion)
            v = r.get<float>();
        for (float &v : p.translation)
            v = r.get<float>();
        p.focal = r.get<float>();
        if (r.remaining() != 0)
            throw IoError("wire message: POSE_UPDATE has trailing bytes");
        return p;
    }
    case MessageType::stats: {
        Stats s;
        for (float &v : s.stage_ms)
            v = r.get<float>();
        s.delay_ms = r.get<float>();
        s.fps = r.get<float>();
        if (r.remaining() != 0)
            throw IoError("wire message: STATS has trailing bytes");
        return s;
    }
    }
    throw IoError("wire message: unknown type " + std::to_string(type));
}

void Decoder::feed(std::span<const std::uint8_t> bytes) {
    if (offset_ > 0 && offset_ == buffer_.size()) {
        buffer_.clear();
        offset_ = 0;
    }
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<Message> Decoder::next() {
    if (buffered() < 4)
        return std::nullopt;
    std::uint32_t length;
    std::memcpy(&length, buffer_.data() + offset_, 4);
    if (length == 0 || length > kMaxMessageBytes)
        throw IoError("wire stream: invalid length " + std::to_string(length));
    if (buffered() < 4 + static_cast<std::size_t>(length))
        return std::nullopt;
    auto msg = decode(std::span(buffer_).subspan(offset_, 4 + length));
    offset_ += 4 + length;
    if (offset_ > (1u << 20) && offset_ * 2 > buffer_.size()) {
        buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<long>(offset_));
        offset_ = 0;
    }
    return msg;
}

} // namespace nvs::wire
