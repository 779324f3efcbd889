// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "common/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

namespace nvs {

static_assert(std::endian::native == std::endian::little,
              "byte codecs assume a little-endian host");

// Appends little-endian scalars to a growing buffer.
class ByteWriter {
public:
    template <typename T> void put(T value) {
        static_assert(std::is_trivially_copyable_v<T>);
        const auto *p = reinterpret_cast<const std::uint8_t *>(&value);
        bytes_.insert(bytes_.end(), p, p + sizeof(T));
    }

    void put_bytes(std::span<const std::uint8_t> data) {
        bytes_.insert(bytes_.end(), data.begin(), data.end());
    }

    std::vector<std::uint8_t> &bytes() { return bytes_; }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

// Bounds-checked little-endian reader; overruns throw IoError naming `what`.
class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> data, std::string what)
        : data_(data), what_(std::move(what)) {}

    template <typename T> T get() {
        static_assert(std::is_trivially_copyable_v<T>);
        require(sizeof(T));
        T value;
        std::memcpy(&value, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::span<const std::uint8_t> get_bytes(std::size_t n) {
        require(n);
        auto out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    std::size_t remaining() const { return data_.size() - pos_; }

private:
    void require(std::size_t n) const {
        if (data_.size() - pos_ < n)
            throw IoError(what_ + ": truncated (need " + std::to_string(n) + " more bytes, have " +
                          std::to_string(data_.size() - pos_) + ")");
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
    std::string what_;
};

} // namespace nvs
