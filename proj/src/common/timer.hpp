// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>

namespace nvs {

class StopWatch {
public:
    StopWatch() : start_(std::chrono::steady_clock::now()) {}

    void reset() { start_ = std::chrono::steady_clock::now(); }

    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

} // namespace nvs
