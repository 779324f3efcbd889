// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace nvs {

// Every failure raised by the engine derives from Error so the C boundary can
// map it onto a status code without string matching.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Emission order broke: a frame index arrived that the stream did not expect.
class StreamError : public Error {
public:
    using Error::Error;
};

class StageError : public Error {
public:
    StageError(std::string stage, const std::string &what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string &stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

#define NVS_REQUIRE(cond, msg)                                                                     \
    do {                                                                                           \
        if (!(cond))                                                                               \
            throw ::nvs::InvalidArgument(msg);                                                     \
    } while (0)

} // namespace nvs
