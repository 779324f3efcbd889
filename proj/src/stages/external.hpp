// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "io/socket.hpp"
#include "stages/stages.hpp"

#include <atomic>
#include <memory>
#include <string>
#include <thread>

namespace nvs {

// Out-of-process stages speak the frame wire format. One request per
// connection:
//
//   client -> server: [POSE_UPDATE x m] FRAME x k, then a 0x0 FRAME
//   server -> client: FRAME x r, then a 0x0 FRAME
//
// spatial: m target poses (normalized focal), k = n input views already
//          resized to the render size; r = m renders at that size.
// inter:   k = 2m frames, the m views of a (index t) then of b (index t+2);
//          r = m middle views.
// sr:      k = frames x views in order; r = k views at twice the size.
//
// Pixels cross the wire as RGB8, so external stages see quantized input.

class ExternalSpatialStage final : public SpatialStage {
public:
    explicit ExternalSpatialStage(std::string endpoint) : endpoint_(std::move(endpoint)) {}
    std::string name() const override { return "external"; }

protected:
    SpatialStageOutput process(const MultiViewFrame &f, const Rig &rig,
                               std::span<const CameraView> targets, Resolution res) const override;

private:
    std::string endpoint_;
};

class ExternalInterpolationStage final : public InterpolationStage {
public:
    explicit ExternalInterpolationStage(std::string endpoint) : endpoint_(std::move(endpoint)) {}
    std::string name() const override { return "external"; }

protected:
    NovelFrame process(const NovelFrame &a, const NovelFrame &b) const override;

private:
    std::string endpoint_;
};

class ExternalSuperResStage final : public SuperResStage {
public:
    explicit ExternalSuperResStage(std::string endpoint) : endpoint_(std::move(endpoint)) {}
    std::string name() const override { return "external"; }

protected:
    std::vector<NovelFrame> process(std::span<const NovelFrame> frames) const override;

private:
    std::string endpoint_;
};

// Bilinear resample, used to bring inputs to the size an external spatial
// model renders at.
FrameBuffer resample_bilinear(const FrameBuffer &in, Resolution out);

// Hosts an in-process stage behind the external protocol, one request per
// connection. Lets a stage run in another process, and gives the external
// clients something to talk to in tests.
class StageHost {
public:
    StageHost(std::shared_ptr<const SpatialStage> stage, Rig rig, const std::string &host = "127.0.0.1",
              std::uint16_t port = 0);
    StageHost(std::shared_ptr<const InterpolationStage> stage, const std::string &host = "127.0.0.1",
              std::uint16_t port = 0);
    StageHost(std::shared_ptr<const SuperResStage> stage, const std::string &host = "127.0.0.1",
              std::uint16_t port = 0);
    ~StageHost();

    StageHost(const StageHost &) = delete;
    StageHost &operator=(const StageHost &) = delete;

    std::uint16_t port() const { return listener_.port(); }
    std::string endpoint() const;
    std::size_t requests_served() const { return served_.load(); }

private:
    void start();
    void serve_one(MessageChannel &channel);

    std::shared_ptr<const SpatialStage> spatial_;
    std::shared_ptr<const InterpolationStage> inter_;
    std::shared_ptr<const SuperResStage> sr_;
    Rig rig_;
    std::string host_;
    Listener listener_;
    std::atomic<bool> stop_{false};
    std::atomic<std::size_t> served_{0};
    std::jthread thread_;
};

} // namespace nvs
