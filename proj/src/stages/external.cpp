// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "stages/external.hpp"

#include "common/timer.hpp"
#include "io/wire_camera.hpp"

#include <algorithm>
#include <cmath>

namespace nvs {

namespace {

constexpr int kReplyTimeoutMs = 30000;

wire::Frame to_wire(const FrameBuffer &fb, std::int64_t t) {
    return {static_cast<std::uint32_t>(t), fb.to_rgb8()};
}

// Sends one request batch and collects the reply frames.
std::vector<wire::Frame> exchange(const std::string &stage, const std::string &endpoint,
                                  const std::vector<wire::Message> &request) {
    try {
        const auto [host, port] = parse_endpoint(endpoint);
        MessageChannel channel = MessageChannel::raw(connect_tcp(host, port));
        for (const auto &m : request)
            channel.send(m);
        channel.send(wire::end_of_batch());
        std::vector<wire::Frame> reply;
        for (;;) {
            auto msg = channel.receive(kReplyTimeoutMs);
            if (!msg)
                throw StageError(stage, "timed out waiting for " + endpoint);
            auto *frame = std::get_if<wire::Frame>(&*msg);
            if (!frame)
                throw StageError(stage, "unexpected non-FRAME reply from " + endpoint);
            if (frame->is_end_of_batch())
                break;
            reply.push_back(std::move(*frame));
        }
        channel.close();
        return reply;
    } catch (const StageError &) {
        throw;
    } catch (const Error &e) {
        throw StageError(stage, std::string("external endpoint ") + endpoint + ": " + e.what());
    }
}

std::vector<FrameBuffer> decode_frames(const std::vector<wire::Frame> &frames) {
    std::vector<FrameBuffer> out;
    out.reserve(frames.size());
    for (const auto &f : frames)
        out.push_back(FrameBuffer::from_rgb8(f.image));
    return out;
}

} // namespace

FrameBuffer resample_bilinear(const FrameBuffer &in, Resolution out_res) {
    NVS_REQUIRE(!in.empty() && out_res.width >= 1 && out_res.height >= 1,
                "resample needs nonempty input and output");
    if (in.resolution() == out_res)
        return in;
    FrameBuffer out(out_res.width, out_res.height);
    const double sx = static_cast<double>(in.width()) / out_res.width;
    const double sy = static_cast<double>(in.height()) / out_res.height;
    for (int y = 0; y < out_res.height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, in.height() - 1.0);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, in.height() - 1);
        const double wy = fy - y0;
        for (int x = 0; x < out_res.width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, in.width() - 1.0);
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, in.width() - 1);
            const double wx = fx - x0;
            for (int c = 0; c < 3; ++c) {
                const double top = (1 - wx) * in.at(x0, y0, c) + wx * in.at(x1, y0, c);
                const double bot = (1 - wx) * in.at(x0, y1, c) + wx * in.at(x1, y1, c);
                out.at(x, y, c) = static_cast<float>((1 - wy) * top + wy * bot);
            }
        }
    }
    return out;
}

SpatialStageOutput ExternalSpatialStage::process(const MultiViewFrame &f, const Rig &,
                                                 std::span<const CameraView> targets,
                                                 Resolution res) const {
    std::vector<wire::Message> request;
    for (const auto &cam : targets)
        request.emplace_back(to_pose_update(cam, res));
    for (const auto &view : f.views)
        request.emplace_back(to_wire(resample_bilinear(view, res), f.t));
    StopWatch watch;
    const auto reply = exchange("spatial", endpoint_, request);
    SpatialStageOutput out;
    out.rendered = {decode_frames(reply), f.t, Provenance::keyframe};
    // The remote model does not split reconstruction from rendering.
    out.reconstruct_ms = watch.elapsed_ms();
    return out;
}

NovelFrame ExternalInterpolationStage::process(const NovelFrame &a, const NovelFrame &b) const {
    std::vector<wire::Message> request;
    for (const auto &v : a.views)
        request.emplace_back(to_wire(v, a.t));
    for (const auto &v : b.views)
        request.emplace_back(to_wire(v, b.t));
    return {decode_frames(exchange("interpolation", endpoint_, request)), a.t + 1,
            Provenance::interpolated};
}

std::vector<NovelFrame> ExternalSuperResStage::process(std::span<const NovelFrame> frames) const {
    std::vector<wire::Message> request;
    for (const auto &f : frames)
        for (const auto &v : f.views)
            request.emplace_back(to_wire(v, f.t));
    auto views = decode_frames(exchange("super-resolution", endpoint_, request));
    if (views.size() != request.size())
        throw StageError("super-resolution", "external endpoint returned " +
                                                 std::to_string(views.size()) + " views for " +
                                                 std::to_string(request.size()));
    std::vector<NovelFrame> out;
    std::size_t next = 0;
    for (const auto &f : frames) {
        NovelFrame up{{}, f.t, Provenance::upscaled};
        for (std::size_t v = 0; v < f.views.size(); ++v)
            up.views.push_back(std::move(views[next++]));
        out.push_back(std::move(up));
    }
    return out;
}

// ---------------------------------------------------------------------------

StageHost::StageHost(std::shared_ptr<const SpatialStage> stage, Rig rig, const std::string &host,
                     std::uint16_t port)
    : spatial_(std::move(stage)), rig_(std::move(rig)), host_(host), listener_(host, port) {
    start();
}

StageHost::StageHost(std::shared_ptr<const InterpolationStage> stage, const std::string &host,
                     std::uint16_t port)
    : inter_(std::move(stage)), host_(host), listener_(host, port) {
    start();
}

StageHost::StageHost(std::shared_ptr<const SuperResStage> stage, const std::string &host,
                     std::uint16_t port)
    : sr_(std::move(stage)), host_(host), listener_(host, port) {
    start();
}

StageHost::~StageHost() {
    stop_ = true;
    if (thread_.joinable())
        thread_.join();
}

std::string StageHost::endpoint() const { return host_ + ":" + std::to_string(port()); }

void StageHost::start() {
    thread_ = std::jthread([this] {
        while (!stop_) {
            std::optional<Socket> client;
            try {
                client = listener_.accept(50);
            } catch (const IoError &) {
                continue;
            }
            if (!client)
                continue;
            try {
                MessageChannel channel = MessageChannel::raw(std::move(*client));
                serve_one(channel);
            } catch (const Error &) {
                // A failed request only affects its own connection.
            }
        }
    });
}

void StageHost::serve_one(MessageChannel &channel) {
    std::vector<wire::PoseUpdate> poses;
    std::vector<wire::Frame> frames;
    for (;;) {
        auto msg = channel.receive(kReplyTimeoutMs);
        if (!msg)
            throw IoError("stage host: request timed out");
        if (auto *p = std::get_if<wire::PoseUpdate>(&*msg)) {
            poses.push_back(*p);
            continue;
        }
        auto *f = std::get_if<wire::Frame>(&*msg);
        if (!f)
            throw IoError("stage host: unexpected STATS in request");
        if (f->is_end_of_batch())
            break;
        frames.push_back(std::move(*f));
    }
    NVS_REQUIRE(!frames.empty(), "stage host: request carried no frames");
    const auto t = static_cast<std::int64_t>(frames.front().frame_index);
    std::vector<FrameBuffer> views = decode_frames(frames);
    std::vector<FrameBuffer> result;

    if (spatial_) {
        const Resolution res = views.front().resolution();
        std::vector<CameraView> targets;
        for (const auto &p : poses)
            targets.push_back(from_pose_update(p, res));
        result = spatial_->run(MultiViewFrame{std::move(views), t}, rig_, targets, res).rendered.views;
    } else if (inter_) {
        NVS_REQUIRE(views.size() % 2 == 0, "stage host: interpolation needs an even frame count");
        const std::size_t m = views.size() / 2;
        NovelFrame a{{views.begin(), views.begin() + static_cast<long>(m)}, t, Provenance::keyframe};
        NovelFrame b{{views.begin() + static_cast<long>(m), views.end()},
                     static_cast<std::int64_t>(frames[m].frame_index), Provenance::keyframe};
        result = inter_->run(a, b).views;
    } else {
        std::vector<NovelFrame> batch;
        for (std::size_t i = 0; i < views.size(); ++i)
            batch.push_back({{views[i]}, static_cast<std::int64_t>(frames[i].frame_index),
                             Provenance::keyframe});
        for (auto &f : sr_->run(batch))
            result.push_back(std::move(f.views.front()));
    }
    for (const auto &v : result)
        channel.send(to_wire(v, t));
    // Counted before the terminator so a client that has its reply sees it.
    ++served_;
    channel.send(wire::end_of_batch());
}

} // namespace nvs
