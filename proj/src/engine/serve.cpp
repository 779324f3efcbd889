// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "common/error.hpp"
#include "engine/engine.hpp"
#include "engine/registry.hpp"
#include "io/socket.hpp"
#include "io/wire_camera.hpp"

#include <chrono>
#include <cstdio>
#include <mutex>
#include <thread>

namespace nvs {

namespace {

// Connected viewers. Each has a reader thread collecting POSE_UPDATEs;
// frames and stats are broadcast from the stream and stats threads.
class ClientHub {
public:
    explicit ClientHub(std::size_t max_clients) : max_(max_clients) {}

    void add(MessageChannel channel) {
        std::lock_guard lock(mutex_);
        prune_locked();
        if (max_ > 0 && clients_.size() >= max_) {
            channel.close();
            return;
        }
        auto client = std::make_unique<Client>(std::move(channel));
        Client *c = client.get();
        c->reader = std::jthread([this, c](std::stop_token stop) {
            while (!stop.stop_requested() && c->alive) {
                try {
                    auto msg = c->channel.receive(100);
                    if (!msg)
                        continue;
                    if (auto *p = std::get_if<wire::PoseUpdate>(&*msg)) {
                        std::lock_guard pose_lock(pose_mutex_);
                        pending_ = *p;
                    }
                } catch (const Error &) {
                    c->alive = false;
                }
            }
        });
        clients_.push_back(std::move(client));
    }

    void broadcast(const wire::Message &msg) {
        std::lock_guard lock(mutex_);
        for (auto &c : clients_) {
            if (!c->alive)
                continue;
            try {
                c->channel.send(msg);
            } catch (const Error &) {
                c->alive = false;
            }
        }
        prune_locked();
    }

    std::optional<wire::PoseUpdate> take_pose() {
        std::lock_guard lock(pose_mutex_);
        auto p = pending_;
        pending_.reset();
        return p;
    }

    void close_all() {
        std::lock_guard lock(mutex_);
        for (auto &c : clients_)
            c->alive = false;
        for (auto &c : clients_) {
            c->reader = {};
            c->channel.close();
        }
        clients_.clear();
    }

private:
    struct Client {
        explicit Client(MessageChannel ch) : channel(std::move(ch)) {}
        MessageChannel channel;
        std::atomic<bool> alive{true};
        std::jthread reader; // destroyed (joined) before the channel
    };

    void prune_locked() {
        std::erase_if(clients_, [](const auto &c) { return !c->alive; });
    }

    std::size_t max_;
    std::mutex mutex_;
    std::vector<std::unique_ptr<Client>> clients_;
    std::mutex pose_mutex_;
    std::optional<wire::PoseUpdate> pending_;
};

wire::Stats to_stats(const LatencyReport &r) {
    wire::Stats s;
    for (std::size_t i = 0; i < kStageCount; ++i)
        s.stage_ms[i] = static_cast<float>(r.stage_mean_ms[i]);
    s.delay_ms = static_cast<float>(r.delay_ms);
    s.fps = static_cast<float>(r.output_fps);
    return s;
}

} // namespace

void Engine::serve(const std::function<void(std::uint16_t)> &on_ready) {
    stop_ = false;
    StreamSetup setup = prepare_stream(cfg_);
    const StageSet stages = make_stages(cfg_, setup.scenes);
    setup.options.live = true;

    const auto host = cfg_.get<std::string>("serve.host");
    const int port = cfg_.get<int>("serve.port");
    if (port < 0 || port > 65535)
        throw ConfigError("config key 'serve.port' (" + cfg_.origin("serve.port") +
                          ") must lie in [0, 65535]");
    const double stats_hz = cfg_.get<double>("serve.stats_hz");
    if (!(stats_hz > 0.0))
        throw ConfigError("config key 'serve.stats_hz' (" + cfg_.origin("serve.stats_hz") +
                          ") must be positive");
    const bool loop = cfg_.get<bool>("serve.loop");
    const int max_clients = cfg_.get<int>("serve.max_clients");

    Listener listener(host, static_cast<std::uint16_t>(port));
    ClientHub hub(static_cast<std::size_t>(std::max(0, max_clients)));

    std::jthread acceptor([&](std::stop_token stop) {
        while (!stop.stop_requested() && !stop_) {
            try {
                if (auto s = listener.accept(100))
                    hub.add(MessageChannel::accept(std::move(*s)));
            } catch (const Error &e) {
                std::fprintf(stderr, "nvstream serve: client rejected: %s\n", e.what());
            }
        }
    });

    std::mutex stats_mutex;
    std::optional<wire::Stats> latest;
    std::jthread stats_thread([&](std::stop_token stop) {
        using clock = std::chrono::steady_clock;
        const auto period = std::chrono::duration_cast<clock::duration>(
            std::chrono::duration<double>(1.0 / stats_hz));
        auto due = clock::now() + period;
        while (!stop.stop_requested() && !stop_) {
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
            if (clock::now() < due)
                continue;
            due += period;
            std::optional<wire::Stats> s;
            {
                std::lock_guard lock(stats_mutex);
                s = latest;
            }
            if (s)
                hub.broadcast(*s);
        }
    });

    if (on_ready)
        on_ready(listener.port());

    std::uint32_t offset = 0;
    std::vector<CameraView> targets = setup.targets;
    try {
        while (!stop_) {
            PacedFrameSource source(setup.open_source(), setup.options.input_fps);
            PipelineHooks hooks;
            hooks.should_stop = [this] { return stop_.load(); };
            hooks.log = [](const std::string &msg) {
                std::fprintf(stderr, "nvstream serve: %s\n", msg.c_str());
            };
            hooks.sink = [&](const NovelFrame &f) {
                hub.broadcast(wire::Frame{offset + static_cast<std::uint32_t>(f.t),
                                          f.views.front().to_rgb8()});
            };
            hooks.poll_targets = [&]() -> std::optional<std::vector<CameraView>> {
                const auto p = hub.take_pose();
                if (!p)
                    return std::nullopt;
                try {
                    targets = {from_pose_update(*p, setup.render_resolution)};
                } catch (const InvalidArgument &e) {
                    std::fprintf(stderr, "nvstream serve: ignoring pose update: %s\n", e.what());
                    return std::nullopt;
                }
                return targets;
            };
            hooks.on_snippet = [&](const LatencyLedger &ledger) {
                LatencyLedger snapshot = ledger;
                // Output rate so far is not known mid-stream; report the
                // input-paced rate instead.
                snapshot.set_totals(0.0, 0);
                LatencyReport r = latency_report(snapshot, cfg_.get<double>("latency.budget_ms"));
                r.output_fps = setup.options.input_fps;
                std::lock_guard lock(stats_mutex);
                latest = to_stats(r);
            };
            const PipelineResult result = run_pipeline(source, setup.rig, targets, stages,
                                                       setup.options, hooks, setup.predictor.get());
            offset += static_cast<std::uint32_t>(result.input_frames);
            if (!loop)
                break;
        }
    } catch (...) {
        stop_ = true;
        hub.close_all();
        throw;
    }
    stop_ = true;
    acceptor = {};
    stats_thread = {};
    hub.close_all();
}

} // namespace nvs
