// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "stream/latency.hpp"

#include "common/error.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

namespace nvs {

const char *to_string(StageId s) {
    switch (s) {
    case StageId::camera_pose:
        return "camera_pose";
    case StageId::spatial:
        return "spatial";
    case StageId::rendering:
        return "rendering";
    case StageId::interpolation:
        return "interpolation";
    case StageId::superres:
        return "superres";
    }
    return "?";
}

const char *display_name(StageId s) {
    switch (s) {
    case StageId::camera_pose:
        return "Camera pose";
    case StageId::spatial:
        return "Spatial (Gaussians)";
    case StageId::rendering:
        return "Rendering";
    case StageId::interpolation:
        return "Interpolation";
    case StageId::superres:
        return "Super-resolution";
    }
    return "?";
}

LatencyLedger::LatencyLedger(double input_fps) : fps_(input_fps) {
    NVS_REQUIRE(std::isfinite(input_fps) && input_fps > 0.0, "input fps must be positive");
}

void LatencyLedger::record(StageId stage, double ms) {
    NVS_REQUIRE(std::isfinite(ms) && ms >= 0.0, "latency samples must be finite and nonnegative");
    samples_[static_cast<std::size_t>(stage)].push_back(ms);
}

const std::vector<double> &LatencyLedger::samples(StageId stage) const {
    return samples_[static_cast<std::size_t>(stage)];
}

std::size_t LatencyLedger::sample_count() const {
    std::size_t n = 0;
    for (const auto &s : samples_)
        n += s.size();
    return n;
}

double LatencyLedger::mean(StageId stage) const {
    const auto &s = samples(stage);
    if (s.empty())
        throw InvalidArgument(std::string("no latency samples for stage ") + to_string(stage));
    return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

void LatencyLedger::set_totals(double wall_ms, std::size_t emitted_frames) {
    NVS_REQUIRE(std::isfinite(wall_ms) && wall_ms >= 0.0, "wall time must be nonnegative");
    wall_ms_ = wall_ms;
    emitted_ = emitted_frames;
}

LatencyReport latency_report(const LatencyLedger &ledger, double budget_ms) {
    if (ledger.sample_count() == 0)
        throw InvalidArgument("latency report needs a nonempty ledger");
    LatencyReport r;
    for (auto s : kAllStages) {
        r.stage_mean_ms[static_cast<std::size_t>(s)] = ledger.mean(s);
        r.component_sum_ms += ledger.mean(s);
    }
    r.input_interval_ms = ledger.input_interval_ms();
    r.delay_ms = 2.0 * r.input_interval_ms + r.component_sum_ms;
    r.budget_ms = budget_ms;
    r.over_budget = r.delay_ms >= budget_ms;
    r.wall_ms = ledger.wall_ms();
    r.emitted_frames = ledger.emitted_frames();
    if (r.emitted_frames > 0) {
        r.amortized_ms = r.wall_ms / static_cast<double>(r.emitted_frames);
        r.output_fps = r.wall_ms > 0.0 ? 1000.0 / r.amortized_ms : 0.0;
    }
    return r;
}

std::string format_latency_table(const LatencyReport &r) {
    std::string out;
    char line[160];
    auto row = [&](const char *name, double ms) {
        std::snprintf(line, sizeof line, "| %-26s | %12.1f |\n", name, ms);
        out += line;
    };
    out += "| Component                  | Runtime (ms) |\n";
    out += "|----------------------------|--------------|\n";
    for (auto s : kAllStages)
        row(display_name(s), r.stage_mean_ms[static_cast<std::size_t>(s)]);
    row("Total", r.component_sum_ms);
    out += "\n";
    std::snprintf(line, sizeof line, "stream delay: %.1f ms (2 x %.1f ms input interval + %.1f ms)%s\n",
                  r.delay_ms, r.input_interval_ms, r.component_sum_ms,
                  r.over_budget ? "  OVER BUDGET" : "");
    out += line;
    std::snprintf(line, sizeof line, "budget: %.1f ms\n", r.budget_ms);
    out += line;
    std::snprintf(line, sizeof line, "amortized: %.2f ms/frame over %zu frames (%.1f fps)\n",
                  r.amortized_ms, r.emitted_frames, r.output_fps);
    out += line;
    return out;
}

} // namespace nvs
