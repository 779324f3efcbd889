// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace nvs {

enum class StageId { camera_pose = 0, spatial, rendering, interpolation, superres };

inline constexpr std::size_t kStageCount = 5;
inline constexpr std::array<StageId, kStageCount> kAllStages = {
    StageId::camera_pose, StageId::spatial, StageId::rendering, StageId::interpolation,
    StageId::superres};

const char *to_string(StageId s);
// Human-readable component name used in report tables.
const char *display_name(StageId s);

// Runtime samples per stage invocation, plus the run totals needed for the
// amortized per-frame time.
class LatencyLedger {
public:
    explicit LatencyLedger(double input_fps = 30.0);

    void record(StageId stage, double ms);
    const std::vector<double> &samples(StageId stage) const;
    std::size_t sample_count() const;
    // Throws InvalidArgument if the stage has no samples.
    double mean(StageId stage) const;

    double input_fps() const { return fps_; }
    double input_interval_ms() const { return 1000.0 / fps_; }

    // Wall time of the run with preprocessing excluded, and frames emitted.
    void set_totals(double wall_ms, std::size_t emitted_frames);
    double wall_ms() const { return wall_ms_; }
    std::size_t emitted_frames() const { return emitted_; }

private:
    double fps_;
    std::array<std::vector<double>, kStageCount> samples_;
    double wall_ms_ = 0.0;
    std::size_t emitted_ = 0;
};

struct LatencyReport {
    std::array<double, kStageCount> stage_mean_ms{};
    double component_sum_ms = 0.0;
    double input_interval_ms = 0.0;
    // Two input intervals of buffering plus one snippet's processing.
    double delay_ms = 0.0;
    double budget_ms = 1000.0;
    bool over_budget = false;
    double wall_ms = 0.0;
    std::size_t emitted_frames = 0;
    double amortized_ms = 0.0;
    double output_fps = 0.0;
};

// Per-stage means, delay = 2 * input interval + component sum (flagged at or
// above budget_ms), amortized time = wall time / emitted frames. Throws
// InvalidArgument when any stage lacks samples.
LatencyReport latency_report(const LatencyLedger &ledger, double budget_ms = 1000.0);

// Component | Runtime (ms) table with the sum, delay and amortized rows.
std::string format_latency_table(const LatencyReport &report);

} // namespace nvs
