// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "stages/stages.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace nvs {

// One keyframe snippet (t, t+1, t+2) with t even.
struct SnippetPlan {
    std::int64_t keyframe_lo = 0;
    std::int64_t middle = 1;
    std::int64_t keyframe_hi = 2;
    bool is_first = true;

    bool operator==(const SnippetPlan &) const = default;
};

SnippetPlan make_snippet(std::int64_t keyframe_lo, bool is_first);

struct SchedulePlan {
    std::vector<SnippetPlan> snippets;
    // Set when the input has an even frame count: the last frame has no
    // keyframe partner.
    std::optional<std::int64_t> trailing;
};

// Snippets (0,1,2), (2,3,4), ... over num_input_frames inputs (>= 3).
SchedulePlan plan_snippets(std::int64_t num_input_frames);

// Owns the emission order of the output stream.
class StreamState {
public:
    std::int64_t next_emit_index() const { return next_; }
    std::size_t emitted() const { return emitted_; }

    // Emits the frames of `plan`: all three for a first snippet, (t+1, t+2)
    // otherwise. Throws StreamError if `frames` or the plan disagree with
    // the stream position.
    std::vector<NovelFrame> emit_snippet(const SnippetPlan &plan, std::array<NovelFrame, 3> frames);

    // Emits a single frame at the next index (trailing passthrough).
    NovelFrame emit_single(NovelFrame frame);

    // Moves the stream forward past dropped input; the next snippet must be
    // a first snippet starting at `index`.
    void skip_to(std::int64_t index);

private:
    std::int64_t next_ = 0;
    std::size_t emitted_ = 0;
};

} // namespace nvs
