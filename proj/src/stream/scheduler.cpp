// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "stream/scheduler.hpp"

#include "common/error.hpp"

#include <string>

namespace nvs {

SnippetPlan make_snippet(std::int64_t keyframe_lo, bool is_first) {
    NVS_REQUIRE(keyframe_lo >= 0 && keyframe_lo % 2 == 0, "snippets start at an even index");
    return {keyframe_lo, keyframe_lo + 1, keyframe_lo + 2, is_first};
}

SchedulePlan plan_snippets(std::int64_t num_input_frames) {
    if (num_input_frames < 3)
        throw InvalidArgument("a stream needs at least 3 input frames, got " +
                              std::to_string(num_input_frames));
    SchedulePlan plan;
    for (std::int64_t t = 0; t + 2 <= num_input_frames - 1; t += 2)
        plan.snippets.push_back(make_snippet(t, t == 0));
    if (num_input_frames % 2 == 0)
        plan.trailing = num_input_frames - 1;
    return plan;
}

std::vector<NovelFrame> StreamState::emit_snippet(const SnippetPlan &plan,
                                                  std::array<NovelFrame, 3> frames) {
    const std::int64_t expect_first = plan.is_first ? plan.keyframe_lo : plan.middle;
    if (expect_first != next_)
        throw StreamError("snippet starting at " + std::to_string(plan.keyframe_lo) +
                          " would emit index " + std::to_string(expect_first) + ", stream is at " +
                          std::to_string(next_));
    for (int i = 0; i < 3; ++i)
        if (frames[i].t != plan.keyframe_lo + i)
            throw StreamError("snippet " + std::to_string(plan.keyframe_lo) + " received frame " +
                              std::to_string(frames[i].t) + " in slot " + std::to_string(i));

    std::vector<NovelFrame> out;
    for (int i = plan.is_first ? 0 : 1; i < 3; ++i)
        out.push_back(std::move(frames[i]));
    next_ = plan.keyframe_hi + 1;
    emitted_ += out.size();
    return out;
}

NovelFrame StreamState::emit_single(NovelFrame frame) {
    if (frame.t != next_)
        throw StreamError("frame " + std::to_string(frame.t) + " emitted at stream position " +
                          std::to_string(next_));
    ++next_;
    ++emitted_;
    return frame;
}

void StreamState::skip_to(std::int64_t index) {
    if (index < next_)
        throw StreamError("cannot rewind the stream from " + std::to_string(next_) + " to " +
                          std::to_string(index));
    next_ = index;
}

} // namespace nvs
