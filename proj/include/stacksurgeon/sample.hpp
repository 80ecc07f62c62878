/*
 * Copyright The stacksurgeon authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stacksurgeon {

/// One stack sample. Frames are code addresses ordered leaf-first:
/// frames[0] is the function executing at the sample instant, the last
/// frame is the outermost caller captured.
struct RawSample {
    std::vector<std::uint64_t> frames;
    std::uint64_t timestamp_ns = 0;  // since session start
    bool truncated = false;          // chain was cut at the depth limit
};

/// Resolved frame label. Unresolved addresses keep the fallback form
/// "0x" + lowercase hex.
struct FrameName {
    std::string display;
    bool resolved = false;

    bool operator==(const FrameName&) const = default;
};

/// What to sample and how. Live sessions require exactly one of pid/cgroup;
/// replay sessions synthesize a spec with neither set.
struct SessionSpec {
    std::optional<int> pid;
    std::optional<std::string> cgroup;
    std::chrono::milliseconds interval{1000};
    int max_stack_depth = 127;
    bool include_kernel = false;
};

struct SessionSummary {
    std::uint64_t total_samples = 0;
    std::uint64_t dropped_samples = 0;
    std::chrono::nanoseconds wall_duration{0};
};

/// Samples drained since the previous poll, plus the number lost to
/// ring-buffer overruns in the same window. Losses are surfaced, never
/// silently merged.
struct PollResult {
    std::vector<RawSample> samples;
    std::uint64_t dropped = 0;
};

}  // namespace stacksurgeon
