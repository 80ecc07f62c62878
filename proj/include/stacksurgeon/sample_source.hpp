/*
 * Copyright The stacksurgeon authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "stacksurgeon/sample.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

namespace stacksurgeon {

/// A stream of callchain samples, either live (perf_event) or replayed from
/// a recorded file. One session is owned by one logical thread of control;
/// poll/close must not race on the same session. Samples, once returned,
/// are plain values.
class SamplerSession {
  public:
    virtual ~SamplerSession() = default;

    /// Drains everything buffered since the previous poll, in timestamp
    /// order. Never blocks. Throws SessionClosed after close().
    virtual PollResult poll() = 0;

    /// Releases OS resources and returns the session totals. Idempotent:
    /// a second close returns the same summary.
    virtual SessionSummary close() = 0;

    virtual const SessionSpec& spec() const = 0;

    /// Replay sessions intern frame names to synthetic addresses; the table
    /// maps (addr - replay_addr_base) / replay_addr_stride back to the name
    /// in first-appearance order. Live sessions return nullptr.
    virtual const std::vector<std::string>* name_table() const { return nullptr; }
};

inline constexpr std::uint64_t replay_addr_base = 0x100000;
inline constexpr std::uint64_t replay_addr_stride = 0x10;

/// Attaches to a live target via the OS performance-event interface.
/// Errors: InvalidSpec, TargetNotFound, PermissionDenied, UnsupportedPlatform.
std::unique_ptr<SamplerSession> open_session(const SessionSpec& spec);

/// Loads a recorded replay file (collapsed-stack text, see README).
/// Errors: FileNotFound, MalformedReplay (with line number).
std::unique_ptr<SamplerSession> open_replay(const std::filesystem::path& path);

/// True when this process may open sampling perf events on itself. Used to
/// gate live tests; replay sessions work everywhere.
bool live_sampling_supported();

}  // namespace stacksurgeon
