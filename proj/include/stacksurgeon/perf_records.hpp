/*
 * Copyright The stacksurgeon authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "stacksurgeon/sample.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

// Byte-level decoding of perf ring-buffer records, kept free of Linux
// headers so the logic is testable on any host. The live backend
// static_asserts these constants against <linux/perf_event.h>.

namespace stacksurgeon::perfev {

inline constexpr std::uint32_t kRecordLost = 2;
inline constexpr std::uint32_t kRecordSample = 9;

// Callchain entries at or above this value are context markers
// (PERF_CONTEXT_USER and friends), not code addresses.
inline constexpr std::uint64_t kCallchainContextMin = static_cast<std::uint64_t>(-4095LL);

struct RecordHeader {
    std::uint32_t type;
    std::uint16_t misc;
    std::uint16_t size;
};

/// Copies len bytes starting at ring offset `offset`, wrapping at the edge.
inline void ring_copy(std::span<const std::uint8_t> data, std::uint64_t offset,
                      std::uint8_t* out, std::size_t len) {
    std::size_t at = static_cast<std::size_t>(offset % data.size());
    std::size_t first = std::min(len, data.size() - at);
    std::memcpy(out, data.data() + at, first);
    if (first < len) {
        std::memcpy(out + first, data.data(), len - first);
    }
}

/// Walks [tail, head) of a ring, invoking fn(header, payload) for every
/// well-formed record; stops at a corrupt header rather than spinning.
/// Returns the new tail.
template <typename Fn>
std::uint64_t walk_ring(std::span<const std::uint8_t> data, std::uint64_t tail,
                        std::uint64_t head, Fn&& fn) {
    std::vector<std::uint8_t> scratch;
    while (tail < head) {
        if (head - tail < sizeof(RecordHeader)) {
            break;
        }
        RecordHeader header{};
        ring_copy(data, tail, reinterpret_cast<std::uint8_t*>(&header), sizeof(header));
        if (header.size < sizeof(RecordHeader) || header.size > head - tail) {
            break;
        }
        scratch.resize(header.size - sizeof(RecordHeader));
        ring_copy(data, tail + sizeof(RecordHeader), scratch.data(), scratch.size());
        fn(header, std::span<const std::uint8_t>{scratch});
        tail += header.size;
    }
    return tail;
}

struct SamplePayload {
    std::uint64_t time = 0;
    std::vector<std::uint64_t> ips;
};

/// PERF_RECORD_SAMPLE payload for sample_type = TIME | CALLCHAIN:
/// u64 time; u64 nr; u64 ips[nr].
inline bool parse_time_callchain(std::span<const std::uint8_t> payload, SamplePayload& out) {
    if (payload.size() < 16) {
        return false;
    }
    std::memcpy(&out.time, payload.data(), 8);
    std::uint64_t nr = 0;
    std::memcpy(&nr, payload.data() + 8, 8);
    if (nr > (payload.size() - 16) / 8) {
        return false;
    }
    out.ips.resize(static_cast<std::size_t>(nr));
    std::memcpy(out.ips.data(), payload.data() + 16, static_cast<std::size_t>(nr) * 8);
    return true;
}

/// PERF_RECORD_LOST payload: u64 id; u64 lost.
inline std::uint64_t parse_lost_count(std::span<const std::uint8_t> payload) {
    if (payload.size() < 16) {
        return 0;
    }
    std::uint64_t lost = 0;
    std::memcpy(&lost, payload.data() + 8, 8);
    return lost;
}

/// Drops context markers and cuts the chain at depth_limit, flagging the
/// truncation. Kernel chains arrive leaf-first, as RawSample expects.
/// An empty frames vector means the record carried no real addresses.
inline RawSample build_sample(std::uint64_t timestamp_ns, std::span<const std::uint64_t> ips,
                              std::size_t depth_limit) {
    RawSample sample;
    sample.timestamp_ns = timestamp_ns;
    sample.frames.reserve(std::min(ips.size(), depth_limit));
    for (std::uint64_t ip : ips) {
        if (ip >= kCallchainContextMin) {
            continue;
        }
        if (sample.frames.size() == depth_limit) {
            sample.truncated = true;
            break;
        }
        sample.frames.push_back(ip);
    }
    if (sample.frames.size() == depth_limit) {
        sample.truncated = true;
    }
    return sample;
}

}  // namespace stacksurgeon::perfev
