/*
 * Copyright The stacksurgeon authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "stacksurgeon/perf_records.hpp"

#include <doctest.h>

#include <cstring>

using namespace stacksurgeon;
using namespace stacksurgeon::perfev;

namespace {

// Appends one record at the running head position of a synthetic ring.
void put_record(std::vector<std::uint8_t>& ring, std::uint64_t& head, std::uint32_t type,
                const std::vector<std::uint64_t>& words) {
    RecordHeader header{};
    header.type = type;
    header.size = static_cast<std::uint16_t>(sizeof(RecordHeader) + words.size() * 8);
    std::vector<std::uint8_t> bytes(header.size);
    std::memcpy(bytes.data(), &header, sizeof(header));
    std::memcpy(bytes.data() + sizeof(header), words.data(), words.size() * 8);
    for (std::uint8_t byte : bytes) {
        ring[head % ring.size()] = byte;
        ++head;
    }
}

std::vector<std::uint64_t> sample_words(std::uint64_t time,
                                        const std::vector<std::uint64_t>& ips) {
    std::vector<std::uint64_t> words{time, ips.size()};
    words.insert(words.end(), ips.begin(), ips.end());
    return words;
}

}  // namespace

TEST_CASE("walk_ring decodes records, including across the wrap point") {
    std::vector<std::uint8_t> ring(256, 0);
    // Start near the edge so the second record straddles it.
    std::uint64_t head = 200;
    std::uint64_t tail = head;
    put_record(ring, head, kRecordSample, sample_words(111, {0x40, 0x41}));
    put_record(ring, head, kRecordLost, {7, 5});  // id 7, lost 5
    put_record(ring, head, kRecordSample, sample_words(222, {0x50}));

    std::vector<std::uint32_t> types;
    std::vector<SamplePayload> samples;
    std::uint64_t lost = 0;
    std::uint64_t new_tail =
        walk_ring(ring, tail, head, [&](const RecordHeader& header,
                                        std::span<const std::uint8_t> payload) {
            types.push_back(header.type);
            if (header.type == kRecordSample) {
                SamplePayload decoded;
                REQUIRE(parse_time_callchain(payload, decoded));
                samples.push_back(decoded);
            } else {
                lost += parse_lost_count(payload);
            }
        });

    CHECK(new_tail == head);
    CHECK(types == std::vector<std::uint32_t>{kRecordSample, kRecordLost, kRecordSample});
    CHECK(lost == 5);
    REQUIRE(samples.size() == 2);
    CHECK(samples[0].time == 111);
    CHECK(samples[0].ips == std::vector<std::uint64_t>{0x40, 0x41});
    CHECK(samples[1].time == 222);
    CHECK(samples[1].ips == std::vector<std::uint64_t>{0x50});
}

TEST_CASE("walk_ring stops cleanly at a corrupt header") {
    std::vector<std::uint8_t> ring(128, 0);  // size 0 headers everywhere
    std::uint64_t visited = 0;
    std::uint64_t tail = walk_ring(ring, 0, 64,
                                   [&](const RecordHeader&, std::span<const std::uint8_t>) {
                                       ++visited;
                                   });
    CHECK(visited == 0);
    CHECK(tail == 0);
}

TEST_CASE("walk_ring leaves a partial trailing record unread") {
    std::vector<std::uint8_t> ring(256, 0);
    std::uint64_t head = 0;
    put_record(ring, head, kRecordSample, sample_words(1, {0x10}));
    // Header claims more bytes than [tail, head) holds.
    std::uint64_t fake_head = head + 4;
    RecordHeader bogus{kRecordSample, 0, 64};
    std::memcpy(ring.data() + head % ring.size(), &bogus, sizeof(bogus));

    std::uint64_t visited = 0;
    std::uint64_t tail = walk_ring(ring, 0, fake_head,
                                   [&](const RecordHeader&, std::span<const std::uint8_t>) {
                                       ++visited;
                                   });
    CHECK(visited == 1);
    CHECK(tail == head);
}

TEST_CASE("parse_time_callchain rejects short or lying payloads") {
    SamplePayload decoded;
    std::vector<std::uint8_t> tiny(8, 0);
    CHECK_FALSE(parse_time_callchain(tiny, decoded));

    // nr claims more entries than the payload carries.
    std::vector<std::uint64_t> words{42, 10, 0x1, 0x2};
    std::vector<std::uint8_t> bytes(words.size() * 8);
    std::memcpy(bytes.data(), words.data(), bytes.size());
    CHECK_FALSE(parse_time_callchain(bytes, decoded));
}

TEST_CASE("build_sample filters context markers and flags truncation") {
    // Kernel chains open with a context marker (e.g. PERF_CONTEXT_USER).
    std::vector<std::uint64_t> ips{static_cast<std::uint64_t>(-512LL), 0x400100, 0x400200,
                                   0x400300};
    RawSample sample = build_sample(99, ips, 8);
    CHECK(sample.timestamp_ns == 99);
    CHECK(sample.frames == std::vector<std::uint64_t>{0x400100, 0x400200, 0x400300});
    CHECK_FALSE(sample.truncated);

    RawSample cut = build_sample(0, ips, 2);
    CHECK(cut.frames == std::vector<std::uint64_t>{0x400100, 0x400200});
    CHECK(cut.truncated);

    // Exactly at the bound also reports truncation (the kernel may have cut).
    RawSample exact = build_sample(0, ips, 3);
    CHECK(exact.frames.size() == 3);
    CHECK(exact.truncated);

    RawSample empty = build_sample(0, std::vector<std::uint64_t>{static_cast<std::uint64_t>(-512LL)}, 8);
    CHECK(empty.frames.empty());
}
