/*
 * Copyright The stacksurgeon authors
 * SPDX-License-Identifier: Apache-2.0
 */

// Synthetic workload for live-profiling tests: burns CPU in two marked
// functions at a 70/30 split. Slices are scheduled by a fixed LCG so the
// alternation never phase-locks with a sampling interval. The marked
// functions keep extern "C" linkage so their symbol names stay bare.

#include <cstdint>
#include <cstdlib>
#include <ctime>

namespace {
constexpr std::uint64_t kSliceIterations = 120'000;
}

extern "C" __attribute__((noinline)) void hot_primary() {
    volatile std::uint64_t sink = 1;
    for (std::uint64_t i = 0; i < kSliceIterations; ++i) {
        sink = sink * 6364136223846793005ull + 1442695040888963407ull;
    }
}

extern "C" __attribute__((noinline)) void hot_secondary() {
    volatile std::uint64_t sink = 1;
    for (std::uint64_t i = 0; i < kSliceIterations; ++i) {
        sink = sink * 6364136223846793005ull + 1442695040888963407ull;
    }
}

extern "C" __attribute__((noinline)) void run_workload(long seconds) {
    std::uint64_t lcg = 0x853c49e6748fea9bull;
    std::time_t end = std::time(nullptr) + seconds;
    while (std::time(nullptr) < end) {
        lcg = lcg * 6364136223846793005ull + 1442695040888963407ull;
        if ((lcg >> 33) % 10 < 7) {
            hot_primary();
        } else {
            hot_secondary();
        }
    }
}

int main(int argc, char** argv) {
    long seconds = 600;
    if (argc > 1) {
        seconds = std::strtol(argv[1], nullptr, 10);
        if (seconds <= 0) {
            seconds = 600;
        }
    }
    run_workload(seconds);
    return 0;
}
