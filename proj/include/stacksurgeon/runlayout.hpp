/*
 * Copyright The stacksurgeon authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stacksurgeon {

enum class CpuType { AS, TS, O3 };

std::string_view cpu_full_name(CpuType cpu);  // AtomicSimpleCPU / TimingSimpleCPU / O3CPU
std::string_view cpu_abbrev(CpuType cpu);     // AS / TS / O3

/// Accepts both the abbreviations and the full names.
std::optional<CpuType> parse_cpu(std::string_view text);

struct RunMeta {
    std::string benchmark;
    std::string application;
    int cores = 1;
    CpuType cpu = CpuType::AS;
    int memory_gb = 1;
    bool ruby = false;

    bool operator==(const RunMeta&) const = default;
};

/// Six-level run directory convention:
/// <benchmark>/<application>/<cores>/<CpuFullName>/<mem>GB/[ruby/]callstack.json
/// Throws InvalidSpec on cores < 1 or memory_gb < 1.
std::filesystem::path layout_path(const RunMeta& meta);

/// Compact display label: <cores><CpuAbbrev><memory_gb>, plus 'r' when ruby.
/// Not injective across benchmarks; report-level uniqueness is the
/// reporter's job.
std::string run_label(const RunMeta& meta);

/// Decodes a path whose trailing components follow the layout convention.
std::optional<RunMeta> parse_layout_path(const std::filesystem::path& path);

struct DiscoveredRun {
    RunMeta meta;
    std::filesystem::path path;
};

struct DiscoveryResult {
    std::vector<DiscoveredRun> runs;        // sorted by path
    std::vector<std::string> warnings;      // non-conforming files, skipped
};

/// Walks `root` for callstack.json files that decode under the convention.
/// Throws DirNotFound.
DiscoveryResult discover_runs(const std::filesystem::path& root);

}  // namespace stacksurgeon
