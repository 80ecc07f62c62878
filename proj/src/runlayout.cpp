/*
 * Copyright The stacksurgeon authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "stacksurgeon/runlayout.hpp"

#include "stacksurgeon/errors.hpp"

#include <algorithm>
#include <charconv>
#include <system_error>

namespace stacksurgeon {

namespace fs = std::filesystem;

std::string_view cpu_full_name(CpuType cpu) {
    switch (cpu) {
        case CpuType::AS: return "AtomicSimpleCPU";
        case CpuType::TS: return "TimingSimpleCPU";
        case CpuType::O3: return "O3CPU";
    }
    return "";
}

std::string_view cpu_abbrev(CpuType cpu) {
    switch (cpu) {
        case CpuType::AS: return "AS";
        case CpuType::TS: return "TS";
        case CpuType::O3: return "O3";
    }
    return "";
}

std::optional<CpuType> parse_cpu(std::string_view text) {
    for (CpuType cpu : {CpuType::AS, CpuType::TS, CpuType::O3}) {
        if (text == cpu_full_name(cpu) || text == cpu_abbrev(cpu)) {
            return cpu;
        }
    }
    return std::nullopt;
}

namespace {

std::optional<int> parse_positive_int(std::string_view text) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || value < 1) {
        return std::nullopt;
    }
    return value;
}

// "<N>GB" with N >= 1.
std::optional<int> parse_memory(std::string_view text) {
    if (text.size() < 3 || !text.ends_with("GB")) {
        return std::nullopt;
    }
    return parse_positive_int(text.substr(0, text.size() - 2));
}

}  // namespace

fs::path layout_path(const RunMeta& meta) {
    if (meta.cores < 1 || meta.memory_gb < 1) {
        throw Error(ErrorCode::InvalidSpec, "run meta needs cores >= 1 and memory_gb >= 1");
    }
    fs::path path = fs::path(meta.benchmark) / meta.application / std::to_string(meta.cores) /
                    std::string{cpu_full_name(meta.cpu)} / (std::to_string(meta.memory_gb) + "GB");
    if (meta.ruby) {
        path /= "ruby";
    }
    return path / "callstack.json";
}

std::string run_label(const RunMeta& meta) {
    std::string label = std::to_string(meta.cores);
    label += cpu_abbrev(meta.cpu);
    label += std::to_string(meta.memory_gb);
    if (meta.ruby) {
        label += 'r';
    }
    return label;
}

std::optional<RunMeta> parse_layout_path(const fs::path& path) {
    std::vector<std::string> parts;
    for (const auto& component : path) {
        parts.push_back(component.string());
    }
    if (parts.empty() || parts.back() != "callstack.json") {
        return std::nullopt;
    }
    parts.pop_back();

    RunMeta meta;
    if (!parts.empty() && parts.back() == "ruby") {
        meta.ruby = true;
        parts.pop_back();
    }
    if (parts.size() < 5) {
        return std::nullopt;
    }
    // Trailing five components: benchmark/application/cores/cpu/memory.
    auto memory = parse_memory(parts[parts.size() - 1]);
    auto cpu = parse_cpu(parts[parts.size() - 2]);
    auto cores = parse_positive_int(parts[parts.size() - 3]);
    if (!memory || !cpu || !cores) {
        return std::nullopt;
    }
    meta.memory_gb = *memory;
    meta.cpu = *cpu;
    meta.cores = *cores;
    meta.application = parts[parts.size() - 4];
    meta.benchmark = parts[parts.size() - 5];
    if (meta.application.empty() || meta.benchmark.empty()) {
        return std::nullopt;
    }
    return meta;
}

DiscoveryResult discover_runs(const fs::path& root) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw Error(ErrorCode::DirNotFound, "not a directory: " + root.string());
    }
    DiscoveryResult result;
    for (auto it = fs::recursive_directory_iterator(root, ec);
         it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) {
            break;
        }
        if (!it->is_regular_file(ec) || ec) {
            continue;
        }
        fs::path relative = fs::relative(it->path(), root, ec);
        if (ec) {
            relative = it->path();
        }
        std::optional<RunMeta> meta = parse_layout_path(relative);
        if (meta) {
            result.runs.push_back({std::move(*meta), it->path()});
        } else {
            result.warnings.push_back("skipping non-conforming file: " + it->path().string());
        }
    }
    std::sort(result.runs.begin(), result.runs.end(),
              [](const DiscoveredRun& a, const DiscoveredRun& b) { return a.path < b.path; });
    std::sort(result.warnings.begin(), result.warnings.end());
    return result;
}

}  // namespace stacksurgeon
