/*
 * Copyright The stacksurgeon authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "stacksurgeon/analyzer.hpp"
#include "stacksurgeon/calltree.hpp"
#include "stacksurgeon/errors.hpp"
#include "stacksurgeon/report.hpp"
#include "stacksurgeon/runlayout.hpp"
#include "stacksurgeon/sample_source.hpp"
#include "stacksurgeon/symbolizer.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#ifdef __linux__
#include <unistd.h>
#endif

namespace fs = std::filesystem;
using namespace stacksurgeon;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitIo = 2;
constexpr int kExitUsage = 64;

volatile std::sig_atomic_t g_interrupted = 0;

void on_interrupt(int) {
    g_interrupted = 1;
}

std::string read_text_file(const fs::path& path) {
    std::ifstream file{path, std::ios::binary};
    if (!file) {
        throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
    }
    std::ostringstream content;
    content << file.rdbuf();
    return std::move(content).str();
}

void write_text_file(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream file{path, std::ios::binary};
    file << content;
    file.flush();
    if (!file) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
}

// "250", "250ms", "30s", "5m"; a bare number takes the default unit.
std::chrono::milliseconds parse_duration(const std::string& text, std::chrono::milliseconds unit) {
    std::size_t pos = 0;
    long long value = -1;
    try {
        value = std::stoll(text, &pos);
    } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidSpec, "not a duration: \"" + text + "\"");
    }
    std::string suffix = text.substr(pos);
    std::chrono::milliseconds factor = unit;
    if (suffix == "ms") {
        factor = std::chrono::milliseconds{1};
    } else if (suffix == "s") {
        factor = std::chrono::milliseconds{1000};
    } else if (suffix == "m") {
        factor = std::chrono::milliseconds{60'000};
    } else if (!suffix.empty()) {
        throw Error(ErrorCode::InvalidSpec, "unknown duration unit in \"" + text + "\"");
    }
    if (value < 0) {
        throw Error(ErrorCode::InvalidSpec, "durations must be non-negative");
    }
    return std::chrono::milliseconds{value * factor.count()};
}

// Labels must be unique per report; later duplicates gain "#2", "#3", ...
void uniquify_labels(std::vector<std::pair<std::string, const CallTree*>>& runs) {
    std::map<std::string, int> seen;
    for (auto& [label, tree] : runs) {
        int times = ++seen[label];
        if (times > 1) {
            label += "#" + std::to_string(times);
        }
    }
}

void warn_uncategorized(const BreakdownTable& table) {
    for (const auto& row : table.rows) {
        for (const CategoryEntry& entry : row.breakdown.entries) {
            if (entry.category == kUncategorizedCategory && entry.count > 0) {
                std::cerr << "warning: " << row.label << ": " << entry.count
                          << " samples uncategorized\n";
            }
        }
    }
}

bool color_enabled() {
#ifdef __linux__
    if (!isatty(1)) {
        return false;
    }
#endif
    return std::getenv("STACKSURGEON_NO_COLOR") == nullptr;
}

struct RecordArgs {
    int pid = -1;
    std::string cgroup;
    std::string replay;
    std::string interval = "1000";
    std::string duration;
    int depth = 127;
    bool kernel = false;
    int symbol_pid = -1;
    std::string out = "callstack.json";
};

#ifdef __linux__
int first_cgroup_pid(const std::string& cgroup) {
    std::ifstream procs{cgroup + "/cgroup.procs"};
    int pid = -1;
    if (procs >> pid) {
        return pid;
    }
    return -1;
}
#endif

int cmd_record(const RecordArgs& args) {
    std::unique_ptr<SamplerSession> session;
    SymbolIndex index;
    bool live = args.replay.empty();

    if (!live) {
        session = open_replay(args.replay);
        index = index_from_names(*session->name_table(), replay_addr_base, replay_addr_stride);
    } else {
        SessionSpec spec;
        if (args.pid >= 0) {
            spec.pid = args.pid;
        }
        if (!args.cgroup.empty()) {
            spec.cgroup = args.cgroup;
        }
        spec.interval = parse_duration(args.interval, std::chrono::milliseconds{1});
        spec.max_stack_depth = args.depth;
        spec.include_kernel = args.kernel;
        session = open_session(spec);

        int symbol_pid = args.symbol_pid;
        if (symbol_pid < 0 && spec.pid) {
            symbol_pid = *spec.pid;
        }
#ifdef __linux__
        if (symbol_pid < 0 && spec.cgroup) {
            symbol_pid = first_cgroup_pid(*spec.cgroup);
        }
#endif
        if (symbol_pid >= 0) {
            index = build_symbol_index(symbol_pid);
        } else {
            std::cerr << "warning: no process to symbolize; frames stay hexadecimal\n";
            index.seal();
        }
        if (!index.has_symbols()) {
            std::cerr << "warning: no symbols found; frames stay hexadecimal\n";
        }
    }

    std::signal(SIGINT, on_interrupt);
    std::signal(SIGTERM, on_interrupt);

    CallTree tree;
    auto ingest_batch = [&](const PollResult& batch) {
        for (const RawSample& sample : batch.samples) {
            ingest(tree, reverse_chain(resolve(index, sample)));
        }
    };

    if (live) {
        std::chrono::milliseconds duration{0};
        bool bounded = !args.duration.empty();
        if (bounded) {
            duration = parse_duration(args.duration, std::chrono::milliseconds{1000});
        }
        auto started = std::chrono::steady_clock::now();
        auto nap = std::min<std::chrono::milliseconds>(
            parse_duration(args.interval, std::chrono::milliseconds{1}),
            std::chrono::milliseconds{200});
        if (nap.count() < 1) {
            nap = std::chrono::milliseconds{1};
        }
        while (!g_interrupted) {
            if (bounded && std::chrono::steady_clock::now() - started >= duration) {
                break;
            }
            std::this_thread::sleep_for(nap);
            ingest_batch(session->poll());
        }
    }
    ingest_batch(session->poll());
    SessionSummary summary = session->close();

    write_text_file(args.out, serialize(tree));

    double seconds =
        std::chrono::duration_cast<std::chrono::duration<double>>(summary.wall_duration).count();
    std::ostringstream line;
    line.setf(std::ios::fixed);
    line.precision(2);
    line << "recorded " << summary.total_samples << " samples (" << summary.dropped_samples
         << " dropped) over " << seconds << "s -> " << args.out;
    std::cout << line.str() << "\n";
    return kExitOk;
}

struct AnalyzeArgs {
    std::vector<std::string> trees;
    std::string config;
    std::string format = "txt";
    std::string out;
};

std::string label_for_tree_path(const fs::path& path) {
    if (std::optional<RunMeta> meta = parse_layout_path(path)) {
        return run_label(*meta);
    }
    return path.stem().string();
}

int cmd_analyze(const AnalyzeArgs& args) {
    AnalysisConfig config = parse_config(read_text_file(args.config));

    std::vector<CallTree> trees;
    trees.reserve(args.trees.size());
    std::vector<std::pair<std::string, const CallTree*>> runs;
    for (const std::string& tree_path : args.trees) {
        try {
            trees.push_back(deserialize(read_text_file(tree_path)));
        } catch (const Error& e) {
            throw Error(e.code(), tree_path + ": " + e.what());
        }
    }
    for (std::size_t i = 0; i < trees.size(); ++i) {
        runs.emplace_back(label_for_tree_path(args.trees[i]), &trees[i]);
    }
    uniquify_labels(runs);

    BreakdownTable table = breakdown_for_runs(runs, config);
    warn_uncategorized(table);

    std::string output;
    if (args.format == "csv") {
        output = emit_csv(table);
    } else {
        output = emit_text_table(table, args.out.empty() && color_enabled());
    }
    if (args.out.empty()) {
        std::cout << output;
    } else {
        write_text_file(args.out, output);
    }
    return kExitOk;
}

struct ChartArgs {
    std::string runs_dir;
    std::string config;
    std::string out = "chart.svg";
    std::string title;
};

int cmd_chart(const ChartArgs& args) {
    AnalysisConfig config = parse_config(read_text_file(args.config));

    DiscoveryResult discovered = discover_runs(args.runs_dir);
    for (const std::string& warning : discovered.warnings) {
        std::cerr << "warning: " << warning << "\n";
    }

    std::vector<CallTree> trees;
    std::vector<std::pair<std::string, const CallTree*>> runs;
    std::vector<std::string> labels;
    trees.reserve(discovered.runs.size());
    for (const DiscoveredRun& run : discovered.runs) {
        try {
            trees.push_back(deserialize(read_text_file(run.path)));
            labels.push_back(run_label(run.meta));
        } catch (const Error& e) {
            std::cerr << "warning: skipping " << run.path.string() << ": " << e.what() << "\n";
        }
    }
    for (std::size_t i = 0; i < trees.size(); ++i) {
        runs.emplace_back(labels[i], &trees[i]);
    }
    if (runs.empty()) {
        throw Error(ErrorCode::EmptyInput, "no conforming runs under " + args.runs_dir);
    }
    uniquify_labels(runs);

    BreakdownTable table = breakdown_for_runs(runs, config);
    warn_uncategorized(table);

    ChartSpec spec;
    spec.title = args.title;
    if (spec.title.empty()) {
        spec.title = config.root_pattern +
                     (config.mode == AnalysisMode::children ? " (children)" : " (flattened)");
    }
    write_text_file(args.out, emit_stacked_bars(table, spec));
    std::cout << "charted " << runs.size() << " runs -> " << args.out << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stacksurgeon: sampling callchain profiler and call-tree analyzer"};
    app.require_subcommand(1);

    RecordArgs record_args;
    CLI::App* record = app.add_subcommand("record", "Sample a target into callstack.json");
    auto* opt_pid = record->add_option("--pid", record_args.pid, "Attach to a process id");
    auto* opt_cgroup =
        record->add_option("--cgroup", record_args.cgroup, "Attach to a cgroup directory");
    auto* opt_replay =
        record->add_option("--replay", record_args.replay, "Replay a recorded .stacks file");
    opt_pid->excludes(opt_cgroup)->excludes(opt_replay);
    opt_cgroup->excludes(opt_replay);
    record->add_option("--interval", record_args.interval,
                       "Sampling interval (default 1000ms)");
    record->add_option("--duration", record_args.duration,
                       "Stop after this long (default: until interrupted)");
    record->add_option("--depth", record_args.depth, "Max callchain depth (default 127)");
    record->add_flag("--kernel", record_args.kernel, "Include kernel frames");
    record->add_option("--symbol-pid", record_args.symbol_pid,
                       "Process whose symbols resolve cgroup samples");
    record->add_option("-o,--out", record_args.out, "Output path (default callstack.json)");

    AnalyzeArgs analyze_args;
    CLI::App* analyze = app.add_subcommand("analyze", "Break a call tree into categories");
    analyze->add_option("trees", analyze_args.trees, "callstack.json file(s)")->required();
    analyze->add_option("-c,--config", analyze_args.config, "Analysis config file")->required();
    analyze->add_option("--format", analyze_args.format, "txt or csv (default txt)")
        ->check(CLI::IsMember({"txt", "csv"}));
    analyze->add_option("-o,--out", analyze_args.out, "Write output here instead of stdout");

    ChartArgs chart_args;
    CLI::App* chart = app.add_subcommand("chart", "Chart every discovered run as stacked bars");
    chart->add_option("--runs", chart_args.runs_dir, "Root of the run directory layout")
        ->required();
    chart->add_option("-c,--config", chart_args.config, "Analysis config file")->required();
    chart->add_option("-o,--out", chart_args.out, "Output SVG path (default chart.svg)");
    chart->add_option("--title", chart_args.title, "Chart title");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (record->parsed()) {
            if (record->count("--pid") + record->count("--cgroup") + record->count("--replay") !=
                1) {
                std::cerr << "error: record needs exactly one of --pid, --cgroup, --replay\n";
                return kExitUsage;
            }
            return cmd_record(record_args);
        }
        if (analyze->parsed()) {
            return cmd_analyze(analyze_args);
        }
        if (chart->parsed()) {
            return cmd_chart(chart_args);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
        return e.code() == ErrorCode::IoError ? kExitIo : kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
