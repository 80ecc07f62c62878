/*
 * Copyright The stacksurgeon authors
 * SPDX-License-Identifier: Apache-2.0
 */

// Acceptance suite: runs every contract criterion and prints one
// PASS/FAIL/SKIP line each. Exits nonzero when any criterion fails.

#include "stacksurgeon/analyzer.hpp"
#include "stacksurgeon/calltree.hpp"
#include "stacksurgeon/errors.hpp"
#include "stacksurgeon/report.hpp"
#include "stacksurgeon/runlayout.hpp"
#include "stacksurgeon/sample_source.hpp"
#include "stacksurgeon/symbolizer.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#ifdef __linux__
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>
#endif

namespace fs = std::filesystem;
using namespace stacksurgeon;
using namespace stacksurgeon::testing;

namespace {

const fs::path kFixtures{STACKSURGEON_FIXTURES_DIR};
const std::string kCli{STACKSURGEON_CLI_PATH};
const std::string kBusyloop{STACKSURGEON_BUSYLOOP_PATH};

struct SkipCriterion {
    std::string reason;
};

void require(bool condition, const std::string& detail) {
    if (!condition) {
        throw std::runtime_error(detail);
    }
}

void require_runtime(std::chrono::steady_clock::time_point started, double budget_seconds) {
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    require(elapsed < budget_seconds, "runtime budget exceeded: " + std::to_string(elapsed) +
                                          "s of " + std::to_string(budget_seconds) + "s");
}

std::string slurp(const fs::path& path) {
    std::ifstream file{path, std::ios::binary};
    std::ostringstream content;
    content << file.rdbuf();
    return std::move(content).str();
}

fs::path scratch_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("stacksurgeon_acceptance_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// 1. Ingest oracle equivalence: 1,000 random chains, every node count equals
//    the brute-force number of chains carrying that path prefix.
void criterion_1() {
    auto started = std::chrono::steady_clock::now();
    std::mt19937 rng{12345};
    auto chains = random_chains(rng, 1000, 8, 12);
    CallTree tree = tree_from_chains(chains);
    require(tree.total_samples == 1000, "total_samples != 1000");
    std::size_t nodes = 0;
    bool all_equal = true;
    for_each_node(tree, [&](const CallNode& node, const std::vector<std::string>& path) {
        ++nodes;
        if (node.count != prefix_count(chains, path)) {
            all_equal = false;
        }
    });
    require(nodes > 0, "tree is empty");
    require(all_equal, "a node count diverged from the prefix-counting oracle");
    require_runtime(started, 1.0);
}

// 2. Parent-dominance and count conservation on 200 random trees.
void criterion_2() {
    auto started = std::chrono::steady_clock::now();
    std::mt19937 rng{777};
    for (int round = 0; round < 200; ++round) {
        auto chains = random_chains(rng, 120, 6, 10);
        CallTree tree = tree_from_chains(chains);
        std::uint64_t root_sum = 0;
        for (const auto& [name, root] : tree.roots) {
            root_sum += root.count;
        }
        require(root_sum == tree.total_samples, "total_samples != sum of root counts");
        require(tree.total_samples == chains.size(), "total_samples != number of ingests");
        for_each_node(tree, [&](const CallNode& node, const std::vector<std::string>&) {
            std::uint64_t child_sum = 0;
            for (const auto& [name, child] : node.children) {
                child_sum += child.count;
            }
            require(node.count >= child_sum, "parent dominance violated");
            require(node.count >= 1, "zero-count node present");
        });
    }
    require_runtime(started, 5.0);
}

// 3. Share formula, exact.
void criterion_3() {
    require(share(50, 200) == 25.0, "share(50,200) != 25.0");
    std::mt19937 rng{31};
    for (int round = 0; round < 20; ++round) {
        CallTree tree = tree_from_chains(random_chains(rng, 100, 1, 6));
        require(tree.roots.size() == 1, "single-root fixture expected");
        const CallNode& root = tree.roots.begin()->second;
        require(share(root.count, tree.total_samples) == 100.0,
                "root share is not exactly 100.0");
    }
    require(share(0, 200) == 0.0, "share(0,200) != 0.0");
}

// 4. callstack.json round-trip identity plus the byte-exact two-node form.
void criterion_4() {
    CallTree two = tree_from_chains({{"a", "b"}});
    require(serialize(two) == R"({"a": {"count": 1, "b": {"count": 1}}})",
            "two-node serialization is not byte-exact");
    std::mt19937 rng{2024};
    for (int round = 0; round < 50; ++round) {
        CallTree tree = tree_from_chains(random_chains(rng, 200, 7, 11));
        require(deserialize(serialize(tree)) == tree, "round-trip changed the tree");
    }
}

// 5. Analyzer conservation in both modes for random trees and configs.
void criterion_5() {
    auto started = std::chrono::steady_clock::now();
    std::mt19937 rng{555};
    std::uniform_int_distribution<int> name_dist{0, 4};
    for (int round = 0; round < 120; ++round) {
        CallTree tree = tree_from_chains(random_chains(rng, 150, 5, 9));
        AnalysisConfig config;
        config.root_pattern = "f" + std::to_string(name_dist(rng));
        config.whitelist = {{"f" + std::to_string(name_dist(rng)), "A"},
                            {"f" + std::to_string(name_dist(rng)) + "*", "B"}};
        if (round % 2) {
            config.blacklist = {"f" + std::to_string(name_dist(rng))};
        }

        CategoryBreakdown children = aggregate_children(tree, config);
        std::uint64_t covered = children.denied;
        for (const CategoryEntry& entry : children.entries) {
            covered += entry.count;
        }
        require(covered == children.denominator,
                "children mode: categories+denied+uncategorized+self != denominator");

        CategoryBreakdown flat = aggregate_flat(tree, config);
        std::uint64_t flat_covered = flat.denied;
        for (const CategoryEntry& entry : flat.entries) {
            flat_covered += entry.count;
        }
        require(flat_covered == flat.denominator,
                "flatten mode: self-count totals + denied != denominator");

        for (const CallNode* root : find_roots(tree, config.root_pattern)) {
            std::uint64_t self_sum = 0;
            std::vector<std::string> path;
            for_each_node(*root, path,
                          [&](const CallNode& node, const auto&) { self_sum += self_count(node); });
            require(self_sum == root->count, "subtree self counts != matched root count");
        }
    }
    require_runtime(started, 5.0);
}

// 6. Outermost-match rule, cross-checked by brute-force enumeration.
void criterion_6() {
    std::mt19937 rng{606};
    for (int round = 0; round < 60; ++round) {
        // Tiny alphabet forces recursive name repetition.
        CallTree tree = tree_from_chains(random_chains(rng, 100, 3, 10));
        std::string pattern = round % 2 ? "f1" : "f*";
        auto roots = find_roots(tree, pattern);

        std::set<const CallNode*> returned{roots.begin(), roots.end()};
        require(returned.size() == roots.size(), "duplicate nodes returned");

        // No returned root may live inside another's subtree.
        for (const CallNode* root : roots) {
            std::vector<std::string> path;
            std::size_t hits = 0;
            for_each_node(*root, path, [&](const CallNode& node, const auto&) {
                if (returned.count(&node)) {
                    ++hits;
                }
            });
            require(hits == 1, "a returned root is a descendant of another");
        }

        // Brute force: every matching node minus dominated ones.
        std::function<void(const CallNode&, bool, std::set<const CallNode*>&)> walk =
            [&](const CallNode& node, bool dominated, std::set<const CallNode*>& expected) {
                bool matched = glob_match(pattern, node.name);
                if (matched && !dominated) {
                    expected.insert(&node);
                }
                for (const auto& [name, child] : node.children) {
                    walk(child, dominated || matched, expected);
                }
            };
        std::set<const CallNode*> expected;
        for (const auto& [name, root] : tree.roots) {
            walk(root, false, expected);
        }
        require(expected == returned, "find_roots disagrees with brute-force enumeration");
    }
}

// 7. Layout round-trip over the full configuration grid plus the literal
//    reference path and label.
void criterion_7() {
    RunMeta paper_example{"parsec-3.0", "blackscholes", 1, CpuType::AS, 3, true};
    require(layout_path(paper_example).generic_string() ==
                "parsec-3.0/blackscholes/1/AtomicSimpleCPU/3GB/ruby/callstack.json",
            "literal example path is not byte-exact");
    require(run_label(paper_example) == "1AS3r", "label(1,AS,3GB,ruby) != 1AS3r");

    fs::path dir = scratch_dir("layout");
    std::vector<RunMeta> metas;
    for (int cores : {1, 4, 16}) {
        for (int mem : {3, 8, 16}) {
            for (CpuType cpu : {CpuType::AS, CpuType::TS, CpuType::O3}) {
                for (bool ruby : {false, true}) {
                    metas.push_back({"bench", "app", cores, cpu, mem, ruby});
                }
            }
        }
    }
    for (const RunMeta& meta : metas) {
        fs::path path = dir / layout_path(meta);
        fs::create_directories(path.parent_path());
        std::ofstream{path} << "{}";
    }
    DiscoveryResult result = discover_runs(dir);
    require(result.runs.size() == metas.size(), "discover_runs count mismatch");
    for (const RunMeta& meta : metas) {
        bool found = false;
        for (const DiscoveredRun& run : result.runs) {
            if (run.meta == meta) {
                found = true;
            }
        }
        require(found, "a meta failed the layout round-trip");
    }
    fs::remove_all(dir);
}

// 8. End-to-end replay of the committed 10,000-chain fixture through the
//    CLI: record -> analyze -> csv, exact constructed percentages.
void criterion_8() {
    auto started = std::chrono::steady_clock::now();
    fs::path dir = scratch_dir("e2e");
    fs::path tree =
        dir / "parsec-3.0/blackscholes/1/AtomicSimpleCPU/3GB/ruby/callstack.json";
    fs::path csv = dir / "out.csv";

    std::string record_cmd = kCli + " record --replay " + (kFixtures / "e2e_10k.stacks").string() +
                             " -o " + tree.string() + " >" + (dir / "rec.log").string() + " 2>&1";
    require(std::system(record_cmd.c_str()) == 0, "record exited nonzero");

    std::string analyze_cmd = kCli + " analyze " + tree.string() + " -c " +
                              (kFixtures / "e2e.cfg").string() + " --format csv -o " +
                              csv.string() + " >" + (dir / "an.log").string() + " 2>&1";
    require(std::system(analyze_cmd.c_str()) == 0, "analyze exited nonzero");

    std::string expected =
        "label,category,count,percent\n"
        "1AS3r,A,6250,62.50\n"
        "1AS3r,B,2500,25.00\n"
        "1AS3r,C,750,7.50\n"
        "1AS3r,self,250,2.50\n";
    std::string actual = slurp(csv);
    require(actual == expected, "constructed percentages not reproduced; got:\n" + actual);
    fs::remove_all(dir);
    require_runtime(started, 5.0);
}

// 9. Live fidelity: profile the bundled 70/30 workload for 60 s at 10 ms and
//    expect children-mode shares of 70 +/- 8 and 30 +/- 8. Skipped where the
//    perf interface is unavailable.
void criterion_9() {
#ifndef __linux__
    throw SkipCriterion{"live sampling requires Linux"};
#else
    if (!live_sampling_supported()) {
        throw SkipCriterion{"perf_event_open unavailable on this host"};
    }
    pid_t child = fork();
    require(child >= 0, "fork failed");
    if (child == 0) {
        execl(kBusyloop.c_str(), "busyloop", "120", static_cast<char*>(nullptr));
        _exit(127);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds{300});

    SessionSpec spec;
    spec.pid = static_cast<int>(child);
    spec.interval = std::chrono::milliseconds{10};
    spec.max_stack_depth = 64;

    CallTree tree;
    std::uint64_t dropped = 0;
    try {
        auto session = open_session(spec);
        SymbolIndex index = build_symbol_index(static_cast<int>(child));
        auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds{60};
        while (std::chrono::steady_clock::now() < deadline) {
            std::this_thread::sleep_for(std::chrono::milliseconds{250});
            PollResult batch = session->poll();
            dropped += batch.dropped;
            for (const RawSample& sample : batch.samples) {
                ingest(tree, reverse_chain(resolve(index, sample)));
            }
        }
        PollResult tail = session->poll();
        for (const RawSample& sample : tail.samples) {
            ingest(tree, reverse_chain(resolve(index, sample)));
        }
        session->close();
    } catch (...) {
        kill(child, SIGKILL);
        waitpid(child, nullptr, 0);
        throw;
    }
    kill(child, SIGKILL);
    waitpid(child, nullptr, 0);

    AnalysisConfig config;
    config.root_pattern = "run_workload";
    config.whitelist = {{"hot_primary", "primary"}, {"hot_secondary", "secondary"}};
    CategoryBreakdown breakdown = aggregate_children(tree, config);
    require(breakdown.matched_roots >= 1, "run_workload never appeared in the profile");
    require(breakdown.denominator > 1000,
            "too few samples: " + std::to_string(breakdown.denominator));

    double primary = 0.0;
    double secondary = 0.0;
    for (const CategoryEntry& entry : breakdown.entries) {
        if (entry.category == "primary") {
            primary = entry.percent;
        }
        if (entry.category == "secondary") {
            secondary = entry.percent;
        }
    }
    std::ostringstream detail;
    detail << "primary=" << primary << "% secondary=" << secondary << "% dropped=" << dropped;
    require(primary > 70.0 - 8.0 && primary < 70.0 + 8.0, "primary out of band: " + detail.str());
    require(secondary > 30.0 - 8.0 && secondary < 30.0 + 8.0,
            "secondary out of band: " + detail.str());
#endif
}

// 10. Reporter determinism: byte-identical emissions and the golden SVG.
void criterion_10() {
    BreakdownTable table;
    table.categories = {"A", "B", "self"};
    CategoryBreakdown breakdown;
    breakdown.denominator = 100;
    breakdown.matched_roots = 1;
    breakdown.entries = {{"A", 60, 60.0}, {"B", 30, 30.0}, {"self", 10, 10.0}};
    table.rows.push_back({"1AS3r", breakdown});

    ChartSpec spec;
    spec.title = "fixture";

    std::string svg = emit_stacked_bars(table, spec);
    require(svg == emit_stacked_bars(table, spec), "emit_stacked_bars varied between calls");
    require(svg == emit_stacked_bars(table, spec), "emit_stacked_bars varied on third call");

    std::string csv = emit_csv(table);
    require(csv == emit_csv(table), "emit_csv varied between calls");
    require(csv == emit_csv(table), "emit_csv varied on third call");

    std::string golden = slurp(kFixtures / "golden_chart.svg");
    require(!golden.empty(), "golden_chart.svg fixture missing");
    require(svg == golden, "SVG does not match the committed golden file");
}

struct Criterion {
    int id;
    std::string description;
    std::function<void()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "ingest oracle equivalence (1,000 random chains, exact)", criterion_1},
        {2, "parent dominance and conservation on 200 random trees", criterion_2},
        {3, "share formula exactness", criterion_3},
        {4, "callstack.json round-trip and byte-exact schema form", criterion_4},
        {5, "analyzer conservation in children and flatten modes", criterion_5},
        {6, "outermost-match rule vs brute-force enumeration", criterion_6},
        {7, "run layout round-trip, literal path and label", criterion_7},
        {8, "end-to-end replay of the committed 10k fixture", criterion_8},
        {9, "live fidelity on the bundled 70/30 workload", criterion_9},
        {10, "reporter determinism and golden SVG", criterion_10},
    };

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        std::string status;
        std::string detail;
        try {
            criterion.run();
            status = "PASS";
        } catch (const SkipCriterion& skip) {
            status = "SKIP";
            detail = skip.reason;
        } catch (const std::exception& e) {
            status = "FAIL";
            detail = e.what();
            ++failures;
        }
        std::cout << "CRITERION " << criterion.id << ": " << status << " - "
                  << criterion.description;
        if (!detail.empty()) {
            std::cout << " [" << detail << "]";
        }
        std::cout << "\n";
    }
    return failures == 0 ? 0 : 1;
}
