/*
 * Copyright The stacksurgeon authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "stacksurgeon/calltree.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stacksurgeon {

enum class AnalysisMode { children, flatten };
enum class UncategorizedPolicy { bucket, error };

/// Reserved category names emitted by the aggregators.
inline constexpr std::string_view kSelfCategory = "self";
inline constexpr std::string_view kUncategorizedCategory = "uncategorized";

struct AnalysisConfig {
    std::string root_pattern;
    std::vector<std::pair<std::string, std::string>> whitelist;  // pattern -> category
    std::vector<std::string> blacklist;
    AnalysisMode mode = AnalysisMode::children;
    UncategorizedPolicy uncategorized = UncategorizedPolicy::bucket;
};

/// Literal match plus '*' wildcard (any position, any number of stars),
/// matched against the full name.
bool glob_match(std::string_view pattern, std::string_view name);

/// Line-oriented config text: `root <pattern>`, `cat <category> <pattern>`,
/// `deny <pattern>`, `mode children|flatten`, `uncategorized bucket|error`,
/// '#' comments. Patterns run to end of line (names may contain spaces).
/// Earlier `cat` lines take precedence. Throws SyntaxError (with line
/// number) and MissingRoot.
AnalysisConfig parse_config(std::string_view text);

/// Every node matching `pattern` that has no matching ancestor. Nested
/// re-entries of a matched function count as ordinary descendants of the
/// outer match, never as roots of their own.
std::vector<const CallNode*> find_roots(const CallTree& tree, std::string_view pattern);

struct Classification {
    enum class Kind { Category, Denied, Uncategorized };
    Kind kind;
    std::string category;  // set when kind == Category
};

/// Blacklist first (deny wins), then the first matching whitelist entry.
Classification classify(std::string_view name, const AnalysisConfig& config);

struct CategoryEntry {
    std::string category;
    std::uint64_t count = 0;
    double percent = 0.0;

    bool operator==(const CategoryEntry&) const = default;
};

/// Breakdown for one tree. `denominator` is the sum of matched-root counts
/// (shares are root-local, not whole-program). `denied` is the total count
/// excluded by the blacklist; it never appears as an entry.
struct CategoryBreakdown {
    std::vector<CategoryEntry> entries;
    std::uint64_t denominator = 0;
    std::uint64_t matched_roots = 0;
    std::uint64_t denied = 0;
};

/// children mode: classifies each direct child of each matched root by the
/// child's inclusive count; matched roots' exclusive time lands in the
/// reserved "self" entry (always emitted while any root matched).
CategoryBreakdown aggregate_children(const CallTree& tree, const AnalysisConfig& config);

/// flatten mode: classifies every node of each matched root's subtree (the
/// root included) by its exclusive (self) count, so totals conserve the
/// root count. Pure leaves carry their whole count as self count.
CategoryBreakdown aggregate_flat(const CallTree& tree, const AnalysisConfig& config);

/// Dispatches on config.mode.
CategoryBreakdown aggregate(const CallTree& tree, const AnalysisConfig& config);

/// Per-run breakdowns padded to one shared category order: whitelist
/// first-appearance order, then "uncategorized", then "self". Rows sorted
/// by label. Every row's entries align index-for-index with `categories`.
struct BreakdownTable {
    std::vector<std::string> categories;
    struct Row {
        std::string label;
        CategoryBreakdown breakdown;
    };
    std::vector<Row> rows;
};

BreakdownTable breakdown_for_runs(const std::vector<std::pair<std::string, const CallTree*>>& runs,
                                  const AnalysisConfig& config);

}  // namespace stacksurgeon
