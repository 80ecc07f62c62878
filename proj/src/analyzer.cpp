/*
 * Copyright The stacksurgeon authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "stacksurgeon/analyzer.hpp"

#include "stacksurgeon/errors.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace stacksurgeon {

bool glob_match(std::string_view pattern, std::string_view name) {
    std::size_t p = 0;
    std::size_t n = 0;
    std::size_t star = std::string_view::npos;
    std::size_t mark = 0;
    while (n < name.size()) {
        if (p < pattern.size() && pattern[p] != '*' && pattern[p] == name[n]) {
            ++p;
            ++n;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = n;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            n = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') {
        ++p;
    }
    return p == pattern.size();
}

namespace {

std::string_view trim(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t' || text.front() == '\r')) {
        text.remove_prefix(1);
    }
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    return text;
}

// First whitespace-delimited word; `rest` gets the trimmed remainder.
std::string_view take_word(std::string_view text, std::string_view& rest) {
    std::size_t end = text.find_first_of(" \t");
    if (end == std::string_view::npos) {
        rest = {};
        return text;
    }
    rest = trim(text.substr(end + 1));
    return text.substr(0, end);
}

[[noreturn]] void syntax_error(int line_no, const std::string& what) {
    throw Error(ErrorCode::SyntaxError, "config line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

AnalysisConfig parse_config(std::string_view text) {
    AnalysisConfig config;
    bool have_root = false;

    std::istringstream stream{std::string{text}};
    std::string raw_line;
    int line_no = 0;
    while (std::getline(stream, raw_line)) {
        ++line_no;
        std::string_view line = trim(raw_line);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::string_view rest;
        std::string_view directive = take_word(line, rest);
        if (directive == "root") {
            if (rest.empty()) {
                syntax_error(line_no, "root needs a pattern");
            }
            config.root_pattern = std::string{rest};
            have_root = true;
        } else if (directive == "cat") {
            std::string_view pattern;
            std::string_view category = take_word(rest, pattern);
            if (category.empty() || pattern.empty()) {
                syntax_error(line_no, "cat needs a category and a pattern");
            }
            config.whitelist.emplace_back(std::string{pattern}, std::string{category});
        } else if (directive == "deny") {
            if (rest.empty()) {
                syntax_error(line_no, "deny needs a pattern");
            }
            config.blacklist.emplace_back(rest);
        } else if (directive == "mode") {
            if (rest == "children") {
                config.mode = AnalysisMode::children;
            } else if (rest == "flatten") {
                config.mode = AnalysisMode::flatten;
            } else {
                syntax_error(line_no, "mode must be children or flatten");
            }
        } else if (directive == "uncategorized") {
            if (rest == "bucket") {
                config.uncategorized = UncategorizedPolicy::bucket;
            } else if (rest == "error") {
                config.uncategorized = UncategorizedPolicy::error;
            } else {
                syntax_error(line_no, "uncategorized must be bucket or error");
            }
        } else {
            syntax_error(line_no, "unknown directive \"" + std::string{directive} + "\"");
        }
    }
    if (!have_root) {
        throw Error(ErrorCode::MissingRoot, "config has no root directive (MissingRoot)");
    }
    return config;
}

namespace {

void find_roots_in(const CallNode& node, std::string_view pattern,
                   std::vector<const CallNode*>& out) {
    if (glob_match(pattern, node.name)) {
        out.push_back(&node);
        return;  // outermost match; nested matches stay ordinary descendants
    }
    for (const auto& [name, child] : node.children) {
        find_roots_in(child, pattern, out);
    }
}

}  // namespace

std::vector<const CallNode*> find_roots(const CallTree& tree, std::string_view pattern) {
    std::vector<const CallNode*> out;
    for (const auto& [name, root] : tree.roots) {
        find_roots_in(root, pattern, out);
    }
    return out;
}

Classification classify(std::string_view name, const AnalysisConfig& config) {
    for (const std::string& pattern : config.blacklist) {
        if (glob_match(pattern, name)) {
            return {Classification::Kind::Denied, {}};
        }
    }
    for (const auto& [pattern, category] : config.whitelist) {
        if (glob_match(pattern, name)) {
            return {Classification::Kind::Category, category};
        }
    }
    return {Classification::Kind::Uncategorized, {}};
}

namespace {

// Accumulator keeping whitelist first-appearance category order.
class CategoryCounts {
  public:
    explicit CategoryCounts(const AnalysisConfig& config) {
        for (const auto& [pattern, category] : config.whitelist) {
            if (index_.emplace(category, order_.size()).second) {
                order_.push_back(category);
            }
        }
        counts_.assign(order_.size(), 0);
    }

    void add(const std::string& category, std::uint64_t count) {
        counts_[index_.at(category)] += count;
    }

    // Entries with a zero count are dropped; percentages fill in later.
    std::vector<CategoryEntry> entries() const {
        std::vector<CategoryEntry> out;
        for (std::size_t i = 0; i < order_.size(); ++i) {
            if (counts_[i] > 0) {
                out.push_back({order_[i], counts_[i], 0.0});
            }
        }
        return out;
    }

  private:
    std::vector<std::string> order_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::vector<std::uint64_t> counts_;
};

void fill_percentages(CategoryBreakdown& breakdown) {
    for (CategoryEntry& entry : breakdown.entries) {
        entry.percent = breakdown.denominator == 0 ? 0.0 : share(entry.count, breakdown.denominator);
    }
}

[[noreturn]] void uncategorized_found(std::vector<std::string> names) {
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    std::string message = "uncategorized functions under error policy:";
    for (const std::string& name : names) {
        message += ' ';
        message += name;
    }
    throw Error(ErrorCode::UncategorizedFound, std::move(message), std::move(names));
}

void flatten_subtree(const CallNode& node, const AnalysisConfig& config, CategoryCounts& counts,
                     std::uint64_t& uncategorized, std::uint64_t& denied,
                     std::vector<std::string>& uncategorized_names) {
    std::uint64_t self = self_count(node);
    if (self > 0) {
        Classification c = classify(node.name, config);
        switch (c.kind) {
            case Classification::Kind::Category:
                counts.add(c.category, self);
                break;
            case Classification::Kind::Denied:
                denied += self;
                break;
            case Classification::Kind::Uncategorized:
                uncategorized += self;
                uncategorized_names.push_back(node.name);
                break;
        }
    }
    for (const auto& [name, child] : node.children) {
        flatten_subtree(child, config, counts, uncategorized, denied, uncategorized_names);
    }
}

}  // namespace

CategoryBreakdown aggregate_children(const CallTree& tree, const AnalysisConfig& config) {
    std::vector<const CallNode*> roots = find_roots(tree, config.root_pattern);
    CategoryBreakdown breakdown;
    breakdown.matched_roots = roots.size();

    CategoryCounts counts{config};
    std::uint64_t uncategorized = 0;
    std::uint64_t self_total = 0;
    std::vector<std::string> uncategorized_names;

    for (const CallNode* root : roots) {
        breakdown.denominator += root->count;
        self_total += self_count(*root);
        for (const auto& [name, child] : root->children) {
            Classification c = classify(name, config);
            switch (c.kind) {
                case Classification::Kind::Category:
                    counts.add(c.category, child.count);
                    break;
                case Classification::Kind::Denied:
                    breakdown.denied += child.count;
                    break;
                case Classification::Kind::Uncategorized:
                    uncategorized += child.count;
                    uncategorized_names.push_back(name);
                    break;
            }
        }
    }
    if (!uncategorized_names.empty() && config.uncategorized == UncategorizedPolicy::error) {
        uncategorized_found(std::move(uncategorized_names));
    }

    breakdown.entries = counts.entries();
    if (uncategorized > 0) {
        breakdown.entries.push_back({std::string{kUncategorizedCategory}, uncategorized, 0.0});
    }
    if (breakdown.matched_roots > 0) {
        breakdown.entries.push_back({std::string{kSelfCategory}, self_total, 0.0});
    }
    fill_percentages(breakdown);
    return breakdown;
}

CategoryBreakdown aggregate_flat(const CallTree& tree, const AnalysisConfig& config) {
    std::vector<const CallNode*> roots = find_roots(tree, config.root_pattern);
    CategoryBreakdown breakdown;
    breakdown.matched_roots = roots.size();

    CategoryCounts counts{config};
    std::uint64_t uncategorized = 0;
    std::vector<std::string> uncategorized_names;

    for (const CallNode* root : roots) {
        breakdown.denominator += root->count;
        flatten_subtree(*root, config, counts, uncategorized, breakdown.denied,
                        uncategorized_names);
    }
    if (!uncategorized_names.empty() && config.uncategorized == UncategorizedPolicy::error) {
        uncategorized_found(std::move(uncategorized_names));
    }

    breakdown.entries = counts.entries();
    if (uncategorized > 0) {
        breakdown.entries.push_back({std::string{kUncategorizedCategory}, uncategorized, 0.0});
    }
    fill_percentages(breakdown);
    return breakdown;
}

CategoryBreakdown aggregate(const CallTree& tree, const AnalysisConfig& config) {
    return config.mode == AnalysisMode::children ? aggregate_children(tree, config)
                                                 : aggregate_flat(tree, config);
}

BreakdownTable breakdown_for_runs(
    const std::vector<std::pair<std::string, const CallTree*>>& runs,
    const AnalysisConfig& config) {
    std::vector<std::pair<std::string, CategoryBreakdown>> raw;
    raw.reserve(runs.size());
    for (const auto& [label, tree] : runs) {
        for (const auto& [seen_label, ignored] : raw) {
            if (seen_label == label) {
                throw Error(ErrorCode::DuplicateLabel, "duplicate run label \"" + label + "\"");
            }
        }
        raw.emplace_back(label, aggregate(*tree, config));
    }
    std::stable_sort(raw.begin(), raw.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    // Shared category order: whitelist first-appearance, then the reserved
    // buckets, restricted to categories that actually appear in some run.
    std::vector<std::string> order;
    std::map<std::string, std::size_t, std::less<>> seen;
    auto note = [&](const std::string& category) {
        if (seen.emplace(category, order.size()).second) {
            order.push_back(category);
        }
    };
    std::vector<std::string> present;
    for (const auto& [label, breakdown] : raw) {
        for (const CategoryEntry& entry : breakdown.entries) {
            present.push_back(entry.category);
        }
    }
    for (const auto& [pattern, category] : config.whitelist) {
        if (std::find(present.begin(), present.end(), category) != present.end()) {
            note(category);
        }
    }
    if (std::find(present.begin(), present.end(), std::string{kUncategorizedCategory}) !=
        present.end()) {
        note(std::string{kUncategorizedCategory});
    }
    if (std::find(present.begin(), present.end(), std::string{kSelfCategory}) != present.end()) {
        note(std::string{kSelfCategory});
    }

    BreakdownTable table;
    table.categories = order;
    for (auto& [label, breakdown] : raw) {
        CategoryBreakdown aligned;
        aligned.denominator = breakdown.denominator;
        aligned.matched_roots = breakdown.matched_roots;
        aligned.denied = breakdown.denied;
        for (const std::string& category : order) {
            auto it = std::find_if(breakdown.entries.begin(), breakdown.entries.end(),
                                   [&](const CategoryEntry& e) { return e.category == category; });
            if (it != breakdown.entries.end()) {
                aligned.entries.push_back(*it);
            } else {
                aligned.entries.push_back({category, 0, 0.0});
            }
        }
        table.rows.push_back({std::move(label), std::move(aligned)});
    }
    return table;
}

}  // namespace stacksurgeon
