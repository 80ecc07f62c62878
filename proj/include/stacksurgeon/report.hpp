/*
 * Copyright The stacksurgeon authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "stacksurgeon/analyzer.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace stacksurgeon {

/// All emitters are pure functions of (table, spec): identical inputs give
/// byte-identical output.
struct ChartSpec {
    std::string title;
    /// Overrides the table's category order when non-empty; must then cover
    /// every category present in the input.
    std::vector<std::string> category_order;
    int bar_width = 48;
    int bar_gap = 28;
    int plot_height = 300;
};

/// Deterministic color for a category index; fixed 12-color palette, cycled.
std::string_view palette_color(std::size_t category_index);

/// SVG 1.1 stacked bars: one bar per run label, one segment per category,
/// heights proportional to percentage. Whatever a bar's categories leave
/// short of 100% (blacklisted counts) is drawn as a hatched "other" segment
/// so every bar reaches full height. Throws EmptyInput, DuplicateLabel.
std::string emit_stacked_bars(const BreakdownTable& table, const ChartSpec& spec);

/// RFC 4180, '\n' endings, header `label,category,count,percent`; rows
/// sorted by label then category order; percentages with two decimals,
/// round-half-even.
std::string emit_csv(const BreakdownTable& table);

/// Same rows as the CSV, aligned for humans. ANSI highlighting only when
/// `color` is set.
std::string emit_text_table(const BreakdownTable& table, bool color = false);

/// Exact decimal formatting of 100*count/denominator with two digits,
/// round-half-even, computed in integer arithmetic. denominator == 0 gives
/// "0.00".
std::string format_percent(std::uint64_t count, std::uint64_t denominator);

}  // namespace stacksurgeon
