/*
 * Copyright The stacksurgeon authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "stacksurgeon/report.hpp"

#include "stacksurgeon/errors.hpp"

#include <doctest.h>

using namespace stacksurgeon;

namespace {

// {1AS3r: A=60, B=30, self=10} of denominator 100.
BreakdownTable fixture_table() {
    BreakdownTable table;
    table.categories = {"A", "B", "self"};
    CategoryBreakdown breakdown;
    breakdown.denominator = 100;
    breakdown.matched_roots = 1;
    breakdown.entries = {{"A", 60, 60.0}, {"B", 30, 30.0}, {"self", 10, 10.0}};
    table.rows.push_back({"1AS3r", breakdown});
    return table;
}

}  // namespace

TEST_CASE("format_percent rounds half to even on the exact rational") {
    CHECK(format_percent(60, 100) == "60.00");
    CHECK(format_percent(1, 3) == "33.33");
    CHECK(format_percent(2, 3) == "66.67");
    CHECK(format_percent(1, 8) == "12.50");
    CHECK(format_percent(1, 800) == "0.12");   // 0.125 -> even neighbour 0.12
    CHECK(format_percent(3, 800) == "0.38");   // 0.375 -> even neighbour 0.38
    CHECK(format_percent(100, 100) == "100.00");
    CHECK(format_percent(0, 100) == "0.00");
    CHECK(format_percent(0, 0) == "0.00");
}

TEST_CASE("emit_csv prints sorted rows with exact percentages") {
    CHECK(emit_csv(fixture_table()) ==
          "label,category,count,percent\n"
          "1AS3r,A,60,60.00\n"
          "1AS3r,B,30,30.00\n"
          "1AS3r,self,10,10.00\n");

    BreakdownTable empty;
    CHECK(emit_csv(empty) == "label,category,count,percent\n");
}

TEST_CASE("emit_csv sorts by label and escapes per RFC 4180") {
    BreakdownTable table;
    table.categories = {"std::map<int, int>"};
    CategoryBreakdown b1;
    b1.denominator = 3;
    b1.entries = {{"std::map<int, int>", 1, share(1, 3)}};
    CategoryBreakdown b2;
    b2.denominator = 3;
    b2.entries = {{"std::map<int, int>", 2, share(2, 3)}};
    table.rows.push_back({"zz", b1});
    table.rows.push_back({"aa", b2});

    CHECK(emit_csv(table) ==
          "label,category,count,percent\n"
          "aa,\"std::map<int, int>\",2,66.67\n"
          "zz,\"std::map<int, int>\",1,33.33\n");
}

TEST_CASE("emit_text_table aligns to the widest cell") {
    BreakdownTable table;
    table.categories = {"A"};
    CategoryBreakdown breakdown;
    breakdown.denominator = 1;
    breakdown.entries = {{"A", 1, 100.0}};
    table.rows.push_back({"x", breakdown});

    std::string text = emit_text_table(table);
    CHECK(text ==
          "label  category  count  percent\n"
          "-------------------------------\n"
          "x      A         1      100.00 \n");
    CHECK(emit_text_table(table) == text);

    std::string colored = emit_text_table(table, true);
    CHECK(colored.find("\x1b[1m") != std::string::npos);
    CHECK(colored.find("label") != std::string::npos);
}

TEST_CASE("emit_stacked_bars renders one segment per nonzero category") {
    std::string svg = emit_stacked_bars(fixture_table(), {});
    // 60/30/10 of a 300px plot.
    CHECK(svg.find("height=\"180.00\"") != std::string::npos);
    CHECK(svg.find("height=\"90.00\"") != std::string::npos);
    CHECK(svg.find("height=\"30.00\"") != std::string::npos);
    CHECK(svg.find(">1AS3r</text>") != std::string::npos);
    CHECK(svg.find("url(#hatch)") == std::string::npos);  // bar already sums to 100

    // Single category at 100% fills the whole plot height.
    BreakdownTable full;
    full.categories = {"A"};
    CategoryBreakdown breakdown;
    breakdown.denominator = 10;
    breakdown.entries = {{"A", 10, 100.0}};
    full.rows.push_back({"run", breakdown});
    std::string full_svg = emit_stacked_bars(full, {});
    CHECK(full_svg.find("height=\"300.00\"") != std::string::npos);
}

TEST_CASE("emit_stacked_bars draws the denied remainder hatched") {
    BreakdownTable table;
    table.categories = {"A"};
    CategoryBreakdown breakdown;
    breakdown.denominator = 100;
    breakdown.denied = 25;
    breakdown.entries = {{"A", 75, 75.0}};
    table.rows.push_back({"1AS3r", breakdown});

    std::string svg = emit_stacked_bars(table, {});
    CHECK(svg.find("url(#hatch)") != std::string::npos);
    CHECK(svg.find("height=\"225.00\"") != std::string::npos);  // 75%
    CHECK(svg.find("height=\"75.00\"") != std::string::npos);   // hatched 25%
    CHECK(svg.find(">other</text>") != std::string::npos);
}

TEST_CASE("emit_stacked_bars is deterministic and validates input") {
    BreakdownTable table = fixture_table();
    ChartSpec spec;
    spec.title = "tick breakdown";
    std::string first = emit_stacked_bars(table, spec);
    CHECK(first == emit_stacked_bars(table, spec));
    CHECK(first == emit_stacked_bars(table, spec));
    CHECK(first.find("tick breakdown") != std::string::npos);

    try {
        emit_stacked_bars(BreakdownTable{}, spec);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyInput);
    }

    BreakdownTable dup = fixture_table();
    dup.rows.push_back(dup.rows[0]);
    try {
        emit_stacked_bars(dup, spec);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DuplicateLabel);
    }
}

TEST_CASE("zero-count pairs still appear once per output format") {
    BreakdownTable table;
    table.categories = {"A", "B"};
    CategoryBreakdown with_b;
    with_b.denominator = 4;
    with_b.entries = {{"A", 3, 75.0}, {"B", 1, 25.0}};
    CategoryBreakdown without_b;
    without_b.denominator = 4;
    without_b.entries = {{"A", 4, 100.0}, {"B", 0, 0.0}};
    table.rows.push_back({"run1", with_b});
    table.rows.push_back({"run2", without_b});

    std::string csv = emit_csv(table);
    CHECK(csv.find("run2,B,0,0.00\n") != std::string::npos);

    std::string svg = emit_stacked_bars(table, {});
    CHECK(svg.find("run2 B 0.00%") != std::string::npos);
    CHECK(svg.find("height=\"0.00\"") != std::string::npos);
}

TEST_CASE("a chart spec category order must cover the table") {
    BreakdownTable table = fixture_table();
    ChartSpec reordered;
    reordered.category_order = {"self", "B", "A"};
    std::string svg = emit_stacked_bars(table, reordered);
    CHECK(svg == emit_stacked_bars(table, reordered));
    // Stacking follows the overridden order: self at the bottom, A on top.
    CHECK(svg.find("self 10.00%") < svg.find("B 30.00%"));
    CHECK(svg.find("B 30.00%") < svg.find("A 60.00%"));

    ChartSpec incomplete;
    incomplete.category_order = {"A", "B"};
    CHECK_THROWS_AS(emit_stacked_bars(table, incomplete), Error);
}

TEST_CASE("palette cycles deterministically") {
    CHECK(palette_color(0) == palette_color(12));
    CHECK(palette_color(3) == palette_color(15));
    CHECK(palette_color(0) != palette_color(1));
}
