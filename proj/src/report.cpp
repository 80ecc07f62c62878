/*
 * Copyright The stacksurgeon authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "stacksurgeon/report.hpp"

#include "stacksurgeon/errors.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <numeric>
#include <set>

namespace stacksurgeon {

namespace {

constexpr std::array<std::string_view, 12> kPalette = {
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
    "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#86bcb6", "#d37295",
};

std::string xml_escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
        return std::string{field};
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

std::string fixed2(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

// Row indices ordered by label; ties keep table order.
std::vector<std::size_t> rows_by_label(const BreakdownTable& table) {
    std::vector<std::size_t> order(table.rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return table.rows[a].label < table.rows[b].label;
    });
    return order;
}

std::uint64_t remainder_count(const CategoryBreakdown& breakdown) {
    std::uint64_t covered = 0;
    for (const CategoryEntry& entry : breakdown.entries) {
        covered += entry.count;
    }
    return breakdown.denominator - covered;
}

}  // namespace

std::string_view palette_color(std::size_t category_index) {
    return kPalette[category_index % kPalette.size()];
}

std::string format_percent(std::uint64_t count, std::uint64_t denominator) {
    if (denominator == 0) {
        return "0.00";
    }
    unsigned __int128 scaled = static_cast<unsigned __int128>(count) * 10000;
    std::uint64_t q = static_cast<std::uint64_t>(scaled / denominator);
    unsigned __int128 twice_rest = (scaled % denominator) * 2;
    if (twice_rest > denominator || (twice_rest == denominator && (q & 1))) {
        ++q;
    }
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%llu.%02llu", static_cast<unsigned long long>(q / 100),
                  static_cast<unsigned long long>(q % 100));
    return buf;
}

std::string emit_csv(const BreakdownTable& table) {
    std::string out = "label,category,count,percent\n";
    for (std::size_t row_index : rows_by_label(table)) {
        const auto& row = table.rows[row_index];
        for (const CategoryEntry& entry : row.breakdown.entries) {
            out += csv_escape(row.label);
            out += ',';
            out += csv_escape(entry.category);
            out += ',';
            out += std::to_string(entry.count);
            out += ',';
            out += format_percent(entry.count, row.breakdown.denominator);
            out += '\n';
        }
    }
    return out;
}

std::string emit_text_table(const BreakdownTable& table, bool color) {
    constexpr std::array<std::string_view, 4> kHeader = {"label", "category", "count", "percent"};
    std::vector<std::array<std::string, 4>> cells;
    for (std::size_t row_index : rows_by_label(table)) {
        const auto& row = table.rows[row_index];
        for (const CategoryEntry& entry : row.breakdown.entries) {
            cells.push_back({row.label, entry.category, std::to_string(entry.count),
                             format_percent(entry.count, row.breakdown.denominator)});
        }
    }

    std::array<std::size_t, 4> widths{};
    for (std::size_t i = 0; i < 4; ++i) {
        widths[i] = kHeader[i].size();
    }
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < 4; ++i) {
            widths[i] = std::max(widths[i], row[i].size());
        }
    }

    auto pad = [&](std::string_view text, std::size_t width) {
        std::string out{text};
        out.append(width - text.size(), ' ');
        return out;
    };

    std::string out;
    if (color) {
        out += "\x1b[1m";
    }
    for (std::size_t i = 0; i < 4; ++i) {
        if (i) {
            out += "  ";
        }
        out += pad(kHeader[i], widths[i]);
    }
    if (color) {
        out += "\x1b[0m";
    }
    out += '\n';
    out.append(widths[0] + widths[1] + widths[2] + widths[3] + 6, '-');
    out += '\n';
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < 4; ++i) {
            if (i) {
                out += "  ";
            }
            out += pad(row[i], widths[i]);
        }
        out += '\n';
    }
    return out;
}

std::string emit_stacked_bars(const BreakdownTable& table, const ChartSpec& spec) {
    if (table.rows.empty()) {
        throw Error(ErrorCode::EmptyInput, "no runs to chart");
    }
    {
        std::set<std::string_view> seen;
        for (const auto& row : table.rows) {
            if (!seen.insert(row.label).second) {
                throw Error(ErrorCode::DuplicateLabel, "duplicate bar label \"" + row.label + "\"");
            }
        }
    }

    std::vector<std::string> categories = spec.category_order;
    if (categories.empty()) {
        categories = table.categories;
    } else {
        for (const std::string& category : table.categories) {
            if (std::find(categories.begin(), categories.end(), category) == categories.end()) {
                throw Error(ErrorCode::InvalidSpec,
                            "chart category order misses \"" + category + "\"");
            }
        }
    }

    bool any_remainder = false;
    for (const auto& row : table.rows) {
        if (remainder_count(row.breakdown) > 0) {
            any_remainder = true;
        }
    }

    const std::vector<std::size_t> order = rows_by_label(table);
    const int margin_left = 56;
    const int margin_top = spec.title.empty() ? 24 : 46;
    const int margin_bottom = 34;
    const int plot_h = spec.plot_height;
    const int bars_w =
        static_cast<int>(order.size()) * (spec.bar_width + spec.bar_gap) + spec.bar_gap;

    std::size_t legend_chars = 5;  // "other"
    for (const std::string& category : categories) {
        legend_chars = std::max(legend_chars, category.size());
    }
    const int legend_w = 34 + 8 * static_cast<int>(legend_chars);
    const int width = margin_left + bars_w + 16 + legend_w;
    const int height = margin_top + plot_h + margin_bottom;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" font-family=\"monospace\">\n";
    svg += "<defs><pattern id=\"hatch\" width=\"6\" height=\"6\" "
           "patternTransform=\"rotate(45)\" patternUnits=\"userSpaceOnUse\">"
           "<rect width=\"6\" height=\"6\" fill=\"#e8e8e8\"/>"
           "<line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#7a7a7a\" stroke-width=\"2\"/>"
           "</pattern></defs>\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!spec.title.empty()) {
        svg += "<text x=\"" + std::to_string(margin_left) +
               "\" y=\"24\" font-size=\"15\" font-weight=\"bold\">" + xml_escape(spec.title) +
               "</text>\n";
    }

    // Percentage axis with gridlines every 25 points.
    for (int tick = 0; tick <= 100; tick += 25) {
        double y = margin_top + plot_h - (plot_h * tick) / 100.0;
        svg += "<line x1=\"" + std::to_string(margin_left) + "\" y1=\"" + fixed2(y) + "\" x2=\"" +
               std::to_string(margin_left + bars_w) + "\" y2=\"" + fixed2(y) +
               "\" stroke=\"#dddddd\"/>\n";
        svg += "<text x=\"" + std::to_string(margin_left - 8) + "\" y=\"" + fixed2(y + 4) +
               "\" font-size=\"11\" text-anchor=\"end\">" + std::to_string(tick) + "%</text>\n";
    }

    double scale = plot_h / 100.0;
    for (std::size_t slot = 0; slot < order.size(); ++slot) {
        const auto& row = table.rows[order[slot]];
        int x = margin_left + spec.bar_gap + static_cast<int>(slot) * (spec.bar_width + spec.bar_gap);
        double y = margin_top + plot_h;
        // Segments stack bottom-up in the effective category order.
        // Zero-count pairs still emit a rect (zero height) so every
        // (label, category) pair appears exactly once per format.
        for (std::size_t ci = 0; ci < categories.size() && row.breakdown.denominator > 0; ++ci) {
            auto it = std::find_if(
                row.breakdown.entries.begin(), row.breakdown.entries.end(),
                [&](const CategoryEntry& e) { return e.category == categories[ci]; });
            if (it == row.breakdown.entries.end()) {
                continue;
            }
            double h = share(it->count, row.breakdown.denominator) * scale;
            y -= h;
            svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" + fixed2(y) + "\" width=\"" +
                   std::to_string(spec.bar_width) + "\" height=\"" + fixed2(h) + "\" fill=\"" +
                   std::string{palette_color(ci)} + "\"><title>" +
                   xml_escape(row.label + " " + it->category) + " " +
                   format_percent(it->count, row.breakdown.denominator) +
                   "%</title></rect>\n";
        }
        std::uint64_t rest = remainder_count(row.breakdown);
        if (rest > 0) {
            double h = share(rest, row.breakdown.denominator) * scale;
            y -= h;
            svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" + fixed2(y) + "\" width=\"" +
                   std::to_string(spec.bar_width) + "\" height=\"" + fixed2(h) +
                   "\" fill=\"url(#hatch)\"><title>" + xml_escape(row.label) + " other " +
                   format_percent(rest, row.breakdown.denominator) + "%</title></rect>\n";
        }
        svg += "<text x=\"" + fixed2(x + spec.bar_width / 2.0) + "\" y=\"" +
               std::to_string(margin_top + plot_h + 18) +
               "\" font-size=\"12\" text-anchor=\"middle\">" + xml_escape(row.label) +
               "</text>\n";
    }

    // Legend, one swatch per category in stacking order.
    int legend_x = margin_left + bars_w + 16;
    int legend_y = margin_top;
    std::size_t legend_rows = categories.size() + (any_remainder ? 1 : 0);
    for (std::size_t i = 0; i < legend_rows; ++i) {
        int y = legend_y + static_cast<int>(i) * 20;
        std::string fill = i < categories.size() ? std::string{palette_color(i)} : "url(#hatch)";
        std::string name = i < categories.size() ? categories[i] : "other";
        svg += "<rect x=\"" + std::to_string(legend_x) + "\" y=\"" + std::to_string(y) +
               "\" width=\"14\" height=\"14\" fill=\"" + fill + "\"/>\n";
        svg += "<text x=\"" + std::to_string(legend_x + 20) + "\" y=\"" + std::to_string(y + 12) +
               "\" font-size=\"12\">" + xml_escape(name) + "</text>\n";
    }

    svg += "</svg>\n";
    return svg;
}

}  // namespace stacksurgeon
