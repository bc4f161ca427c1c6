#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "mtr/error.hpp"
#include "mtr/stats.hpp"

namespace mtr::stats {

namespace {

std::vector<std::size_t> rank_order(std::span<const double> ranks) {
    std::vector<std::size_t> order(ranks.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ranks[a] < ranks[b]; });
    return order;
}

std::vector<std::vector<std::size_t>> bars(std::span<const double> ranks, double cd) {
    std::vector<std::vector<std::size_t>> out;
    for (auto& g : classify_pairs(ranks, cd).groups)
        if (g.size() > 1) out.push_back(std::move(g));
    return out;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
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

void check(std::span<const double> ranks, const std::vector<std::string>& labels) {
    if (ranks.size() != labels.size()) throw DimensionError("CD diagram: rank/label count mismatch");
    if (ranks.size() < 2) throw DimensionError("CD diagram needs at least two methods");
}

}  // namespace

std::string cd_diagram_svg(std::span<const double> avg_ranks, double cd,
                           const std::vector<std::string>& labels) {
    check(avg_ranks, labels);
    const std::size_t k = avg_ranks.size();
    const double width = 640.0;
    const double margin = 150.0;
    const double axis_y = 70.0;
    const double scale = (width - 2.0 * margin) / static_cast<double>(k - 1);
    auto x_of = [&](double r) { return margin + (r - 1.0) * scale; };

    const auto order = rank_order(avg_ranks);
    const auto groups = bars(avg_ranks, cd);
    const std::size_t half = (k + 1) / 2;
    const double label_top = axis_y + 30.0 + 12.0 * static_cast<double>(groups.size());
    const double height = label_top + 22.0 * static_cast<double>(half) + 20.0;

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n",
        width, height);
    svg += fmt::format("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    // CD scale bar
    svg += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"20\" x2=\"{:.2f}\" y2=\"20\" stroke=\"black\" stroke-width=\"2\"/>\n",
        x_of(1.0), x_of(1.0 + cd));
    svg += fmt::format("<text x=\"{:.2f}\" y=\"14\" text-anchor=\"middle\">CD = {:.3f}</text>\n",
                       x_of(1.0 + cd / 2.0), cd);
    svg += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.0f}\" x2=\"{:.2f}\" y2=\"{:.0f}\" stroke=\"black\"/>\n",
                       x_of(1.0), axis_y, x_of(static_cast<double>(k)), axis_y);
    for (std::size_t r = 1; r <= k; ++r) {
        const double x = x_of(static_cast<double>(r));
        svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.0f}\" x2=\"{0:.2f}\" y2=\"{2:.0f}\" stroke=\"black\"/>\n",
                           x, axis_y - 6.0, axis_y);
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.0f}\" text-anchor=\"middle\">{}</text>\n", x,
                           axis_y - 10.0, r);
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const double y = axis_y + 14.0 + 12.0 * static_cast<double>(g);
        svg += fmt::format(
            "<line x1=\"{:.2f}\" y1=\"{:.1f}\" x2=\"{:.2f}\" y2=\"{:.1f}\" stroke=\"black\" stroke-width=\"4\"/>\n",
            x_of(avg_ranks[groups[g].front()]) - 3.0, y, x_of(avg_ranks[groups[g].back()]) + 3.0, y);
    }
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t method = order[i];
        const bool left = i < half;
        const std::size_t slot = left ? i : k - 1 - i;
        const double x = x_of(avg_ranks[method]);
        const double y = label_top + 22.0 * static_cast<double>(slot);
        const double end_x = left ? margin - 10.0 : width - margin + 10.0;
        svg += fmt::format(
            "<polyline points=\"{:.2f},{:.0f} {:.2f},{:.1f} {:.2f},{:.1f}\" fill=\"none\" stroke=\"black\"/>\n",
            x, axis_y, x, y, end_x, y);
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.1f}\" text-anchor=\"{}\">{} ({:.2f})</text>\n",
                           left ? end_x - 4.0 : end_x + 4.0, y + 4.0, left ? "end" : "start",
                           xml_escape(labels[method]), avg_ranks[method]);
    }
    svg += "</svg>\n";
    return svg;
}

std::string cd_diagram_text(std::span<const double> avg_ranks, double cd,
                            const std::vector<std::string>& labels) {
    check(avg_ranks, labels);
    const std::size_t k = avg_ranks.size();
    const std::size_t cols = 61;
    auto col_of = [&](double r) {
        return static_cast<std::size_t>(
            std::lround((r - 1.0) / static_cast<double>(k - 1) * static_cast<double>(cols - 1)));
    };
    std::size_t name_width = 0;
    for (const auto& l : labels) name_width = std::max(name_width, l.size());

    std::string out = fmt::format("critical difference {:.4f}\n", cd);
    std::string pad(name_width + 10, ' ');
    std::string axis(cols, '-');
    std::string ticks(cols, ' ');
    for (std::size_t r = 1; r <= k; ++r) {
        const auto c = col_of(static_cast<double>(r));
        axis[c] = '+';
        const auto label = std::to_string(r);
        if (c + label.size() <= cols) ticks.replace(c, label.size(), label);
    }
    out += pad + ticks + "\n" + pad + axis + "\n";
    for (auto method : rank_order(avg_ranks)) {
        std::string line(cols, ' ');
        line[col_of(avg_ranks[method])] = '*';
        out += fmt::format("{:<{}} {:>8.4f} {}\n", labels[method], name_width, avg_ranks[method], line);
    }
    const auto groups = bars(avg_ranks, cd);
    if (groups.empty()) {
        out += "no groups: every pair differs by more than the critical difference\n";
    } else {
        out += "not significantly different:\n";
        for (const auto& g : groups) {
            std::string line(cols, ' ');
            for (auto c = col_of(avg_ranks[g.front()]); c <= col_of(avg_ranks[g.back()]); ++c) line[c] = '=';
            std::string names;
            for (auto m : g) names += (names.empty() ? "" : ", ") + labels[m];
            out += pad + line + "  " + names + "\n";
        }
    }
    return out;
}

void emit_cd_diagram(std::span<const double> avg_ranks, double cd,
                     const std::vector<std::string>& labels, const std::filesystem::path& prefix) {
    auto write = [](const std::filesystem::path& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write " + path.string());
        out << text;
    };
    write(std::filesystem::path(prefix.string() + ".svg"), cd_diagram_svg(avg_ranks, cd, labels));
    write(std::filesystem::path(prefix.string() + ".txt"), cd_diagram_text(avg_ranks, cd, labels));
}

}  // namespace mtr::stats
