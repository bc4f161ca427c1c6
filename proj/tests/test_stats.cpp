#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mtr/error.hpp"
#include "mtr/stats.hpp"
#include "support/fixtures.hpp"

using namespace mtr;
using namespace mtr::stats;

namespace {

const std::filesystem::path kFixtures = MTR_FIXTURE_DIR;

ScoreMatrix make(std::vector<std::vector<double>> rows, std::vector<std::string> methods) {
    ScoreMatrix s;
    s.col_labels = std::move(methods);
    s.values = Matrix(0, s.col_labels.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        s.row_labels.push_back("case" + std::to_string(i));
        s.values.append_row(rows[i]);
    }
    return s;
}

std::size_t index_of(const std::vector<std::string>& labels, const std::string& name) {
    return static_cast<std::size_t>(std::find(labels.begin(), labels.end(), name) - labels.begin());
}

std::set<std::pair<std::string, std::string>> named_pairs(const StatsResult& r) {
    std::set<std::pair<std::string, std::string>> out;
    for (auto [i, j] : r.pairs.significant_pairs) {
        auto a = r.labels[i], b = r.labels[j];
        if (b < a) std::swap(a, b);
        out.emplace(a, b);
    }
    return out;
}

}  // namespace

TEST_CASE("tie-averaged row ranks") {
    const double row[] = {0.5, 0.5, 0.7};
    CHECK(rank_row(row) == std::vector<double>{1.5, 1.5, 3.0});
    const double all_same[] = {2.0, 2.0, 2.0, 2.0};
    CHECK(rank_row(all_same) == std::vector<double>{2.5, 2.5, 2.5, 2.5});
}

TEST_CASE("per-dataset table replay") {
    const auto scores = ScoreMatrix::read_csv(kFixtures / "arrmse_by_dataset.csv");
    REQUIRE(scores.cases() == 12);
    REQUIRE(scores.methods() == 6);
    const auto ranks = average_ranks(scores);
    const std::vector<double> expected{5.00, 3.42, 4.08, 2.83, 3.42, 2.25};
    for (std::size_t k = 0; k < 6; ++k) CHECK(std::abs(ranks[k] - expected[k]) < 0.005);

    const auto fr = friedman_test(scores);
    CHECK(fr.chi2 == doctest::Approx(15.8095).epsilon(1e-4));
    CHECK(fr.p < 0.01);
    CHECK(fr.p == doctest::Approx(0.00741).epsilon(1e-2));
    CHECK(fr.f > 0.0);
    CHECK(fr.f_p < 0.01);

    const auto result = analyze(scores, 0.05);
    CHECK(result.cd == doctest::Approx(2.1767).epsilon(1e-4));
    CHECK(named_pairs(result) == std::set<std::pair<std::string, std::string>>{{"ERCC", "MORF"}});
}

TEST_CASE("per-target table replay") {
    const auto scores = ScoreMatrix::read_csv(kFixtures / "rrmse_by_target.csv");
    REQUIRE(scores.cases() == 114);
    const auto ranks = average_ranks(scores);
    const std::vector<double> expected{4.37, 3.55, 3.75, 3.28, 3.35, 2.70};
    for (std::size_t k = 0; k < 6; ++k) CHECK(std::abs(ranks[k] - expected[k]) < 0.005);

    const auto result = analyze(scores, 0.05);
    CHECK(result.cd == doctest::Approx(0.70622).epsilon(1e-4));
    const std::set<std::pair<std::string, std::string>> expected_pairs{
        {"ERCC", "MORF"}, {"ERCC", "MTS"}, {"ERCC", "ST"},
        {"MORF", "ST"},   {"ERC", "MORF"}, {"MORF", "MTSC"}};
    CHECK(named_pairs(result) == expected_pairs);
}

TEST_CASE("Wilcoxon on the per-dataset columns") {
    const auto s = ScoreMatrix::read_csv(kFixtures / "arrmse_by_dataset.csv");
    const auto col = [&](const char* name) { return s.values.column(index_of(s.col_labels, name)); };
    const auto mts = wilcoxon_signed_ranks(col("MTS"), col("MTSC"));
    CHECK(mts.w_plus == 65.0);
    CHECK(mts.w_minus == 13.0);
    CHECK(mts.exact);
    CHECK(mts.p_two_sided == doctest::Approx(0.04248).epsilon(1e-3));
    const auto mts_normal = wilcoxon_signed_ranks(col("MTS"), col("MTSC"), WilcoxonMethod::Normal);
    CHECK(mts_normal.p_two_sided == doctest::Approx(0.0414).epsilon(1e-2));

    const auto erc = wilcoxon_signed_ranks(col("ERC"), col("ERCC"));
    CHECK(erc.w_plus == 57.0);
    CHECK(erc.w_minus == 21.0);
    CHECK(erc.p_two_sided == doctest::Approx(0.17627).epsilon(1e-3));
}

TEST_CASE("Wilcoxon on the per-target columns") {
    const auto s = ScoreMatrix::read_csv(kFixtures / "rrmse_by_target.csv");
    const auto col = [&](const char* name) { return s.values.column(index_of(s.col_labels, name)); };
    const auto erc = wilcoxon_signed_ranks(col("ERC"), col("ERCC"));
    CHECK_FALSE(erc.exact);
    CHECK(erc.w_plus > erc.w_minus);
    CHECK(erc.p_two_sided < 0.02);
}

TEST_CASE("Wilcoxon basics") {
    const std::vector<double> b{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<double> a = b;
    for (auto& v : a) v += 0.5;
    const auto r = wilcoxon_signed_ranks(a, b);
    CHECK(r.w_minus == 0.0);
    CHECK(r.w_plus == 36.0);
    CHECK(r.p_two_sided == doctest::Approx(2.0 / 256.0));

    const std::vector<double> x{1.0, 2.5, 0.3, 4.0, 5.5, 0.1, 7.0};
    const std::vector<double> y{1.2, 2.0, 0.9, 4.0, 5.0, 0.4, 6.1};
    const auto xy = wilcoxon_signed_ranks(x, y);
    const auto yx = wilcoxon_signed_ranks(y, x);
    CHECK(xy.w_plus == yx.w_minus);
    CHECK(xy.w_minus == yx.w_plus);
    CHECK(xy.p_two_sided == yx.p_two_sided);
    CHECK(xy.zeros_dropped == 1);
    CHECK(xy.n == 6);

    std::vector<double> xs = x, ys = y;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] = 3.0 * x[i] + 100.0;
        ys[i] = 3.0 * y[i] + 100.0;
    }
    CHECK(wilcoxon_signed_ranks(xs, ys).p_two_sided == doctest::Approx(xy.p_two_sided));

    CHECK_THROWS_AS(wilcoxon_signed_ranks(b, b), DimensionError);
    CHECK_THROWS_AS(wilcoxon_signed_ranks(a, std::vector<double>{1.0}), DimensionError);
}

TEST_CASE("exact and normal Wilcoxon agree for larger N") {
    mtr::Rng rng(5);
    std::vector<double> a(40), b(40);
    for (std::size_t i = 0; i < 40; ++i) {
        a[i] = fixtures::unit(rng);
        b[i] = fixtures::unit(rng) + 0.1;
    }
    const auto exact = wilcoxon_signed_ranks(a, b, WilcoxonMethod::Exact);
    const auto normal = wilcoxon_signed_ranks(a, b, WilcoxonMethod::Normal);
    CHECK(exact.exact);
    CHECK_FALSE(normal.exact);
    CHECK(std::abs(exact.p_two_sided - normal.p_two_sided) < 0.01);
}

TEST_CASE("Friedman small cases") {
    // K = 2, method A always better on 2 cases: ranks (1, 2).
    const auto two = make({{0.1, 0.2}, {0.3, 0.9}}, {"A", "B"});
    const auto fr = friedman_test(two);
    CHECK(fr.chi2 == doctest::Approx(12.0 * 2 / 6.0 * (1.0 + 4.0 - 2.0 * 9.0 / 4.0)));
    CHECK(fr.chi2 == doctest::Approx(2.0));
    CHECK(fr.p == doctest::Approx(0.157299).epsilon(1e-5));

    const auto same = make({{1, 1, 1}, {2, 2, 2}, {3, 3, 3}}, {"A", "B", "C"});
    const auto flat = friedman_test(same);
    CHECK(flat.chi2 == 0.0);
    CHECK(flat.p == 1.0);
    CHECK_THROWS_AS(friedman_test(make({{1, 2}}, {"A", "B"})), DimensionError);
}

TEST_CASE("Friedman is invariant under monotone row transforms") {
    const auto s = ScoreMatrix::read_csv(kFixtures / "arrmse_by_dataset.csv");
    ScoreMatrix t = s;
    for (std::size_t r = 0; r < t.cases(); ++r)
        for (std::size_t c = 0; c < t.methods(); ++c)
            t.values(r, c) = std::exp(0.01 * s.values(r, c)) * static_cast<double>(r + 1);
    CHECK(friedman_test(t).chi2 == friedman_test(s).chi2);
}

TEST_CASE("rank sums") {
    const auto s = ScoreMatrix::read_csv(kFixtures / "rrmse_by_target.csv");
    const auto ranks = average_ranks(s);
    double sum = 0.0;
    for (double r : ranks) sum += r;
    CHECK(sum == doctest::Approx(21.0).epsilon(1e-12));
}

TEST_CASE("Nemenyi critical difference") {
    CHECK(nemenyi_q(6, 0.05) == 2.850);
    CHECK(nemenyi_q(2, 0.10) == 1.645);
    CHECK(nemenyi_cd(6, 12, 0.05) == doctest::Approx(2.850 * std::sqrt(42.0 / 72.0)));
    CHECK_THROWS_AS(nemenyi_q(6, 0.01), ConfigError);
    CHECK_THROWS_AS(nemenyi_q(1, 0.05), ConfigError);
    CHECK_THROWS_AS(nemenyi_q(21, 0.05), ConfigError);
    CHECK(nemenyi_cd(6, 1000000, 0.05) < 0.01);
    for (std::size_t k = 3; k <= 20; ++k) CHECK(nemenyi_q(k, 0.05) > nemenyi_q(k - 1, 0.05));
}

TEST_CASE("pair classification") {
    const std::vector<double> ranks{1.0, 1.5, 3.0, 3.2};
    const auto c = classify_pairs(ranks, 1.0);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) {
            const bool sig = std::find(c.significant_pairs.begin(), c.significant_pairs.end(),
                                       std::make_pair(i, j)) != c.significant_pairs.end();
            CHECK(sig == (std::abs(ranks[i] - ranks[j]) > 1.0));
        }
    REQUIRE(c.groups.size() == 2);
    CHECK(c.groups[0] == std::vector<std::size_t>{0, 1});
    CHECK(c.groups[1] == std::vector<std::size_t>{2, 3});

    const std::vector<double> tied{1.5, 1.5};
    const auto t = classify_pairs(tied, 0.5);
    REQUIRE(t.groups.size() == 1);
    CHECK(t.groups[0].size() == 2);
}

TEST_CASE("score matrix CSV") {
    const auto s = ScoreMatrix::parse_csv("case,A,B,C\nd1,1.5,NA,2\nd2,0.1,0.2,0.3\n\"d,3\",?,1,2\n");
    CHECK(s.cases() == 3);
    CHECK(s.row_labels[2] == "d,3");
    CHECK(std::isnan(s.values(0, 1)));
    std::vector<std::string> dropped;
    const auto complete = s.complete_rows(&dropped);
    CHECK(complete.cases() == 1);
    CHECK(dropped == std::vector<std::string>{"d1", "d,3"});

    const auto back = ScoreMatrix::parse_csv(s.to_csv());
    CHECK(back.row_labels == s.row_labels);
    CHECK(back.values(1, 2) == s.values(1, 2));

    CHECK_THROWS_AS(ScoreMatrix::parse_csv("case,A\nx,1\n"), DataError);
    CHECK_THROWS_AS(ScoreMatrix::parse_csv("case,A,B\nx,1\n"), DataError);
    CHECK_THROWS_AS(ScoreMatrix::parse_csv("case,A,B\nx,1,abc\n"), DataError);

    const auto result = analyze(s.complete_rows().cases() ? make({{1, 2, 3}, {1, 3, 2}, {2, 1, 3}}, {"A", "B", "C"})
                                                          : s,
                                0.05);
    CHECK(result.warnings.empty());
    const auto with_missing = analyze(make({{1, 2, 3}, {1, NAN, 2}, {2, 1, 3}}, {"A", "B", "C"}), 0.05);
    CHECK(with_missing.cases == 2);
    CHECK(with_missing.warnings.size() == 1);
}

TEST_CASE("critical-difference diagrams") {
    const auto s = ScoreMatrix::read_csv(kFixtures / "arrmse_by_dataset.csv");
    const auto r = analyze(s, 0.05);
    // ERCC and MORF are never in one group; everything else is connected.
    const auto morf = index_of(r.labels, "MORF");
    const auto ercc = index_of(r.labels, "ERCC");
    for (const auto& g : r.pairs.groups) {
        const bool has_morf = std::find(g.begin(), g.end(), morf) != g.end();
        const bool has_ercc = std::find(g.begin(), g.end(), ercc) != g.end();
        CHECK_FALSE((has_morf && has_ercc));
    }
    REQUIRE(r.pairs.groups.size() == 2);
    std::set<std::size_t> covered;
    for (const auto& g : r.pairs.groups) covered.insert(g.begin(), g.end());
    CHECK(covered.size() == 6);

    const auto svg = cd_diagram_svg(r.avg_ranks, r.cd, r.labels);
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("ERCC") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    const auto text = cd_diagram_text(r.avg_ranks, r.cd, r.labels);
    CHECK(text.find("MORF") != std::string::npos);

    const std::vector<double> tied{1.5, 1.5};
    const auto tied_text = cd_diagram_text(tied, 1.0, {"A", "B"});
    CHECK(tied_text.find("A, B") != std::string::npos);

    fixtures::TempDir dir("cd");
    emit_cd_diagram(r.avg_ranks, r.cd, r.labels, dir / "arrmse");
    CHECK(std::filesystem::exists(dir / "arrmse.svg"));
    CHECK(std::filesystem::exists(dir / "arrmse.txt"));
    CHECK_THROWS_AS(emit_cd_diagram(r.avg_ranks, r.cd, r.labels, dir / "missing" / "x"), Error);
}
