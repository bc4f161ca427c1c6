#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>

#include "mtr/error.hpp"
#include "mtr/stats.hpp"

namespace mtr::stats {

std::vector<double> rank_row(std::span<const double> scores) {
    const std::size_t k = scores.size();
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> ranks(k);
    std::size_t i = 0;
    while (i < k) {
        std::size_t j = i;
        while (j + 1 < k && scores[order[j + 1]] == scores[order[i]]) ++j;
        // positions i..j (0-based) share rank mean of (i+1..j+1)
        const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = shared;
        i = j + 1;
    }
    return ranks;
}

std::vector<double> average_ranks(const ScoreMatrix& scores) {
    scores.validate();
    const std::size_t n = scores.cases();
    const std::size_t k = scores.methods();
    if (n == 0) throw DimensionError("average_ranks: no cases");
    std::vector<double> sums(k, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        auto row = scores.values.row(r);
        for (double v : row)
            if (!std::isfinite(v))
                throw DimensionError("average_ranks: non-finite score in row '" +
                                     scores.row_labels[r] + "'");
        auto ranks = rank_row(row);
        for (std::size_t c = 0; c < k; ++c) sums[c] += ranks[c];
    }
    for (auto& s : sums) s /= static_cast<double>(n);
    return sums;
}

FriedmanResult friedman_from_ranks(std::span<const double> avg_ranks, std::size_t cases) {
    const std::size_t k = avg_ranks.size();
    if (k < 2 || cases < 2) throw DimensionError("Friedman test needs N >= 2 and K >= 2");
    const double kk = static_cast<double>(k);
    const double nn = static_cast<double>(cases);
    double sum_sq = 0.0;
    for (double r : avg_ranks) sum_sq += r * r;
    FriedmanResult out;
    out.cases = cases;
    out.methods = k;
    out.chi2 = 12.0 * nn / (kk * (kk + 1.0)) * (sum_sq - kk * (kk + 1.0) * (kk + 1.0) / 4.0);
    // Rounding can leave -1e-15 for identical ranks.
    if (out.chi2 < 1e-12) out.chi2 = 0.0;
    const boost::math::chi_squared_distribution<double> chi(kk - 1.0);
    out.p = out.chi2 == 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(chi, out.chi2));
    const double denom = nn * (kk - 1.0) - out.chi2;
    if (denom <= 0.0) {
        out.f = std::numeric_limits<double>::infinity();
        out.f_p = 0.0;
    } else {
        out.f = (nn - 1.0) * out.chi2 / denom;
        const boost::math::fisher_f_distribution<double> fd(kk - 1.0, (kk - 1.0) * (nn - 1.0));
        out.f_p = out.f == 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(fd, out.f));
    }
    return out;
}

FriedmanResult friedman_test(const ScoreMatrix& scores) {
    return friedman_from_ranks(average_ranks(scores), scores.cases());
}

namespace {
// Studentized range statistic / sqrt(2), infinite degrees of freedom, K = 2..20.
// K <= 10 as commonly tabulated for the Nemenyi test; larger K from the
// studentized range quantile.
constexpr std::array<double, 19> kQ05 = {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031,
                                         3.102, 3.164, 3.219, 3.268, 3.313, 3.354, 3.391,
                                         3.426, 3.458, 3.489, 3.517, 3.544};
constexpr std::array<double, 19> kQ10 = {1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780,
                                         2.855, 2.920, 2.978, 3.030, 3.077, 3.120, 3.159,
                                         3.196, 3.230, 3.261, 3.291, 3.319};
}  // namespace

double nemenyi_q(std::size_t methods, double alpha) {
    if (methods < 2 || methods > 20)
        throw ConfigError("Nemenyi critical values are tabulated for 2..20 methods");
    if (std::abs(alpha - 0.05) < 1e-12) return kQ05[methods - 2];
    if (std::abs(alpha - 0.10) < 1e-12) return kQ10[methods - 2];
    throw ConfigError("unsupported Nemenyi alpha (use 0.05 or 0.10)");
}

double nemenyi_cd(std::size_t methods, std::size_t cases, double alpha) {
    if (cases < 1) throw ConfigError("Nemenyi CD needs at least one case");
    const double k = static_cast<double>(methods);
    return nemenyi_q(methods, alpha) * std::sqrt(k * (k + 1.0) / (6.0 * static_cast<double>(cases)));
}

PairClassification classify_pairs(std::span<const double> avg_ranks, double cd) {
    const std::size_t k = avg_ranks.size();
    PairClassification out;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            if (std::abs(avg_ranks[i] - avg_ranks[j]) > cd) out.significant_pairs.emplace_back(i, j);

    // On a line, "pairwise within CD" sets are windows of the sorted ranks.
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return avg_ranks[a] < avg_ranks[b]; });
    std::size_t last_end = 0;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t end = i + 1;
        while (end < k && avg_ranks[order[end]] - avg_ranks[order[i]] <= cd) ++end;
        if (end > last_end) {
            out.groups.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                                    order.begin() + static_cast<std::ptrdiff_t>(end));
            last_end = end;
        }
    }
    return out;
}

namespace {

// P(T <= t) for the signed-rank statistic with the given (doubled, integer)
// ranks, by subset-sum counting.
double exact_lower_tail(const std::vector<long>& doubled_ranks, long doubled_t) {
    long total = 0;
    for (auto r : doubled_ranks) total += r;
    std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
    ways[0] = 1.0;
    long reach = 0;
    for (auto r : doubled_ranks) {
        for (long s = reach; s >= 0; --s)
            if (ways[static_cast<std::size_t>(s)] != 0.0) ways[static_cast<std::size_t>(s + r)] += ways[static_cast<std::size_t>(s)];
        reach += r;
    }
    double below = 0.0;
    for (long s = 0; s <= std::min(doubled_t, total); ++s) below += ways[static_cast<std::size_t>(s)];
    return below / std::ldexp(1.0, static_cast<int>(doubled_ranks.size()));
}

}  // namespace

WilcoxonResult wilcoxon_signed_ranks(std::span<const double> a, std::span<const double> b,
                                     WilcoxonMethod method) {
    if (a.size() != b.size()) throw DimensionError("wilcoxon: series lengths differ");
    std::vector<double> diffs;
    WilcoxonResult out;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (!std::isfinite(d)) throw DimensionError("wilcoxon: non-finite value");
        if (d == 0.0)
            ++out.zeros_dropped;
        else
            diffs.push_back(d);
    }
    if (diffs.empty()) throw DimensionError("wilcoxon: all differences are zero");
    out.n = diffs.size();
    std::vector<double> magnitudes(diffs.size());
    for (std::size_t i = 0; i < diffs.size(); ++i) magnitudes[i] = std::abs(diffs[i]);
    const auto ranks = rank_row(magnitudes);
    for (std::size_t i = 0; i < diffs.size(); ++i) (diffs[i] > 0 ? out.w_plus : out.w_minus) += ranks[i];

    const double n = static_cast<double>(out.n);
    const double t = std::min(out.w_plus, out.w_minus);
    out.z = (t - n * (n + 1.0) / 4.0) / std::sqrt(n * (n + 1.0) * (2.0 * n + 1.0) / 24.0);
    const bool exact =
        method == WilcoxonMethod::Exact || (method == WilcoxonMethod::Auto && out.n <= 20);
    if (exact) {
        if (out.n > 60) throw ConfigError("exact Wilcoxon distribution limited to N <= 60");
        std::vector<long> doubled(ranks.size());
        for (std::size_t i = 0; i < ranks.size(); ++i) doubled[i] = std::lround(2.0 * ranks[i]);
        out.p_two_sided = std::min(1.0, 2.0 * exact_lower_tail(doubled, std::lround(2.0 * t)));
        out.exact = true;
    } else {
        out.p_two_sided = std::min(1.0, std::erfc(std::abs(out.z) / std::sqrt(2.0)));
    }
    return out;
}

StatsResult analyze(const ScoreMatrix& scores, double alpha,
                    const std::vector<std::pair<std::string, std::string>>& wilcoxon_pairs) {
    StatsResult out;
    std::vector<std::string> dropped;
    const auto complete = scores.complete_rows(&dropped);
    for (const auto& label : dropped)
        out.warnings.push_back("case '" + label + "' has undefined scores and was excluded");
    out.labels = complete.col_labels;
    out.cases = complete.cases();
    out.alpha = alpha;
    out.avg_ranks = average_ranks(complete);
    out.friedman = friedman_from_ranks(out.avg_ranks, out.cases);
    out.cd = nemenyi_cd(complete.methods(), out.cases, alpha);
    out.pairs = classify_pairs(out.avg_ranks, out.cd);
    auto column_of = [&](const std::string& name) {
        auto it = std::find(out.labels.begin(), out.labels.end(), name);
        if (it == out.labels.end()) throw ConfigError("Wilcoxon pair names unknown method '" + name + "'");
        return complete.values.column(static_cast<std::size_t>(it - out.labels.begin()));
    };
    for (const auto& [first, second] : wilcoxon_pairs) {
        auto a = column_of(first);
        auto b = column_of(second);
        out.wilcoxon.push_back({first, second, wilcoxon_signed_ranks(a, b)});
    }
    return out;
}

}  // namespace mtr::stats
