#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mtr/matrix.hpp"

namespace mtr::stats {

/// N cases (datasets or targets) by K methods of error scores; lower is
/// better. Missing scores are NaN.
struct ScoreMatrix {
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    Matrix values;

    std::size_t cases() const noexcept { return values.rows(); }
    std::size_t methods() const noexcept { return values.cols(); }

    /// Shape and label checks; throws DimensionError.
    void validate() const;

    /// Copy without rows that contain a non-finite score. Labels of dropped
    /// rows are appended to `dropped` when given.
    ScoreMatrix complete_rows(std::vector<std::string>* dropped = nullptr) const;

    /// First column holds row labels, header row holds method labels.
    /// Empty, "NA" or "?" cells become NaN.
    static ScoreMatrix parse_csv(const std::string& text);
    static ScoreMatrix read_csv(const std::filesystem::path& path);
    /// Round-trip exact.
    std::string to_csv() const;
};

/// Ranks of one row, 1 = smallest, ties share the mean of their positions.
std::vector<double> rank_row(std::span<const double> scores);

/// Column means of the per-row ranks. Throws on non-finite entries.
std::vector<double> average_ranks(const ScoreMatrix& scores);

struct FriedmanResult {
    double chi2 = 0.0;
    double p = 1.0;
    /// Iman-Davenport statistic and its F(K-1, (K-1)(N-1)) p-value.
    double f = 0.0;
    double f_p = 1.0;
    std::size_t cases = 0;
    std::size_t methods = 0;
};

FriedmanResult friedman_from_ranks(std::span<const double> avg_ranks, std::size_t cases);
FriedmanResult friedman_test(const ScoreMatrix& scores);

/// Two-tailed Nemenyi critical value q_alpha for K methods
/// (studentized range / sqrt 2). alpha must be 0.05 or 0.10, K in [2, 20].
double nemenyi_q(std::size_t methods, double alpha);
/// q_alpha * sqrt(K (K + 1) / (6 N)).
double nemenyi_cd(std::size_t methods, std::size_t cases, double alpha);

struct PairClassification {
    /// (i, j) with i < j and |R_i - R_j| > CD.
    std::vector<std::pair<std::size_t, std::size_t>> significant_pairs;
    /// Maximal sets of methods whose pairwise rank differences are all
    /// <= CD, each sorted by average rank.
    std::vector<std::vector<std::size_t>> groups;
};

PairClassification classify_pairs(std::span<const double> avg_ranks, double cd);

enum class WilcoxonMethod {
    Auto,    // exact for N <= 20, normal approximation above
    Exact,   // conditional exact distribution (handles tied ranks)
    Normal,  // z approximation, no continuity correction
};

struct WilcoxonResult {
    double w_plus = 0.0;   // rank sum of a_i - b_i > 0
    double w_minus = 0.0;  // rank sum of a_i - b_i < 0
    std::size_t n = 0;     // pairs used after dropping zero differences
    std::size_t zeros_dropped = 0;
    double z = 0.0;
    double p_two_sided = 1.0;
    bool exact = false;
};

/// Zero differences are dropped and N reduced. Throws if every difference
/// is zero.
WilcoxonResult wilcoxon_signed_ranks(std::span<const double> a, std::span<const double> b,
                                     WilcoxonMethod method = WilcoxonMethod::Auto);

struct WilcoxonComparison {
    std::string first;
    std::string second;
    WilcoxonResult result;
};

/// Complete comparison of the methods of one score matrix.
struct StatsResult {
    std::vector<std::string> labels;
    std::size_t cases = 0;
    std::vector<double> avg_ranks;
    FriedmanResult friedman;
    double alpha = 0.05;
    double cd = 0.0;
    PairClassification pairs;
    std::vector<WilcoxonComparison> wilcoxon;
    std::vector<std::string> warnings;
};

StatsResult analyze(const ScoreMatrix& scores, double alpha,
                    const std::vector<std::pair<std::string, std::string>>& wilcoxon_pairs = {});

/// Critical-difference diagram: number line of average ranks with a bar
/// over every group of methods that are not significantly different.
std::string cd_diagram_svg(std::span<const double> avg_ranks, double cd,
                           const std::vector<std::string>& labels);
std::string cd_diagram_text(std::span<const double> avg_ranks, double cd,
                            const std::vector<std::string>& labels);

/// Writes `<prefix>.svg` and `<prefix>.txt`.
void emit_cd_diagram(std::span<const double> avg_ranks, double cd,
                     const std::vector<std::string>& labels, const std::filesystem::path& prefix);

}  // namespace mtr::stats
