// Desk-scale run of ST, MTS, MTSC, ERC and ERCC on EDM, SF1, SF2 and WQ with
// 10-fold cross-validation, 100 trees, 10 internal folds and up to 10 chains.
// Data files are looked up in $MTR_DATA_DIR (default: <repo>/data) as
// edm.arff, sf1.arff, sf2.arff and wq.arff in Mulan's layout.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <iostream>

#include <fmt/format.h>

#include "mtr/experiment.hpp"

using namespace mtr;

namespace {

struct Wanted {
    const char* name;
    std::size_t targets;
};

constexpr Wanted kDatasets[] = {{"edm", 2}, {"sf1", 3}, {"sf2", 3}, {"wq", 14}};
constexpr double kBudgetSeconds = 15.0 * 60.0;

std::optional<std::filesystem::path> find_file(const std::filesystem::path& dir, const std::string& stem) {
    std::error_code ec;
    for (const auto& e : std::filesystem::directory_iterator(dir, ec)) {
        auto name = e.path().filename().string();
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
        if (name == stem + ".arff") return e.path();
    }
    return std::nullopt;
}

}  // namespace

int main() {
    const char* env = std::getenv("MTR_DATA_DIR");
    const std::filesystem::path dir = env ? env : MTR_DATA_DIR;

    ExperimentConfig config;
    config.seed = 1;
    std::vector<std::string> missing;
    for (const auto& w : kDatasets) {
        const auto path = find_file(dir, w.name);
        if (!path) {
            missing.push_back(std::string(w.name) + ".arff");
            continue;
        }
        DatasetSpec d;
        d.name = w.name;
        d.path = *path;
        d.targets = TargetSelection::last(w.targets);
        d.split.kind = KFold{10, config.seed};
        config.datasets.push_back(d);
    }
    if (!missing.empty()) {
        std::cout << "FAIL  criterion 7: desk-scale experiment could not run\n"
                  << "      missing in " << dir.string() << ":";
        for (const auto& m : missing) std::cout << " " << m;
        std::cout << "\n      set MTR_DATA_DIR to a directory holding the Mulan ARFF files\n";
        return 1;
    }

    for (const char* name : {"ST", "MTS", "MTSC", "ERC", "ERCC"}) {
        MethodEntry m;
        m.name = name;
        m.kind = *parse_method(name);
        m.config.base.trees = 100;
        m.config.folds = 10;
        m.config.chains = 10;
        m.config.seed = config.seed;
        config.methods.push_back(m);
    }
    config.analysis.wilcoxon = {{"ERC", "ERCC"}, {"MTS", "MTSC"}};

    const auto t0 = std::chrono::steady_clock::now();
    const auto outcome = run_experiment(config);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::cout << score_table(outcome.dataset_scores, "aRRMSE x 100",
                             outcome.dataset_stats ? &outcome.dataset_stats->avg_ranks : nullptr)
              << "\nresolved configuration:\n"
              << resolved_yaml(config) << "\n";

    bool ok = outcome.failed_cells() == 0;
    for (const auto& c : outcome.cells)
        if (!c.report) std::cout << "cell " << c.dataset << "/" << c.method << " failed: " << c.error << "\n";
    for (double v : outcome.dataset_scores.values.data())
        if (!(v > 0.0 && v <= 150.0)) {
            ok = false;
            std::cout << "aRRMSE outside (0, 150]: " << v << "\n";
        }
    if (elapsed > kBudgetSeconds) {
        ok = false;
        std::cout << fmt::format("runtime {:.0f} s exceeds the {:.0f} s budget\n", elapsed, kBudgetSeconds);
    }

    const auto& s = outcome.dataset_scores;
    auto col = [&](const std::string& m) {
        return static_cast<std::size_t>(std::find(s.col_labels.begin(), s.col_labels.end(), m) - s.col_labels.begin());
    };
    for (std::size_t r = 0; r < s.cases(); ++r) {
        if (s.row_labels[r] != "sf1" && s.row_labels[r] != "sf2") continue;
        const double st = s.values(r, col("ST"));
        const double best = std::min(s.values(r, col("MTSC")), s.values(r, col("ERCC")));
        std::cout << fmt::format("{} {}: ST {:.2f}, best of MTSC/ERCC {:.2f}\n", best < st ? "flag-ok  " : "FLAG-MISS",
                                 s.row_labels[r], st, best);
    }

    std::cout << fmt::format("{}  criterion 7: desk-scale experiment ({:.1f} s, {} cells)\n", ok ? "PASS" : "FAIL",
                             elapsed, outcome.cells.size());
    return ok ? 0 : 1;
}
