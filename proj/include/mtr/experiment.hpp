#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mtr/data.hpp"
#include "mtr/eval.hpp"
#include "mtr/methods.hpp"
#include "mtr/stats.hpp"

namespace mtr {

struct DatasetSpec {
    std::string name;
    std::filesystem::path path;
    TargetSelection targets = TargetSelection::last(1);
    /// Set when the target list came from a sidecar file.
    std::optional<std::filesystem::path> target_sidecar;
    SplitSpec split{KFold{}};
    /// False when the fold seed was inherited from the experiment seed.
    bool seed_explicit = false;
};

struct MethodEntry {
    std::string name;
    MethodKind kind = MethodKind::ST;
    MethodConfig config;
    bool seed_explicit = false;
};

/// Externally produced scores joined into the comparison as an extra
/// method column. The CSV has columns `dataset,target,rrmse` with RRMSE
/// x 100; an empty target or `*` gives a dataset-level aRRMSE.
struct ImportedColumn {
    std::string method;
    std::filesystem::path path;
};

struct AnalysisOptions {
    bool per_dataset = true;
    bool per_target = true;
    double alpha = 0.05;
    FoldPooling pooling = FoldPooling::Micro;
    std::vector<std::pair<std::string, std::string>> wilcoxon;
};

struct ExperimentConfig {
    std::vector<DatasetSpec> datasets;
    std::vector<MethodEntry> methods;
    /// Default for method and fold seeds that are not set explicitly.
    std::uint64_t seed = 1;
    std::filesystem::path output = "results";
    std::size_t jobs = 0;
    AnalysisOptions analysis;
    std::vector<ImportedColumn> imported;

    /// Structural checks (non-empty, unique names, known Wilcoxon pairs).
    void validate() const;
};

/// Parses the YAML experiment description. Relative paths resolve against
/// `base_dir`. Errors carry `source:line:column` locations.
ExperimentConfig parse_experiment_config(const std::string& text, const std::filesystem::path& base_dir,
                                         const std::string& source = "<config>");
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Fully explicit YAML form: every seed, protocol and hyperparameter
/// written out, paths absolute. Running the parsed result reproduces the
/// original experiment. Worker count and output directory are left out
/// since they do not influence any score.
std::string resolved_yaml(const ExperimentConfig& config);

/// Sets the default seed and rewrites every seed that followed it.
void override_seed(ExperimentConfig& config, std::uint64_t seed);

struct CellResult {
    std::string dataset;
    std::string method;
    std::optional<EvaluationReport> report;
    std::string error;
};

struct ExperimentOutcome {
    std::vector<CellResult> cells;  // dataset-major, methods in config order
    /// Per-dataset aRRMSE and per-target RRMSE, both x 100, with imported
    /// columns appended after the configured methods.
    stats::ScoreMatrix dataset_scores;
    stats::ScoreMatrix target_scores;
    std::optional<stats::StatsResult> dataset_stats;
    std::optional<stats::StatsResult> target_stats;
    std::vector<std::string> warnings;

    std::size_t failed_cells() const;
    /// 0 when every cell ran, 2 when some failed.
    int exit_code() const { return failed_cells() == 0 ? 0 : 2; }
};

/// Loads every dataset first (input errors abort before training), then
/// evaluates all method x dataset cells concurrently. Cell failures are
/// recorded, not thrown.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

/// Writes the report bundle into `dir`: resolved_config.yaml, results.csv,
/// arrmse_table.txt, rrmse_table.txt, scores_*.csv, stats_*.json, cd_*.svg/.txt,
/// errors.txt, and timings.csv (the only file whose content varies run to run).
void write_bundle(const ExperimentConfig& config, const ExperimentOutcome& outcome,
                  const std::filesystem::path& dir);

/// Machine-readable form of a stats result, shared by the experiment
/// bundle and the standalone stats command.
std::string stats_json(const stats::StatsResult& result);
std::string stats_text(const stats::StatsResult& result);

/// Aligned text table: rows x methods, two decimals, row minimum marked
/// with `*`, optional trailing average-rank row.
std::string score_table(const stats::ScoreMatrix& scores, const std::string& title,
                        const std::vector<double>* avg_ranks, const std::string& footnote = "");

}  // namespace mtr
