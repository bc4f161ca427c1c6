#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "../data/text_format.hpp"
#include "mtr/error.hpp"
#include "mtr/experiment.hpp"
#include "mtr/parallel.hpp"

namespace mtr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct LoadedDataset {
    MultiTargetDataset train;  // the whole dataset under k-fold
    std::optional<MultiTargetDataset> test;
};

LoadedDataset load(const DatasetSpec& spec) {
    try {
        if (const auto* files = std::get_if<HoldoutFiles>(&spec.split.kind)) {
            auto [train, test] = load_holdout_files(*files, spec.targets);
            return {std::move(train), std::move(test)};
        }
        auto data = load_dataset(spec.path, spec.targets);
        if (const auto* f = std::get_if<HoldoutFraction>(&spec.split.kind)) {
            auto [train, test] = split_holdout(data, f->train_fraction);
            return {std::move(train), std::move(test)};
        }
        return {std::move(data), std::nullopt};
    } catch (const Error& e) {
        throw DataError("dataset '" + spec.name + "': " + e.what());
    }
}

std::string protocol_label(const Protocol& p) {
    if (const auto* k = std::get_if<KFoldProtocol>(&p))
        return fmt::format("kfold(f={} seed={} {})", k->folds, k->seed,
                           k->pooling == FoldPooling::Micro ? "micro" : "macro");
    return "holdout(" + std::get<HoldoutProtocol>(p).description + ")";
}

struct Imported {
    std::map<std::string, double> dataset_level;                       // dataset -> aRRMSE
    std::map<std::pair<std::string, std::string>, double> target_level;  // (dataset, target) -> RRMSE
};

Imported read_imported(const ImportedColumn& col) {
    RawTable table;
    try {
        table = parse_csv(col.path);
    } catch (const DataError& e) {
        throw DataError("imported column '" + col.method + "': " + e.what());
    }
    auto index = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < table.columns.size(); ++i)
            if (detail::to_lower(table.columns[i].name) == name) return i;
        throw DataError("imported column '" + col.method + "': " + col.path.string() + " lacks a '" + name +
                        "' column");
    };
    const auto ci = index("dataset");
    const auto ti = index("target");
    const auto vi = index("rrmse");
    Imported out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (!row[ci] || !row[vi]) continue;
        const auto value = detail::parse_number(*row[vi]);
        if (!value)
            throw DataError("imported column '" + col.method + "': row " + std::to_string(r + 2) +
                            " has a non-numeric rrmse");
        const std::string target = row[ti] ? *row[ti] : "";
        if (target.empty() || target == "*")
            out.dataset_level[*row[ci]] = *value;
        else
            out.target_level[{*row[ci], target}] = *value;
    }
    return out;
}

std::optional<stats::StatsResult> try_analyze(const stats::ScoreMatrix& scores, const AnalysisOptions& opt,
                                              const std::string& label, std::vector<std::string>& warnings) {
    const auto complete = scores.complete_rows();
    if (scores.methods() < 2 || complete.cases() < 2) {
        warnings.push_back(label + " analysis skipped: needs at least 2 methods and 2 complete cases");
        return std::nullopt;
    }
    try {
        auto result = stats::analyze(scores, opt.alpha, opt.wilcoxon);
        for (const auto& w : result.warnings) warnings.push_back(label + " analysis: " + w);
        return result;
    } catch (const Error& e) {
        warnings.push_back(label + " analysis skipped: " + e.what());
        return std::nullopt;
    }
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace

std::size_t ExperimentOutcome::failed_cells() const {
    std::size_t n = 0;
    for (const auto& c : cells) n += c.report ? 0 : 1;
    return n;
}

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
    config.validate();
    const WorkerLimit limit(config.jobs);

    std::vector<LoadedDataset> data;
    data.reserve(config.datasets.size());
    for (const auto& spec : config.datasets) data.push_back(load(spec));
    std::vector<Imported> imported;
    for (const auto& col : config.imported) imported.push_back(read_imported(col));

    const std::size_t n_methods = config.methods.size();
    ExperimentOutcome outcome;
    outcome.cells.resize(config.datasets.size() * n_methods);
    parallel_for(outcome.cells.size(), [&](std::size_t cell) {
        const auto& dspec = config.datasets[cell / n_methods];
        const auto& loaded = data[cell / n_methods];
        const auto& entry = config.methods[cell % n_methods];
        auto& out = outcome.cells[cell];
        out.dataset = dspec.name;
        out.method = entry.name;
        MethodSpec spec{entry.name, entry.kind, entry.config, nullptr};
        try {
            if (loaded.test) {
                out.report = evaluate_holdout(spec, loaded.train, *loaded.test, dspec.name);
            } else {
                const auto& k = std::get<KFold>(dspec.split.kind);
                out.report = evaluate_kfold(spec, loaded.train, k.folds, k.seed, config.analysis.pooling, dspec.name);
            }
        } catch (const std::exception& e) {
            out.error = e.what();
        }
    });

    // Score matrices: configured methods, then imported columns.
    std::vector<std::string> labels;
    for (const auto& m : config.methods) labels.push_back(m.name);
    for (const auto& c : config.imported) labels.push_back(c.method);
    auto& ds = outcome.dataset_scores;
    auto& ts = outcome.target_scores;
    ds.col_labels = ts.col_labels = labels;
    ds.values = Matrix(0, labels.size());
    ts.values = Matrix(0, labels.size());

    for (std::size_t d = 0; d < config.datasets.size(); ++d) {
        const auto& name = config.datasets[d].name;
        const auto& targets = data[d].train.target_names();
        std::vector<double> drow(labels.size(), kNaN);
        Matrix trows(targets.size(), labels.size(), kNaN);
        for (std::size_t k = 0; k < n_methods; ++k) {
            const auto& cell = outcome.cells[d * n_methods + k];
            if (!cell.report) continue;
            if (cell.report->arrmse) drow[k] = *cell.report->arrmse * 100.0;
            for (std::size_t j = 0; j < targets.size(); ++j)
                if (auto p = cell.report->per_target[j].percent()) trows(j, k) = *p;
            for (const auto& w : cell.report->warnings)
                outcome.warnings.push_back(name + " / " + cell.method + ": " + w);
        }
        for (std::size_t c = 0; c < imported.size(); ++c) {
            const std::size_t k = n_methods + c;
            double sum = 0.0;
            std::size_t found = 0;
            for (std::size_t j = 0; j < targets.size(); ++j) {
                auto it = imported[c].target_level.find({name, targets[j]});
                if (it != imported[c].target_level.end()) {
                    trows(j, k) = it->second;
                    sum += it->second;
                    ++found;
                }
            }
            auto it = imported[c].dataset_level.find(name);
            if (it != imported[c].dataset_level.end())
                drow[k] = it->second;
            else if (found == targets.size())
                drow[k] = sum / static_cast<double>(found);
            if (it == imported[c].dataset_level.end() && found < targets.size())
                outcome.warnings.push_back("imported column '" + config.imported[c].method + "' has no complete scores for dataset '" + name + "'");
        }
        ds.row_labels.push_back(name);
        ds.values.append_row(drow);
        for (std::size_t j = 0; j < targets.size(); ++j) {
            ts.row_labels.push_back(name + "/" + targets[j]);
            ts.values.append_row(trows.row(j));
        }
    }
    for (const auto& cell : outcome.cells)
        if (!cell.report) outcome.warnings.push_back(cell.dataset + " / " + cell.method + " failed: " + cell.error);

    if (config.analysis.per_dataset)
        outcome.dataset_stats = try_analyze(ds, config.analysis, "per-dataset", outcome.warnings);
    if (config.analysis.per_target)
        outcome.target_stats = try_analyze(ts, config.analysis, "per-target", outcome.warnings);
    return outcome;
}

std::string stats_json(const stats::StatsResult& r) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["methods"] = r.labels;
    j["cases"] = r.cases;
    ordered_json ranks = ordered_json::object();
    for (std::size_t k = 0; k < r.labels.size(); ++k) ranks[r.labels[k]] = r.avg_ranks[k];
    j["average_ranks"] = ranks;
    j["friedman"] = {{"chi2", r.friedman.chi2},
                     {"p", r.friedman.p},
                     {"iman_davenport_f", std::isfinite(r.friedman.f) ? ordered_json(r.friedman.f) : ordered_json("inf")},
                     {"iman_davenport_p", r.friedman.f_p}};
    j["nemenyi"] = {{"alpha", r.alpha}, {"critical_difference", r.cd}};
    ordered_json pairs = ordered_json::array();
    for (auto [a, b] : r.pairs.significant_pairs) {
        const auto better = r.avg_ranks[a] <= r.avg_ranks[b] ? a : b;
        const auto worse = better == a ? b : a;
        pairs.push_back({{"better", r.labels[better]},
                         {"worse", r.labels[worse]},
                         {"rank_difference", std::abs(r.avg_ranks[a] - r.avg_ranks[b])}});
    }
    j["significant_pairs"] = pairs;
    ordered_json groups = ordered_json::array();
    for (const auto& g : r.pairs.groups) {
        ordered_json members = ordered_json::array();
        for (auto k : g) members.push_back(r.labels[k]);
        groups.push_back(members);
    }
    j["groups"] = groups;
    ordered_json w = ordered_json::array();
    for (const auto& c : r.wilcoxon)
        w.push_back({{"first", c.first},
                     {"second", c.second},
                     {"w_plus", c.result.w_plus},
                     {"w_minus", c.result.w_minus},
                     {"n", c.result.n},
                     {"zeros_dropped", c.result.zeros_dropped},
                     {"z", c.result.z},
                     {"p_two_sided", c.result.p_two_sided},
                     {"exact", c.result.exact}});
    j["wilcoxon"] = w;
    j["warnings"] = r.warnings;
    return j.dump(2) + "\n";
}

std::string stats_text(const stats::StatsResult& r) {
    std::string out = fmt::format("cases {}  methods {}\n", r.cases, r.labels.size());
    std::size_t width = 6;
    for (const auto& l : r.labels) width = std::max(width, l.size());
    out += "average ranks:\n";
    for (std::size_t k = 0; k < r.labels.size(); ++k)
        out += fmt::format("  {:<{}} {:.4f}\n", r.labels[k], width, r.avg_ranks[k]);
    out += fmt::format("Friedman chi2 = {:.4f}, p = {:.4g}; Iman-Davenport F = {:.4f}, p = {:.4g}\n",
                       r.friedman.chi2, r.friedman.p, r.friedman.f, r.friedman.f_p);
    out += fmt::format("Nemenyi critical difference (alpha = {:.2f}) = {:.4f}\n", r.alpha, r.cd);
    if (r.pairs.significant_pairs.empty()) out += "no significantly different pairs\n";
    for (auto [a, b] : r.pairs.significant_pairs) {
        const auto better = r.avg_ranks[a] <= r.avg_ranks[b] ? a : b;
        const auto worse = better == a ? b : a;
        out += fmt::format("  {} better than {} (rank gap {:.4f})\n", r.labels[better], r.labels[worse],
                           std::abs(r.avg_ranks[a] - r.avg_ranks[b]));
    }
    for (const auto& c : r.wilcoxon)
        out += fmt::format("Wilcoxon {} vs {}: W+ = {}, W- = {}, N = {}, p = {:.4g} ({})\n", c.first, c.second,
                           c.result.w_plus, c.result.w_minus, c.result.n, c.result.p_two_sided,
                           c.result.exact ? "exact" : "normal approximation");
    for (const auto& w : r.warnings) out += "warning: " + w + "\n";
    return out;
}

std::string score_table(const stats::ScoreMatrix& scores, const std::string& title,
                        const std::vector<double>* avg_ranks, const std::string& footnote) {
    std::size_t label_w = std::string("Avg. rank").size();
    for (const auto& l : scores.row_labels) label_w = std::max(label_w, l.size());
    std::vector<std::size_t> col_w(scores.methods(), 8);
    for (std::size_t k = 0; k < scores.methods(); ++k) col_w[k] = std::max(col_w[k], scores.col_labels[k].size() + 1);

    std::string out = title + "\n";
    out += fmt::format("{:<{}}", "", label_w);
    for (std::size_t k = 0; k < scores.methods(); ++k) out += fmt::format(" {:>{}}", scores.col_labels[k], col_w[k]);
    out += "\n";
    for (std::size_t r = 0; r < scores.cases(); ++r) {
        double best = std::numeric_limits<double>::infinity();
        for (double v : scores.values.row(r))
            if (std::isfinite(v)) best = std::min(best, v);
        out += fmt::format("{:<{}}", scores.row_labels[r], label_w);
        for (std::size_t k = 0; k < scores.methods(); ++k) {
            const double v = scores.values(r, k);
            std::string cell = std::isfinite(v) ? fmt::format("{:.2f}", v) : "-";
            if (std::isfinite(v) && fmt::format("{:.2f}", v) == fmt::format("{:.2f}", best)) cell += "*";
            else cell += " ";
            out += fmt::format(" {:>{}}", cell, col_w[k] + 1);
        }
        out += "\n";
    }
    if (avg_ranks) {
        out += fmt::format("{:<{}}", "Avg. rank", label_w);
        for (std::size_t k = 0; k < scores.methods(); ++k)
            out += fmt::format(" {:>{}} ", fmt::format("{:.2f}", (*avg_ranks)[k]), col_w[k]);
        out += "\n";
    }
    out += "* marks the lowest value in each row\n";
    if (!footnote.empty()) out += footnote + "\n";
    return out;
}

void write_bundle(const ExperimentConfig& config, const ExperimentOutcome& outcome,
                  const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());

    write_file(dir / "resolved_config.yaml", resolved_yaml(config));

    std::string results = "dataset,method,target,rrmse,protocol\n";
    std::string timings = "dataset,method,seconds\n";
    std::string errors;
    for (const auto& cell : outcome.cells) {
        if (!cell.report) {
            errors += cell.dataset + "\t" + cell.method + "\t" + cell.error + "\n";
            continue;
        }
        const auto protocol = protocol_label(cell.report->protocol);
        for (const auto& t : cell.report->per_target) {
            const auto p = t.percent();
            results += detail::csv_quote(cell.dataset) + "," + detail::csv_quote(cell.method) + "," +
                       detail::csv_quote(t.target_name) + "," + (p ? detail::format_double(*p) : "NA") + "," +
                       detail::csv_quote(protocol) + "\n";
        }
        timings += fmt::format("{},{},{:.3f}\n", detail::csv_quote(cell.dataset), detail::csv_quote(cell.method),
                               cell.report->wall_seconds);
    }
    write_file(dir / "results.csv", results);
    write_file(dir / "timings.csv", timings);
    write_file(dir / "errors.txt", errors);

    std::string warnings;
    for (const auto& w : outcome.warnings) warnings += w + "\n";
    write_file(dir / "warnings.txt", warnings);

    write_file(dir / "scores_dataset.csv", outcome.dataset_scores.to_csv());
    write_file(dir / "scores_target.csv", outcome.target_scores.to_csv());

    const std::string pooling = config.analysis.pooling == FoldPooling::Micro
                                    ? "cross-validated scores pool squared errors over folds before the root"
                                    : "cross-validated scores average the per-fold values";
    write_file(dir / "arrmse_table.txt",
               score_table(outcome.dataset_scores, "aRRMSE x 100 per dataset",
                           outcome.dataset_stats ? &outcome.dataset_stats->avg_ranks : nullptr, pooling));
    write_file(dir / "rrmse_table.txt",
               score_table(outcome.target_scores, "RRMSE x 100 per target",
                           outcome.target_stats ? &outcome.target_stats->avg_ranks : nullptr,
                           pooling + "\nper-target ranks treat targets of one dataset as independent cases"));

    auto emit = [&](const std::optional<stats::StatsResult>& r, const std::string& tag) {
        if (!r) return;
        write_file(dir / ("stats_" + tag + ".json"), stats_json(*r));
        write_file(dir / ("stats_" + tag + ".txt"), stats_text(*r));
        stats::emit_cd_diagram(r->avg_ranks, r->cd, r->labels, dir / ("cd_" + tag));
    };
    emit(outcome.dataset_stats, "dataset");
    emit(outcome.target_stats, "target");
}

}  // namespace mtr
