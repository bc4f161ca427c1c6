#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "../data/text_format.hpp"
#include "mtr/cli.hpp"
#include "mtr/error.hpp"
#include "mtr/experiment.hpp"

namespace mtr {

namespace {

enum class Format { Text, Machine, Svg };

const std::map<std::string, Format> kFormats{
    {"text", Format::Text}, {"machine", Format::Machine}, {"svg", Format::Svg}};

struct ExperimentArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    std::string out;
    Format format = Format::Text;
};

struct TrainArgs {
    std::string data;
    std::size_t targets = 1;
    std::vector<std::string> target_names;
    std::string target_file;
    std::string method = "ST";
    MethodConfig config;
    std::vector<std::size_t> chain;
    std::string out;
};

struct PredictArgs {
    std::string model;
    std::string input;
    std::string out;
    Format format = Format::Text;
};

struct StatsArgs {
    std::string matrix;
    double alpha = 0.05;
    std::vector<std::string> wilcoxon;
    std::string out;
    Format format = Format::Text;
};

struct InfoArgs {
    std::vector<std::string> files;
    std::size_t targets = 1;
    std::string config;
    Format format = Format::Text;
};

bool is_arff(const std::filesystem::path& p) { return detail::to_lower(p.extension().string()) == ".arff"; }

RawTable read_table(const std::filesystem::path& p) { return is_arff(p) ? parse_arff(p) : parse_csv(p); }

TargetSelection selection(std::size_t count, const std::vector<std::string>& names, const std::string& sidecar) {
    if (!sidecar.empty()) return TargetSelection::named(read_target_sidecar(sidecar));
    if (!names.empty()) return TargetSelection::named(names);
    return TargetSelection::last(count);
}

void write_or_print(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file || !(file << text)) throw Error("cannot write '" + path + "'");
}

int cmd_experiment(const ExperimentArgs& a, std::ostream& out, std::ostream& err) {
    auto config = load_experiment_config(a.config);
    if (a.seed) override_seed(config, *a.seed);
    if (a.jobs) config.jobs = *a.jobs;
    if (!a.out.empty()) config.output = a.out;
    config.validate();

    const auto outcome = run_experiment(config);
    write_bundle(config, outcome, config.output);

    if (a.format == Format::Machine) {
        nlohmann::ordered_json j;
        j["output"] = config.output.string();
        j["cells"] = outcome.cells.size();
        j["failed"] = outcome.failed_cells();
        nlohmann::ordered_json failures = nlohmann::ordered_json::array();
        for (const auto& c : outcome.cells)
            if (!c.report) failures.push_back({{"dataset", c.dataset}, {"method", c.method}, {"error", c.error}});
        j["failures"] = failures;
        j["warnings"] = outcome.warnings;
        out << j.dump(2) << "\n";
    } else {
        out << score_table(outcome.dataset_scores, "aRRMSE x 100 per dataset",
                           outcome.dataset_stats ? &outcome.dataset_stats->avg_ranks : nullptr);
        if (outcome.dataset_stats) out << "\nper-dataset comparison\n" << stats_text(*outcome.dataset_stats);
        if (outcome.target_stats) out << "\nper-target comparison\n" << stats_text(*outcome.target_stats);
        constexpr std::size_t kShown = 5;
        for (std::size_t i = 0; i < std::min(kShown, outcome.warnings.size()); ++i)
            err << "warning: " << outcome.warnings[i] << "\n";
        if (outcome.warnings.size() > kShown)
            err << "... " << outcome.warnings.size() - kShown << " more in warnings.txt\n";
        out << "\n" << outcome.cells.size() << " cells, " << outcome.failed_cells() << " failed; bundle in "
            << config.output.string() << "\n";
    }
    return outcome.exit_code();
}

int cmd_train(TrainArgs a, std::ostream& out) {
    const auto kind = parse_method(a.method);
    if (!kind) throw ConfigError("unknown method '" + a.method + "'");
    if (!a.chain.empty()) {
        if (*kind != MethodKind::RC && *kind != MethodKind::RCC)
            throw ConfigError("--chain only applies to RC and RCC");
        a.config.chain = a.chain;
    }
    a.config.validate();
    const auto data = load_dataset(a.data, selection(a.targets, a.target_names, a.target_file));
    const auto model = train_model(*kind, data, a.config);
    save_model(model, std::filesystem::path(a.out));
    out << "trained " << method_name(*kind) << " on " << data.size() << " rows, " << data.num_features()
        << " features, " << data.num_targets() << " targets; model written to " << a.out << "\n";
    return 0;
}

int cmd_predict(const PredictArgs& a, std::ostream& out) {
    const auto model = load_model(std::filesystem::path(a.model));
    const auto input = encode_with_schema(read_table(a.input), model.descriptors(), model.target_names(), false);
    const auto predictions = model.predict(input.features());

    std::string text;
    if (a.format == Format::Machine) {
        nlohmann::ordered_json j;
        j["targets"] = model.target_names();
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (std::size_t r = 0; r < predictions.rows(); ++r) {
            const auto row = predictions.row(r);
            rows.push_back(std::vector<double>(row.begin(), row.end()));
        }
        j["predictions"] = rows;
        text = j.dump(2) + "\n";
    } else {
        for (std::size_t t = 0; t < model.num_targets(); ++t)
            text += (t ? "," : "") + detail::csv_quote(model.target_names()[t]);
        text += "\n";
        for (std::size_t r = 0; r < predictions.rows(); ++r) {
            for (std::size_t t = 0; t < predictions.cols(); ++t)
                text += (t ? "," : "") + detail::format_double(predictions(r, t));
            text += "\n";
        }
    }
    write_or_print(a.out, text, out);
    return 0;
}

int cmd_stats(const StatsArgs& a, std::ostream& out, std::ostream& err) {
    const auto scores = stats::ScoreMatrix::read_csv(a.matrix);
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& spec : a.wilcoxon) {
        const auto colon = spec.find(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == spec.size())
            throw ConfigError("--wilcoxon expects A:B, got '" + spec + "'");
        pairs.emplace_back(spec.substr(0, colon), spec.substr(colon + 1));
    }
    const auto result = stats::analyze(scores, a.alpha, pairs);
    if (!a.out.empty()) stats::emit_cd_diagram(result.avg_ranks, result.cd, result.labels, a.out);
    switch (a.format) {
        case Format::Machine: out << stats_json(result); break;
        case Format::Svg: out << stats::cd_diagram_svg(result.avg_ranks, result.cd, result.labels); break;
        case Format::Text:
            out << stats_text(result) << "\n"
                << stats::cd_diagram_text(result.avg_ranks, result.cd, result.labels);
            break;
    }
    for (const auto& w : result.warnings) err << "warning: " << w << "\n";
    return 0;
}

int cmd_datasets_info(const InfoArgs& a, std::ostream& out) {
    struct Entry {
        std::string name;
        std::filesystem::path path;
        TargetSelection targets;
    };
    std::vector<Entry> entries;
    if (!a.config.empty())
        for (const auto& d : load_experiment_config(a.config).datasets) entries.push_back({d.name, d.path, d.targets});
    for (const auto& f : a.files)
        entries.push_back({std::filesystem::path(f).stem().string(), f, TargetSelection::last(a.targets)});
    if (entries.empty()) throw ConfigError("datasets-info needs dataset files or --config");

    nlohmann::ordered_json all = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
        const auto data = load_dataset(e.path, e.targets);
        std::size_t nominal = 0;
        for (const auto& d : data.descriptors()) nominal += d.nominal() ? 1 : 0;
        if (a.format == Format::Machine) {
            all.push_back({{"name", e.name},
                           {"path", e.path.string()},
                           {"examples", data.size()},
                           {"features", data.num_features()},
                           {"nominal_features", nominal},
                           {"targets", data.target_names()}});
        } else {
            out << e.name << ": " << data.size() << " examples, " << data.num_features() << " features ("
                << nominal << " nominal), " << data.num_targets() << " targets:";
            for (const auto& t : data.target_names()) out << " " << t;
            out << "\n";
        }
    }
    if (a.format == Format::Machine) out << all.dump(2) << "\n";
    return 0;
}

void add_format(CLI::App* cmd, Format& target, std::vector<std::string> allowed) {
    std::map<std::string, Format> choices;
    for (const auto& name : allowed) choices.emplace(name, kFormats.at(name));
    cmd->add_option("--format", target, "Output format")->transform(CLI::CheckedTransformer(choices));
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-target regression experiments"};
    app.name("mtr");
    app.require_subcommand(1);

    ExperimentArgs ex;
    auto* experiment = app.add_subcommand("experiment", "Run every method on every dataset and compare them");
    experiment->add_option("--config", ex.config, "YAML experiment description")->required()->check(CLI::ExistingFile);
    experiment->add_option("--seed", ex.seed, "Replace every seed not set explicitly in the config");
    experiment->add_option("--jobs", ex.jobs, "Worker threads (0 = all cores)");
    experiment->add_option("--out", ex.out, "Output directory (overrides the config)");
    add_format(experiment, ex.format, {"text", "machine"});

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "Train one model and save it");
    train->add_option("data", tr.data, "ARFF or CSV training file")->required()->check(CLI::ExistingFile);
    auto* count = train->add_option("--targets", tr.targets, "Number of trailing target columns");
    auto* names = train->add_option("--target-names", tr.target_names, "Target attribute names")->delimiter(',');
    auto* file = train->add_option("--target-file", tr.target_file, "Target list sidecar (XML or one name per line)");
    count->excludes(names)->excludes(file);
    names->excludes(file);
    train->add_option("--method", tr.method, "TrainMean, ST, MTS, MTSC, RC, RCC, ERC or ERCC");
    train->add_option("--trees", tr.config.base.trees, "Bagged trees per model");
    train->add_option("--min-leaf", tr.config.base.tree.min_leaf, "Minimum examples per leaf");
    train->add_option("--min-variance-fraction", tr.config.base.tree.min_variance_fraction,
                      "Leaf once variance falls below this fraction of the root variance");
    train->add_option("--max-depth", tr.config.base.tree.max_depth, "Depth limit (0 = none)");
    train->add_option("--folds", tr.config.folds, "Internal folds of MTSC, RCC and ERCC");
    train->add_option("--chains", tr.config.chains, "Ensemble size of ERC and ERCC");
    train->add_option("--chain", tr.chain, "Chain order for RC and RCC as 0-based target indices")->delimiter(',');
    train->add_option("--seed", tr.config.seed, "Random seed");
    train->add_option("--out", tr.out, "Model file")->required();

    PredictArgs pr;
    auto* predict = app.add_subcommand("predict", "Predict every target for each input row");
    predict->add_option("--model", pr.model, "Model file written by train")->required()->check(CLI::ExistingFile);
    predict->add_option("input", pr.input, "ARFF or CSV input rows")->required()->check(CLI::ExistingFile);
    predict->add_option("--out", pr.out, "Write predictions here instead of standard output");
    add_format(predict, pr.format, {"text", "machine"});

    StatsArgs st;
    auto* stats_cmd = app.add_subcommand("stats", "Friedman, Nemenyi and Wilcoxon analysis of a score matrix");
    stats_cmd->add_option("matrix", st.matrix, "CSV: case label column, then one column per method")
        ->required()
        ->check(CLI::ExistingFile);
    stats_cmd->add_option("--alpha", st.alpha, "Nemenyi significance level (0.05 or 0.10)");
    stats_cmd->add_option("--wilcoxon", st.wilcoxon, "Method pair A:B for a signed-rank test (repeatable)");
    stats_cmd->add_option("--out", st.out, "Write <out>.svg and <out>.txt critical-difference diagrams");
    add_format(stats_cmd, st.format, {"text", "machine", "svg"});

    InfoArgs in;
    auto* info = app.add_subcommand("datasets-info", "Summarize dataset files");
    info->add_option("files", in.files, "ARFF or CSV files")->check(CLI::ExistingFile);
    info->add_option("--targets", in.targets, "Number of trailing target columns of the listed files");
    info->add_option("--config", in.config, "Describe the datasets of an experiment config")->check(CLI::ExistingFile);
    add_format(info, in.format, {"text", "machine"});

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*experiment) return cmd_experiment(ex, out, err);
        if (*train) return cmd_train(tr, out);
        if (*predict) return cmd_predict(pr, out);
        if (*stats_cmd) return cmd_stats(st, out, err);
        return cmd_datasets_info(in, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace mtr
