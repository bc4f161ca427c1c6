#include <charconv>
#include <algorithm>
#include <cmath>
#include <set>

#include <yaml-cpp/yaml.h>

#include "../data/text_format.hpp"
#include "mtr/error.hpp"
#include "mtr/experiment.hpp"

namespace mtr {

namespace {

// Schema-checking reader that reports `source:line:column: message`.
class ConfigReader {
public:
    ConfigReader(std::string source, std::filesystem::path base)
        : source_(std::move(source)), base_(std::move(base)) {}

    [[noreturn]] void fail(const YAML::Node& at, const std::string& what) const {
        const auto mark = at.Mark();
        std::string where = source_;
        if (!mark.is_null()) where += ":" + std::to_string(mark.line + 1) + ":" + std::to_string(mark.column + 1);
        throw ConfigError(where + ": " + what);
    }

    void require_map(const YAML::Node& node, const std::string& what) const {
        if (!node.IsMap()) fail(node, what + " must be a mapping");
    }

    void allow_keys(const YAML::Node& node, const std::string& what,
                    std::initializer_list<const char*> keys) const {
        require_map(node, what);
        for (const auto& kv : node) {
            const auto key = kv.first.as<std::string>();
            if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
                std::string list;
                for (auto k : keys) list += (list.empty() ? "" : ", ") + std::string(k);
                fail(kv.first, "unknown key '" + key + "' in " + what + " (expected one of: " + list + ")");
            }
        }
    }

    std::string text(const YAML::Node& node, const std::string& what) const {
        if (!node.IsScalar()) fail(node, what + " must be a scalar");
        return node.Scalar();
    }

    std::uint64_t unsigned_int(const YAML::Node& node, const std::string& what, std::uint64_t min = 0) const {
        const auto s = text(node, what);
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size())
            fail(node, what + " must be a non-negative integer, got '" + s + "'");
        if (v < min) fail(node, what + " must be at least " + std::to_string(min));
        return v;
    }

    double real(const YAML::Node& node, const std::string& what) const {
        const auto s = text(node, what);
        auto v = detail::parse_number(s);
        if (!v) fail(node, what + " must be a number, got '" + s + "'");
        return *v;
    }

    bool boolean(const YAML::Node& node, const std::string& what) const {
        const auto s = detail::to_lower(text(node, what));
        if (s == "true" || s == "yes" || s == "on") return true;
        if (s == "false" || s == "no" || s == "off") return false;
        fail(node, what + " must be true or false, got '" + s + "'");
    }

    std::filesystem::path path(const YAML::Node& node, const std::string& what) const {
        std::filesystem::path p = text(node, what);
        if (p.empty()) fail(node, what + " must not be empty");
        if (p.is_relative()) p = base_ / p;
        return p.lexically_normal();
    }

    const std::string& source() const { return source_; }

private:
    std::string source_;
    std::filesystem::path base_;
};

// Hyperparameters shared by `defaults` and method entries.
void read_method_params(const ConfigReader& in, const YAML::Node& node, const std::string& what,
                        MethodConfig& cfg, bool& seed_explicit) {
    if (auto v = node["trees"]) cfg.base.trees = in.unsigned_int(v, what + ".trees", 1);
    if (auto v = node["bootstrap"]) cfg.base.bootstrap = in.boolean(v, what + ".bootstrap");
    if (auto v = node["min_leaf"]) cfg.base.tree.min_leaf = in.unsigned_int(v, what + ".min_leaf", 1);
    if (auto v = node["min_variance_fraction"]) {
        cfg.base.tree.min_variance_fraction = in.real(v, what + ".min_variance_fraction");
        if (cfg.base.tree.min_variance_fraction < 0.0) in.fail(v, what + ".min_variance_fraction must be >= 0");
    }
    if (auto v = node["max_depth"]) cfg.base.tree.max_depth = in.unsigned_int(v, what + ".max_depth");
    if (auto v = node["folds"]) cfg.folds = in.unsigned_int(v, what + ".folds", 2);
    if (auto v = node["chains"]) cfg.chains = in.unsigned_int(v, what + ".chains", 1);
    if (auto v = node["seed"]) {
        cfg.seed = in.unsigned_int(v, what + ".seed");
        seed_explicit = true;
    }
}

#define MTR_METHOD_PARAM_KEYS \
    "trees", "bootstrap", "min_leaf", "min_variance_fraction", "max_depth", "folds", "chains", "seed"

DatasetSpec read_dataset(const ConfigReader& in, const YAML::Node& node, std::size_t index,
                         std::uint64_t default_seed) {
    const std::string what = "datasets[" + std::to_string(index) + "]";
    in.allow_keys(node, what, {"name", "path", "targets", "protocol"});
    DatasetSpec spec;
    if (!node["path"]) in.fail(node, what + " needs a 'path'");
    spec.path = in.path(node["path"], what + ".path");
    spec.name = node["name"] ? in.text(node["name"], what + ".name") : spec.path.stem().string();
    if (spec.name.empty()) in.fail(node, what + " has an empty name");

    const auto targets = node["targets"];
    if (!targets) in.fail(node, what + " needs 'targets' (a count, a list of names, or {sidecar: file})");
    if (targets.IsScalar()) {
        spec.targets = TargetSelection::last(in.unsigned_int(targets, what + ".targets", 1));
    } else if (targets.IsSequence()) {
        std::vector<std::string> names;
        for (std::size_t i = 0; i < targets.size(); ++i)
            names.push_back(in.text(targets[i], what + ".targets[" + std::to_string(i) + "]"));
        if (names.empty()) in.fail(targets, what + ".targets is empty");
        spec.targets = TargetSelection::named(std::move(names));
    } else {
        in.allow_keys(targets, what + ".targets", {"sidecar"});
        if (!targets["sidecar"]) in.fail(targets, what + ".targets needs 'sidecar'");
        spec.target_sidecar = in.path(targets["sidecar"], what + ".targets.sidecar");
        try {
            spec.targets = TargetSelection::named(read_target_sidecar(*spec.target_sidecar));
        } catch (const DataError& e) {
            in.fail(targets["sidecar"], e.what());
        }
    }

    KFold kfold;
    kfold.seed = default_seed;
    spec.split.kind = kfold;
    if (const auto protocol = node["protocol"]) {
        const std::string pw = what + ".protocol";
        in.allow_keys(protocol, pw, {"type", "folds", "seed", "train_fraction", "test"});
        const std::string type = protocol["type"] ? detail::to_lower(in.text(protocol["type"], pw + ".type")) : "kfold";
        if (type == "kfold") {
            if (protocol["train_fraction"] || protocol["test"])
                in.fail(protocol, pw + ": train_fraction/test only apply to type holdout");
            if (auto v = protocol["folds"]) kfold.folds = in.unsigned_int(v, pw + ".folds", 2);
            if (auto v = protocol["seed"]) {
                kfold.seed = in.unsigned_int(v, pw + ".seed");
                spec.seed_explicit = true;
            }
            spec.split.kind = kfold;
        } else if (type == "holdout") {
            if (protocol["folds"] || protocol["seed"])
                in.fail(protocol, pw + ": folds/seed only apply to type kfold");
            const bool has_fraction = static_cast<bool>(protocol["train_fraction"]);
            const bool has_test = static_cast<bool>(protocol["test"]);
            if (has_fraction == has_test)
                in.fail(protocol, pw + ": holdout needs exactly one of train_fraction or test");
            if (has_fraction) {
                const double f = in.real(protocol["train_fraction"], pw + ".train_fraction");
                if (!(f > 0.0 && f < 1.0)) in.fail(protocol["train_fraction"], pw + ".train_fraction must lie in (0, 1)");
                spec.split.kind = HoldoutFraction{f};
            } else {
                spec.split.kind = HoldoutFiles{spec.path, in.path(protocol["test"], pw + ".test")};
            }
        } else {
            in.fail(protocol["type"], pw + ".type must be kfold or holdout, got '" + type + "'");
        }
    }
    return spec;
}

MethodEntry read_method(const ConfigReader& in, const YAML::Node& node, std::size_t index,
                        const MethodConfig& defaults, bool defaults_seed_explicit) {
    const std::string what = "methods[" + std::to_string(index) + "]";
    MethodEntry entry;
    entry.config = defaults;
    entry.seed_explicit = defaults_seed_explicit;
    if (node.IsScalar()) {
        entry.name = node.Scalar();
    } else {
        in.allow_keys(node, what, {"name", "type", "chain", MTR_METHOD_PARAM_KEYS});
        if (!node["name"]) in.fail(node, what + " needs a 'name'");
        entry.name = in.text(node["name"], what + ".name");
        read_method_params(in, node, what, entry.config, entry.seed_explicit);
        if (const auto chain = node["chain"]) {
            if (!chain.IsSequence()) in.fail(chain, what + ".chain must be a list of target indices");
            std::vector<std::size_t> order;
            for (std::size_t i = 0; i < chain.size(); ++i)
                order.push_back(in.unsigned_int(chain[i], what + ".chain[" + std::to_string(i) + "]"));
            entry.config.chain = std::move(order);
        }
    }
    const YAML::Node type_node = node.IsMap() && node["type"] ? node["type"] : node.IsMap() ? node["name"] : node;
    const std::string type = in.text(type_node, what + ".type");
    const auto kind = parse_method(type);
    if (!kind)
        in.fail(type_node, what + ": unknown method '" + type +
                               "' (expected ST, MTS, MTSC, RC, RCC, ERC, ERCC or MEAN)");
    entry.kind = *kind;
    if (entry.config.chain && entry.kind != MethodKind::RC && entry.kind != MethodKind::RCC)
        in.fail(node["chain"], what + ".chain only applies to RC and RCC");
    return entry;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (datasets.empty()) throw ConfigError("experiment needs at least one dataset");
    if (methods.empty()) throw ConfigError("experiment needs at least one method");
    std::set<std::string> method_names, dataset_names;
    for (const auto& m : methods) {
        if (!method_names.insert(m.name).second) throw ConfigError("duplicate method name '" + m.name + "'");
        m.config.validate();
    }
    for (const auto& c : imported)
        if (!method_names.insert(c.method).second)
            throw ConfigError("imported column '" + c.method + "' clashes with another method name");
    for (const auto& d : datasets)
        if (!dataset_names.insert(d.name).second) throw ConfigError("duplicate dataset name '" + d.name + "'");
    if (std::abs(analysis.alpha - 0.05) > 1e-12 && std::abs(analysis.alpha - 0.10) > 1e-12)
        throw ConfigError("analysis.alpha must be 0.05 or 0.10");
    for (const auto& [a, b] : analysis.wilcoxon) {
        if (!method_names.count(a)) throw ConfigError("Wilcoxon pair names unknown method '" + a + "'");
        if (!method_names.count(b)) throw ConfigError("Wilcoxon pair names unknown method '" + b + "'");
        if (a == b) throw ConfigError("Wilcoxon pair compares '" + a + "' with itself");
    }
}

ExperimentConfig parse_experiment_config(const std::string& text, const std::filesystem::path& base_dir,
                                         const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ":" +
                          std::to_string(e.mark.column + 1) + ": " + e.msg);
    }
    const ConfigReader in(source, base_dir);
    if (!root.IsMap()) throw ConfigError(source + ": top level must be a mapping");
    in.allow_keys(root, "experiment",
                  {"seed", "jobs", "output", "defaults", "datasets", "methods", "analysis", "imported"});

    ExperimentConfig cfg;
    if (auto v = root["seed"]) cfg.seed = in.unsigned_int(v, "seed");
    if (auto v = root["jobs"]) cfg.jobs = in.unsigned_int(v, "jobs");
    if (auto v = root["output"]) cfg.output = in.path(v, "output");
    else cfg.output = (base_dir / cfg.output).lexically_normal();

    MethodConfig defaults;
    defaults.seed = cfg.seed;
    bool defaults_seed_explicit = false;
    if (auto d = root["defaults"]) {
        in.allow_keys(d, "defaults", {MTR_METHOD_PARAM_KEYS});
        read_method_params(in, d, "defaults", defaults, defaults_seed_explicit);
    }

    const auto datasets = root["datasets"];
    if (!datasets || !datasets.IsSequence() || datasets.size() == 0)
        in.fail(datasets ? datasets : root, "'datasets' must be a non-empty list");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < datasets.size(); ++i) {
        cfg.datasets.push_back(read_dataset(in, datasets[i], i, cfg.seed));
        if (!seen.insert(cfg.datasets.back().name).second)
            in.fail(datasets[i], "duplicate dataset name '" + cfg.datasets.back().name + "'");
    }

    const auto methods = root["methods"];
    if (!methods || !methods.IsSequence() || methods.size() == 0)
        in.fail(methods ? methods : root, "'methods' must be a non-empty list");
    seen.clear();
    for (std::size_t i = 0; i < methods.size(); ++i) {
        cfg.methods.push_back(read_method(in, methods[i], i, defaults, defaults_seed_explicit));
        if (!seen.insert(cfg.methods.back().name).second)
            in.fail(methods[i], "duplicate method name '" + cfg.methods.back().name + "'");
    }

    if (const auto imported = root["imported"]) {
        if (!imported.IsSequence()) in.fail(imported, "'imported' must be a list");
        for (std::size_t i = 0; i < imported.size(); ++i) {
            const std::string what = "imported[" + std::to_string(i) + "]";
            in.allow_keys(imported[i], what, {"method", "path"});
            if (!imported[i]["method"] || !imported[i]["path"])
                in.fail(imported[i], what + " needs 'method' and 'path'");
            ImportedColumn col{in.text(imported[i]["method"], what + ".method"),
                               in.path(imported[i]["path"], what + ".path")};
            if (!seen.insert(col.method).second)
                in.fail(imported[i]["method"], "duplicate method name '" + col.method + "'");
            cfg.imported.push_back(std::move(col));
        }
    }

    if (const auto a = root["analysis"]) {
        in.allow_keys(a, "analysis", {"per_dataset", "per_target", "alpha", "pooling", "wilcoxon"});
        if (auto v = a["per_dataset"]) cfg.analysis.per_dataset = in.boolean(v, "analysis.per_dataset");
        if (auto v = a["per_target"]) cfg.analysis.per_target = in.boolean(v, "analysis.per_target");
        if (auto v = a["alpha"]) {
            cfg.analysis.alpha = in.real(v, "analysis.alpha");
            if (std::abs(cfg.analysis.alpha - 0.05) > 1e-12 && std::abs(cfg.analysis.alpha - 0.10) > 1e-12)
                in.fail(v, "analysis.alpha must be 0.05 or 0.10");
        }
        if (auto v = a["pooling"]) {
            const auto p = detail::to_lower(in.text(v, "analysis.pooling"));
            if (p == "micro") cfg.analysis.pooling = FoldPooling::Micro;
            else if (p == "macro") cfg.analysis.pooling = FoldPooling::Macro;
            else in.fail(v, "analysis.pooling must be micro or macro");
        }
        if (auto w = a["wilcoxon"]) {
            if (!w.IsSequence()) in.fail(w, "analysis.wilcoxon must be a list of [method, method] pairs");
            for (std::size_t i = 0; i < w.size(); ++i) {
                const std::string what = "analysis.wilcoxon[" + std::to_string(i) + "]";
                if (!w[i].IsSequence() || w[i].size() != 2) in.fail(w[i], what + " must be a pair [method, method]");
                auto first = in.text(w[i][0], what);
                auto second = in.text(w[i][1], what);
                for (const auto& [name, node] : {std::pair{first, w[i][0]}, std::pair{second, w[i][1]}})
                    if (!seen.count(name)) in.fail(node, what + " names unknown method '" + name + "'");
                cfg.analysis.wilcoxon.emplace_back(std::move(first), std::move(second));
            }
        }
    }

    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = detail::read_file(path.string());
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    const auto base = std::filesystem::absolute(path).parent_path();
    return parse_experiment_config(text, base, path.string());
}

void override_seed(ExperimentConfig& config, std::uint64_t seed) {
    config.seed = seed;
    for (auto& m : config.methods)
        if (!m.seed_explicit) m.config.seed = seed;
    for (auto& d : config.datasets)
        if (!d.seed_explicit)
            if (auto* k = std::get_if<KFold>(&d.split.kind)) k->seed = seed;
}

std::string resolved_yaml(const ExperimentConfig& config) {
    auto abs = [](const std::filesystem::path& p) { return std::filesystem::absolute(p).lexically_normal().string(); };
    auto num = [](double v) { return detail::format_double(v); };
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "seed" << YAML::Value << config.seed;

    out << YAML::Key << "datasets" << YAML::Value << YAML::BeginSeq;
    for (const auto& d : config.datasets) {
        out << YAML::BeginMap;
        out << YAML::Key << "name" << YAML::Value << d.name;
        out << YAML::Key << "path" << YAML::Value << abs(d.path);
        out << YAML::Key << "targets" << YAML::Value;
        if (const auto* count = std::get_if<std::size_t>(&d.targets.spec)) {
            out << *count;
        } else {
            out << YAML::Flow << std::get<std::vector<std::string>>(d.targets.spec);
        }
        out << YAML::Key << "protocol" << YAML::Value << YAML::BeginMap;
        if (const auto* k = std::get_if<KFold>(&d.split.kind)) {
            out << YAML::Key << "type" << YAML::Value << "kfold";
            out << YAML::Key << "folds" << YAML::Value << k->folds;
            out << YAML::Key << "seed" << YAML::Value << k->seed;
        } else if (const auto* f = std::get_if<HoldoutFraction>(&d.split.kind)) {
            out << YAML::Key << "type" << YAML::Value << "holdout";
            out << YAML::Key << "train_fraction" << YAML::Value << num(f->train_fraction);
        } else {
            const auto& files = std::get<HoldoutFiles>(d.split.kind);
            out << YAML::Key << "type" << YAML::Value << "holdout";
            out << YAML::Key << "test" << YAML::Value << abs(files.test);
        }
        out << YAML::EndMap << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "methods" << YAML::Value << YAML::BeginSeq;
    for (const auto& m : config.methods) {
        const auto& c = m.config;
        out << YAML::BeginMap;
        out << YAML::Key << "name" << YAML::Value << m.name;
        out << YAML::Key << "type" << YAML::Value << std::string(method_name(m.kind));
        out << YAML::Key << "trees" << YAML::Value << c.base.trees;
        out << YAML::Key << "bootstrap" << YAML::Value << c.base.bootstrap;
        out << YAML::Key << "min_leaf" << YAML::Value << c.base.tree.min_leaf;
        out << YAML::Key << "min_variance_fraction" << YAML::Value << num(c.base.tree.min_variance_fraction);
        out << YAML::Key << "max_depth" << YAML::Value << c.base.tree.max_depth;
        out << YAML::Key << "folds" << YAML::Value << c.folds;
        out << YAML::Key << "chains" << YAML::Value << c.chains;
        out << YAML::Key << "seed" << YAML::Value << c.seed;
        if (c.chain) out << YAML::Key << "chain" << YAML::Value << YAML::Flow << *c.chain;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    if (!config.imported.empty()) {
        out << YAML::Key << "imported" << YAML::Value << YAML::BeginSeq;
        for (const auto& c : config.imported)
            out << YAML::BeginMap << YAML::Key << "method" << YAML::Value << c.method << YAML::Key << "path"
                << YAML::Value << abs(c.path) << YAML::EndMap;
        out << YAML::EndSeq;
    }

    out << YAML::Key << "analysis" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "per_dataset" << YAML::Value << config.analysis.per_dataset;
    out << YAML::Key << "per_target" << YAML::Value << config.analysis.per_target;
    out << YAML::Key << "alpha" << YAML::Value << num(config.analysis.alpha);
    out << YAML::Key << "pooling" << YAML::Value
        << (config.analysis.pooling == FoldPooling::Micro ? "micro" : "macro");
    out << YAML::Key << "wilcoxon" << YAML::Value << YAML::BeginSeq;
    for (const auto& [a, b] : config.analysis.wilcoxon)
        out << YAML::Flow << YAML::BeginSeq << a << b << YAML::EndSeq;
    out << YAML::EndSeq;
    out << YAML::EndMap;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace mtr
