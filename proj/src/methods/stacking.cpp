#include <algorithm>
#include <cctype>

#include "common.hpp"
#include "mtr/parallel.hpp"
#include "mtr/rng.hpp"

namespace mtr {

namespace detail {

std::vector<FeatureDescriptor> augmented_schema(const std::vector<FeatureDescriptor>& base,
                                                const std::vector<std::string>& meta_names) {
    auto out = base;
    for (const auto& name : meta_names) out.push_back(FeatureDescriptor::numeric("meta:" + name));
    return out;
}

void check_width(std::span<const double> x, std::size_t expected, const char* who) {
    if (x.size() != expected)
        throw DimensionError(std::string(who) + ": expected " + std::to_string(expected) +
                             " inputs, got " + std::to_string(x.size()));
}

}  // namespace detail

std::string_view method_name(MethodKind kind) noexcept {
    switch (kind) {
        case MethodKind::TrainMean: return "MEAN";
        case MethodKind::ST: return "ST";
        case MethodKind::MTS: return "MTS";
        case MethodKind::MTSC: return "MTSC";
        case MethodKind::RC: return "RC";
        case MethodKind::RCC: return "RCC";
        case MethodKind::ERC: return "ERC";
        case MethodKind::ERCC: return "ERCC";
    }
    return "?";
}

std::optional<MethodKind> parse_method(std::string_view name) {
    std::string upper(name);
    for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (auto kind : {MethodKind::TrainMean, MethodKind::ST, MethodKind::MTS, MethodKind::MTSC,
                      MethodKind::RC, MethodKind::RCC, MethodKind::ERC, MethodKind::ERCC})
        if (method_name(kind) == upper) return kind;
    if (upper == "TRAIN-MEAN" || upper == "TRAINMEAN") return MethodKind::TrainMean;
    return std::nullopt;
}

void MethodConfig::validate() const {
    base.validate();
    if (folds < 2) throw ConfigError("internal folds must be at least 2");
    if (chains < 1) throw ConfigError("chain count must be at least 1");
}

std::uint64_t output_seed(std::uint64_t seed, std::size_t member, std::size_t target) {
    return derive_seed(seed, {seed_role::output, member, target});
}

StModel train_st(const MultiTargetDataset& data, const Learner& learner, const MethodConfig& config) {
    const std::size_t m = data.num_targets();
    StModel model;
    model.per_target.resize(m);
    parallel_for(m, [&](std::size_t j) {
        const auto y = data.targets().column(j);
        model.per_target[j] =
            learner.fit(data.features(), y, data.descriptors(), output_seed(config.seed, 0, j));
    });
    return model;
}

std::vector<double> predict_st(const StModel& model, std::span<const double> x) {
    std::vector<double> out(model.per_target.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = model.per_target[j]->predict(x);
    return out;
}

namespace {

StModel first_stage(const MultiTargetDataset& data, const Learner& learner,
                    const MethodConfig& config) {
    const std::size_t m = data.num_targets();
    StModel model;
    model.per_target.resize(m);
    parallel_for(m, [&](std::size_t j) {
        const auto y = data.targets().column(j);
        model.per_target[j] = learner.fit(data.features(), y, data.descriptors(),
                                          derive_seed(config.seed, {seed_role::first_stage, j}));
    });
    return model;
}

Matrix in_sample_meta(const MultiTargetDataset& data, const StModel& stage) {
    const std::size_t m = data.num_targets();
    Matrix meta(data.size(), m);
    for (std::size_t j = 0; j < m; ++j) {
        auto pred = predict_all(*stage.per_target[j], data.features());
        for (std::size_t r = 0; r < data.size(); ++r) meta(r, j) = pred[r];
    }
    return meta;
}

// Meta-feature of row r, target l comes from the model trained without r's fold.
Matrix cross_validated_meta(const MultiTargetDataset& data, const Learner& learner,
                            const MethodConfig& config) {
    const std::size_t n = data.size();
    const std::size_t m = data.num_targets();
    if (config.folds > n)
        throw ConfigError("internal folds (" + std::to_string(config.folds) +
                          ") exceed training examples (" + std::to_string(n) + ")");
    const auto folds = make_kfold(n, config.folds, derive_seed(config.seed, {seed_role::fold_split, 0}));
    Matrix meta(n, m);
    parallel_for(config.folds * m, [&](std::size_t task) {
        const std::size_t fold = task / m;
        const std::size_t l = task % m;
        const auto train_rows = folds.train_rows(fold);
        const auto test_rows = folds.test_rows(fold);
        const Matrix x = data.features().select_rows(train_rows);
        std::vector<double> y(train_rows.size());
        for (std::size_t i = 0; i < train_rows.size(); ++i) y[i] = data.targets()(train_rows[i], l);
        auto model = learner.fit(x, y, data.descriptors(),
                                 derive_seed(config.seed, {seed_role::fold_model, 0, l, fold}));
        auto pred = predict_rows(*model, data.features(), test_rows);
        for (std::size_t i = 0; i < test_rows.size(); ++i) meta(test_rows[i], l) = pred[i];
    });
    return meta;
}

std::vector<RegressorPtr> second_stage(const MultiTargetDataset& data, const Matrix& meta,
                                       const Learner& learner, const MethodConfig& config) {
    const std::size_t n = data.size();
    const std::size_t d = data.num_features();
    const std::size_t m = data.num_targets();
    std::vector<RegressorPtr> models(m);
    parallel_for(m, [&](std::size_t j) {
        std::vector<std::string> names;
        for (std::size_t l = 0; l < m; ++l)
            if (l != j) names.push_back(data.target_names()[l]);
        const auto schema = detail::augmented_schema(data.descriptors(), names);
        Matrix x(n, d + m - 1);
        for (std::size_t r = 0; r < n; ++r) {
            auto src = data.features().row(r);
            auto dst = x.row(r);
            std::copy(src.begin(), src.end(), dst.begin());
            std::size_t c = d;
            for (std::size_t l = 0; l < m; ++l)
                if (l != j) dst[c++] = meta(r, l);
        }
        const auto y = data.targets().column(j);
        models[j] = learner.fit(x, y, schema, output_seed(config.seed, 0, j));
    });
    return models;
}

}  // namespace

Matrix mts_meta_features(const MultiTargetDataset& data, const Learner& learner,
                         const MethodConfig& config, bool corrected) {
    if (corrected) return cross_validated_meta(data, learner, config);
    return in_sample_meta(data, first_stage(data, learner, config));
}

MtsModel train_mts(const MultiTargetDataset& data, const Learner& learner,
                   const MethodConfig& config) {
    MtsModel model;
    model.first_stage = first_stage(data, learner, config);
    const Matrix meta = in_sample_meta(data, model.first_stage);
    model.second_stage = second_stage(data, meta, learner, config);
    return model;
}

MtsModel train_mtsc(const MultiTargetDataset& data, const Learner& learner,
                    const MethodConfig& config) {
    MtsModel model;
    model.corrected = true;
    model.folds = config.folds;
    // Full-data first stage is what prediction uses; fold models only
    // supply training meta-features.
    model.first_stage = first_stage(data, learner, config);
    const Matrix meta = cross_validated_meta(data, learner, config);
    model.second_stage = second_stage(data, meta, learner, config);
    return model;
}

std::vector<double> predict_mts(const MtsModel& model, std::span<const double> x) {
    const std::size_t m = model.second_stage.size();
    const auto estimates = predict_st(model.first_stage, x);
    std::vector<double> input(x.begin(), x.end());
    const std::size_t d = input.size();
    input.resize(d + (m ? m - 1 : 0));
    std::vector<double> out(m);
    for (std::size_t j = 0; j < m; ++j) {
        std::size_t c = d;
        for (std::size_t l = 0; l < m; ++l)
            if (l != j) input[c++] = estimates[l];
        out[j] = model.second_stage[j]->predict(input);
    }
    return out;
}

}  // namespace mtr
