#include <algorithm>

#include "mtr/parallel.hpp"
#include "mtr/rng.hpp"
#include "mtr/tree.hpp"
#include "tree_builder.hpp"

namespace mtr {

void BaggingConfig::validate() const {
    if (trees < 1) throw ConfigError("bagging needs at least one tree");
    tree.validate();
}

BaggedEnsemble::BaggedEnsemble(std::vector<RegressionTree> trees, std::uint64_t seed)
    : trees_(std::move(trees)), seed_(seed) {
    if (trees_.empty()) throw ConfigError("bagged ensemble needs at least one tree");
}

double BaggedEnsemble::predict(std::span<const double> x) const {
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.predict(x);
    return sum / static_cast<double>(trees_.size());
}

std::size_t BaggedEnsemble::input_width() const { return trees_.front().input_width(); }

void BaggedEnsemble::save(BinaryWriter& out) const {
    out.tag("BAGG");
    out.u64(seed_);
    out.u64(trees_.size());
    for (const auto& t : trees_) t.save(out);
}

BaggedEnsemble BaggedEnsemble::load(BinaryReader& in) {
    in.expect("BAGG");
    const auto seed = in.u64();
    std::vector<RegressionTree> trees(in.count(1u << 20));
    for (auto& t : trees) t = RegressionTree::load(in);
    return BaggedEnsemble(std::move(trees), seed);
}

BaggedEnsemble train_bagging(const Matrix& x, std::span<const double> y,
                             std::span<const FeatureDescriptor> schema, const BaggingConfig& config,
                             std::uint64_t seed) {
    config.validate();
    if (x.rows() != y.size())
        throw DimensionError("train_bagging: " + std::to_string(x.rows()) + " rows but " +
                             std::to_string(y.size()) + " targets");
    if (schema.size() != x.cols()) throw DimensionError("train_bagging: schema width mismatch");
    if (x.rows() == 0) throw DimensionError("train_bagging: no training rows");

    const detail::ColumnStore store(x, y, schema);
    const std::size_t n = x.rows();
    std::vector<RegressionTree> trees(config.trees);
    parallel_for(config.trees, [&](std::size_t t) {
        std::vector<std::uint32_t> weights(n, config.bootstrap ? 0 : 1);
        if (config.bootstrap) {
            Rng rng(derive_seed(seed, {t}));
            for (std::size_t i = 0; i < n; ++i) ++weights[rng.uniform(n)];
        }
        trees[t] = detail::grow_tree(store, weights, config.tree);
    });
    return BaggedEnsemble(std::move(trees), seed);
}

BaggingLearner::BaggingLearner(BaggingConfig config) : config_(std::move(config)) {
    config_.validate();
}

RegressorPtr BaggingLearner::fit(const Matrix& x, std::span<const double> y,
                                 std::span<const FeatureDescriptor> schema,
                                 std::uint64_t seed) const {
    return std::make_shared<BaggedEnsemble>(train_bagging(x, y, schema, config_, seed));
}

RegressorPtr MeanLearner::fit(const Matrix& x, std::span<const double> y,
                              std::span<const FeatureDescriptor>, std::uint64_t) const {
    if (x.rows() != y.size()) throw DimensionError("MeanLearner: row count mismatch");
    if (y.empty()) throw DimensionError("MeanLearner: no training rows");
    double sum = 0.0;
    for (double v : y) sum += v;
    return std::make_shared<ConstantRegressor>(sum / static_cast<double>(y.size()), x.cols());
}

std::vector<double> predict_rows(const Regressor& model, const Matrix& x,
                                 std::span<const std::size_t> rows) {
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = model.predict(x.row(rows[i]));
    return out;
}

std::vector<double> predict_all(const Regressor& model, const Matrix& x) {
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = model.predict(x.row(r));
    return out;
}

}  // namespace mtr
