#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mtr/binary_io.hpp"
#include "mtr/learner.hpp"

namespace mtr {

struct TreeConfig {
    std::size_t min_leaf = 5;
    /// A node becomes a leaf once its variance falls below this fraction of
    /// the root variance.
    double min_variance_fraction = 1e-3;
    /// 0 means unlimited.
    std::size_t max_depth = 0;

    void validate() const;
    friend bool operator==(const TreeConfig&, const TreeConfig&) = default;
};

struct TreeNode {
    enum class Kind : std::uint8_t { Leaf = 0, Numeric = 1, Nominal = 2 };

    Kind kind = Kind::Leaf;
    std::uint32_t feature = 0;
    /// Numeric: values <= threshold go left. Nominal: code == threshold goes left.
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    /// Mean of the training targets reaching this node.
    double value = 0.0;
    /// Number of training instances (bootstrap duplicates counted) reaching this node.
    std::uint64_t support = 0;

    bool leaf() const noexcept { return kind == Kind::Leaf; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Variance-reduction regression tree over a flat node array; node 0 is the root.
class RegressionTree final : public Regressor {
public:
    RegressionTree() = default;
    RegressionTree(std::vector<TreeNode> nodes, std::vector<std::size_t> cardinality);

    double predict(std::span<const double> x) const override;
    std::size_t input_width() const override { return cardinality_.size(); }

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    /// Per-feature nominal cardinality (0 for numeric features).
    const std::vector<std::size_t>& cardinality() const noexcept { return cardinality_; }
    std::size_t leaf_count() const noexcept;
    std::size_t depth() const noexcept;

    /// Index of the leaf `x` is routed to.
    std::size_t route(std::span<const double> x) const;

    void save(BinaryWriter& out) const;
    static RegressionTree load(BinaryReader& in);

    friend bool operator==(const RegressionTree& a, const RegressionTree& b) {
        return a.nodes_ == b.nodes_ && a.cardinality_ == b.cardinality_;
    }

private:
    std::vector<TreeNode> nodes_;
    std::vector<std::size_t> cardinality_;
};

RegressionTree train_tree(const Matrix& x, std::span<const double> y, const TreeConfig& config,
                          std::span<const FeatureDescriptor> schema);

struct BaggingConfig {
    TreeConfig tree;
    std::size_t trees = 100;
    /// Test hook: when false every tree sees the full training set once.
    bool bootstrap = true;

    void validate() const;
    friend bool operator==(const BaggingConfig&, const BaggingConfig&) = default;
};

/// Mean of T regression trees, each grown on a bootstrap resample drawn
/// from (seed, tree index).
class BaggedEnsemble final : public Regressor {
public:
    BaggedEnsemble() = default;
    BaggedEnsemble(std::vector<RegressionTree> trees, std::uint64_t seed);

    double predict(std::span<const double> x) const override;
    std::size_t input_width() const override;

    const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
    std::uint64_t seed() const noexcept { return seed_; }

    void save(BinaryWriter& out) const;
    static BaggedEnsemble load(BinaryReader& in);

    friend bool operator==(const BaggedEnsemble& a, const BaggedEnsemble& b) {
        return a.trees_ == b.trees_ && a.seed_ == b.seed_;
    }

private:
    std::vector<RegressionTree> trees_;
    std::uint64_t seed_ = 0;
};

BaggedEnsemble train_bagging(const Matrix& x, std::span<const double> y,
                             std::span<const FeatureDescriptor> schema, const BaggingConfig& config,
                             std::uint64_t seed);

class BaggingLearner final : public Learner {
public:
    explicit BaggingLearner(BaggingConfig config);
    RegressorPtr fit(const Matrix& x, std::span<const double> y,
                     std::span<const FeatureDescriptor> schema, std::uint64_t seed) const override;
    const BaggingConfig& config() const noexcept { return config_; }

private:
    BaggingConfig config_;
};

}  // namespace mtr
