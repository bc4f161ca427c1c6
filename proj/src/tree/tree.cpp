#include "mtr/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tree_builder.hpp"

namespace mtr {

void TreeConfig::validate() const {
    if (min_leaf < 1) throw ConfigError("min_leaf must be at least 1");
    if (!(min_variance_fraction >= 0.0)) throw ConfigError("min_variance_fraction must be >= 0");
}

RegressionTree::RegressionTree(std::vector<TreeNode> nodes, std::vector<std::size_t> cardinality)
    : nodes_(std::move(nodes)), cardinality_(std::move(cardinality)) {
    if (nodes_.empty()) throw Error("tree has no nodes");
}

std::size_t RegressionTree::route(std::span<const double> x) const {
    if (x.size() != cardinality_.size())
        throw DimensionError("tree expects " + std::to_string(cardinality_.size()) +
                             " inputs, got " + std::to_string(x.size()));
    std::size_t i = 0;
    while (!nodes_[i].leaf()) {
        const auto& node = nodes_[i];
        const double v = x[node.feature];
        bool go_left;
        if (node.kind == TreeNode::Kind::Numeric) {
            go_left = v <= node.threshold;
        } else {
            const auto card = static_cast<double>(cardinality_[node.feature]);
            const bool known = v >= 0.0 && v < card && v == std::floor(v);
            if (known) {
                go_left = v == node.threshold;
            } else {
                // Unseen category: follow the better-supported child, left on ties.
                go_left = nodes_[node.left].support >= nodes_[node.right].support;
            }
        }
        i = static_cast<std::size_t>(go_left ? node.left : node.right);
    }
    return i;
}

double RegressionTree::predict(std::span<const double> x) const { return nodes_[route(x)].value; }

std::size_t RegressionTree::leaf_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const auto& n) { return n.leaf(); }));
}

std::size_t RegressionTree::depth() const noexcept {
    std::vector<std::size_t> depth(nodes_.size(), 0);
    std::size_t best = 0;
    // Children always follow their parent in the node array.
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        best = std::max(best, depth[i]);
        if (!nodes_[i].leaf()) {
            depth[static_cast<std::size_t>(nodes_[i].left)] = depth[i] + 1;
            depth[static_cast<std::size_t>(nodes_[i].right)] = depth[i] + 1;
        }
    }
    return best;
}

void RegressionTree::save(BinaryWriter& out) const {
    out.tag("TREE");
    out.u64(cardinality_.size());
    for (auto c : cardinality_) out.u64(c);
    out.u64(nodes_.size());
    for (const auto& n : nodes_) {
        out.u8(static_cast<std::uint8_t>(n.kind));
        out.u32(n.feature);
        out.f64(n.threshold);
        out.i32(n.left);
        out.i32(n.right);
        out.f64(n.value);
        out.u64(n.support);
    }
}

RegressionTree RegressionTree::load(BinaryReader& in) {
    in.expect("TREE");
    std::vector<std::size_t> card(in.count(1u << 24));
    for (auto& c : card) c = in.count();
    std::vector<TreeNode> nodes(in.count(1u << 28));
    for (auto& n : nodes) {
        const auto kind = in.u8();
        if (kind > 2) throw SerializationError("invalid tree node kind");
        n.kind = static_cast<TreeNode::Kind>(kind);
        n.feature = in.u32();
        n.threshold = in.f64();
        n.left = in.i32();
        n.right = in.i32();
        n.value = in.f64();
        n.support = in.u64();
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        if (n.leaf()) continue;
        const auto limit = static_cast<std::int32_t>(nodes.size());
        if (n.feature >= card.size() || n.left <= static_cast<std::int32_t>(i) || n.left >= limit ||
            n.right <= static_cast<std::int32_t>(i) || n.right >= limit)
            throw SerializationError("corrupt tree structure");
    }
    return RegressionTree(std::move(nodes), std::move(card));
}

RegressionTree train_tree(const Matrix& x, std::span<const double> y, const TreeConfig& config,
                          std::span<const FeatureDescriptor> schema) {
    if (x.rows() != y.size())
        throw DimensionError("train_tree: " + std::to_string(x.rows()) + " rows but " +
                             std::to_string(y.size()) + " targets");
    if (schema.size() != x.cols()) throw DimensionError("train_tree: schema width mismatch");
    if (x.rows() == 0) throw DimensionError("train_tree: no training rows");
    config.validate();
    detail::ColumnStore store(x, y, schema);
    std::vector<std::uint32_t> weights(x.rows(), 1);
    return detail::grow_tree(store, weights, config);
}

}  // namespace mtr
