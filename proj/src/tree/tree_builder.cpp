#include "tree_builder.hpp"

#include <algorithm>
#include <numeric>

namespace mtr::detail {

ColumnStore::ColumnStore(const Matrix& x, std::span<const double> y,
                         std::span<const FeatureDescriptor> schema)
    : rows(x.rows()), target(y.begin(), y.end()) {
    const std::size_t d = x.cols();
    columns.assign(d, std::vector<double>(rows));
    cardinality.assign(d, 0);
    order.resize(d);
    for (std::size_t r = 0; r < rows; ++r) {
        auto row = x.row(r);
        for (std::size_t f = 0; f < d; ++f) columns[f][r] = row[f];
    }
    for (std::size_t f = 0; f < d; ++f) {
        cardinality[f] = schema[f].values.size();
        if (cardinality[f] != 0) continue;
        auto& ord = order[f];
        ord.resize(rows);
        std::iota(ord.begin(), ord.end(), std::uint32_t{0});
        const auto& col = columns[f];
        std::sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) {
            return col[a] < col[b] || (col[a] == col[b] && a < b);
        });
    }
}

namespace {

struct Split {
    bool found = false;
    std::uint32_t feature = 0;
    bool nominal = false;
    double threshold = 0.0;
    double gain = 0.0;
};

class Builder {
public:
    Builder(const ColumnStore& store, std::span<const std::uint32_t> weights, const TreeConfig& config)
        : store_(store), weights_(weights), config_(config), goes_left_(store.rows, 0) {
        const std::size_t d = store.columns.size();
        for (std::uint32_t r = 0; r < store.rows; ++r)
            if (weights[r] > 0) rows_.push_back(r);
        sorted_.resize(d);
        for (std::size_t f = 0; f < d; ++f) {
            if (store.cardinality[f] != 0) continue;
            auto& s = sorted_[f];
            s.reserve(rows_.size());
            for (auto r : store.order[f])
                if (weights[r] > 0) s.push_back(r);
        }
        buffer_.resize(rows_.size());
    }

    RegressionTree build() {
        if (rows_.empty()) throw Error("grow_tree: no instances with positive weight");
        root_variance_ = -1.0;
        grow(0, rows_.size(), 0);
        return RegressionTree(std::move(nodes_), store_.cardinality);
    }

private:
    std::int32_t grow(std::size_t begin, std::size_t end, std::size_t depth) {
        double weight = 0.0;
        double sum = 0.0;
        for (std::size_t k = begin; k < end; ++k) {
            const auto r = rows_[k];
            weight += weights_[r];
            sum += weights_[r] * store_.target[r];
        }
        const double mean = sum / weight;
        double sse = 0.0;
        for (std::size_t k = begin; k < end; ++k) {
            const auto r = rows_[k];
            const double dev = store_.target[r] - mean;
            sse += weights_[r] * dev * dev;
        }
        const double variance = sse / weight;
        if (root_variance_ < 0.0) root_variance_ = variance;

        const auto index = static_cast<std::int32_t>(nodes_.size());
        TreeNode node;
        node.value = mean;
        node.support = static_cast<std::uint64_t>(weight);
        nodes_.push_back(node);

        const bool stop = sse <= 0.0 ||
                          variance < config_.min_variance_fraction * root_variance_ ||
                          weight < 2.0 * static_cast<double>(config_.min_leaf) ||
                          (config_.max_depth > 0 && depth >= config_.max_depth);
        if (stop) return index;

        const Split split = find_split(begin, end, weight, mean, sse);
        if (!split.found) return index;

        std::size_t left_count = 0;
        const auto& col = store_.columns[split.feature];
        for (std::size_t k = begin; k < end; ++k) {
            const auto r = rows_[k];
            const bool left = split.nominal ? col[r] == split.threshold : col[r] <= split.threshold;
            goes_left_[r] = left ? 1 : 0;
            left_count += left ? 1 : 0;
        }
        partition(rows_, begin, end);
        for (std::size_t f = 0; f < sorted_.size(); ++f)
            if (!sorted_[f].empty()) partition(sorted_[f], begin, end);

        const std::size_t mid = begin + left_count;
        const auto left = grow(begin, mid, depth + 1);
        const auto right = grow(mid, end, depth + 1);
        auto& n = nodes_[static_cast<std::size_t>(index)];
        n.kind = split.nominal ? TreeNode::Kind::Nominal : TreeNode::Kind::Numeric;
        n.feature = split.feature;
        n.threshold = split.threshold;
        n.left = left;
        n.right = right;
        return index;
    }

    // Stable partition of a segment by goes_left_.
    void partition(std::vector<std::uint32_t>& arr, std::size_t begin, std::size_t end) {
        std::size_t l = begin;
        std::size_t nr = 0;
        for (std::size_t k = begin; k < end; ++k) {
            const auto r = arr[k];
            if (goes_left_[r])
                arr[l++] = r;
            else
                buffer_[nr++] = r;
        }
        std::copy(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(nr),
                  arr.begin() + static_cast<std::ptrdiff_t>(l));
    }

    // Maximizes SSE(parent) - SSE(left) - SSE(right). Sums are taken over
    // targets centred on the node mean, where the reduction equals
    // sl^2/wl + sr^2/wr - s^2/w.
    Split find_split(std::size_t begin, std::size_t end, double weight, double mean,
                     double sse) const {
        const double min_leaf = static_cast<double>(config_.min_leaf);
        double total = 0.0;
        for (std::size_t k = begin; k < end; ++k) {
            const auto r = rows_[k];
            total += weights_[r] * (store_.target[r] - mean);
        }
        const double base = total * total / weight;
        Split best;
        // Reductions within rounding noise of the parent SSE do not count.
        best.gain = sse * 1e-12;

        for (std::size_t f = 0; f < store_.columns.size(); ++f) {
            const auto& col = store_.columns[f];
            const std::size_t card = store_.cardinality[f];
            if (card == 0) {
                const auto& arr = sorted_[f];
                double wl = 0.0;
                double sl = 0.0;
                for (std::size_t k = begin; k + 1 < end; ++k) {
                    const auto r = arr[k];
                    wl += weights_[r];
                    sl += weights_[r] * (store_.target[r] - mean);
                    const double wr = weight - wl;
                    if (wr < min_leaf) break;
                    const double v = col[r];
                    const double next = col[arr[k + 1]];
                    if (!(v < next) || wl < min_leaf) continue;
                    const double sr = total - sl;
                    const double gain = sl * sl / wl + sr * sr / wr - base;
                    if (gain > best.gain) {
                        double threshold = v + (next - v) / 2.0;
                        if (!(threshold < next)) threshold = v;
                        best = {true, static_cast<std::uint32_t>(f), false, threshold, gain};
                    }
                }
            } else {
                std::vector<double> wc(card, 0.0);
                std::vector<double> sc(card, 0.0);
                for (std::size_t k = begin; k < end; ++k) {
                    const auto r = rows_[k];
                    const double v = col[r];
                    if (v < 0.0 || v >= static_cast<double>(card)) continue;
                    const auto c = static_cast<std::size_t>(v);
                    wc[c] += weights_[r];
                    sc[c] += weights_[r] * (store_.target[r] - mean);
                }
                for (std::size_t c = 0; c < card; ++c) {
                    const double wl = wc[c];
                    const double wr = weight - wl;
                    if (wl < min_leaf || wr < min_leaf) continue;
                    const double sl = sc[c];
                    const double sr = total - sl;
                    const double gain = sl * sl / wl + sr * sr / wr - base;
                    if (gain > best.gain)
                        best = {true, static_cast<std::uint32_t>(f), true, static_cast<double>(c), gain};
                }
            }
        }
        return best;
    }

    const ColumnStore& store_;
    std::span<const std::uint32_t> weights_;
    const TreeConfig& config_;
    std::vector<std::uint32_t> rows_;
    std::vector<std::vector<std::uint32_t>> sorted_;
    std::vector<std::uint32_t> buffer_;
    std::vector<std::uint8_t> goes_left_;
    std::vector<TreeNode> nodes_;
    double root_variance_ = -1.0;
};

}  // namespace

RegressionTree grow_tree(const ColumnStore& store, std::span<const std::uint32_t> weights,
                         const TreeConfig& config) {
    return Builder(store, weights, config).build();
}

}  // namespace mtr::detail
