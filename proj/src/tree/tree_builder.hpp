#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mtr/tree.hpp"

namespace mtr::detail {

/// Column-major copy of a training set with every numeric feature presorted
/// once; shared read-only by all trees of a bagged ensemble.
struct ColumnStore {
    ColumnStore(const Matrix& x, std::span<const double> y, std::span<const FeatureDescriptor> schema);

    std::size_t rows = 0;
    std::vector<std::vector<double>> columns;
    std::vector<double> target;
    std::vector<std::size_t> cardinality;        // 0 for numeric features
    std::vector<std::vector<std::uint32_t>> order;  // ascending (value, row) per numeric feature
};

/// Grows one tree on the instances with nonzero `weights` (bootstrap
/// multiplicities).
RegressionTree grow_tree(const ColumnStore& store, std::span<const std::uint32_t> weights,
                         const TreeConfig& config);

}  // namespace mtr::detail
