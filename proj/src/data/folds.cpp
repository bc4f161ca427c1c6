#include <numeric>

#include "mtr/data.hpp"
#include "mtr/rng.hpp"

namespace mtr {

FoldAssignment make_kfold(std::size_t n, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw ConfigError("fold count must be at least 2");
    if (folds > n)
        throw ConfigError("fold count " + std::to_string(folds) + " exceeds example count " +
                          std::to_string(n));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
    FoldAssignment out{std::vector<std::size_t>(n), folds};
    for (std::size_t i = 0; i < n; ++i) out.fold_of[order[i]] = i % folds;
    return out;
}

std::vector<std::size_t> FoldAssignment::test_rows(std::size_t fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
        if (fold_of[i] == fold) rows.push_back(i);
    return rows;
}

std::vector<std::size_t> FoldAssignment::train_rows(std::size_t fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
        if (fold_of[i] != fold) rows.push_back(i);
    return rows;
}

std::vector<std::size_t> FoldAssignment::sizes() const {
    std::vector<std::size_t> out(folds, 0);
    for (auto f : fold_of) ++out[f];
    return out;
}

}  // namespace mtr
