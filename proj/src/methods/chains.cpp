#include <algorithm>
#include <numeric>
#include <set>

#include "common.hpp"
#include "mtr/parallel.hpp"
#include "mtr/rng.hpp"

namespace mtr {

namespace {

void check_chain(std::span<const std::size_t> chain, std::size_t m) {
    if (chain.size() != m)
        throw ConfigError("chain length " + std::to_string(chain.size()) + " does not match " +
                          std::to_string(m) + " targets");
    std::vector<bool> seen(m, false);
    for (auto t : chain) {
        if (t >= m || seen[t]) throw ConfigError("chain is not a permutation of the targets");
        seen[t] = true;
    }
}

struct ChainBuild {
    std::vector<RegressorPtr> links;
    Matrix augmented;  // inputs of the last link
};

std::vector<FeatureDescriptor> link_schema(const MultiTargetDataset& data,
                                           std::span<const std::size_t> chain, std::size_t p) {
    std::vector<std::string> names;
    for (std::size_t q = 0; q < p; ++q) names.push_back(data.target_names()[chain[q]]);
    return detail::augmented_schema(data.descriptors(), names);
}

// Link p trains on [X | meta columns 0..p-1]. In the plain variant meta
// column q holds the true values of chain[q]; in the corrected variant it
// holds out-of-fold estimates produced by fold links over the same
// augmented inputs.
ChainBuild build_chain(const MultiTargetDataset& data, std::span<const std::size_t> chain,
                       const Learner& learner, const MethodConfig& config, bool corrected,
                       std::size_t member, bool train_last_link) {
    const std::size_t n = data.size();
    const std::size_t m = data.num_targets();
    check_chain(chain, m);
    std::optional<FoldAssignment> folds;
    if (corrected && m > 1) {
        if (config.folds > n)
            throw ConfigError("internal folds (" + std::to_string(config.folds) +
                              ") exceed training examples (" + std::to_string(n) + ")");
        folds = make_kfold(n, config.folds,
                           derive_seed(config.seed, {seed_role::fold_split, member}));
    }

    ChainBuild out;
    out.links.resize(m);
    Matrix augmented = data.features();
    for (std::size_t p = 0; p < m; ++p) {
        const std::size_t target = chain[p];
        const auto y = data.targets().column(target);
        const auto schema = link_schema(data, chain, p);
        if (train_last_link || p + 1 < m)
            out.links[p] = learner.fit(augmented, y, schema, output_seed(config.seed, member, target));
        if (p + 1 == m) break;

        std::vector<double> meta(n);
        if (!corrected) {
            meta = y;
        } else {
            parallel_for(folds->folds, [&](std::size_t fold) {
                const auto train_rows = folds->train_rows(fold);
                const auto test_rows = folds->test_rows(fold);
                const Matrix x = augmented.select_rows(train_rows);
                std::vector<double> yf(train_rows.size());
                for (std::size_t i = 0; i < train_rows.size(); ++i) yf[i] = y[train_rows[i]];
                auto model = learner.fit(
                    x, yf, schema,
                    derive_seed(config.seed, {seed_role::fold_model, member, target, fold}));
                auto pred = predict_rows(*model, augmented, test_rows);
                for (std::size_t i = 0; i < test_rows.size(); ++i) meta[test_rows[i]] = pred[i];
            });
        }
        augmented = augmented.with_column(meta);
    }
    out.augmented = std::move(augmented);
    return out;
}

std::vector<std::size_t> default_chain(const MethodConfig& config, std::size_t m) {
    if (config.chain) return *config.chain;
    return draw_chains(m, 1, derive_seed(config.seed, {seed_role::chains}))[0];
}

}  // namespace

RcModel train_rc(const MultiTargetDataset& data, std::span<const std::size_t> chain,
                 const Learner& learner, const MethodConfig& config, std::size_t member) {
    auto built = build_chain(data, chain, learner, config, false, member, true);
    return RcModel{{chain.begin(), chain.end()}, std::move(built.links), false, 0};
}

RcModel train_rcc(const MultiTargetDataset& data, std::span<const std::size_t> chain,
                  const Learner& learner, const MethodConfig& config, std::size_t member) {
    auto built = build_chain(data, chain, learner, config, true, member, true);
    return RcModel{{chain.begin(), chain.end()}, std::move(built.links), true, config.folds};
}

Matrix rc_augmented_inputs(const MultiTargetDataset& data, std::span<const std::size_t> chain,
                           const Learner& learner, const MethodConfig& config, bool corrected,
                           std::size_t member) {
    return build_chain(data, chain, learner, config, corrected, member, false).augmented;
}

std::vector<double> predict_rc(const RcModel& model, std::span<const double> x) {
    const std::size_t m = model.links.size();
    std::vector<double> input(x.begin(), x.end());
    input.reserve(x.size() + m);
    std::vector<double> out(m);
    for (std::size_t p = 0; p < m; ++p) {
        const double v = model.links[p]->predict(input);
        out[model.chain[p]] = v;
        input.push_back(v);
    }
    return out;
}

std::vector<std::vector<std::size_t>> draw_chains(std::size_t m, std::size_t k, std::uint64_t seed) {
    if (m == 0) throw ConfigError("draw_chains: no targets");
    if (k == 0) throw ConfigError("draw_chains: k must be at least 1");
    // m! <= k ?
    std::size_t factorial = 1;
    bool enumerate_all = true;
    for (std::size_t i = 2; i <= m; ++i) {
        factorial *= i;
        if (factorial > k) {
            enumerate_all = false;
            break;
        }
    }
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::vector<std::vector<std::size_t>> chains;
    if (enumerate_all) {
        do {
            chains.push_back(perm);
        } while (std::next_permutation(perm.begin(), perm.end()));
        return chains;
    }
    Rng rng(seed);
    std::set<std::vector<std::size_t>> seen;
    while (chains.size() < k) {
        auto candidate = perm;
        rng.shuffle(std::span<std::size_t>(candidate));
        if (seen.insert(candidate).second) chains.push_back(std::move(candidate));
    }
    return chains;
}

ErcModel train_erc(const MultiTargetDataset& data, const Learner& learner,
                   const MethodConfig& config, bool corrected) {
    const auto chains =
        draw_chains(data.num_targets(), config.chains, derive_seed(config.seed, {seed_role::chains}));
    ErcModel model;
    model.members.resize(chains.size());
    // Every member sees the full training set.
    parallel_for(chains.size(), [&](std::size_t i) {
        model.members[i] = corrected ? train_rcc(data, chains[i], learner, config, i)
                                     : train_rc(data, chains[i], learner, config, i);
    });
    return model;
}

std::vector<double> predict_erc(const ErcModel& model, std::span<const double> x) {
    std::vector<double> sum;
    for (const auto& member : model.members) {
        auto pred = predict_rc(member, x);
        if (sum.empty())
            sum = std::move(pred);
        else
            for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += pred[j];
    }
    for (auto& v : sum) v /= static_cast<double>(model.members.size());
    return sum;
}

namespace detail {
std::vector<std::size_t> resolve_chain(const MethodConfig& config, std::size_t m) {
    return default_chain(config, m);
}
}  // namespace detail

}  // namespace mtr
