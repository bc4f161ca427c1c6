#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mtr/data.hpp"
#include "mtr/learner.hpp"
#include "mtr/tree.hpp"

namespace mtr {

enum class MethodKind { TrainMean, ST, MTS, MTSC, RC, RCC, ERC, ERCC };

std::string_view method_name(MethodKind kind) noexcept;
/// Case-insensitive; accepts "mean" for the train-mean baseline.
std::optional<MethodKind> parse_method(std::string_view name);

struct MethodConfig {
    BaggingConfig base;
    /// Internal cross-validation folds of the corrected variants.
    std::size_t folds = 10;
    /// Requested chain count of ERC/ERCC, capped at m!.
    std::size_t chains = 10;
    std::uint64_t seed = 1;
    /// Chain for RC/RCC as a permutation of target indices. A seeded random
    /// chain is drawn when absent.
    std::optional<std::vector<std::size_t>> chain;

    void validate() const;
    friend bool operator==(const MethodConfig&, const MethodConfig&) = default;
};

/// Seed roles. Learner seeds are derived from (method seed, role, member,
/// target, fold) so that no two learners of one model share a stream.
/// The learner that produces the final output for target t of member 0 is
/// seeded identically across all methods, which makes every method
/// collapse to ST when m = 1.
namespace seed_role {
inline constexpr std::uint64_t output = 1;
inline constexpr std::uint64_t first_stage = 2;
inline constexpr std::uint64_t fold_model = 3;
inline constexpr std::uint64_t fold_split = 4;
inline constexpr std::uint64_t chains = 5;
}  // namespace seed_role

std::uint64_t output_seed(std::uint64_t seed, std::size_t member, std::size_t target);

struct StModel {
    std::vector<RegressorPtr> per_target;
};

struct MtsModel {
    StModel first_stage;
    /// Learner j consumes [x, yhat_1..yhat_{j-1}, yhat_{j+1}..yhat_m].
    std::vector<RegressorPtr> second_stage;
    bool corrected = false;
    std::size_t folds = 0;
};

struct RcModel {
    std::vector<std::size_t> chain;
    /// Link p predicts target chain[p] from [x, yhat_chain[0..p-1]].
    std::vector<RegressorPtr> links;
    bool corrected = false;
    std::size_t folds = 0;
};

struct ErcModel {
    std::vector<RcModel> members;
};

StModel train_st(const MultiTargetDataset& data, const Learner& learner, const MethodConfig& config);
std::vector<double> predict_st(const StModel& model, std::span<const double> x);

/// In-sample stacking: meta-features are the first stage's predictions on
/// its own training rows.
MtsModel train_mts(const MultiTargetDataset& data, const Learner& learner,
                   const MethodConfig& config);
/// Corrected stacking: meta-features come from models that never saw the
/// row (one shared fold assignment across targets).
MtsModel train_mtsc(const MultiTargetDataset& data, const Learner& learner,
                    const MethodConfig& config);
std::vector<double> predict_mts(const MtsModel& model, std::span<const double> x);

/// Builds the stacking meta-feature matrix (n x m) used by train_mts /
/// train_mtsc. Exposed for inspection.
Matrix mts_meta_features(const MultiTargetDataset& data, const Learner& learner,
                         const MethodConfig& config, bool corrected);

/// Plain chain: link p is trained on the true values of earlier chain targets.
RcModel train_rc(const MultiTargetDataset& data, std::span<const std::size_t> chain,
                 const Learner& learner, const MethodConfig& config, std::size_t member = 0);
/// Corrected chain: earlier chain targets enter as out-of-fold estimates.
RcModel train_rcc(const MultiTargetDataset& data, std::span<const std::size_t> chain,
                  const Learner& learner, const MethodConfig& config, std::size_t member = 0);
/// Outputs are returned in canonical target order.
std::vector<double> predict_rc(const RcModel& model, std::span<const double> x);

/// The augmented training matrix [X | meta columns] seen by the last link,
/// with meta columns in chain order.
Matrix rc_augmented_inputs(const MultiTargetDataset& data, std::span<const std::size_t> chain,
                           const Learner& learner, const MethodConfig& config, bool corrected,
                           std::size_t member = 0);

/// min(k, m!) pairwise distinct chains. All permutations in lexicographic
/// order when m! <= k, otherwise seeded Fisher-Yates draws with duplicate
/// rejection.
std::vector<std::vector<std::size_t>> draw_chains(std::size_t m, std::size_t k, std::uint64_t seed);

ErcModel train_erc(const MultiTargetDataset& data, const Learner& learner,
                   const MethodConfig& config, bool corrected);
std::vector<double> predict_erc(const ErcModel& model, std::span<const double> x);

/// A trained multi-target model of any method with its input schema.
class MtrModel {
public:
    struct TrainMean {
        std::vector<double> means;
    };
    using Body = std::variant<TrainMean, StModel, MtsModel, RcModel, ErcModel>;

    MtrModel(MethodKind kind, MethodConfig config, std::vector<FeatureDescriptor> descriptors,
             std::vector<std::string> target_names, Body body);

    MethodKind kind() const noexcept { return kind_; }
    const MethodConfig& config() const noexcept { return config_; }
    const std::vector<FeatureDescriptor>& descriptors() const noexcept { return descriptors_; }
    const std::vector<std::string>& target_names() const noexcept { return target_names_; }
    std::size_t num_features() const noexcept { return descriptors_.size(); }
    std::size_t num_targets() const noexcept { return target_names_.size(); }
    const Body& body() const noexcept { return body_; }

    std::vector<double> predict(std::span<const double> x) const;
    /// One output row per input row.
    Matrix predict(const Matrix& x) const;

private:
    MethodKind kind_;
    MethodConfig config_;
    std::vector<FeatureDescriptor> descriptors_;
    std::vector<std::string> target_names_;
    Body body_;
};

/// Trains `kind` with the bagged-tree learner described by `config.base`.
MtrModel train_model(MethodKind kind, const MultiTargetDataset& data, const MethodConfig& config);
/// Same with an arbitrary base learner.
MtrModel train_model(MethodKind kind, const MultiTargetDataset& data, const MethodConfig& config,
                     const Learner& learner);

/// Versioned binary container. Only built-in regressors (bagged trees and
/// constants) are serializable.
void save_model(const MtrModel& model, std::ostream& out);
MtrModel load_model(std::istream& in);
void save_model(const MtrModel& model, const std::filesystem::path& path);
MtrModel load_model(const std::filesystem::path& path);

}  // namespace mtr
