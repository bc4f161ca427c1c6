#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mtr/data.hpp"
#include "mtr/methods.hpp"

namespace mtr {

/// Per-target sums of one test set: sum (yhat - y)^2 and sum (ybar_train - y)^2.
struct ErrorSums {
    std::vector<double> numerator;
    std::vector<double> denominator;

    ErrorSums& operator+=(const ErrorSums& other);
};

ErrorSums error_sums(const Matrix& predictions, const Matrix& actuals,
                     std::span<const double> train_means);

/// sqrt(numerator / denominator) per target, unscaled. nullopt flags a zero
/// denominator (every test target equals the train mean).
std::vector<std::optional<double>> rrmse_from_sums(const ErrorSums& sums);

std::vector<std::optional<double>> rrmse(const Matrix& predictions, const Matrix& actuals,
                                         std::span<const double> train_means);

/// How per-fold results combine under cross-validation.
enum class FoldPooling {
    Micro,  // sum numerators and denominators over folds, then take the root
    Macro,  // average the per-fold RRMSE values
};

struct HoldoutProtocol {
    std::string description;
};
struct KFoldProtocol {
    std::size_t folds = 10;
    std::uint64_t seed = 1;
    FoldPooling pooling = FoldPooling::Micro;
};
using Protocol = std::variant<HoldoutProtocol, KFoldProtocol>;

struct TargetScore {
    std::string target_name;
    std::optional<double> rrmse;  // unscaled

    /// RRMSE x 100, the scale of the published tables.
    std::optional<double> percent() const {
        return rrmse ? std::optional<double>(*rrmse * 100.0) : std::nullopt;
    }
};

struct EvaluationReport {
    std::string method;
    std::string dataset;
    std::vector<TargetScore> per_target;
    /// Mean of the defined per-target RRMSE values (unscaled).
    std::optional<double> arrmse;
    Protocol protocol;
    double wall_seconds = 0.0;
    std::vector<std::string> warnings;
};

/// A named method with its configuration. `learner` overrides the bagged
/// tree learner built from `config.base`.
struct MethodSpec {
    std::string name;
    MethodKind kind = MethodKind::ST;
    MethodConfig config;
    LearnerPtr learner;
};

EvaluationReport evaluate_holdout(const MethodSpec& method, const MultiTargetDataset& train,
                                  const MultiTargetDataset& test, const std::string& dataset_name = "");

EvaluationReport evaluate_kfold(const MethodSpec& method, const MultiTargetDataset& data,
                                std::size_t folds, std::uint64_t seed,
                                FoldPooling pooling = FoldPooling::Micro,
                                const std::string& dataset_name = "");

}  // namespace mtr
