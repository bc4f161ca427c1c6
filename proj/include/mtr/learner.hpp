#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "mtr/data.hpp"
#include "mtr/matrix.hpp"

namespace mtr {

/// A trained single-target model.
class Regressor {
public:
    virtual ~Regressor() = default;
    virtual double predict(std::span<const double> x) const = 0;
    virtual std::size_t input_width() const = 0;
};

using RegressorPtr = std::shared_ptr<const Regressor>;

/// Factory for single-target models. Implementations must be deterministic
/// in (x, y, schema, seed) and safe to call concurrently.
class Learner {
public:
    virtual ~Learner() = default;
    virtual RegressorPtr fit(const Matrix& x, std::span<const double> y,
                             std::span<const FeatureDescriptor> schema,
                             std::uint64_t seed) const = 0;
};

using LearnerPtr = std::shared_ptr<const Learner>;

/// Predicts a constant: the mean of the training targets.
class ConstantRegressor final : public Regressor {
public:
    ConstantRegressor(double value, std::size_t width) : value_(value), width_(width) {}
    double predict(std::span<const double>) const override { return value_; }
    std::size_t input_width() const override { return width_; }
    double value() const noexcept { return value_; }

private:
    double value_;
    std::size_t width_;
};

class MeanLearner final : public Learner {
public:
    RegressorPtr fit(const Matrix& x, std::span<const double> y,
                     std::span<const FeatureDescriptor> schema, std::uint64_t seed) const override;
};

/// Predictions of `model` for the listed rows of `x`, in order.
std::vector<double> predict_rows(const Regressor& model, const Matrix& x,
                                 std::span<const std::size_t> rows);
std::vector<double> predict_all(const Regressor& model, const Matrix& x);

}  // namespace mtr
