#include "mtr/eval.hpp"

#include <chrono>
#include <cmath>

#include "mtr/parallel.hpp"

namespace mtr {

ErrorSums& ErrorSums::operator+=(const ErrorSums& other) {
    if (numerator.empty()) {
        *this = other;
        return *this;
    }
    if (other.numerator.size() != numerator.size())
        throw DimensionError("ErrorSums: target count mismatch");
    for (std::size_t j = 0; j < numerator.size(); ++j) {
        numerator[j] += other.numerator[j];
        denominator[j] += other.denominator[j];
    }
    return *this;
}

ErrorSums error_sums(const Matrix& predictions, const Matrix& actuals,
                     std::span<const double> train_means) {
    if (predictions.rows() != actuals.rows() || predictions.cols() != actuals.cols())
        throw DimensionError("rrmse: prediction and actual shapes differ");
    if (train_means.size() != actuals.cols())
        throw DimensionError("rrmse: train mean count does not match targets");
    if (actuals.rows() == 0) throw DimensionError("rrmse: empty test set");
    const std::size_t m = actuals.cols();
    ErrorSums sums{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
    for (std::size_t r = 0; r < actuals.rows(); ++r) {
        for (std::size_t j = 0; j < m; ++j) {
            const double e = predictions(r, j) - actuals(r, j);
            const double b = train_means[j] - actuals(r, j);
            sums.numerator[j] += e * e;
            sums.denominator[j] += b * b;
        }
    }
    return sums;
}

std::vector<std::optional<double>> rrmse_from_sums(const ErrorSums& sums) {
    std::vector<std::optional<double>> out(sums.numerator.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        if (sums.denominator[j] > 0.0) out[j] = std::sqrt(sums.numerator[j] / sums.denominator[j]);
    }
    return out;
}

std::vector<std::optional<double>> rrmse(const Matrix& predictions, const Matrix& actuals,
                                         std::span<const double> train_means) {
    return rrmse_from_sums(error_sums(predictions, actuals, train_means));
}

namespace {

MtrModel fit(const MethodSpec& method, const MultiTargetDataset& train) {
    if (method.learner) return train_model(method.kind, train, method.config, *method.learner);
    return train_model(method.kind, train, method.config);
}

void finish(EvaluationReport& report, const std::vector<std::string>& names,
            const std::vector<std::optional<double>>& scores) {
    double sum = 0.0;
    std::size_t defined = 0;
    for (std::size_t j = 0; j < names.size(); ++j) {
        report.per_target.push_back({names[j], scores[j]});
        if (scores[j]) {
            sum += *scores[j];
            ++defined;
        } else {
            report.warnings.push_back("target '" + names[j] +
                                      "': zero denominator, RRMSE undefined and excluded from aRRMSE");
        }
    }
    if (defined > 0) report.arrmse = sum / static_cast<double>(defined);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

EvaluationReport evaluate_holdout(const MethodSpec& method, const MultiTargetDataset& train,
                                  const MultiTargetDataset& test, const std::string& dataset_name) {
    if (!train.same_schema(test)) throw DataError("hold-out train and test schemas differ");
    const auto start = std::chrono::steady_clock::now();
    EvaluationReport report;
    report.method = method.name;
    report.dataset = dataset_name;
    report.protocol = HoldoutProtocol{"train " + std::to_string(train.size()) + " / test " +
                                      std::to_string(test.size())};
    const auto model = fit(method, train);
    const auto means = column_means(train.targets());
    const auto pred = model.predict(test.features());
    finish(report, train.target_names(), rrmse(pred, test.targets(), means));
    report.wall_seconds = seconds_since(start);
    return report;
}

EvaluationReport evaluate_kfold(const MethodSpec& method, const MultiTargetDataset& data,
                                std::size_t folds, std::uint64_t seed, FoldPooling pooling,
                                const std::string& dataset_name) {
    const auto start = std::chrono::steady_clock::now();
    const auto assignment = make_kfold(data.size(), folds, seed);
    std::vector<ErrorSums> per_fold(folds);
    parallel_for(folds, [&](std::size_t fold) {
        const auto train = data.subset(assignment.train_rows(fold));
        const auto test = data.subset(assignment.test_rows(fold));
        const auto model = fit(method, train);
        const auto means = column_means(train.targets());
        per_fold[fold] = error_sums(model.predict(test.features()), test.targets(), means);
    });

    EvaluationReport report;
    report.method = method.name;
    report.dataset = dataset_name;
    report.protocol = KFoldProtocol{folds, seed, pooling};
    const std::size_t m = data.num_targets();
    std::vector<std::optional<double>> scores(m);
    if (pooling == FoldPooling::Micro) {
        ErrorSums total;
        for (const auto& s : per_fold) total += s;
        scores = rrmse_from_sums(total);
    } else {
        for (std::size_t j = 0; j < m; ++j) {
            double sum = 0.0;
            std::size_t count = 0;
            for (const auto& s : per_fold) {
                if (s.denominator[j] > 0.0) {
                    sum += std::sqrt(s.numerator[j] / s.denominator[j]);
                    ++count;
                }
            }
            if (count > 0) scores[j] = sum / static_cast<double>(count);
        }
    }
    finish(report, data.target_names(), scores);
    report.wall_seconds = seconds_since(start);
    return report;
}

}  // namespace mtr
