#include "common.hpp"
#include "mtr/parallel.hpp"

namespace mtr {

MtrModel::MtrModel(MethodKind kind, MethodConfig config, std::vector<FeatureDescriptor> descriptors,
                   std::vector<std::string> target_names, Body body)
    : kind_(kind),
      config_(std::move(config)),
      descriptors_(std::move(descriptors)),
      target_names_(std::move(target_names)),
      body_(std::move(body)) {}

std::vector<double> MtrModel::predict(std::span<const double> x) const {
    detail::check_width(x, descriptors_.size(), "predict");
    struct Visitor {
        std::span<const double> x;
        std::vector<double> operator()(const TrainMean& m) const { return m.means; }
        std::vector<double> operator()(const StModel& m) const { return predict_st(m, x); }
        std::vector<double> operator()(const MtsModel& m) const { return predict_mts(m, x); }
        std::vector<double> operator()(const RcModel& m) const { return predict_rc(m, x); }
        std::vector<double> operator()(const ErcModel& m) const { return predict_erc(m, x); }
    };
    return std::visit(Visitor{x}, body_);
}

Matrix MtrModel::predict(const Matrix& x) const {
    if (x.cols() != descriptors_.size())
        throw DimensionError("predict: model expects " + std::to_string(descriptors_.size()) +
                             " features, input has " + std::to_string(x.cols()));
    Matrix out(x.rows(), target_names_.size());
    parallel_for(x.rows(), [&](std::size_t r) {
        auto pred = predict(x.row(r));
        std::copy(pred.begin(), pred.end(), out.row(r).begin());
    });
    return out;
}

MtrModel train_model(MethodKind kind, const MultiTargetDataset& data, const MethodConfig& config) {
    const BaggingLearner learner(config.base);
    return train_model(kind, data, config, learner);
}

MtrModel train_model(MethodKind kind, const MultiTargetDataset& data, const MethodConfig& config,
                     const Learner& learner) {
    config.validate();
    if (data.num_targets() == 0) throw DataError("training data has no targets");
    auto make = [&](MtrModel::Body body) {
        return MtrModel(kind, config, data.descriptors(), data.target_names(), std::move(body));
    };
    switch (kind) {
        case MethodKind::TrainMean:
            return make(MtrModel::TrainMean{column_means(data.targets())});
        case MethodKind::ST:
            return make(train_st(data, learner, config));
        case MethodKind::MTS:
            return make(train_mts(data, learner, config));
        case MethodKind::MTSC:
            return make(train_mtsc(data, learner, config));
        case MethodKind::RC:
        case MethodKind::RCC: {
            auto chain = detail::resolve_chain(config, data.num_targets());
            return make(kind == MethodKind::RC ? train_rc(data, chain, learner, config)
                                               : train_rcc(data, chain, learner, config));
        }
        case MethodKind::ERC:
            return make(train_erc(data, learner, config, false));
        case MethodKind::ERCC:
            return make(train_erc(data, learner, config, true));
    }
    throw ConfigError("unknown method");
}

}  // namespace mtr
