#include <fstream>

#include "mtr/binary_io.hpp"
#include "mtr/methods.hpp"

namespace mtr {

namespace {

constexpr std::uint32_t kFormatVersion = 1;

void write_regressor(BinaryWriter& out, const RegressorPtr& reg) {
    if (const auto* bag = dynamic_cast<const BaggedEnsemble*>(reg.get())) {
        bag->save(out);
    } else if (const auto* c = dynamic_cast<const ConstantRegressor*>(reg.get())) {
        out.tag("CONS");
        out.f64(c->value());
        out.u64(c->input_width());
    } else {
        throw SerializationError("model contains a regressor type that cannot be serialized");
    }
}

RegressorPtr read_regressor(BinaryReader& in, std::istream& raw) {
    char tag[4];
    raw.read(tag, 4);
    if (!raw) throw SerializationError("unexpected end of model file");
    const std::string t(tag, 4);
    raw.seekg(-4, std::ios::cur);
    if (t == "BAGG") return std::make_shared<BaggedEnsemble>(BaggedEnsemble::load(in));
    if (t == "CONS") {
        in.expect("CONS");
        const double v = in.f64();
        const auto w = in.count();
        return std::make_shared<ConstantRegressor>(v, w);
    }
    throw SerializationError("unknown regressor tag '" + t + "'");
}

void write_regressors(BinaryWriter& out, const std::vector<RegressorPtr>& regs) {
    out.u64(regs.size());
    for (const auto& r : regs) write_regressor(out, r);
}

std::vector<RegressorPtr> read_regressors(BinaryReader& in, std::istream& raw) {
    std::vector<RegressorPtr> regs(in.count(1u << 20));
    for (auto& r : regs) r = read_regressor(in, raw);
    return regs;
}

void write_indices(BinaryWriter& out, const std::vector<std::size_t>& v) {
    out.u64(v.size());
    for (auto i : v) out.u64(i);
}

std::vector<std::size_t> read_indices(BinaryReader& in) {
    std::vector<std::size_t> v(in.count(1u << 20));
    for (auto& i : v) i = in.count();
    return v;
}

void write_chain(BinaryWriter& out, const RcModel& rc) {
    out.tag("CHAI");
    write_indices(out, rc.chain);
    out.u8(rc.corrected ? 1 : 0);
    out.u64(rc.folds);
    write_regressors(out, rc.links);
}

RcModel read_chain(BinaryReader& in, std::istream& raw) {
    in.expect("CHAI");
    RcModel rc;
    rc.chain = read_indices(in);
    rc.corrected = in.u8() != 0;
    rc.folds = in.count();
    rc.links = read_regressors(in, raw);
    if (rc.links.size() != rc.chain.size()) throw SerializationError("chain/link count mismatch");
    return rc;
}

}  // namespace

void save_model(const MtrModel& model, std::ostream& out_stream) {
    BinaryWriter out(out_stream);
    out.tag("MTRM");
    out.u32(kFormatVersion);
    out.str(std::string(method_name(model.kind())));

    const auto& cfg = model.config();
    out.tag("CONF");
    out.u64(cfg.seed);
    out.u64(cfg.folds);
    out.u64(cfg.chains);
    out.u64(cfg.base.trees);
    out.u8(cfg.base.bootstrap ? 1 : 0);
    out.u64(cfg.base.tree.min_leaf);
    out.f64(cfg.base.tree.min_variance_fraction);
    out.u64(cfg.base.tree.max_depth);
    out.u8(cfg.chain ? 1 : 0);
    if (cfg.chain) write_indices(out, *cfg.chain);

    out.tag("SCHM");
    out.u64(model.descriptors().size());
    for (const auto& d : model.descriptors()) {
        out.str(d.name);
        out.u64(d.values.size());
        for (const auto& v : d.values) out.str(v);
    }
    out.u64(model.target_names().size());
    for (const auto& n : model.target_names()) out.str(n);

    out.tag("BODY");
    struct Visitor {
        BinaryWriter& out;
        void operator()(const MtrModel::TrainMean& m) const {
            out.u64(m.means.size());
            for (double v : m.means) out.f64(v);
        }
        void operator()(const StModel& m) const { write_regressors(out, m.per_target); }
        void operator()(const MtsModel& m) const {
            out.u8(m.corrected ? 1 : 0);
            out.u64(m.folds);
            write_regressors(out, m.first_stage.per_target);
            write_regressors(out, m.second_stage);
        }
        void operator()(const RcModel& m) const { write_chain(out, m); }
        void operator()(const ErcModel& m) const {
            out.u64(m.members.size());
            for (const auto& member : m.members) write_chain(out, member);
        }
    };
    std::visit(Visitor{out}, model.body());
    out.tag("END.");
    if (!out_stream) throw SerializationError("failed writing model");
}

MtrModel load_model(std::istream& raw) {
    BinaryReader in(raw);
    in.expect("MTRM");
    const auto version = in.u32();
    if (version != kFormatVersion)
        throw SerializationError("unsupported model format version " + std::to_string(version));
    const auto kind = parse_method(in.str());
    if (!kind) throw SerializationError("unknown method in model file");

    in.expect("CONF");
    MethodConfig cfg;
    cfg.seed = in.u64();
    cfg.folds = in.count();
    cfg.chains = in.count();
    cfg.base.trees = in.count();
    cfg.base.bootstrap = in.u8() != 0;
    cfg.base.tree.min_leaf = in.count();
    cfg.base.tree.min_variance_fraction = in.f64();
    cfg.base.tree.max_depth = in.count();
    if (in.u8() != 0) cfg.chain = read_indices(in);

    in.expect("SCHM");
    std::vector<FeatureDescriptor> descriptors(in.count(1u << 24));
    for (auto& d : descriptors) {
        d.name = in.str();
        d.values.resize(in.count(1u << 24));
        for (auto& v : d.values) v = in.str();
    }
    std::vector<std::string> targets(in.count(1u << 20));
    for (auto& t : targets) t = in.str();

    in.expect("BODY");
    MtrModel::Body body;
    switch (*kind) {
        case MethodKind::TrainMean: {
            MtrModel::TrainMean m;
            m.means.resize(in.count(1u << 20));
            for (auto& v : m.means) v = in.f64();
            body = std::move(m);
            break;
        }
        case MethodKind::ST:
            body = StModel{read_regressors(in, raw)};
            break;
        case MethodKind::MTS:
        case MethodKind::MTSC: {
            MtsModel m;
            m.corrected = in.u8() != 0;
            m.folds = in.count();
            m.first_stage.per_target = read_regressors(in, raw);
            m.second_stage = read_regressors(in, raw);
            body = std::move(m);
            break;
        }
        case MethodKind::RC:
        case MethodKind::RCC:
            body = read_chain(in, raw);
            break;
        case MethodKind::ERC:
        case MethodKind::ERCC: {
            ErcModel m;
            m.members.resize(in.count(1u << 20));
            for (auto& member : m.members) member = read_chain(in, raw);
            body = std::move(m);
            break;
        }
    }
    in.expect("END.");
    return MtrModel(*kind, std::move(cfg), std::move(descriptors), std::move(targets), std::move(body));
}

void save_model(const MtrModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SerializationError("cannot write '" + path.string() + "'");
    save_model(model, out);
}

MtrModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SerializationError("cannot open '" + path.string() + "'");
    return load_model(in);
}

}  // namespace mtr
