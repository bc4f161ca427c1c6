#include <doctest.h>

#include <sstream>

#include "mtr/binary_io.hpp"
#include "mtr/error.hpp"
#include "mtr/tree.hpp"
#include "support/fixtures.hpp"

using namespace mtr;

namespace {

std::vector<FeatureDescriptor> numeric_schema(std::size_t d) {
    std::vector<FeatureDescriptor> s;
    for (std::size_t c = 0; c < d; ++c) s.push_back(FeatureDescriptor::numeric("x" + std::to_string(c)));
    return s;
}

Matrix column(std::initializer_list<double> values) {
    Matrix m(values.size(), 1);
    std::size_t r = 0;
    for (double v : values) m(r++, 0) = v;
    return m;
}

double one(const Regressor& model, double x) {
    const double v[] = {x};
    return model.predict(v);
}

}  // namespace

TEST_CASE("constant target gives a single leaf") {
    const auto x = column({0, 1, 2, 3, 4, 5});
    const std::vector<double> y(6, 3.0);
    const auto tree = train_tree(x, y, TreeConfig{}, numeric_schema(1));
    CHECK(tree.nodes().size() == 1);
    CHECK(one(tree, 17.0) == 3.0);
}

TEST_CASE("hand-enumerated split at 1.5") {
    const auto x = column({0, 1, 2, 3});
    const std::vector<double> y{0, 0, 10, 10};
    TreeConfig cfg;
    cfg.min_leaf = 1;
    const auto tree = train_tree(x, y, cfg, numeric_schema(1));
    REQUIRE(tree.nodes().size() == 3);
    CHECK(tree.nodes()[0].kind == TreeNode::Kind::Numeric);
    CHECK(tree.nodes()[0].threshold == 1.5);
    CHECK(tree.leaf_count() == 2);
    double sse = 0.0;
    for (std::size_t r = 0; r < 4; ++r) {
        const double e = tree.predict(x.row(r)) - y[r];
        sse += e * e;
    }
    CHECK(sse == 0.0);
    CHECK(one(tree, 2.5) == 10.0);
    CHECK(one(tree, 1.5) == 0.0);
    CHECK(one(tree, -100.0) == 0.0);
}

TEST_CASE("single example") {
    const auto tree = train_tree(column({4.0}), std::vector<double>{7.5}, TreeConfig{}, numeric_schema(1));
    REQUIRE(tree.nodes().size() == 1);
    CHECK(tree.nodes()[0].support == 1);
    CHECK(one(tree, 0.0) == 7.5);
}

TEST_CASE("min_leaf blocks small children") {
    const auto x = column({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    std::vector<double> y{0, 0, 0, 0, 0, 0, 0, 0, 0, 100};
    TreeConfig cfg;
    cfg.min_leaf = 5;
    const auto tree = train_tree(x, y, cfg, numeric_schema(1));
    for (const auto& node : tree.nodes())
        if (node.leaf()) CHECK(node.support >= 5);
}

TEST_CASE("depth limit") {
    auto data = fixtures::smooth_dataset(200, 3, 1, 4);
    TreeConfig cfg;
    cfg.min_leaf = 1;
    cfg.max_depth = 2;
    const auto tree = train_tree(data.features(), data.targets().column(0), cfg, data.descriptors());
    CHECK(tree.depth() <= 2);
    CHECK(tree.leaf_count() <= 4);
}

TEST_CASE("nominal one-vs-rest split and unseen category") {
    // codes 0,1,2 ; category 1 is the odd one out
    Matrix x(9, 1);
    std::vector<double> y;
    for (std::size_t r = 0; r < 9; ++r) {
        x(r, 0) = static_cast<double>(r % 3);
        y.push_back(r % 3 == 1 ? 50.0 : 1.0);
    }
    std::vector<FeatureDescriptor> schema{FeatureDescriptor::categorical("c", {"a", "b", "c"})};
    TreeConfig cfg;
    cfg.min_leaf = 1;
    const auto tree = train_tree(x, y, cfg, schema);
    REQUIRE(tree.nodes()[0].kind == TreeNode::Kind::Nominal);
    CHECK(tree.nodes()[0].threshold == 1.0);
    CHECK(one(tree, 1.0) == 50.0);
    CHECK(one(tree, 0.0) == 1.0);
    // unseen code 3 follows the larger child (the "rest" side with 6 rows)
    CHECK(one(tree, 3.0) == 1.0);
}

TEST_CASE("ties prefer the lower feature index") {
    Matrix x(4, 2);
    for (std::size_t r = 0; r < 4; ++r) x(r, 0) = x(r, 1) = static_cast<double>(r);
    const std::vector<double> y{0, 0, 10, 10};
    TreeConfig cfg;
    cfg.min_leaf = 1;
    const auto tree = train_tree(x, y, cfg, numeric_schema(2));
    CHECK(tree.nodes()[0].feature == 0);
}

TEST_CASE("dimension mismatch") {
    CHECK_THROWS_AS(train_tree(column({1, 2}), std::vector<double>{1.0}, TreeConfig{}, numeric_schema(1)),
                    DimensionError);
    CHECK_THROWS_AS(train_tree(column({1, 2}), std::vector<double>{1.0, 2.0}, TreeConfig{}, numeric_schema(2)),
                    DimensionError);
    const auto tree = train_tree(column({1, 2}), std::vector<double>{1.0, 2.0}, TreeConfig{}, numeric_schema(1));
    const double two[] = {1.0, 2.0};
    CHECK_THROWS_AS(tree.predict(two), DimensionError);
}

TEST_CASE("bagging without resampling equals one tree") {
    auto data = fixtures::smooth_dataset(80, 3, 1, 2);
    BaggingConfig cfg;
    cfg.trees = 1;
    cfg.bootstrap = false;
    const auto y = data.targets().column(0);
    const auto ens = train_bagging(data.features(), y, data.descriptors(), cfg, 9);
    const auto tree = train_tree(data.features(), y, cfg.tree, data.descriptors());
    REQUIRE(ens.trees().size() == 1);
    CHECK(ens.trees()[0] == tree);
    for (std::size_t r = 0; r < data.size(); ++r)
        CHECK(ens.predict(data.features().row(r)) == tree.predict(data.features().row(r)));
}

TEST_CASE("bagging is deterministic per seed") {
    auto data = fixtures::smooth_dataset(120, 4, 1, 3);
    BaggingConfig cfg;
    cfg.trees = 20;
    const auto y = data.targets().column(0);
    const auto a = train_bagging(data.features(), y, data.descriptors(), cfg, 5);
    const auto b = train_bagging(data.features(), y, data.descriptors(), cfg, 5);
    const auto c = train_bagging(data.features(), y, data.descriptors(), cfg, 6);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    const double probe[] = {0.3, 0.1, 0.9, 0.5};
    CHECK(a.predict(probe) == b.predict(probe));
}

TEST_CASE("bagging a constant target") {
    const auto x = column({0, 1, 2, 3, 4, 5, 6, 7});
    const std::vector<double> y(8, -2.25);
    BaggingConfig cfg;
    cfg.trees = 10;
    const auto ens = train_bagging(x, y, numeric_schema(1), cfg, 1);
    for (const auto& t : ens.trees()) CHECK(t.nodes().size() == 1);
    CHECK(one(ens, 3.3) == -2.25);
}

TEST_CASE("ensemble prediction is the mean of its trees") {
    auto leaf = [](double v) {
        TreeNode n;
        n.value = v;
        n.support = 1;
        return RegressionTree({n}, {0});
    };
    const BaggedEnsemble two({leaf(1.0), leaf(3.0)}, 0);
    CHECK(one(two, 0.0) == 2.0);
    const BaggedEnsemble four({leaf(0), leaf(0), leaf(10), leaf(10)}, 0);
    CHECK(one(four, 0.0) == 5.0);
    const BaggedEnsemble single({leaf(4.5)}, 0);
    CHECK(one(single, 0.0) == 4.5);
}

TEST_CASE("configuration validation") {
    BaggingConfig cfg;
    cfg.trees = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    TreeConfig t;
    t.min_leaf = 0;
    CHECK_THROWS_AS(t.validate(), ConfigError);
}

TEST_CASE("ensemble binary round trip") {
    auto data = fixtures::smooth_dataset(60, 3, 1, 8);
    BaggingConfig cfg;
    cfg.trees = 5;
    const auto ens = train_bagging(data.features(), data.targets().column(0), data.descriptors(), cfg, 2);
    std::stringstream buf;
    BinaryWriter w(buf);
    ens.save(w);
    BinaryReader r(buf);
    const auto back = BaggedEnsemble::load(r);
    CHECK(back == ens);

    std::stringstream broken(buf.str().substr(0, buf.str().size() / 2));
    BinaryReader rb(broken);
    CHECK_THROWS_AS(BaggedEnsemble::load(rb), SerializationError);
}
