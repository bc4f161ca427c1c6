#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "../src/data/text_format.hpp"
#include "mtr/cli.hpp"
#include "mtr/experiment.hpp"
#include "support/fixtures.hpp"

using namespace mtr;
using fixtures::TempDir;

namespace {

const std::filesystem::path kFixtures = MTR_FIXTURE_DIR;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "mtr");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("cli: usage errors exit 1, help exits 0") {
    CHECK(cli({}).code == 1);
    CHECK(cli({"frobnicate"}).code == 1);
    CHECK(cli({"experiment"}).code == 1);
    CHECK(cli({"stats", "/no/such/file.csv"}).code == 1);
    CHECK(cli({"stats", (kFixtures / "arrmse_by_dataset.csv").string(), "--format", "pdf"}).code == 1);
    const auto help = cli({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("experiment") != std::string::npos);
}

TEST_CASE("cli: train then predict the training file") {
    TempDir dir("cli_train");
    const auto data_path = dir / "edm_like.arff";
    fixtures::write_text(data_path, fixtures::synthetic_arff(154, 16, 2, 3, true));
    const auto model_path = (dir / "st.model").string();

    const auto train = cli({"train", data_path.string(), "--targets", "2", "--method", "ST", "--trees", "10",
                            "--seed", "4", "--out", model_path});
    REQUIRE_MESSAGE(train.code == 0, train.err);
    CHECK(train.out.find("154 rows") != std::string::npos);

    const auto predict = cli({"predict", "--model", model_path, data_path.string()});
    REQUIRE_MESSAGE(predict.code == 0, predict.err);
    CHECK(lines(predict.out) == 155);
    CHECK(predict.out.rfind("t1,t2\n", 0) == 0);

    // The file round trip predicts bitwise like the in-memory model.
    MethodConfig config;
    config.base.trees = 10;
    config.seed = 4;
    const auto data = load_dataset(data_path, TargetSelection::last(2));
    const auto model = train_model(MethodKind::ST, data, config);
    const auto expected = model.predict(data.features());
    std::istringstream rows(predict.out);
    std::string line;
    std::getline(rows, line);
    for (std::size_t r = 0; r < expected.rows(); ++r) {
        REQUIRE(std::getline(rows, line));
        CHECK(line == detail::format_double(expected(r, 0)) + "," + detail::format_double(expected(r, 1)));
    }

    const auto machine = cli({"predict", "--model", model_path, data_path.string(), "--format", "machine"});
    const auto j = nlohmann::json::parse(machine.out);
    CHECK(j["predictions"].size() == 154);
    CHECK(j["predictions"][7][1].get<double>() == expected(7, 1));
}

TEST_CASE("cli: predict rejects input with a different feature set") {
    TempDir dir("cli_schema");
    fixtures::write_text(dir / "train.arff", fixtures::synthetic_arff(40, 3, 2, 1));
    fixtures::write_text(dir / "other.arff", fixtures::synthetic_arff(10, 2, 2, 2));
    const auto model = (dir / "m.bin").string();
    REQUIRE(cli({"train", (dir / "train.arff").string(), "--targets", "2", "--method", "ercc", "--trees", "3",
                 "--folds", "3", "--out", model})
                .code == 0);
    const auto r = cli({"predict", "--model", model, (dir / "other.arff").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("schema mismatch") != std::string::npos);
    CHECK(r.out.empty());
}

TEST_CASE("cli: train argument validation") {
    TempDir dir("cli_args");
    fixtures::write_text(dir / "d.arff", fixtures::synthetic_arff(30, 3, 2, 1));
    const auto d = (dir / "d.arff").string();
    const auto m = (dir / "m.bin").string();
    CHECK(cli({"train", d, "--method", "XYZ", "--out", m}).code == 1);
    CHECK(cli({"train", d, "--targets", "2", "--method", "ST", "--chain", "1,0", "--out", m}).code == 1);
    CHECK(cli({"train", d, "--targets", "9", "--out", m}).code == 1);
    CHECK(cli({"train", d, "--targets", "2", "--target-names", "t1", "--out", m}).code == 1);
    const auto ok = cli({"train", d, "--target-names", "t2,t1", "--method", "rcc", "--chain", "1,0", "--trees",
                         "3", "--folds", "3", "--out", m});
    CHECK_MESSAGE(ok.code == 0, ok.err);
}

TEST_CASE("cli: stats on the aRRMSE table") {
    TempDir dir("cli_stats");
    const auto matrix = (kFixtures / "arrmse_by_dataset.csv").string();
    const auto text = cli({"stats", matrix, "--wilcoxon", "MTS:MTSC"});
    REQUIRE(text.code == 0);
    CHECK(text.out.find("ERCC better than MORF") != std::string::npos);
    CHECK(text.out.find("critical difference") != std::string::npos);

    const auto machine = cli({"stats", matrix, "--wilcoxon", "MTS:MTSC", "--format", "machine", "--out",
                              (dir / "cd").string()});
    REQUIRE(machine.code == 0);
    const auto expected =
        stats_json(stats::analyze(stats::ScoreMatrix::read_csv(matrix), 0.05, {{"MTS", "MTSC"}}));
    CHECK(machine.out == expected);
    CHECK(std::filesystem::exists(dir / "cd.svg"));
    CHECK(std::filesystem::exists(dir / "cd.txt"));

    const auto svg = cli({"stats", matrix, "--format", "svg"});
    CHECK(svg.out.rfind("<svg", 0) == 0);

    CHECK(cli({"stats", matrix, "--wilcoxon", "MTS-MTSC"}).code == 1);
    CHECK(cli({"stats", matrix, "--wilcoxon", "MTS:NOPE"}).code == 1);
    CHECK(cli({"stats", matrix, "--alpha", "0.2"}).code == 1);
}

TEST_CASE("cli: experiment exit codes and machine summary") {
    TempDir dir("cli_exp");
    fixtures::write_text(dir / "a.arff", fixtures::synthetic_arff(40, 3, 2, 1));
    fixtures::write_text(dir / "b.arff", fixtures::synthetic_arff(40, 3, 3, 2));
    const std::string head =
        "defaults: {trees: 4, folds: 3}\n"
        "datasets: [{path: a.arff, targets: 2, protocol: {type: kfold, folds: 3}},"
        " {path: b.arff, targets: 3, protocol: {type: kfold, folds: 3}}]\n";
    fixtures::write_text(dir / "good.yaml", head + "methods: [ST, MTSC]\n");
    fixtures::write_text(dir / "partial.yaml", head + "methods: [ST, {name: R, type: RC, chain: [0, 1]}]\n");
    fixtures::write_text(dir / "bad.yaml", head + "methods: [ST]\nanalysis: {alpha: 0.5, pooling: micro}\n");

    const auto good = cli({"experiment", "--config", (dir / "good.yaml").string(), "--out", (dir / "o1").string(),
                           "--format", "machine"});
    REQUIRE_MESSAGE(good.code == 0, good.err);
    const auto j = nlohmann::json::parse(good.out);
    CHECK(j["cells"] == 4);
    CHECK(j["failed"] == 0);
    CHECK(std::filesystem::exists(dir / "o1" / "stats_target.json"));

    const auto partial = cli({"experiment", "--config", (dir / "partial.yaml").string(), "--out",
                              (dir / "o2").string()});
    CHECK(partial.code == 2);
    CHECK(partial.out.find("1 failed") != std::string::npos);

    const auto bad = cli({"experiment", "--config", (dir / "bad.yaml").string(), "--out", (dir / "o3").string()});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("bad.yaml:4:") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "o3"));

    const auto reseeded = cli({"experiment", "--config", (dir / "good.yaml").string(), "--out",
                               (dir / "o4").string(), "--seed", "77", "--jobs", "2"});
    REQUIRE(reseeded.code == 0);
    CHECK(fixtures::read_text(dir / "o4" / "resolved_config.yaml").find("seed: 77") != std::string::npos);
}

TEST_CASE("cli: datasets-info") {
    TempDir dir("cli_info");
    fixtures::write_text(dir / "n.arff", fixtures::synthetic_arff(25, 4, 3, 1, true));
    const auto text = cli({"datasets-info", (dir / "n.arff").string(), "--targets", "3"});
    REQUIRE(text.code == 0);
    CHECK(text.out == "n: 25 examples, 4 features (1 nominal), 3 targets: t1 t2 t3\n");
    const auto machine = cli({"datasets-info", (dir / "n.arff").string(), "--targets", "3", "--format", "machine"});
    CHECK(nlohmann::json::parse(machine.out)[0]["nominal_features"] == 1);
    CHECK(cli({"datasets-info"}).code == 1);
}
