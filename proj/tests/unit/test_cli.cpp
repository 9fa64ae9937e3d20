#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "neurosym/cnd.hpp"
#include "neurosym/metrics.hpp"

namespace fs = std::filesystem;
using neurosym::cli::run;

namespace {

struct Result {
    int code = 0;
    std::string out, err;
};

Result cli(std::vector<std::string> args) {
    args.insert(args.begin(), "neurosym");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Result r;
    r.code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

const std::string kData = NEUROSYM_DATA_DIR;

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("neurosym_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

}  // namespace

TEST(Fnv1a64, KnownVectors) {
    EXPECT_EQ(neurosym::cli::fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(neurosym::cli::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST_F(CliTest, CndStateCounts) {
    const std::pair<const char*, std::size_t> cases[] = {{"b1", 9}, {"c1", 81}, {"c2", 729}};
    for (const auto& [variant, states] : cases) {
        const auto file = path(std::string(variant) + ".tsv");
        const auto r = cli({"cnd", "--variant", variant, "--out", file});
        ASSERT_EQ(r.code, 0) << r.err;
        EXPECT_EQ(lines(slurp(file)), states + 1);
        EXPECT_NE(r.out.find("states: " + std::to_string(states)), std::string::npos);
        EXPECT_NE(r.out.find("checksum: fnv1a64:"), std::string::npos);
        const auto g = neurosym::load_cnd_file(file);
        EXPECT_EQ(g, neurosym::build_cnd(neurosym::parse_variant(variant)));
    }
}

TEST_F(CliTest, CndStdoutAndJson) {
    const auto r = cli({"cnd", "--variant", "b1", "--out", "-"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out, neurosym::export_cnd(neurosym::build_cnd(neurosym::QtcVariant::B1), neurosym::CndFormat::Tsv));
    EXPECT_NE(r.err.find("states: 9"), std::string::npos);
    const auto file = path("c1.json");
    const auto j = cli({"cnd", "--variant", "c1", "--format", "json", "--out", file});
    ASSERT_EQ(j.code, 0);
    const auto t = cli({"cnd", "--variant", "c1", "--out", path("c1.tsv")});
    // the checksum always covers the canonical TSV
    EXPECT_EQ(j.out, t.out);
    EXPECT_EQ(neurosym::load_cnd_file(file).size(), 81u);
}

TEST_F(CliTest, CndRejectsUnknownVariant) {
    EXPECT_NE(cli({"cnd", "--variant", "c3", "--out", path("x.tsv")}).code, 0);
}

TEST_F(CliTest, LabelHeadOnPair) {
    ASSERT_EQ(cli({"cnd", "--variant", "c1", "--out", path("c1.tsv")}).code, 0);
    const auto r = cli({"label", "--scene", kData + "/head_on.tsv", "--cnd", path("c1.tsv"), "--out", path("pairs")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("pairs: 1"), std::string::npos);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path("pairs"))) files.push_back(e.path());
    ASSERT_EQ(files.size(), 1u);
    std::istringstream in(slurp(files[0]));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t\tstate\talpha");
    std::set<std::string> alphas;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        std::istringstream f(line);
        std::string t, state, alpha;
        f >> t >> state >> alpha;
        EXPECT_EQ(state, "--00");
        alphas.insert(alpha);
        ++rows;
    }
    EXPECT_GT(rows, 0u);
    EXPECT_EQ(alphas.size(), 1u);
}

TEST_F(CliTest, LabelSingleAgentAndMissingCnd) {
    {
        std::ofstream f(path("one.tsv"));
        for (int k = 0; k < 10; ++k) f << k << " 1 " << k * 0.3 << " 0\n";
    }
    ASSERT_EQ(cli({"cnd", "--variant", "c1", "--out", path("c1.tsv")}).code, 0);
    const auto r = cli({"label", "--scene", path("one.tsv"), "--cnd", path("c1.tsv"), "--out", path("pairs")});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("pairs: 0"), std::string::npos);
    EXPECT_NE(cli({"label", "--scene", path("one.tsv"), "--cnd", path("missing.tsv"), "--out", path("p2")}).code, 0);
}

TEST_F(CliTest, LabelReportsParseLine) {
    {
        std::ofstream f(path("bad.tsv"));
        f << "0 1 0 0\n1 1 abc 0\n";
    }
    ASSERT_EQ(cli({"cnd", "--variant", "c1", "--out", path("c1.tsv")}).code, 0);
    const auto r = cli({"label", "--scene", path("bad.tsv"), "--cnd", path("c1.tsv"), "--out", path("pairs")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("line 2"), std::string::npos);
}

TEST_F(CliTest, ClusterWithStatics) {
    const auto r = cli({"cluster", "--scene", kData + "/crossing.tsv", "--static", kData + "/crossing_static.txt",
                        "--out", path("clusters.tsv")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("clusters: "), std::string::npos);
    EXPECT_NE(slurp(path("clusters.tsv")).find("static:kiosk"), std::string::npos);
    EXPECT_EQ(cli({"cluster", "--scene", kData + "/crossing.tsv", "--n-star", "0", "--out", path("c.tsv")}).code, 2);
}

TEST_F(CliTest, TrainTwiceIsByteIdentical) {
    const std::vector<std::string> common{"train", "--scene", kData + "/crossing.tsv", "--static",
                                          kData + "/crossing_static.txt", "--epochs", "3", "--seed", "7",
                                          "--embedding-dim", "4", "--encoder-h-dim", "6", "--decoder-h-dim", "6"};
    auto a = common, b = common;
    a.insert(a.end(), {"--out", path("a.nsym"), "--loss-out", path("a.tsv")});
    b.insert(b.end(), {"--out", path("b.nsym"), "--loss-out", path("b.tsv")});
    const auto ra = cli(a);
    const auto rb = cli(b);
    ASSERT_EQ(ra.code, 0) << ra.err;
    ASSERT_EQ(rb.code, 0) << rb.err;
    EXPECT_EQ(slurp(path("a.nsym")), slurp(path("b.nsym")));
    EXPECT_EQ(slurp(path("a.tsv")), slurp(path("b.tsv")));
    EXPECT_EQ(ra.out, rb.out);
    EXPECT_EQ(lines(slurp(path("a.tsv"))), 4u);
    EXPECT_EQ(slurp(path("a.nsym")).substr(0, 4), "NSYM");
}

TEST_F(CliTest, TrainPredictEvaluatePipeline) {
    for (const char* model : {"pooled", "attention", "linear"}) {
        const auto m = path(std::string(model) + ".nsym");
        const auto r = cli({"train", "--scene", kData + "/crossing.tsv", "--model", model, "--epochs", "2", "--out", m,
                            "--encoder-h-dim", "6", "--decoder-h-dim", "6"});
        ASSERT_EQ(r.code, 0) << model << ": " << r.err;
        const auto preds = path(std::string(model) + ".tsv");
        const auto p = cli({"predict", "--scene", kData + "/crossing.tsv", "--model", m, "--out", preds});
        ASSERT_EQ(p.code, 0) << model << ": " << p.err;
        EXPECT_NE(p.out.find("ade: "), std::string::npos);
        const auto e = cli({"evaluate", "--predictions", preds});
        EXPECT_EQ(e.code, 0) << e.err;
        EXPECT_NE(e.out.find("ADE"), std::string::npos);
    }
    const auto cv = path("cv.tsv");
    ASSERT_EQ(cli({"predict", "--scene", kData + "/crossing.tsv", "--constant-velocity", "--out", cv}).code, 0);
    const auto cmp = cli({"evaluate", "--baseline", cv, "--neurosym", path("pooled.tsv"), "--tsv", path("cmp.tsv")});
    EXPECT_EQ(cmp.code, 0) << cmp.err;
    EXPECT_NE(cmp.out.find("Relative Gain (%)"), std::string::npos);
    EXPECT_EQ(lines(slurp(path("cmp.tsv"))), 1u + 4u);
    EXPECT_EQ(cli({"predict", "--scene", kData + "/crossing.tsv", "--out", path("x.tsv")}).code, 2);
}

TEST_F(CliTest, EvaluatePerfectPredictions) {
    std::vector<neurosym::PredictionResult> rs(3);
    for (std::size_t i = 0; i < rs.size(); ++i) {
        rs[i].agent_id = static_cast<neurosym::AgentId>(i);
        for (int t = 0; t < 12; ++t) rs[i].predicted.push_back({t * 0.1, static_cast<double>(i)});
        rs[i].ground_truth = rs[i].predicted;
    }
    {
        std::ofstream f(path("perfect.tsv"));
        neurosym::write_predictions_tsv(f, rs);
    }
    const auto r = cli({"evaluate", "--predictions", path("perfect.tsv"), "--horizons", "8,12", "--assert", "ade<=0",
                        "--assert", "fde<=0"});
    EXPECT_EQ(r.code, 0) << r.err << r.out;
    EXPECT_NE(r.out.find("ADE\t0\t0"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("FDE\t0\t0"), std::string::npos) << r.out;
    EXPECT_EQ(cli({"evaluate", "--predictions", path("perfect.tsv"), "--assert", "ade>=1"}).code, 3);
    EXPECT_EQ(cli({"evaluate", "--predictions", path("perfect.tsv"), "--horizons", "20"}).code, 1);
}

TEST_F(CliTest, EvaluateMismatchedHorizons) {
    std::vector<neurosym::PredictionResult> a(1), b(1);
    for (int t = 0; t < 8; ++t) a[0].predicted.push_back({1.0 * t, 0});
    for (int t = 0; t < 12; ++t) b[0].predicted.push_back({1.0 * t, 0});
    a[0].ground_truth = a[0].predicted;
    b[0].ground_truth = b[0].predicted;
    {
        std::ofstream fa(path("a.tsv")), fb(path("b.tsv"));
        neurosym::write_predictions_tsv(fa, a);
        neurosym::write_predictions_tsv(fb, b);
    }
    const auto r = cli({"evaluate", "--baseline", path("a.tsv"), "--neurosym", path("b.tsv")});
    EXPECT_NE(r.code, 0);
    EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, ConfigFileAndPrecedence) {
    {
        std::ofstream f(path("cfg.ini"));
        f << "[cnd]\nvariant=b1\nout=" << path("from_config.tsv") << "\n";
    }
    auto r = cli({"--config", path("cfg.ini"), "cnd"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(slurp(path("from_config.tsv"))), 10u);
    r = cli({"--config", path("cfg.ini"), "cnd", "--variant", "c1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(slurp(path("from_config.tsv"))), 82u);
}

TEST(Cli, HelpListsFlagsWithDefaults) {
    const auto top = cli({"--help"});
    EXPECT_EQ(top.code, 0);
    for (const char* sub : {"cnd", "label", "cluster", "train", "predict", "evaluate"}) {
        EXPECT_NE(top.out.find(sub), std::string::npos) << sub;
    }
    const auto train = cli({"train", "--help"});
    EXPECT_EQ(train.code, 0);
    for (const char* flag : {"--embedding-dim", "--encoder-h-dim", "--lr", "--epochs", "--seed", "--threads",
                             "--radius", "--n-star", "--weighting"}) {
        EXPECT_NE(train.out.find(flag), std::string::npos) << flag;
    }
    EXPECT_NE(train.out.find("16"), std::string::npos);
    EXPECT_NE(train.out.find("3.7"), std::string::npos);
    EXPECT_NE(cli({}).code, 0);
    EXPECT_NE(cli({"frobnicate"}).code, 0);
}
