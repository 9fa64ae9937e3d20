#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "neurosym/error.hpp"
#include "neurosym/metrics.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace neurosym;

namespace {

PredictionResult along_x(const std::vector<double>& errors) {
    PredictionResult r;
    for (std::size_t t = 0; t < errors.size(); ++t) {
        r.ground_truth.push_back({static_cast<double>(t), 1.0});
        r.predicted.push_back({static_cast<double>(t) + errors[t], 1.0});
    }
    return r;
}

std::vector<PredictionResult> random_results(synth::Random& rng, std::size_t n, std::size_t horizon) {
    std::vector<PredictionResult> rs(n);
    for (std::size_t i = 0; i < n; ++i) {
        rs[i].agent_id = static_cast<AgentId>(i);
        for (std::size_t t = 0; t < horizon; ++t) {
            const Vec2 g{rng.uniform(-20, 20), rng.uniform(-20, 20)};
            rs[i].ground_truth.push_back(g);
            rs[i].predicted.push_back(g + Vec2{rng.uniform(-2, 2), rng.uniform(-2, 2)});
        }
    }
    return rs;
}

std::vector<PredictionResult> transform(std::vector<PredictionResult> rs, double angle, Vec2 shift) {
    const double c = std::cos(angle), s = std::sin(angle);
    auto f = [&](Vec2 p) { return Vec2{c * p.x - s * p.y, s * p.x + c * p.y} + shift; };
    for (auto& r : rs) {
        for (auto& p : r.predicted) p = f(p);
        for (auto& p : r.ground_truth) p = f(p);
    }
    return rs;
}

MetricsReport report(double ade, double fde, std::size_t horizon) {
    MetricsReport r;
    r.ade = ade;
    r.fde = fde;
    r.de_std = ade / 2;
    r.fde_std = fde / 2;
    r.horizon = horizon;
    r.n_samples = 1;
    return r;
}

}  // namespace

TEST(Ade, Examples) {
    EXPECT_EQ(ade({along_x({0, 0, 0})}), 0.0);
    EXPECT_DOUBLE_EQ(ade({along_x({1, 1, 1}), along_x({-1, -1, -1})}), 1.0);
    EXPECT_NEAR(ade({along_x({0.1, 0.2, 0.3, 0.4})}), 0.25, 1e-15);
}

TEST(Fde, Examples) {
    EXPECT_EQ(fde({along_x({0, 0})}), 0.0);
    EXPECT_DOUBLE_EQ(fde({along_x({1, 1, 1})}), 1.0);
    EXPECT_DOUBLE_EQ(fde({along_x({0.1, 0.2, 0.3, 0.4})}), 0.4);
}

TEST(DisplacementStds, Examples) {
    const auto c = displacement_stds({along_x({1, 1, 1}), along_x({1, -1, 1})});
    EXPECT_EQ(c.de_std, 0.0);
    EXPECT_EQ(c.fde_std, 0.0);
    EXPECT_DOUBLE_EQ(displacement_stds({along_x({0, 0}), along_x({0, 2})}).fde_std, 1.0);
    EXPECT_DOUBLE_EQ(displacement_stds({along_x({0, 0}), along_x({0, 2})}, StdKind::Sample).fde_std, std::sqrt(2.0));
    const auto one = displacement_stds({along_x({0.7})});
    EXPECT_EQ(one.de_std, 0.0);
    EXPECT_EQ(one.fde_std, 0.0);
}

TEST(RmseMae, Examples) {
    const auto zero = rmse_mae({along_x({0, 0})});
    EXPECT_EQ(zero.rmse, 0.0);
    EXPECT_EQ(zero.mae, 0.0);
    PredictionResult r;
    r.ground_truth = {{0, 0}, {1, 1}};
    r.predicted = {{1, -1}, {0, 2}};
    const auto unit = rmse_mae({r});
    EXPECT_DOUBLE_EQ(unit.rmse, 1.0);
    EXPECT_DOUBLE_EQ(unit.mae, 1.0);
    PredictionResult z;
    z.ground_truth = {{0, 0}};
    z.predicted = {{2, 0}};
    const auto pair = rmse_mae({z});
    EXPECT_DOUBLE_EQ(pair.rmse, std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(pair.mae, 1.0);
}

TEST(Metrics, ErrorsOnBadInput) {
    EXPECT_THROW(ade({}), InvalidInputError);
    PredictionResult no_gt;
    no_gt.predicted = {{0, 0}};
    EXPECT_THROW(fde({no_gt}), InvalidInputError);
    EXPECT_THROW(rmse_mae({along_x({0, 0}), along_x({0, 0, 0})}), InvalidInputError);
    EXPECT_THROW(displacement_stds({along_x({})}), InvalidInputError);
    EXPECT_THROW(compute_metrics({}), InvalidInputError);
}

TEST(Metrics, AgreeWithBruteForceOracle) {
    synth::Random rng(40);
    for (int trial = 0; trial < 50; ++trial) {
        const auto rs = random_results(rng, 1 + rng.index(30), 1 + rng.index(12));
        const auto m = compute_metrics(rs);
        const auto o = oracle::brute_metrics(rs);
        EXPECT_NEAR(m.ade, o.ade, 1e-10);
        EXPECT_NEAR(m.fde, o.fde, 1e-10);
        EXPECT_NEAR(m.rmse, o.rmse, 1e-10);
        EXPECT_NEAR(m.mae, o.mae, 1e-10);
        EXPECT_LE(m.mae, m.rmse + 1e-15);
        EXPECT_EQ(m.n_samples, rs.size());
        for (double v : {m.ade, m.fde, m.de_std, m.fde_std, m.rmse, m.mae}) {
            EXPECT_GE(v, 0.0);
            EXPECT_TRUE(std::isfinite(v));
        }
    }
}

TEST(Metrics, RigidMotionInvariance) {
    synth::Random rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        const auto rs = random_results(rng, 10, 8);
        const auto moved = transform(rs, rng.uniform(0, 2 * M_PI), {rng.uniform(-100, 100), rng.uniform(-100, 100)});
        EXPECT_NEAR(ade(rs), ade(moved), 1e-9);
        EXPECT_NEAR(fde(rs), fde(moved), 1e-9);
    }
}

TEST(Metrics, FdeIsAdeOfFinalStep) {
    synth::Random rng(42);
    const auto rs = random_results(rng, 12, 6);
    auto last = rs;
    for (auto& r : last) {
        r.predicted = {r.predicted.back()};
        r.ground_truth = {r.ground_truth.back()};
    }
    EXPECT_NEAR(fde(rs), ade(last), 1e-14);
    EXPECT_EQ(fde(last), ade(last));
}

TEST(RelativeGain, Examples) {
    EXPECT_NEAR(relative_gain(0.7, 0.21), 70.0, 1e-9);
    EXPECT_NEAR(relative_gain(0.88, 0.63), 28.409, 1e-3);
    EXPECT_EQ(relative_gain(0.5, 0.5), 0.0);
    EXPECT_THROW(relative_gain(0.0, 0.1), InvalidInputError);
    EXPECT_THROW(relative_gain(-1.0, 0.1), InvalidInputError);
    double prev = relative_gain(1.3, 0.0);
    for (double t = 0.1; t < 3.0; t += 0.1) {
        const double g = relative_gain(1.3, t);
        EXPECT_LT(g, prev);
        prev = g;
    }
}

TEST(ReportTable, StructureAndGains) {
    const std::vector<ComparisonEntry> entries{{"ETH", {report(0.88, 1.5, 8), report(1.2, 2.0, 12)},
                                                {report(0.63, 1.2, 8), report(1.0, 1.9, 12)}}};
    std::ostringstream text;
    write_report_text(text, entries);
    const auto t = text.str();
    EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), 1 + 4 * 3);
    for (const char* name : {"ADE", "FDE", "DE-STD", "FDE-STD"}) EXPECT_NE(t.find(name), std::string::npos);
    EXPECT_NE(t.find("0.88 / 1.2"), std::string::npos);
    EXPECT_NE(t.find("+28.41"), std::string::npos);

    std::ostringstream tsv;
    write_report_tsv(tsv, entries);
    std::istringstream in(tsv.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "metric\tdataset\thorizon\tbaseline\ttreated\tgain");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        std::istringstream f(line);
        std::string metric, dataset;
        std::size_t horizon;
        double b, tr, g;
        f >> metric >> dataset >> horizon >> b >> tr >> g;
        EXPECT_EQ(dataset, "ETH");
        EXPECT_EQ(g, relative_gain(b, tr));
    }
    EXPECT_EQ(rows, 8u);

    std::ostringstream regression;
    write_report_text(regression, entries, kRegressionMetrics);
    EXPECT_NE(regression.str().find("RMSE"), std::string::npos);
}

TEST(ReportTable, EmptyInputIsHeaderOnly) {
    std::ostringstream text, tsv;
    write_report_text(text, {});
    write_report_tsv(tsv, {});
    const auto t = text.str();
    EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), 1);
    EXPECT_EQ(tsv.str(), "metric\tdataset\thorizon\tbaseline\ttreated\tgain\n");
}

TEST(PredictionsTsv, RoundTrip) {
    synth::Random rng(43);
    auto rs = random_results(rng, 5, 4);
    for (std::size_t i = 0; i < rs.size(); ++i) rs[i].start_frame = static_cast<std::int64_t>(10 * i);
    PredictionResult unknown;
    unknown.agent_id = 99;
    unknown.predicted = {{1, 2}, {3, 4}, {5, 6}, {7, 8}};
    rs.push_back(unknown);
    std::stringstream buf;
    write_predictions_tsv(buf, rs);
    const auto back = read_predictions_tsv(buf);
    ASSERT_EQ(back.size(), rs.size());
    for (std::size_t i = 0; i < rs.size(); ++i) {
        EXPECT_EQ(back[i].agent_id, rs[i].agent_id);
        EXPECT_EQ(back[i].start_frame, rs[i].start_frame);
        EXPECT_EQ(back[i].predicted, rs[i].predicted);
        EXPECT_EQ(back[i].ground_truth, rs[i].ground_truth);
    }
    EXPECT_FALSE(back.back().has_ground_truth());
}

TEST(PredictionsTsv, Errors) {
    std::istringstream short_row("1 0 0 1 2 3\n");
    EXPECT_THROW(read_predictions_tsv(short_row), ParseError);
    std::istringstream bad_number("1 0 0 1 2 3 x\n");
    EXPECT_THROW(read_predictions_tsv(bad_number), ParseError);
    std::istringstream gap("1 0 0 1 2 3 4\n1 0 2 1 2 3 4\n");
    EXPECT_THROW(read_predictions_tsv(gap), ParseError);
    std::istringstream dup("1 0 0 1 2 3 4\n1 0 0 1 2 3 4\n");
    EXPECT_THROW(read_predictions_tsv(dup), ParseError);
    EXPECT_THROW(read_predictions_file("/nonexistent/predictions.tsv"), IoError);
}
