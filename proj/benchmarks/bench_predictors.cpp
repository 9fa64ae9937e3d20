#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "neurosym/metrics.hpp"
#include "neurosym/predictors.hpp"
#include "neurosym/weighting.hpp"

using namespace neurosym;

namespace {

Cluster make_cluster(std::size_t n_star, std::size_t obs_len, std::size_t pred_len) {
    Cluster c;
    c.center_agent = 1;
    c.dt = 0.4;
    c.series.assign(n_star, std::vector<Vec2>(obs_len));
    c.mask.assign(n_star, true);
    c.present.assign(n_star, std::vector<bool>(obs_len, true));
    c.sources.assign(n_star, {});
    for (std::size_t k = 0; k < n_star; ++k) {
        for (std::size_t t = 0; t < obs_len; ++t) {
            const double s = static_cast<double>(t);
            c.series[k][t] = {0.4 * s + std::sin(0.7 * static_cast<double>(k)), 0.1 * s * static_cast<double>(k)};
        }
    }
    for (std::size_t t = 0; t < pred_len; ++t) c.future.push_back({0.4 * static_cast<double>(obs_len + t), 0.0});
    return c;
}

ClusterAlphas make_alphas(const Cluster& c) {
    auto a = uniform_alphas(c);
    for (std::size_t k = 1; k < a.size(); ++k) {
        for (auto& v : a[k]) v = 1.0 / static_cast<double>(4 + k);
    }
    return a;
}

void BM_PooledForward(benchmark::State& state) {
    PooledConfig cfg;
    cfg.seed = 1;
    const PooledPredictor m(cfg);
    const auto c = make_cluster(static_cast<std::size_t>(state.range(0)), cfg.obs_len, cfg.pred_len);
    const auto a = make_alphas(c);
    for (auto _ : state) benchmark::DoNotOptimize(m.forward(c, a));
}
BENCHMARK(BM_PooledForward)->Arg(1)->Arg(4)->Arg(16);

void BM_PooledLossAndGradient(benchmark::State& state) {
    PooledConfig cfg;
    cfg.seed = 1;
    const PooledPredictor m(cfg);
    const auto c = make_cluster(static_cast<std::size_t>(state.range(0)), cfg.obs_len, cfg.pred_len);
    const auto a = make_alphas(c);
    std::vector<double> grad(m.parameters().size());
    for (auto _ : state) benchmark::DoNotOptimize(m.loss_and_gradient(c, a, grad));
}
BENCHMARK(BM_PooledLossAndGradient)->Arg(4);

void BM_AttentionForward(benchmark::State& state) {
    AttentionConfig cfg;
    cfg.obs_len = 5;
    cfg.pred_len = 12;
    cfg.series_count = static_cast<std::size_t>(state.range(0));
    cfg.seed = 1;
    const AttentionPredictor m(cfg);
    const auto c = make_cluster(cfg.series_count, cfg.obs_len, cfg.pred_len);
    const auto a = make_alphas(c);
    for (auto _ : state) benchmark::DoNotOptimize(m.forward(c, a));
}
BENCHMARK(BM_AttentionForward)->Arg(1)->Arg(4)->Arg(16);

void BM_ComputeMetrics(benchmark::State& state) {
    std::vector<PredictionResult> rs(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < rs.size(); ++i) {
        for (std::size_t t = 0; t < 12; ++t) {
            const double s = static_cast<double>(i * 12 + t);
            rs[i].ground_truth.push_back({s, std::sin(s)});
            rs[i].predicted.push_back({s + 0.1, std::cos(s)});
        }
    }
    for (auto _ : state) benchmark::DoNotOptimize(compute_metrics(rs));
}
BENCHMARK(BM_ComputeMetrics)->Arg(1000);

}  // namespace
