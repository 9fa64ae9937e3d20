#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "neurosym/cnd.hpp"
#include "neurosym/qtc.hpp"
#include "neurosym/weighting.hpp"

using namespace neurosym;

namespace {

void BM_BuildCnd(benchmark::State& state) {
    const auto variant = static_cast<QtcVariant>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(build_cnd(variant));
    state.SetLabel(std::string(to_string(variant)));
}
BENCHMARK(BM_BuildCnd)
    ->Arg(static_cast<int>(QtcVariant::B1))
    ->Arg(static_cast<int>(QtcVariant::C1))
    ->Arg(static_cast<int>(QtcVariant::C2))
    ->Unit(benchmark::kMicrosecond);

void BM_QtcSequence(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<Vec2> a, b;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = 0.02 * static_cast<double>(k);
        a.push_back({std::sin(0.3 * t) * 4.0, std::cos(0.2 * t) * 3.0});
        b.push_back({2.0 + std::cos(0.25 * t) * 3.0, std::sin(0.4 * t) * 2.0});
    }
    for (auto _ : state) benchmark::DoNotOptimize(qtc_sequence(a, b, 0.02, QtcVariant::C2));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_QtcSequence)->Arg(100)->Arg(10000);

void BM_LabelSequence(benchmark::State& state) {
    const auto g = build_cnd(QtcVariant::C1);
    std::vector<QtcState> states;
    for (std::size_t k = 0; k < 10000; ++k) states.push_back(QtcState::from_index(QtcVariant::C1, (k * 37) % 81));
    for (auto _ : state) benchmark::DoNotOptimize(label_sequence(states, g));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 10000);
}
BENCHMARK(BM_LabelSequence);

}  // namespace
