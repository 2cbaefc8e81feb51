// Serial reference loops against the OpenMP sweep kernels, plus the reduced-rhs evaluators.

#include <benchmark/benchmark.h>

#include <random>

#include "phasered/experiments.hpp"
#include "phasered/reduction.hpp"

using namespace phasered;

namespace {

ExperimentConfig sync_grid() {
    auto cfg = ExperimentConfig::defaults();
    cfg.delta_grid = {0.0, 0.3, 6};
    cfg.K_grid = {-0.3, 0.3, 8};
    cfg.systems = {SystemSpec::full_system(), SystemSpec::reduced({2, 2})};
    return cfg;
}

ExperimentConfig splay_grid() {
    auto cfg = ExperimentConfig::defaults();
    cfg.delta_grid = {0.0, 0.1, 3};
    cfg.K_grid = {-0.3, -0.02, 4};
    return cfg;
}

void BM_SweepSyncSerial(benchmark::State& state) {
    const auto cfg = sync_grid();
    for (auto _ : state) benchmark::DoNotOptimize(sweep_sync_serial(cfg));
}

void BM_SweepSyncParallel(benchmark::State& state) {
    const auto cfg = sync_grid();
    for (auto _ : state) benchmark::DoNotOptimize(sweep_sync(cfg));
}

void BM_SweepSplaySerial(benchmark::State& state) {
    const auto cfg = splay_grid();
    for (auto _ : state) benchmark::DoNotOptimize(sweep_splay_serial(cfg));
}

void BM_SweepSplayParallel(benchmark::State& state) {
    const auto cfg = splay_grid();
    for (auto _ : state) benchmark::DoNotOptimize(sweep_splay(cfg));
}

std::vector<double> random_phases(std::size_t n) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 6.283185307179586);
    std::vector<double> phi(n);
    for (auto& v : phi) v = u(rng);
    return phi;
}

// Compiled dense evaluation against term-by-term TrigPoly evaluation of the same (2,2) terms.
void BM_ReducedRhsCompiled(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Params p;
    p.alpha = 1.6;
    p.K = 0.1;
    p.delta = 0.1;
    const auto rs = assemble(Network::all_to_all(n), p, ShapeFn::sine(), {2, 2});
    const auto phi = random_phases(n);
    std::vector<double> out(n);
    for (auto _ : state) {
        rs.rhs(phi, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_ReducedRhsTrigPoly(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Params p;
    p.alpha = 1.6;
    p.K = 0.1;
    p.delta = 0.1;
    const auto rs = assemble(Network::all_to_all(n), p, ShapeFn::sine(), {2, 2});
    const auto phi = random_phases(n);
    std::vector<double> out(n);
    for (auto _ : state) {
        for (std::size_t k = 0; k < n; ++k) {
            double v = p.omega;
            for (const auto& [key, polys] : rs.p_terms()) {
                v += std::pow(p.K, key.first) * std::pow(p.delta, key.second) * polys[k].eval(phi);
            }
            out[k] = v;
        }
        benchmark::DoNotOptimize(out.data());
    }
}

} // namespace

BENCHMARK(BM_SweepSyncSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepSyncParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepSplaySerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepSplayParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReducedRhsCompiled)->Arg(3)->Arg(6);
BENCHMARK(BM_ReducedRhsTrigPoly)->Arg(3)->Arg(6);

BENCHMARK_MAIN();
