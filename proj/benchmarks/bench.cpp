#include <benchmark/benchmark.h>

#include <random>

#include "mmesbm/generator.hpp"
#include "mmesbm/numerics.hpp"
#include "mmesbm/vb.hpp"

using namespace mmesbm;

namespace {

SimulatedNetwork planted(int n, int G, std::uint64_t seed) {
    GenerativeSpec spec;
    spec.n_actors = n;
    spec.covariates = CovariateMatrix::intercept_only(n);
    spec.beta = Eigen::MatrixXd::Zero(G, 1);
    spec.theta = Eigen::MatrixXd::Constant(G, G, 0.05);
    spec.theta.diagonal().setConstant(0.7);
    spec.seed = seed;
    return sample_network(spec);
}

void bm_digamma(benchmark::State& state) {
    double x = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(digamma(x));
        x += 0.37;
        if (x > 1e6) x = 0.1;
    }
}
BENCHMARK(bm_digamma);

void bm_phi_sweep(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int G = static_cast<int>(state.range(1));
    const SimulatedNetwork sim = planted(n, G, 1);
    ModelConfig config;
    config.n_groups = G;
    std::mt19937_64 rng(2);
    VariationalState st = init_state(sim.network, config, rng);
    const auto dyads = sim.network.observed_dyads();
    for (auto _ : state) {
        const PhiTables tables = make_phi_tables(st);
        for (const auto& [i, j] : dyads)
            update_phi(st, sim.network, i, j, tables, config.phi_inner_iterations);
        benchmark::ClobberMemory();
    }
}
BENCHMARK(bm_phi_sweep)->Args({50, 3})->Args({100, 3})->Args({100, 5});

void bm_elbo(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const SimulatedNetwork sim = planted(n, 3, 1);
    ModelConfig config;
    config.n_groups = 3;
    std::mt19937_64 rng(2);
    VariationalState st = init_state(sim.network, config, rng);
    const Eigen::MatrixXd delta = Eigen::MatrixXd::Ones(n, 3);
    update_gamma(st, sim.network, delta);
    update_zeta(st, sim.network, config);
    for (auto _ : state)
        benchmark::DoNotOptimize(compute_elbo(st, sim.network, delta, config));
}
BENCHMARK(bm_elbo)->Arg(50)->Arg(100);

void bm_small_fit(benchmark::State& state) {
    const SimulatedNetwork sim = planted(40, 3, 1);
    ModelConfig config;
    config.n_groups = 3;
    config.n_restarts = 1;
    config.max_iterations = 50;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            fit(sim.network, CovariateMatrix::intercept_only(40), std::nullopt, config));
}
BENCHMARK(bm_small_fit)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
