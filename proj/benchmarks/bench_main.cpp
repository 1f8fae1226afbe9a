#include <benchmark/benchmark.h>

#include "ccbart/copula.hpp"
#include "ccbart/sampler.hpp"
#include "ccbart/sim.hpp"

using namespace ccbart;

namespace {

void bench_log_density(benchmark::State& state, Family family) {
    CopulaModel model;
    model.family = family;
    const double theta = theta_from_tau(model, 0.5);
    Rng rng(7);
    std::vector<std::pair<double, double>> pts(256);
    for (auto& p : pts) p = sample_pair(model, theta, rng);
    for (auto _ : state) {
        double sum = 0.0;
        for (const auto& [u, v] : pts) sum += log_density(model, u, v, theta);
        benchmark::DoNotOptimize(sum);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(pts.size()));
}

void bench_sweep(benchmark::State& state) {
    DgpConfig dgp;
    dgp.model.family = Family::gaussian;
    Rng rng(11);
    const auto sim = generate_dataset(dgp, rng);
    SamplerConfig config;
    config.num_trees = static_cast<int>(state.range(0));
    config.tree_prior.sign = PriorSign::penalizing;
    Sampler sampler(dgp.model, sim.data, config, 3);
    for (auto _ : state) sampler.sweep();
}

} // namespace

BENCHMARK_CAPTURE(bench_log_density, gaussian, Family::gaussian);
BENCHMARK_CAPTURE(bench_log_density, student_t, Family::student_t);
BENCHMARK_CAPTURE(bench_log_density, clayton, Family::clayton);
BENCHMARK_CAPTURE(bench_log_density, gumbel, Family::gumbel);
BENCHMARK_CAPTURE(bench_log_density, frank, Family::frank);
BENCHMARK(bench_sweep)->Arg(1)->Arg(5);

BENCHMARK_MAIN();
