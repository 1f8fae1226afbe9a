#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ccbart/copula.hpp"
#include "ccbart/dataset.hpp"
#include "ccbart/rng.hpp"
#include "ccbart/sampler.hpp"

namespace ccbart {

// step function: 0.3 on [0, 1/3), 0.8 on [1/3, 2/3), 0.3 on [2/3, 1]
double tau_step(double x);
// smooth: 0.2 sin(2 pi x) + 0.5
double tau_sine(double x);

enum class TauShape { step, sine };

double tau_curve(TauShape shape, double x);
TauShape tau_shape_from_name(const std::string& name);
std::string tau_shape_name(TauShape shape);

struct DgpConfig {
    CopulaModel model;
    TauShape shape = TauShape::step;
    std::size_t n = 200;
};

struct SimulatedData {
    Dataset data;              // x sorted ascending for readable exports
    std::vector<double> tau;   // true tau(x_i)
    std::vector<double> theta; // true theta(x_i)
};

SimulatedData generate_dataset(const DgpConfig& dgp, Rng& rng);

struct ReplicateMetrics {
    double rmse = 0.0;        // mean squared error of posterior-mean theta, as printed
    double rmse_rooted = 0.0;
    double ci_length = 0.0;
    double ci_cov = 0.0;
    double n_leaves = 0.0;    // posterior mean of per-iteration mean leaf count
    double depth = 0.0;
    double acceptance = 0.0;  // post-burn-in acceptance over supported candidates, pooled over chains
};

struct StudyResult {
    std::vector<ReplicateMetrics> reps;
    ReplicateMetrics mean;
    ReplicateMetrics sd;
};

// end-to-end repetition study: simulate, fit `num_chains` chains, score theta(x)
StudyResult run_study(const DgpConfig& dgp, const SamplerConfig& config, int num_reps,
                      int num_chains, std::uint64_t seed);

ReplicateMetrics score_replicate(const SimulatedData& sim,
                                 const std::vector<ChainTrace>& chains);

} // namespace ccbart
