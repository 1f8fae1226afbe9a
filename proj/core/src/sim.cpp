#include "ccbart/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "ccbart/diagnostics.hpp"

namespace ccbart {

double tau_step(double x) {
    if (x < 1.0 / 3.0) return 0.3;
    if (x < 2.0 / 3.0) return 0.8;
    return 0.3;
}

double tau_sine(double x) { return 0.2 * std::sin(2.0 * std::numbers::pi * x) + 0.5; }

double tau_curve(TauShape shape, double x) {
    return shape == TauShape::step ? tau_step(x) : tau_sine(x);
}

TauShape tau_shape_from_name(const std::string& name) {
    if (name == "step") return TauShape::step;
    if (name == "sine") return TauShape::sine;
    throw std::invalid_argument("unknown tau shape: " + name);
}

std::string tau_shape_name(TauShape shape) {
    return shape == TauShape::step ? "step" : "sine";
}

SimulatedData generate_dataset(const DgpConfig& dgp, Rng& rng) {
    SimulatedData out;
    std::vector<double> x(dgp.n);
    for (auto& xi : x) xi = rng.uniform();
    std::sort(x.begin(), x.end());

    out.data.x.assign(1, x);
    out.data.u1.resize(dgp.n);
    out.data.u2.resize(dgp.n);
    out.tau.resize(dgp.n);
    out.theta.resize(dgp.n);
    for (std::size_t i = 0; i < dgp.n; ++i) {
        out.tau[i] = tau_curve(dgp.shape, x[i]);
        out.theta[i] = theta_from_tau(dgp.model, out.tau[i]);
        const auto [u, v] = sample_pair(dgp.model, out.theta[i], rng);
        out.data.u1[i] = u;
        out.data.u2[i] = v;
    }
    out.data.validate();
    return out;
}

ReplicateMetrics score_replicate(const SimulatedData& sim,
                                 const std::vector<ChainTrace>& chains) {
    ReplicateMetrics m;
    const auto summary = summarize_theta(chains);
    m.rmse = rmse_printed(summary.mean, sim.theta);
    m.rmse_rooted = rmse_rooted(summary.mean, sim.theta);
    m.ci_length = mean_ci_length(summary.lo, summary.hi);
    m.ci_cov = ci_coverage(summary.lo, summary.hi, sim.theta);

    double nl = 0.0, dp = 0.0;
    long kept = 0, attempted = 0, accepted = 0;
    for (const auto& chain : chains) {
        for (std::size_t t = static_cast<std::size_t>(chain.burn_in);
             t < chain.mean_n_leaves.size(); ++t) {
            nl += chain.mean_n_leaves[t];
            dp += chain.mean_depth[t];
            ++kept;
        }
        for (int mv = 0; mv < 4; ++mv) {
            attempted += chain.moves.attempted[mv] - chain.moves.unavailable[mv];
            accepted += chain.moves.accepted[mv];
        }
    }
    m.n_leaves = nl / static_cast<double>(kept);
    m.depth = dp / static_cast<double>(kept);
    // Acceptance over draws that produced a supported candidate tree; draws
    // where no candidate exists (e.g. swap with one predictor, prune at a
    // stump) or where the drawn rule leaves the prior support say nothing
    // about the chain's mobility and are excluded from the denominator.
    m.acceptance =
        attempted == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(attempted);
    return m;
}

namespace {

ReplicateMetrics aggregate(const std::vector<ReplicateMetrics>& reps, bool want_sd) {
    auto stat = [&](double ReplicateMetrics::*field) {
        double sum = 0.0;
        for (const auto& r : reps) sum += r.*field;
        const double mean = sum / static_cast<double>(reps.size());
        if (!want_sd) return mean;
        if (reps.size() < 2) return 0.0;
        double ss = 0.0;
        for (const auto& r : reps) {
            const double d = r.*field - mean;
            ss += d * d;
        }
        return std::sqrt(ss / static_cast<double>(reps.size() - 1));
    };
    ReplicateMetrics out;
    out.rmse = stat(&ReplicateMetrics::rmse);
    out.rmse_rooted = stat(&ReplicateMetrics::rmse_rooted);
    out.ci_length = stat(&ReplicateMetrics::ci_length);
    out.ci_cov = stat(&ReplicateMetrics::ci_cov);
    out.n_leaves = stat(&ReplicateMetrics::n_leaves);
    out.depth = stat(&ReplicateMetrics::depth);
    out.acceptance = stat(&ReplicateMetrics::acceptance);
    return out;
}

} // namespace

StudyResult run_study(const DgpConfig& dgp, const SamplerConfig& config, int num_reps,
                      int num_chains, std::uint64_t seed) {
    StudyResult out;
    const Rng base(seed);
    for (int rep = 0; rep < num_reps; ++rep) {
        Rng data_rng = base.substream(2 * static_cast<std::uint64_t>(rep));
        const auto sim = generate_dataset(dgp, data_rng);
        const auto chains =
            run_chains(dgp.model, sim.data, config,
                       base.substream(2 * static_cast<std::uint64_t>(rep) + 1).seed(),
                       num_chains);
        out.reps.push_back(score_replicate(sim, chains));
    }
    out.mean = aggregate(out.reps, false);
    out.sd = aggregate(out.reps, true);
    return out;
}

} // namespace ccbart
