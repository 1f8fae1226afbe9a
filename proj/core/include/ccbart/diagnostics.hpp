#pragma once

#include <array>
#include <vector>

#include "ccbart/copula.hpp"
#include "ccbart/rng.hpp"
#include "ccbart/sampler.hpp"

namespace ccbart {

// pointwise posterior mean and central 95% interval of theta(x_i), pooled over chains
struct PosteriorSummary {
    std::vector<double> mean;
    std::vector<double> lo; // 2.5% quantile
    std::vector<double> hi; // 97.5% quantile
};

PosteriorSummary summarize_theta(const std::vector<ChainTrace>& chains);

// type-7 sample quantile (linear interpolation); data need not be sorted
double quantile(std::vector<double> values, double p);

// mean of squared errors, without the root
double rmse_printed(const std::vector<double>& estimate, const std::vector<double>& truth);
double rmse_rooted(const std::vector<double>& estimate, const std::vector<double>& truth);
double mean_ci_length(const std::vector<double>& lo, const std::vector<double>& hi);
double ci_coverage(const std::vector<double>& lo, const std::vector<double>& hi,
                   const std::vector<double>& truth);

using PointSet = std::vector<std::array<double, 2>>;

// Baringhaus-Franz energy statistic with the Euclidean kernel
double cramer_statistic(const PointSet& a, const PointSet& b);

// Fasano-Franceschini two-sample KS: average of the two one-sided quadrant
// maxima (centers taken at the points of one sample at a time)
double ff_statistic(const PointSet& a, const PointSet& b);

enum class GofStat { cramer, ff };

struct GofResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

// permutation test of "a and b are draws from the same distribution";
// p = (1 + #{perm >= observed}) / (n_perm + 1)
GofResult permutation_test(const PointSet& a, const PointSet& b, GofStat stat, int n_perm,
                           const Rng& rng);

// Simulates one replicate pair set from the fitted conditional copula (theta_hat
// per observation) and tests it against the observed pairs.
GofResult gof_test(const CopulaModel& model, const Dataset& data,
                   const std::vector<double>& theta_hat, GofStat stat, int n_perm,
                   const Rng& rng);

} // namespace ccbart
