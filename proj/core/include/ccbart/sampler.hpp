#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ccbart/copula.hpp"
#include "ccbart/dataset.hpp"
#include "ccbart/rng.hpp"
#include "ccbart/tree.hpp"

namespace ccbart {

// Copula log likelihood with the margin transforms cached once per dataset.
// `flat` turns the data term off (every point contributes 0), which leaves the
// chain targeting the prior alone.
class CopulaLikelihood {
public:
    CopulaLikelihood(const CopulaModel& model, const Dataset& data, bool flat = false);

    // log c(u_i, v_i; link(fit)) for one observation
    double point(std::size_t i, double fit) const;
    // sum over a cell, each observation evaluated at partial[i] + mu
    double cell(const std::vector<int>& cell, const std::vector<double>& partial,
                double mu) const;
    // sum over all observations at the given total fits
    double total(const std::vector<double>& fit) const;

    const CopulaModel& model() const { return model_; }
    std::size_t n() const { return z1_.size(); }

private:
    CopulaModel model_;
    std::vector<double> z1_, z2_;
    bool flat_;
};

// Running mean/covariance of one tree's value-at-observation vector,
// accumulated with Welford rank-1 updates.
class AdaptiveState {
public:
    explicit AdaptiveState(std::size_t n);

    void update(const std::vector<double>& values);
    long count() const { return count_; }

    // sample covariance (requires count >= 2)
    Eigen::MatrixXd covariance() const;

    // 2.4^2 / |cell|^3 * sum_{c,d in cell} [C + jitter*I]_{cd}
    double leaf_variance(const std::vector<int>& cell, double jitter) const;

private:
    long count_ = 0;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd m2_;
};

struct MoveProbs {
    double grow = 0.25, prune = 0.25, change = 0.25, swap = 0.25;
};

struct SamplerConfig {
    int num_trees = 1;
    int iterations = 3000;
    int burn_in = -1;       // -1: iterations / 2
    int adapt_start = 500;  // adaptive proposal variance kicks in after this many iterations
    bool adaptive = true;
    double init_prop_var = 0.2;
    double jitter = 1e-6;
    double init_leaf_sd = 0.31622776601683794; // sqrt(0.1), for the initial single-node values
    double sigma_a = 1.0;  // inverse-gamma shape on each tree's leaf-value variance
    double sigma_b = 2.0;  // inverse-gamma scale
    LossPriorParams tree_prior;
    MoveProbs moves;
    bool flat_likelihood = false; // target the prior only (no data term)
    int theta_thin = 1;           // keep every k-th post-burn-in theta draw
};

// Everything either side of a grow/prune pair needs; kept explicit so the
// acceptance ratio can be recomputed independently in tests.
struct GrowContext {
    double log_prior_cur = 0.0, log_prior_prop = 0.0; // tree structure prior
    double log_rule_prob = 0.0;                       // pi_RULE of the added/deleted rule
    double lik_cell = 0.0;                            // cell likelihood at the single value
    double lik_left = 0.0, lik_right = 0.0;           // cell likelihoods at the two values
    double mu_single = 0.0, mu_left = 0.0, mu_right = 0.0;
    double mu_merged = 0.0; // count-weighted average of the two child values
    double var_left = 0.0, var_right = 0.0, var_merged = 0.0; // proposal variances
    double sigma2 = 1.0;    // leaf-value prior variance of this tree
    int n_terminal = 0;     // #TN of the tree with the single leaf
    int n_prunable = 0;     // #PN of the tree with the pair
};

double log_ar_grow(const GrowContext& ctx);
double log_ar_prune(const GrowContext& ctx); // same context, roles reversed

// change and swap keep the leaf values; only the partition moves. Reshaped
// descendant cells change the rule-mass factor of the target, so both totals
// enter the ratio; the edited node's own draw probabilities (zero for swap,
// which is deterministic given the pair) cancel against its own mass terms.
struct RuleChangeContext {
    double log_prior_cur = 0.0, log_prior_prop = 0.0;
    double log_rules_cur = 0.0, log_rules_prop = 0.0; // total pi_RULE mass of each tree
    double log_fwd_rule = 0.0, log_rev_rule = 0.0;    // rule draw at the edited node
    double lik_cur = 0.0, lik_prop = 0.0; // full-data likelihood of this tree's fit
};

double log_ar_rule_change(const RuleChangeContext& ctx);

struct MoveStats {
    long attempted[4] = {0, 0, 0, 0}; // grow, prune, change, swap
    long accepted[4] = {0, 0, 0, 0};
    long unavailable[4] = {0, 0, 0, 0};
    long refresh_attempted = 0; // per-leaf value refresh MH updates
    long refresh_accepted = 0;

    long total_attempted() const;
    long total_accepted() const;
    double acceptance_rate() const;
};

struct ChainTrace {
    std::uint64_t seed = 0;
    std::vector<double> log_lik;       // per iteration, data term at the current fit
    std::vector<double> mean_n_leaves; // per iteration, averaged over trees
    std::vector<double> mean_depth;
    std::vector<long> accepted_moves;  // per iteration, cumulative count of accepted moves
    std::vector<std::vector<double>> theta; // post-burn-in draws of theta(x_i), row per draw
    MoveStats moves;           // counted after burn-in
    MoveStats moves_all;       // counted from iteration 1
    int burn_in = 0;
};

class Sampler {
public:
    Sampler(const CopulaModel& model, const Dataset& data, const SamplerConfig& config,
            std::uint64_t seed);

    ChainTrace run();

    // exposed for tests: one backfitting pass over all trees
    void sweep();
    const std::vector<DecisionTree>& trees() const { return trees_; }
    const std::vector<double>& fit() const { return fit_; }
    const std::vector<double>& tree_values(int k) const { return values_[k]; }
    double sigma2(int k) const { return sigma2_[k]; }
    const AdaptiveState& adaptive_state(int k) const { return adapt_[k]; }
    int iteration() const { return iter_; }
    const MoveStats& move_stats() const { return stats_all_; }

private:
    double proposal_variance(int k, const std::vector<int>& cell) const;
    void recompute_fit(std::size_t i);
    void move_tree(int k);
    void refresh_leaves(int k);
    void update_sigma2(int k);
    void rebuild_values(int k);

    const Dataset& data_;
    SamplerConfig config_;
    CopulaLikelihood lik_;
    Rng rng_;
    std::vector<DecisionTree> trees_;
    std::vector<double> sigma2_;
    std::vector<std::vector<double>> values_; // values_[k][i] = tree k at observation i
    std::vector<double> fit_;                 // sum over trees
    std::vector<double> partial_;             // scratch: fit minus current tree
    std::vector<AdaptiveState> adapt_;
    MoveStats stats_all_, stats_post_;
    int iter_ = 0;
    int burn_in_ = 0;
};

// the four chains of the default setup, seeds derived from `seed` by substream index
std::vector<ChainTrace> run_chains(const CopulaModel& model, const Dataset& data,
                                   const SamplerConfig& config, std::uint64_t seed,
                                   int num_chains);

} // namespace ccbart
