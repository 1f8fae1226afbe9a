#include "ccbart/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ccbart {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_normal_pdf(double x, double mean, double var) {
    const double d = x - mean;
    return -0.5 * std::log(2.0 * std::numbers::pi * var) - d * d / (2.0 * var);
}

} // namespace

CopulaLikelihood::CopulaLikelihood(const CopulaModel& model, const Dataset& data, bool flat)
    : model_(model), flat_(flat) {
    z1_.resize(data.n());
    z2_.resize(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) {
        z1_[i] = margin_transform(model_, data.u1[i]);
        z2_[i] = margin_transform(model_, data.u2[i]);
    }
}

double CopulaLikelihood::point(std::size_t i, double fit) const {
    if (flat_) return 0.0;
    const double theta = link_apply(model_, fit);
    if (!theta_in_support(model_, theta)) return kNegInf;
    return log_density_t(model_, z1_[i], z2_[i], theta);
}

double CopulaLikelihood::cell(const std::vector<int>& cell, const std::vector<double>& partial,
                              double mu) const {
    double sum = 0.0;
    for (int i : cell) sum += point(i, partial[i] + mu);
    return sum;
}

double CopulaLikelihood::total(const std::vector<double>& fit) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < fit.size(); ++i) sum += point(i, fit[i]);
    return sum;
}

AdaptiveState::AdaptiveState(std::size_t n)
    : mean_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))),
      m2_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))) {}

void AdaptiveState::update(const std::vector<double>& values) {
    const Eigen::Map<const Eigen::VectorXd> v(values.data(),
                                              static_cast<Eigen::Index>(values.size()));
    ++count_;
    const Eigen::VectorXd delta = v - mean_;
    mean_ += delta / static_cast<double>(count_);
    const Eigen::VectorXd delta2 = v - mean_;
    m2_.noalias() += delta * delta2.transpose();
}

Eigen::MatrixXd AdaptiveState::covariance() const {
    if (count_ < 2) throw std::logic_error("covariance needs at least two updates");
    return m2_ / static_cast<double>(count_ - 1);
}

double AdaptiveState::leaf_variance(const std::vector<int>& cell, double jitter) const {
    const double denom = static_cast<double>(count_ - 1);
    double sum = 0.0;
    for (int c : cell)
        for (int d : cell) sum += m2_(c, d);
    sum = sum / denom + jitter * static_cast<double>(cell.size());
    const double m = static_cast<double>(cell.size());
    return std::max(2.4 * 2.4 / (m * m * m) * sum, 1e-12);
}

double log_ar_grow(const GrowContext& ctx) {
    const double posterior =
        (ctx.log_prior_prop - ctx.log_prior_cur) + ctx.log_rule_prob +
        log_normal_pdf(ctx.mu_left, 0.0, ctx.sigma2) +
        log_normal_pdf(ctx.mu_right, 0.0, ctx.sigma2) -
        log_normal_pdf(ctx.mu_single, 0.0, ctx.sigma2) +
        (ctx.lik_left + ctx.lik_right - ctx.lik_cell);
    const double reverse = -std::log(static_cast<double>(ctx.n_prunable)) +
                           log_normal_pdf(ctx.mu_single, ctx.mu_merged, ctx.var_merged);
    const double forward = -std::log(static_cast<double>(ctx.n_terminal)) + ctx.log_rule_prob +
                           log_normal_pdf(ctx.mu_left, ctx.mu_single, ctx.var_left) +
                           log_normal_pdf(ctx.mu_right, ctx.mu_single, ctx.var_right);
    return posterior + reverse - forward;
}

double log_ar_prune(const GrowContext& ctx) { return -log_ar_grow(ctx); }

double log_ar_rule_change(const RuleChangeContext& ctx) {
    return (ctx.log_prior_prop - ctx.log_prior_cur) +
           (ctx.log_rules_prop - ctx.log_rules_cur) +
           (ctx.log_rev_rule - ctx.log_fwd_rule) + (ctx.lik_prop - ctx.lik_cur);
}

long MoveStats::total_attempted() const {
    return attempted[0] + attempted[1] + attempted[2] + attempted[3];
}

long MoveStats::total_accepted() const {
    return accepted[0] + accepted[1] + accepted[2] + accepted[3];
}

double MoveStats::acceptance_rate() const {
    const long n = total_attempted();
    return n == 0 ? 0.0 : static_cast<double>(total_accepted()) / static_cast<double>(n);
}

Sampler::Sampler(const CopulaModel& model, const Dataset& data, const SamplerConfig& config,
                 std::uint64_t seed)
    : data_(data),
      config_(config),
      lik_(model, data, config.flat_likelihood),
      rng_(seed) {
    if (config_.num_trees < 1) throw std::invalid_argument("num_trees must be positive");
    burn_in_ = config_.burn_in < 0 ? config_.iterations / 2 : config_.burn_in;

    const std::size_t n = data_.n();
    trees_.reserve(config_.num_trees);
    for (int k = 0; k < config_.num_trees; ++k)
        trees_.emplace_back(rng_.normal(0.0, config_.init_leaf_sd));
    sigma2_.assign(config_.num_trees, config_.sigma_b / (config_.sigma_a + 1.0));
    values_.assign(config_.num_trees, std::vector<double>(n, 0.0));
    fit_.assign(n, 0.0);
    partial_.assign(n, 0.0);
    for (int k = 0; k < config_.num_trees; ++k)
        std::fill(values_[k].begin(), values_[k].end(), trees_[k].node(0).mu);
    for (std::size_t i = 0; i < n; ++i) recompute_fit(i);
    adapt_.assign(config_.num_trees, AdaptiveState(n));
}

double Sampler::proposal_variance(int k, const std::vector<int>& cell) const {
    if (!cell.empty() && config_.adaptive && iter_ > config_.adapt_start &&
        adapt_[k].count() >= 2)
        return adapt_[k].leaf_variance(cell, config_.jitter);
    return config_.init_prop_var;
}

// Fits are re-summed over trees rather than delta-adjusted so the cache stays
// bit-exact over arbitrarily many sweeps.
void Sampler::recompute_fit(std::size_t i) {
    double sum = 0.0;
    for (int k = 0; k < config_.num_trees; ++k) sum += values_[k][i];
    fit_[i] = sum;
}

void Sampler::rebuild_values(int k) {
    for (std::size_t i = 0; i < data_.n(); ++i) {
        values_[k][i] = trees_[k].value_at(data_, i);
        recompute_fit(i);
    }
}

void Sampler::move_tree(int k) {
    const double u = rng_.uniform();
    int move;
    if (u < config_.moves.grow)
        move = 0;
    else if (u < config_.moves.grow + config_.moves.prune)
        move = 1;
    else if (u < config_.moves.grow + config_.moves.prune + config_.moves.change)
        move = 2;
    else
        move = 3;

    auto tally = [&](int slot, bool accepted, bool available) {
        for (MoveStats* s : {&stats_all_, iter_ > burn_in_ ? &stats_post_ : nullptr}) {
            if (!s) continue;
            ++s->attempted[slot];
            if (accepted) ++s->accepted[slot];
            if (!available) ++s->unavailable[slot];
        }
    };

    bool accepted = false;
    if (move == 0) {
        auto prop = propose_grow(trees_[k], data_, rng_);
        if (!prop) {
            tally(0, false, false);
            return;
        }
        GrowContext ctx;
        ctx.mu_single = trees_[k].node(prop->grown_leaf).mu;
        ctx.var_left = proposal_variance(k, prop->cell_left);
        ctx.var_right = proposal_variance(k, prop->cell_right);
        ctx.var_merged = proposal_variance(k, prop->cell);
        ctx.mu_left = rng_.normal(ctx.mu_single, std::sqrt(ctx.var_left));
        ctx.mu_right = rng_.normal(ctx.mu_single, std::sqrt(ctx.var_right));
        prop->tree.set_mu(prop->child_left, ctx.mu_left);
        prop->tree.set_mu(prop->child_right, ctx.mu_right);
        const double nl = static_cast<double>(prop->cell_left.size());
        const double nr = static_cast<double>(prop->cell_right.size());
        ctx.mu_merged = (nl * ctx.mu_left + nr * ctx.mu_right) / (nl + nr);
        ctx.log_prior_cur = log_prior(trees_[k], config_.tree_prior);
        ctx.log_prior_prop = log_prior(prop->tree, config_.tree_prior);
        ctx.log_rule_prob = prop->log_rule_prob;
        ctx.lik_cell = lik_.cell(prop->cell, partial_, ctx.mu_single);
        ctx.lik_left = lik_.cell(prop->cell_left, partial_, ctx.mu_left);
        ctx.lik_right = lik_.cell(prop->cell_right, partial_, ctx.mu_right);
        ctx.sigma2 = sigma2_[k];
        ctx.n_terminal = static_cast<int>(node_sets(trees_[k]).terminal.size());
        ctx.n_prunable = static_cast<int>(node_sets(prop->tree).prunable.size());
        if (std::log(rng_.uniform()) < log_ar_grow(ctx)) {
            trees_[k] = std::move(prop->tree);
            accepted = true;
        }
    } else if (move == 1) {
        auto prop = propose_prune(trees_[k], data_, rng_);
        if (!prop) {
            tally(1, false, false);
            return;
        }
        GrowContext ctx;
        ctx.mu_left = prop->mu_left;
        ctx.mu_right = prop->mu_right;
        const double nl = static_cast<double>(prop->cell_left.size());
        const double nr = static_cast<double>(prop->cell_right.size());
        ctx.mu_merged = (nl * ctx.mu_left + nr * ctx.mu_right) / (nl + nr);
        ctx.var_left = proposal_variance(k, prop->cell_left);
        ctx.var_right = proposal_variance(k, prop->cell_right);
        ctx.var_merged = proposal_variance(k, prop->cell);
        ctx.mu_single = rng_.normal(ctx.mu_merged, std::sqrt(ctx.var_merged));
        prop->tree.set_mu(prop->merged_leaf, ctx.mu_single);
        ctx.log_prior_cur = log_prior(prop->tree, config_.tree_prior);
        ctx.log_prior_prop = log_prior(trees_[k], config_.tree_prior);
        ctx.log_rule_prob = prop->log_rule_prob;
        ctx.lik_cell = lik_.cell(prop->cell, partial_, ctx.mu_single);
        ctx.lik_left = lik_.cell(prop->cell_left, partial_, ctx.mu_left);
        ctx.lik_right = lik_.cell(prop->cell_right, partial_, ctx.mu_right);
        ctx.sigma2 = sigma2_[k];
        ctx.n_terminal = static_cast<int>(node_sets(prop->tree).terminal.size());
        ctx.n_prunable = static_cast<int>(node_sets(trees_[k]).prunable.size());
        if (std::log(rng_.uniform()) < log_ar_prune(ctx)) {
            trees_[k] = std::move(prop->tree);
            accepted = true;
        }
    } else {
        auto prop = move == 2 ? propose_change(trees_[k], data_, rng_)
                              : propose_swap(trees_[k], data_, rng_);
        if (!prop) {
            tally(move, false, false);
            return;
        }
        const auto mass_prop = log_rule_mass(prop->tree, data_);
        if (!mass_prop) {
            // Off-support candidate: a descendant cutoff left its valid set.
            // Counted as unavailable, like the empty-leaf case inside the
            // proposal functions, so acceptance rates are measured over
            // supported candidates only.
            tally(move, false, false);
            return;
        }
        RuleChangeContext ctx;
        ctx.log_prior_cur = log_prior(trees_[k], config_.tree_prior);
        ctx.log_prior_prop = log_prior(prop->tree, config_.tree_prior);
        ctx.log_rules_cur = log_rule_mass(trees_[k], data_).value();
        ctx.log_rules_prop = *mass_prop;
        ctx.log_fwd_rule = prop->log_fwd_rule;
        ctx.log_rev_rule = prop->log_rev_rule;
        ctx.lik_cur = 0.0;
        ctx.lik_prop = 0.0;
        for (std::size_t i = 0; i < data_.n(); ++i) {
            ctx.lik_cur += lik_.point(i, partial_[i] + values_[k][i]);
            ctx.lik_prop += lik_.point(i, partial_[i] + prop->tree.value_at(data_, i));
        }
        if (std::log(rng_.uniform()) < log_ar_rule_change(ctx)) {
            trees_[k] = std::move(prop->tree);
            accepted = true;
        }
    }
    tally(move, accepted, true);
    if (accepted) rebuild_values(k);
}

void Sampler::refresh_leaves(int k) {
    for (const auto& [leaf, cell] : leaf_cells(trees_[k], data_)) {
        const double mu = trees_[k].node(leaf).mu;
        const double var = proposal_variance(k, cell);
        const double mu_new = rng_.normal(mu, std::sqrt(var));
        const double log_ar = lik_.cell(cell, partial_, mu_new) -
                              lik_.cell(cell, partial_, mu) +
                              log_normal_pdf(mu_new, 0.0, sigma2_[k]) -
                              log_normal_pdf(mu, 0.0, sigma2_[k]);
        const bool accepted = std::log(rng_.uniform()) < log_ar;
        for (MoveStats* s : {&stats_all_, iter_ > burn_in_ ? &stats_post_ : nullptr}) {
            if (!s) continue;
            ++s->refresh_attempted;
            if (accepted) ++s->refresh_accepted;
        }
        if (accepted) {
            trees_[k].set_mu(leaf, mu_new);
            for (int i : cell) {
                values_[k][i] = mu_new;
                recompute_fit(static_cast<std::size_t>(i));
            }
        }
    }
}

void Sampler::update_sigma2(int k) {
    double sum_sq = 0.0;
    int n_leaves = 0;
    for (int id = 0; id < trees_[k].size(); ++id) {
        const auto& node = trees_[k].node(id);
        if (node.is_leaf()) {
            sum_sq += node.mu * node.mu;
            ++n_leaves;
        }
    }
    const double shape = config_.sigma_a + 0.5 * n_leaves;
    const double rate = config_.sigma_b + 0.5 * sum_sq;
    sigma2_[k] = 1.0 / rng_.gamma(shape, 1.0 / rate);
}

void Sampler::sweep() {
    ++iter_;
    for (int k = 0; k < config_.num_trees; ++k) {
        for (std::size_t i = 0; i < data_.n(); ++i) partial_[i] = fit_[i] - values_[k][i];
        move_tree(k);
        refresh_leaves(k);
        update_sigma2(k);
        adapt_[k].update(values_[k]);
    }
}

ChainTrace Sampler::run() {
    ChainTrace trace;
    trace.seed = rng_.seed();
    trace.burn_in = burn_in_;
    trace.log_lik.reserve(config_.iterations);
    trace.mean_n_leaves.reserve(config_.iterations);
    trace.mean_depth.reserve(config_.iterations);
    for (int it = 1; it <= config_.iterations; ++it) {
        sweep();
        trace.log_lik.push_back(lik_.total(fit_));
        double nl = 0.0, dp = 0.0;
        for (const auto& tree : trees_) {
            nl += tree.n_leaves();
            dp += tree.depth();
        }
        trace.mean_n_leaves.push_back(nl / config_.num_trees);
        trace.mean_depth.push_back(dp / config_.num_trees);
        trace.accepted_moves.push_back(stats_all_.total_accepted());
        if (it > burn_in_ && (it - burn_in_) % config_.theta_thin == 0) {
            std::vector<double> theta(data_.n());
            for (std::size_t i = 0; i < data_.n(); ++i)
                theta[i] = link_apply(lik_.model(), fit_[i]);
            trace.theta.push_back(std::move(theta));
        }
    }
    trace.moves = stats_post_;
    trace.moves_all = stats_all_;
    return trace;
}

std::vector<ChainTrace> run_chains(const CopulaModel& model, const Dataset& data,
                                   const SamplerConfig& config, std::uint64_t seed,
                                   int num_chains) {
    const Rng base(seed);
    std::vector<ChainTrace> traces;
    traces.reserve(num_chains);
    for (int c = 0; c < num_chains; ++c) {
        Sampler sampler(model, data, config, base.substream(static_cast<std::uint64_t>(c)).seed());
        traces.push_back(sampler.run());
    }
    return traces;
}

} // namespace ccbart
