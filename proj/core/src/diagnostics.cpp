#include "ccbart/diagnostics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ccbart {

PosteriorSummary summarize_theta(const std::vector<ChainTrace>& chains) {
    std::size_t n = 0;
    std::size_t draws = 0;
    for (const auto& chain : chains) {
        draws += chain.theta.size();
        if (!chain.theta.empty()) n = chain.theta.front().size();
    }
    if (draws == 0) throw std::invalid_argument("no post-burn-in draws to summarize");

    PosteriorSummary out;
    out.mean.resize(n);
    out.lo.resize(n);
    out.hi.resize(n);
    std::vector<double> column(draws);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t d = 0;
        double sum = 0.0;
        for (const auto& chain : chains)
            for (const auto& row : chain.theta) {
                column[d++] = row[i];
                sum += row[i];
            }
        out.mean[i] = sum / static_cast<double>(draws);
        std::sort(column.begin(), column.end());
        out.lo[i] = quantile(column, 0.025);
        out.hi[i] = quantile(column, 0.975);
    }
    return out;
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("quantile of empty sample");
    if (!std::is_sorted(values.begin(), values.end()))
        std::sort(values.begin(), values.end());
    const double h = p * (static_cast<double>(values.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double rmse_printed(const std::vector<double>& estimate, const std::vector<double>& truth) {
    double sum = 0.0;
    for (std::size_t i = 0; i < estimate.size(); ++i) {
        const double d = estimate[i] - truth[i];
        sum += d * d;
    }
    return sum / static_cast<double>(estimate.size());
}

double rmse_rooted(const std::vector<double>& estimate, const std::vector<double>& truth) {
    return std::sqrt(rmse_printed(estimate, truth));
}

double mean_ci_length(const std::vector<double>& lo, const std::vector<double>& hi) {
    double sum = 0.0;
    for (std::size_t i = 0; i < lo.size(); ++i) sum += hi[i] - lo[i];
    return sum / static_cast<double>(lo.size());
}

double ci_coverage(const std::vector<double>& lo, const std::vector<double>& hi,
                   const std::vector<double>& truth) {
    std::size_t covered = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (lo[i] <= truth[i] && truth[i] <= hi[i]) ++covered;
    return static_cast<double>(covered) / static_cast<double>(truth.size());
}

namespace {

Eigen::MatrixXd pooled_distances(const PointSet& a, const PointSet& b) {
    const std::size_t n = a.size() + b.size();
    Eigen::MatrixXd dist(n, n);
    auto point = [&](std::size_t i) { return i < a.size() ? a[i] : b[i - a.size()]; };
    for (std::size_t i = 0; i < n; ++i) {
        dist(i, i) = 0.0;
        const auto pi = point(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto pj = point(j);
            const double d = std::hypot(pi[0] - pj[0], pi[1] - pj[1]);
            dist(i, j) = d;
            dist(j, i) = d;
        }
    }
    return dist;
}

// Baringhaus-Franz statistic from the pooled distance matrix and a label split
double cramer_from_distances(const Eigen::MatrixXd& dist, const std::vector<int>& idx_a,
                             const std::vector<int>& idx_b) {
    const double m = static_cast<double>(idx_a.size());
    const double n = static_cast<double>(idx_b.size());
    double cross = 0.0, within_a = 0.0, within_b = 0.0;
    for (int i : idx_a)
        for (int j : idx_b) cross += dist(i, j);
    for (int i : idx_a)
        for (int j : idx_a) within_a += dist(i, j);
    for (int i : idx_b)
        for (int j : idx_b) within_b += dist(i, j);
    return m * n / (m + n) *
           (cross / (m * n) - within_a / (2.0 * m * m) - within_b / (2.0 * n * n));
}

// one-sided quadrant KS distance with centers at `centers`
double ff_one_sided(const PointSet& centers, const PointSet& a, const PointSet& b) {
    double d_max = 0.0;
    for (const auto& c : centers) {
        int qa[4] = {0, 0, 0, 0};
        int qb[4] = {0, 0, 0, 0};
        for (const auto& p : a) ++qa[(p[0] > c[0] ? 1 : 0) + (p[1] > c[1] ? 2 : 0)];
        for (const auto& p : b) ++qb[(p[0] > c[0] ? 1 : 0) + (p[1] > c[1] ? 2 : 0)];
        for (int q = 0; q < 4; ++q) {
            const double d = std::abs(static_cast<double>(qa[q]) / a.size() -
                                      static_cast<double>(qb[q]) / b.size());
            d_max = std::max(d_max, d);
        }
    }
    return d_max;
}

} // namespace

double cramer_statistic(const PointSet& a, const PointSet& b) {
    const Eigen::MatrixXd dist = pooled_distances(a, b);
    std::vector<int> idx_a(a.size()), idx_b(b.size());
    std::iota(idx_a.begin(), idx_a.end(), 0);
    std::iota(idx_b.begin(), idx_b.end(), static_cast<int>(a.size()));
    return cramer_from_distances(dist, idx_a, idx_b);
}

double ff_statistic(const PointSet& a, const PointSet& b) {
    return 0.5 * (ff_one_sided(a, a, b) + ff_one_sided(b, a, b));
}

GofResult permutation_test(const PointSet& a, const PointSet& b, GofStat stat, int n_perm,
                           const Rng& rng) {
    GofResult out;
    out.statistic = stat == GofStat::cramer ? cramer_statistic(a, b) : ff_statistic(a, b);

    const std::size_t total = a.size() + b.size();
    PointSet pooled;
    pooled.reserve(total);
    pooled.insert(pooled.end(), a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());

    // the distance matrix is permutation-invariant, so build it once
    Eigen::MatrixXd dist;
    if (stat == GofStat::cramer) dist = pooled_distances(a, b);

    std::vector<int> labels(total);
    std::iota(labels.begin(), labels.end(), 0);
    int exceed = 0;
    for (int perm = 0; perm < n_perm; ++perm) {
        Rng stream = rng.substream(static_cast<std::uint64_t>(perm));
        for (std::size_t i = total - 1; i > 0; --i)
            std::swap(labels[i], labels[stream.uniform_index(i + 1)]);
        double value;
        if (stat == GofStat::cramer) {
            std::vector<int> idx_a(labels.begin(), labels.begin() + a.size());
            std::vector<int> idx_b(labels.begin() + a.size(), labels.end());
            value = cramer_from_distances(dist, idx_a, idx_b);
        } else {
            PointSet pa(a.size()), pb(b.size());
            for (std::size_t i = 0; i < a.size(); ++i) pa[i] = pooled[labels[i]];
            for (std::size_t i = 0; i < b.size(); ++i) pb[i] = pooled[labels[a.size() + i]];
            value = ff_statistic(pa, pb);
        }
        if (value >= out.statistic) ++exceed;
    }
    out.p_value = (1.0 + exceed) / (n_perm + 1.0);
    return out;
}

GofResult gof_test(const CopulaModel& model, const Dataset& data,
                   const std::vector<double>& theta_hat, GofStat stat, int n_perm,
                   const Rng& rng) {
    PointSet observed(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) observed[i] = {data.u1[i], data.u2[i]};

    Rng sim = rng.substream(0);
    PointSet replicate(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) {
        const auto [u, v] = sample_pair(model, theta_hat[i], sim);
        replicate[i] = {u, v};
    }
    return permutation_test(observed, replicate, stat, n_perm, rng.substream(1));
}

} // namespace ccbart
