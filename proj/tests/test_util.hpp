#pragma once

#include <array>
#include <functional>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "ccbart/copula.hpp"
#include "ccbart/dataset.hpp"
#include "ccbart/rng.hpp"

namespace test_util {

inline const std::vector<ccbart::Family>& all_families() {
    static const std::vector<ccbart::Family> f = {
        ccbart::Family::gaussian, ccbart::Family::student_t, ccbart::Family::clayton,
        ccbart::Family::gumbel, ccbart::Family::frank};
    return f;
}

inline ccbart::CopulaModel make_model(ccbart::Family family, double df = 4.0) {
    ccbart::CopulaModel m;
    m.family = family;
    m.df = df;
    return m;
}

// panel-composited Gauss-Legendre over (0,1)^2; cosine-graded panel edges
// concentrate points near the corners where copula densities blow up
inline double integrate_unit_square(const std::function<double(double, double)>& f,
                                    int panels = 8) {
    using quad = boost::math::quadrature::gauss<double, 20>;
    std::vector<double> edges(panels + 1);
    for (int i = 0; i <= panels; ++i)
        edges[i] = 0.5 * (1.0 - std::cos(M_PI * static_cast<double>(i) / panels));
    double total = 0.0;
    for (int i = 0; i < panels; ++i)
        for (int j = 0; j < panels; ++j) {
            const double u0 = edges[i], u1 = edges[i + 1];
            const double v0 = edges[j], v1 = edges[j + 1];
            total += quad::integrate(
                [&](double u) {
                    return quad::integrate([&](double v) { return f(u, v); }, v0, v1);
                },
                u0, u1);
        }
    return total;
}

inline double kendall_tau_empirical(const std::vector<double>& u, const std::vector<double>& v) {
    const std::size_t n = u.size();
    long concordant = 0, discordant = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = (u[i] - u[j]) * (v[i] - v[j]);
            if (s > 0)
                ++concordant;
            else if (s < 0)
                ++discordant;
        }
    return static_cast<double>(concordant - discordant) /
           (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

// asymptotic standard error of the empirical Kendall tau under independence
inline double kendall_tau_se(std::size_t n) {
    return std::sqrt(2.0 * (2.0 * n + 5.0) / (9.0 * n * (n - 1.0)));
}

inline ccbart::Dataset grid_dataset(std::size_t n, std::uint64_t seed = 99) {
    ccbart::Rng rng(seed);
    ccbart::Dataset data;
    data.x.resize(1);
    for (std::size_t i = 0; i < n; ++i) {
        data.x[0].push_back((i + 0.5) / static_cast<double>(n));
        data.u1.push_back(rng.uniform());
        data.u2.push_back(rng.uniform());
    }
    return data;
}

} // namespace test_util
