#include <doctest.h>

#include <cmath>

#include "ccbart/copula.hpp"
#include "test_util.hpp"

using namespace ccbart;
using test_util::make_model;

namespace {

// a moderate and a strong dependence level per family, via the tau scale
std::vector<double> theta_grid(const CopulaModel& model) {
    return {theta_from_tau(model, 0.3), theta_from_tau(model, 0.6)};
}

double fd_mixed_partial(const CopulaModel& model, double u, double v, double theta, double h) {
    return (cdf(model, u + h, v + h, theta) - cdf(model, u + h, v - h, theta) -
            cdf(model, u - h, v + h, theta) + cdf(model, u - h, v - h, theta)) /
           (4.0 * h * h);
}

} // namespace

TEST_CASE("link functions map the real line into each family's support") {
    CHECK(link_apply(make_model(Family::gaussian), 0.0) == doctest::Approx(0.0));
    CHECK(link_apply(make_model(Family::gaussian), 2.0) ==
          doctest::Approx(std::tanh(1.0)));
    CHECK(link_apply(make_model(Family::clayton), 0.0) == doctest::Approx(1.0));
    CHECK(link_apply(make_model(Family::gumbel), 0.0) == doctest::Approx(2.0));
    CHECK(link_apply(make_model(Family::frank), -3.5) == doctest::Approx(-3.5));
    for (Family f : test_util::all_families()) {
        const auto model = make_model(f);
        for (double x : {-40.0, -3.0, 0.0, 3.0, 40.0})
            CHECK(theta_in_support(model, link_apply(model, x)));
    }
}

TEST_CASE("density equals the finite-difference mixed partial of the CDF") {
    const double h = 1e-3;
    for (Family f : test_util::all_families()) {
        const auto model = make_model(f);
        for (double theta : theta_grid(model)) {
            for (const auto& [u, v] :
                 {std::pair{0.3, 0.4}, std::pair{0.5, 0.5}, std::pair{0.7, 0.2}}) {
                const double exact = std::exp(log_density(model, u, v, theta));
                const double approx = fd_mixed_partial(model, u, v, theta, h);
                INFO(family_name(f), " theta=", theta, " u=", u, " v=", v);
                CHECK(std::abs(approx - exact) / exact < 1e-4);
            }
        }
    }
}

TEST_CASE("density integrates to one over the unit square") {
    for (Family f : test_util::all_families()) {
        const auto model = make_model(f);
        for (double theta : theta_grid(model)) {
            const double mass = test_util::integrate_unit_square(
                [&](double u, double v) { return std::exp(log_density(model, u, v, theta)); });
            INFO(family_name(f), " theta=", theta);
            CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
        }
    }
}

TEST_CASE("closed-form tau matches the double-integral definition") {
    for (Family f : test_util::all_families()) {
        const auto model = make_model(f);
        const double theta = theta_from_tau(model, 0.4);
        const double integral = test_util::integrate_unit_square([&](double u, double v) {
            return cdf(model, u, v, theta) * std::exp(log_density(model, u, v, theta));
        });
        const double tau = 4.0 * integral - 1.0;
        INFO(family_name(f));
        CHECK(tau == doctest::Approx(tau_from_theta(model, theta)).epsilon(1e-3));
    }
}

TEST_CASE("negative-dependence branches agree with the definition") {
    // Gaussian with rho < 0 and Frank with theta < 0
    for (Family f : {Family::gaussian, Family::frank}) {
        const auto model = make_model(f);
        const double theta = theta_from_tau(model, -0.35);
        CHECK(theta < 0.0);
        CHECK(tau_from_theta(model, theta) == doctest::Approx(-0.35).epsilon(1e-8));
        const double mass = test_util::integrate_unit_square(
            [&](double u, double v) { return std::exp(log_density(model, u, v, theta)); });
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
        const double exact = std::exp(log_density(model, 0.3, 0.6, theta));
        CHECK(std::abs(fd_mixed_partial(model, 0.3, 0.6, theta, 1e-3) - exact) / exact < 1e-4);
    }
}

TEST_CASE("Frank reflection identity c_{-theta}(u,v) = c_theta(1-u,v)") {
    const auto model = make_model(Family::frank);
    for (double theta : {0.7, 4.0, 15.0})
        for (const auto& [u, v] : {std::pair{0.2, 0.8}, std::pair{0.55, 0.3}})
            CHECK(log_density(model, u, v, -theta) ==
                  doctest::Approx(log_density(model, 1.0 - u, v, theta)).epsilon(1e-12));
}

TEST_CASE("independence limits") {
    const auto frank = make_model(Family::frank);
    CHECK(log_density(frank, 0.3, 0.7, 1e-12) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(cdf(frank, 0.3, 0.7, 1e-12) == doctest::Approx(0.21).epsilon(1e-9));
    const auto gauss = make_model(Family::gaussian);
    CHECK(log_density(gauss, 0.3, 0.7, 0.0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(tau_from_theta(frank, 1e-12) == doctest::Approx(0.0));
}

TEST_CASE("CDF respects the Frechet bounds and uniform margins") {
    for (Family f : test_util::all_families()) {
        const auto model = make_model(f);
        const double theta = theta_from_tau(model, 0.5);
        for (double u : {0.1, 0.4, 0.8})
            for (double v : {0.2, 0.6, 0.9}) {
                const double c = cdf(model, u, v, theta);
                CHECK(c >= std::max(u + v - 1.0, 0.0) - 1e-9);
                CHECK(c <= std::min(u, v) + 1e-9);
            }
        CHECK(cdf(model, 0.37, 1.0 - 1e-13, theta) == doctest::Approx(0.37).epsilon(1e-6));
        CHECK(cdf(model, 1.0 - 1e-13, 0.58, theta) == doctest::Approx(0.58).epsilon(1e-6));
    }
}

TEST_CASE("tau round-trips through theta_from_tau") {
    for (Family f : test_util::all_families()) {
        const auto model = make_model(f);
        for (double tau : {0.05, 0.3, 0.6, 0.85}) {
            CHECK(tau_from_theta(model, theta_from_tau(model, tau)) ==
                  doctest::Approx(tau).epsilon(1e-8));
        }
    }
    for (Family f : {Family::gaussian, Family::student_t, Family::frank}) {
        const auto model = make_model(f);
        CHECK(tau_from_theta(model, theta_from_tau(model, -0.5)) ==
              doctest::Approx(-0.5).epsilon(1e-8));
    }
}

TEST_CASE("theta_from_tau rejects tau outside the family range") {
    CHECK_THROWS_AS(theta_from_tau(make_model(Family::clayton), -0.2), std::domain_error);
    CHECK_THROWS_AS(theta_from_tau(make_model(Family::gumbel), -0.1), std::domain_error);
    CHECK_THROWS_AS(theta_from_tau(make_model(Family::gaussian), 1.5), std::domain_error);
}

TEST_CASE("sampler reproduces Kendall's tau within Monte Carlo error") {
    const std::size_t n = 1500;
    const double four_se = 4.0 * test_util::kendall_tau_se(n);
    for (Family f : test_util::all_families()) {
        const auto model = make_model(f);
        for (double tau : {0.3, 0.65}) {
            const double theta = theta_from_tau(model, tau);
            Rng rng(0x5eed + static_cast<int>(f));
            std::vector<double> u(n), v(n);
            for (std::size_t i = 0; i < n; ++i) {
                const auto [a, b] = sample_pair(model, theta, rng);
                CHECK(a > 0.0);
                CHECK(a < 1.0);
                CHECK(b > 0.0);
                CHECK(b < 1.0);
                u[i] = a;
                v[i] = b;
            }
            INFO(family_name(f), " tau=", tau);
            CHECK(std::abs(test_util::kendall_tau_empirical(u, v) - tau) < four_se);
        }
    }
    // negative dependence path for the symmetric families
    for (Family f : {Family::gaussian, Family::frank}) {
        const auto model = make_model(f);
        const double theta = theta_from_tau(model, -0.4);
        Rng rng(77);
        std::vector<double> u(n), v(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto [a, b] = sample_pair(model, theta, rng);
            u[i] = a;
            v[i] = b;
        }
        CHECK(std::abs(test_util::kendall_tau_empirical(u, v) + 0.4) < four_se);
    }
}

TEST_CASE("family names round-trip") {
    for (Family f : test_util::all_families())
        CHECK(family_from_name(family_name(f)) == f);
    CHECK_THROWS_AS(family_from_name("copula9000"), std::invalid_argument);
}

TEST_CASE("density rejects arguments outside the open unit square") {
    const auto model = make_model(Family::clayton);
    CHECK_THROWS_AS(log_density(model, 0.0, 0.5, 1.0), std::domain_error);
    CHECK_THROWS_AS(log_density(model, 0.5, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(log_density(model, 0.5, 0.5, -1.0), std::domain_error);
}
