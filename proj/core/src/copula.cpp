#include "ccbart/copula.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

namespace ccbart {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kThetaZeroTol = 1e-10; // Frank/Clayton independence limit

double logsumexp2(double a, double b) {
    const double m = std::max(a, b);
    if (!std::isfinite(m)) return m;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

void check_interior(double u1, double u2) {
    if (!(u1 > 0.0 && u1 < 1.0 && u2 > 0.0 && u2 < 1.0))
        throw std::domain_error("copula arguments must lie strictly inside (0,1)");
}

void check_theta(const CopulaModel& model, double theta) {
    if (!theta_in_support(model, theta))
        throw std::domain_error("theta outside the support of " + family_name(model.family));
}

const boost::math::normal_distribution<double>& std_normal() {
    static const boost::math::normal_distribution<double> d(0.0, 1.0);
    return d;
}

// ---- Gaussian ----

double gaussian_log_density(double z1, double z2, double rho) {
    const double s2 = 1.0 - rho * rho;
    return -0.5 * std::log(s2)
        - (rho * rho * (z1 * z1 + z2 * z2) - 2.0 * rho * z1 * z2) / (2.0 * s2);
}

double gaussian_cdf(double z1, double z2, double rho) {
    if (rho == 0.0)
        return boost::math::cdf(std_normal(), z1) * boost::math::cdf(std_normal(), z2);
    const double s = std::sqrt(1.0 - rho * rho);
    const double hi = std::min(z1, 8.5);
    if (hi <= -8.5) return 0.0;
    auto f = [&](double t) {
        return boost::math::pdf(std_normal(), t)
            * boost::math::cdf(std_normal(), (z2 - rho * t) / s);
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -8.5, hi, 15, 1e-14);
}

// ---- Student-t ----

double t_log_pdf(double z, double nu) {
    return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu)
        - 0.5 * std::log(nu * kPi)
        - 0.5 * (nu + 1.0) * std::log1p(z * z / nu);
}

double t_log_density(double z1, double z2, double rho, double nu) {
    const double s2 = 1.0 - rho * rho;
    const double q = z1 * z1 - 2.0 * rho * z1 * z2 + z2 * z2;
    const double log_joint = std::lgamma(0.5 * (nu + 2.0)) - std::lgamma(0.5 * nu)
        - std::log(nu * kPi) - 0.5 * std::log(s2)
        - 0.5 * (nu + 2.0) * std::log1p(q / (nu * s2));
    return log_joint - t_log_pdf(z1, nu) - t_log_pdf(z2, nu);
}

double t_cdf2(double z1, double z2, double rho, double nu) {
    const boost::math::students_t_distribution<double> t1(nu);
    if (rho == 0.0)
        return boost::math::cdf(t1, z1) * boost::math::cdf(t1, z2);
    const boost::math::students_t_distribution<double> t2(nu + 1.0);
    const double s2 = 1.0 - rho * rho;
    // substitute t = sqrt(nu) tan(phi): the heavy t tails would force the
    // quadrature over an enormous interval, while in phi the weight becomes
    // cos(phi)^(nu-1) on a compact range
    const double norm = std::exp(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu)) /
                        std::sqrt(kPi);
    auto f = [&](double phi) {
        const double t = std::sqrt(nu) * std::tan(phi);
        const double scale = std::sqrt((nu + t * t) * s2 / (nu + 1.0));
        return norm * std::pow(std::cos(phi), nu - 1.0) *
               boost::math::cdf(t2, (z2 - rho * t) / scale);
    };
    const double phi1 = std::atan(z1 / std::sqrt(nu));
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -0.5 * kPi, phi1,
                                                                         10, 1e-12);
}

// ---- Clayton (theta > 0) ----

// log(u1^-t + u2^-t - 1), stable over the whole theta range
double clayton_log_sum(double u1, double u2, double theta) {
    const double a = -theta * std::log(u1);
    const double b = -theta * std::log(u2);
    if (std::max(a, b) < 30.0)
        return std::log1p(std::expm1(a) + std::expm1(b));
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m) - std::exp(-m));
}

double clayton_log_density(double u1, double u2, double theta) {
    if (theta < kThetaZeroTol) return 0.0;
    return std::log1p(theta) - (theta + 1.0) * (std::log(u1) + std::log(u2))
        - (2.0 + 1.0 / theta) * clayton_log_sum(u1, u2, theta);
}

double clayton_cdf(double u1, double u2, double theta) {
    if (theta < kThetaZeroTol) return u1 * u2;
    return std::exp(-clayton_log_sum(u1, u2, theta) / theta);
}

// ---- Gumbel (theta >= 1) ----

double gumbel_log_density(double u1, double u2, double theta) {
    const double x = -std::log(u1), y = -std::log(u2);
    const double lx = std::log(x), ly = std::log(y);
    const double ls = logsumexp2(theta * lx, theta * ly);
    const double w = std::exp(ls / theta);
    return -w + x + y + (theta - 1.0) * (lx + ly) + (2.0 / theta - 2.0) * ls
        + std::log(w + theta - 1.0) - std::log(w);
}

double gumbel_cdf(double u1, double u2, double theta) {
    const double lx = std::log(-std::log(u1)), ly = std::log(-std::log(u2));
    return std::exp(-std::exp(logsumexp2(theta * lx, theta * ly) / theta));
}

// ---- Frank ----
// theta < 0 is evaluated through the reflection c_{-t}(u,v) = c_t(1-u,v).

double frank_log_density_pos(double u1, double u2, double theta) {
    double log_d;
    if (theta < 0.5) {
        const double d = -std::expm1(-theta)
            - std::expm1(-theta * u1) * std::expm1(-theta * u2);
        log_d = std::log(d);
    } else {
        const double m = -theta * std::min(u1, u2);
        log_d = m + std::log(std::exp(-theta * u1 - m) + std::exp(-theta * u2 - m)
                             - std::exp(-theta - m) - std::exp(-theta * (u1 + u2) - m));
    }
    return std::log(theta) + std::log(-std::expm1(-theta)) - theta * (u1 + u2) - 2.0 * log_d;
}

double frank_log_density(double u1, double u2, double theta) {
    if (std::abs(theta) < kThetaZeroTol) return 0.0;
    if (theta < 0.0) return frank_log_density_pos(1.0 - u1, u2, -theta);
    return frank_log_density_pos(u1, u2, theta);
}

double frank_cdf(double u1, double u2, double theta) {
    if (std::abs(theta) < kThetaZeroTol) return u1 * u2;
    if (theta < 0.0) return u2 - frank_cdf(1.0 - u1, u2, -theta);
    return -std::log1p(std::expm1(-theta * u1) * std::expm1(-theta * u2)
                       / std::expm1(-theta)) / theta;
}

// Debye function of order 1
double debye1(double theta) {
    auto f = [](double t) { return t < 1e-8 ? 1.0 - t / 2.0 : t / std::expm1(t); };
    const double integral =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, theta, 12, 1e-12);
    return integral / theta;
}

double frank_tau(double theta) {
    if (std::abs(theta) < 1e-5) return theta / 9.0;
    const double at = std::abs(theta);
    const double tau = 1.0 - 4.0 / at * (1.0 - debye1(at));
    return theta > 0.0 ? tau : -tau;
}

std::pair<double, double> frank_sample(double theta, Rng& rng) {
    const double u = rng.uniform();
    const double w = rng.uniform();
    if (std::abs(theta) < kThetaZeroTol) return {u, w};
    const bool neg = theta < 0.0;
    const double t = neg ? -theta : theta;
    const double uu = neg ? 1.0 - u : u;
    // conditional quantile of V given U = uu at level w
    const double log_num = logsumexp2(-t * uu + std::log1p(-w), -t + std::log(w));
    const double log_den = std::log(w + (1.0 - w) * std::exp(-t * uu));
    double v = -(log_num - log_den) / t;
    v = std::clamp(v, std::numeric_limits<double>::min(),
                   1.0 - std::numeric_limits<double>::epsilon());
    return {neg ? 1.0 - uu : uu, v};
}

// positive stable S(alpha) with Laplace transform exp(-s^alpha), alpha in (0,1)
double positive_stable(double alpha, Rng& rng) {
    const double u = rng.uniform(0.0, kPi);
    const double w = rng.exponential();
    const double s2 = std::sin((1.0 - alpha) * u) / w;
    return std::sin(alpha * u) * std::pow(std::sin(u), -1.0 / alpha) *
           std::pow(s2, (1.0 - alpha) / alpha);
}

} // namespace

std::string family_name(Family f) {
    switch (f) {
        case Family::gaussian: return "gaussian";
        case Family::student_t: return "student_t";
        case Family::clayton: return "clayton";
        case Family::gumbel: return "gumbel";
        case Family::frank: return "frank";
    }
    return "unknown";
}

Family family_from_name(const std::string& name) {
    if (name == "gaussian") return Family::gaussian;
    if (name == "student_t" || name == "student-t" || name == "t") return Family::student_t;
    if (name == "clayton") return Family::clayton;
    if (name == "gumbel") return Family::gumbel;
    if (name == "frank") return Family::frank;
    throw std::invalid_argument("unknown copula family: " + name);
}

void CopulaModel::validate() const {
    if (family == Family::student_t && !(df > 2.0))
        throw std::invalid_argument("Student-t df must exceed 2");
}

double link_apply(const CopulaModel& model, double x) {
    if (!std::isfinite(x)) throw std::domain_error("link argument must be finite");
    switch (model.family) {
        case Family::gaussian:
        case Family::student_t: {
            double rho = std::tanh(0.5 * x);
            if (rho >= 1.0) rho = std::nextafter(1.0, 0.0);
            if (rho <= -1.0) rho = std::nextafter(-1.0, 0.0);
            return rho;
        }
        case Family::clayton: {
            const double theta = std::exp(x);
            return theta > 0.0 ? theta : std::numeric_limits<double>::min();
        }
        case Family::gumbel:
            return std::exp(x) + 1.0;
        case Family::frank:
            return x;
    }
    throw std::logic_error("unreachable");
}

bool theta_in_support(const CopulaModel& model, double theta) {
    if (!std::isfinite(theta)) return false;
    switch (model.family) {
        case Family::gaussian:
        case Family::student_t: return theta > -1.0 && theta < 1.0;
        case Family::clayton: return theta > 0.0;
        case Family::gumbel: return theta >= 1.0;
        case Family::frank: return true; // theta = 0 evaluated as the independence limit
    }
    return false;
}

double margin_transform(const CopulaModel& model, double u) {
    switch (model.family) {
        case Family::gaussian:
            return boost::math::quantile(std_normal(), u);
        case Family::student_t:
            return boost::math::quantile(
                boost::math::students_t_distribution<double>(model.df), u);
        default:
            return u;
    }
}

double log_density_t(const CopulaModel& model, double z1, double z2, double theta) {
    switch (model.family) {
        case Family::gaussian: return gaussian_log_density(z1, z2, theta);
        case Family::student_t: return t_log_density(z1, z2, theta, model.df);
        case Family::clayton: return clayton_log_density(z1, z2, theta);
        case Family::gumbel: return gumbel_log_density(z1, z2, theta);
        case Family::frank: return frank_log_density(z1, z2, theta);
    }
    throw std::logic_error("unreachable");
}

double log_density(const CopulaModel& model, double u1, double u2, double theta) {
    check_interior(u1, u2);
    check_theta(model, theta);
    return log_density_t(model, margin_transform(model, u1), margin_transform(model, u2), theta);
}

double cdf(const CopulaModel& model, double u1, double u2, double theta) {
    if (u1 == 0.0 || u2 == 0.0) return 0.0;
    if (u1 == 1.0) return u2;
    if (u2 == 1.0) return u1;
    check_interior(u1, u2);
    check_theta(model, theta);
    switch (model.family) {
        case Family::gaussian:
            return gaussian_cdf(margin_transform(model, u1), margin_transform(model, u2), theta);
        case Family::student_t:
            return t_cdf2(margin_transform(model, u1), margin_transform(model, u2), theta,
                          model.df);
        case Family::clayton: return clayton_cdf(u1, u2, theta);
        case Family::gumbel: return gumbel_cdf(u1, u2, theta);
        case Family::frank: return frank_cdf(u1, u2, theta);
    }
    throw std::logic_error("unreachable");
}

double tau_from_theta(const CopulaModel& model, double theta) {
    check_theta(model, theta);
    switch (model.family) {
        case Family::gaussian:
        case Family::student_t: return 2.0 / kPi * std::asin(theta);
        case Family::clayton: return theta / (theta + 2.0);
        case Family::gumbel: return 1.0 - 1.0 / theta;
        case Family::frank: return frank_tau(theta);
    }
    throw std::logic_error("unreachable");
}

std::pair<double, double> tau_range(const CopulaModel& model) {
    switch (model.family) {
        case Family::gaussian:
        case Family::student_t:
        case Family::frank: return {-1.0, 1.0};
        case Family::clayton:
        case Family::gumbel: return {0.0, 1.0};
    }
    throw std::logic_error("unreachable");
}

double theta_from_tau(const CopulaModel& model, double tau) {
    const auto [lo, hi] = tau_range(model);
    const bool attainable = model.family == Family::clayton || model.family == Family::gumbel
        ? (tau > lo && tau < hi)
        : (tau > lo && tau < hi);
    if (!attainable) throw std::domain_error("tau not attainable by " + family_name(model.family));
    switch (model.family) {
        case Family::gaussian:
        case Family::student_t: return std::sin(0.5 * kPi * tau);
        case Family::clayton:
            if (tau <= 0.0) throw std::domain_error("Clayton requires tau in (0,1)");
            return 2.0 * tau / (1.0 - tau);
        case Family::gumbel:
            if (tau <= 0.0) throw std::domain_error("Gumbel requires tau in (0,1)");
            return 1.0 / (1.0 - tau);
        case Family::frank: {
            if (tau == 0.0) throw std::domain_error("Frank tau = 0 is not attainable");
            const double target = std::abs(tau);
            double bracket_hi = 1.0;
            while (frank_tau(bracket_hi) < target && bracket_hi < 1e4) bracket_hi *= 2.0;
            auto f = [&](double t) { return frank_tau(t) - target; };
            std::uintmax_t max_iter = 200;
            const auto r = boost::math::tools::toms748_solve(
                f, 1e-9, bracket_hi, boost::math::tools::eps_tolerance<double>(50), max_iter);
            const double theta = 0.5 * (r.first + r.second);
            return tau > 0.0 ? theta : -theta;
        }
    }
    throw std::logic_error("unreachable");
}

std::pair<double, double> sample_pair(const CopulaModel& model, double theta, Rng& rng) {
    check_theta(model, theta);
    switch (model.family) {
        case Family::gaussian: {
            const double z1 = rng.normal();
            const double z2 = theta * z1 + std::sqrt(1.0 - theta * theta) * rng.normal();
            return {boost::math::cdf(std_normal(), z1), boost::math::cdf(std_normal(), z2)};
        }
        case Family::student_t: {
            const double z1 = rng.normal();
            const double z2 = theta * z1 + std::sqrt(1.0 - theta * theta) * rng.normal();
            const double w = rng.gamma(0.5 * model.df, 2.0); // chi-square_df
            const double scale = std::sqrt(model.df / w);
            const boost::math::students_t_distribution<double> t(model.df);
            return {boost::math::cdf(t, z1 * scale), boost::math::cdf(t, z2 * scale)};
        }
        case Family::clayton: {
            if (theta < kThetaZeroTol) return {rng.uniform(), rng.uniform()};
            const double v = rng.gamma(1.0 / theta, 1.0);
            auto draw = [&]() {
                return std::exp(-std::log1p(rng.exponential() / v) / theta);
            };
            const double u1 = draw();
            const double u2 = draw();
            return {u1, u2};
        }
        case Family::gumbel: {
            if (theta < 1.0 + 1e-9) return {rng.uniform(), rng.uniform()};
            const double alpha = 1.0 / theta;
            const double s = positive_stable(alpha, rng);
            auto draw = [&]() {
                return std::exp(-std::pow(rng.exponential() / s, alpha));
            };
            const double u1 = draw();
            const double u2 = draw();
            return {u1, u2};
        }
        case Family::frank:
            return frank_sample(theta, rng);
    }
    throw std::logic_error("unreachable");
}

} // namespace ccbart
