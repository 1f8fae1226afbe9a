#pragma once

#include <string>
#include <utility>

#include "ccbart/rng.hpp"

namespace ccbart {

enum class Family { gaussian, student_t, clayton, gumbel, frank };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

// A bivariate copula family with fixed shape parameters. Only the dependence
// parameter theta varies; for Student-t the degrees of freedom are fixed
// (df > 2) and never inferred.
struct CopulaModel {
    Family family = Family::gaussian;
    double df = 4.0; // Student-t only

    void validate() const;
};

// Link h: R -> parameter support, monotone increasing.
//   Gaussian/Student-t: (e^x - 1)/(e^x + 1); Clayton: e^x;
//   Gumbel: e^x + 1; Frank: identity.
double link_apply(const CopulaModel& model, double x);

bool theta_in_support(const CopulaModel& model, double theta);

// log c(u1, u2 | theta) on (0,1)^2
double log_density(const CopulaModel& model, double u1, double u2, double theta);

// C(u1, u2 | theta)
double cdf(const CopulaModel& model, double u1, double u2, double theta);

// Kendall's tau = 4 \int\int C dC - 1, via family closed forms
// (Frank through the Debye-1 integral).
double tau_from_theta(const CopulaModel& model, double theta);

// Inverse of tau_from_theta (closed form or monotone root-finding).
double theta_from_tau(const CopulaModel& model, double tau);

// Attainable tau range (open interval) of the family.
std::pair<double, double> tau_range(const CopulaModel& model);

std::pair<double, double> sample_pair(const CopulaModel& model, double theta, Rng& rng);

// Margin transform cached by likelihood evaluators: Phi^{-1}(u) for Gaussian,
// t_df^{-1}(u) for Student-t, u itself for the Archimedean families.
double margin_transform(const CopulaModel& model, double u);

// log density given the precomputed margin transforms of (u1,u2).
double log_density_t(const CopulaModel& model, double z1, double z2, double theta);

} // namespace ccbart
