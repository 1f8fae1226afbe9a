#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ccbart {

// Pseudo-observation pairs plus covariate columns.
struct Dataset {
    std::vector<double> u1, u2;
    std::vector<std::vector<double>> x; // column-major: x[j][i]

    std::size_t n() const { return u1.size(); }
    std::size_t p() const { return x.size(); }

    void validate() const {
        if (u1.size() != u2.size())
            throw std::invalid_argument("u1/u2 length mismatch");
        for (const auto& col : x)
            if (col.size() != u1.size())
                throw std::invalid_argument("covariate column length mismatch");
        for (std::size_t i = 0; i < n(); ++i)
            if (!(u1[i] > 0.0 && u1[i] < 1.0 && u2[i] > 0.0 && u2[i] < 1.0))
                throw std::invalid_argument("pseudo-observations must lie strictly inside (0,1)");
    }
};

// Rank transform r_i/(n+1) with average ranks for ties.
std::vector<double> pseudo_observations(const std::vector<double>& y);

} // namespace ccbart
