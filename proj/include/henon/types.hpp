/// @file types.hpp
/// @brief Problem parameters with derived exponents, and sampled radial profiles.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace henon {

/// Parameter triple (N, p, alpha) of the weighted quasi-linear problem,
/// with the derived exponents every formula in the library is written in.
struct problem_params {
    int N = 4;          ///< space dimension, integer >= 2
    double p = 2.0;     ///< quasi-linearity exponent, 1 < p < N
    double alpha = 0.0; ///< radial weight exponent, >= 0

    /// Throws std::invalid_argument unless 1 < p < N, N >= 2, alpha >= 0.
    void validate() const {
        if (N < 2) throw std::invalid_argument("problem_params: N must be >= 2");
        if (!(p > 1.0) || !(p < static_cast<double>(N)))
            throw std::invalid_argument("problem_params: requires 1 < p < N");
        if (!(alpha >= 0.0)) throw std::invalid_argument("problem_params: alpha must be >= 0");
    }

    /// Critical growth exponent p(N+alpha)/(N-p including the weight).
    double p_star() const { return p * (N + alpha) / (N - p); }

    /// Dimension parameter of the transformed (weight-free) problem, p(N+alpha)/(p+alpha).
    double M() const { return p * (N + alpha) / (p + alpha); }

    /// Radial change-of-variable exponent s = r^q, q = p/(p+alpha).
    double q() const { return p / (p + alpha); }

    /// Power (p+alpha)/(p-1) appearing inside every closed-form profile.
    double shape_exponent() const { return (p + alpha) / (p - 1); }

    /// Far-field decay rate of the profile values, (N-p)/(p-1).
    double value_decay_exponent() const { return (N - p) / (p - 1); }

    /// Far-field decay rate of the profile gradient, (N-1)/(p-1).
    double gradient_decay_exponent() const { return (N - 1.0) / (p - 1.0); }
};

/// A sampled radial profile on a strictly increasing grid, together with
/// endpoint-behavior metadata used by the decay validators.
struct radial_function {
    std::vector<double> grid;   ///< radii, strictly increasing
    std::vector<double> values; ///< u(grid[i])
    double origin_exponent = 0.0; ///< leading power rho with u ~ c r^rho near 0
    double tail_exponent = 0.0;   ///< decay power near the right endpoint

    std::size_t size() const { return grid.size(); }

    /// Basic structural invariants; throws std::invalid_argument on violation.
    void validate() const {
        if (grid.size() != values.size())
            throw std::invalid_argument("radial_function: grid/values size mismatch");
        for (std::size_t i = 1; i < grid.size(); ++i)
            if (!(grid[i] > grid[i - 1]))
                throw std::invalid_argument("radial_function: grid not strictly increasing");
    }
};

} // namespace henon
