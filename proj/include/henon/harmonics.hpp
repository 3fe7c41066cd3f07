/// @file harmonics.hpp
/// @brief Spherical-harmonic bookkeeping and closed-form spectral quantities:
///        sphere eigenvalues, multiplicities, critical weight exponents,
///        the Morse-index formula, and the limit first eigenvalue.
#pragma once

#include <cstdint>

#include "henon/types.hpp"

namespace henon {

/// Sphere Laplacian eigenvalue for degree k in dimension N: k(N+k-2), exact.
std::int64_t lambda_k(int k, int N);

/// Dimension of the space of degree-k spherical harmonics in dimension N,
/// (N+2k-2)(N+k-3)! / ((N-2)! k!), computed with cancellation-free integer
/// products (no floating factorials).
std::int64_t multiplicity(int k, int N);

/// Critical weight exponent for degree k:
/// alpha(k) = (p sqrt((N+p-2)^2 + 4(k-1)(p-1)(k+N-1)) - p(N+p-2)) / (2(p-1)),
/// the nonnegative root of (p-1)a^2 + p(N+p-2)a + p^2(1-k)(k+N-1) = 0.
double alpha_crit(int k, int N, double p);

/// Index-counting threshold
/// zeta = ((2p - Np) + sqrt(4(p-1)alpha^2 + 4p(N+p-2)alpha + N^2 p^2)) / (2p);
/// degrees k < zeta contribute negative directions.
double zeta(const problem_params& params);

/// Result of the Morse-index formula.  When alpha sits on a critical value
/// alpha(k) (within 1e-9 (1+alpha)) the operator is degenerate and the count
/// is flagged; `value` is then the count from below (k < zeta strictly).
struct morse_index_result {
    std::int64_t value = 0;  ///< sum of multiplicity(k, N) over 0 <= k < zeta
    bool degenerate = false; ///< alpha equals some alpha(k) within gate tolerance
    int degenerate_k = -1;   ///< the degree k with alpha = alpha(k), if flagged
};

/// Morse index of the explicit profile: sum of multiplicities over k < zeta.
morse_index_result morse_index(const problem_params& params);

/// Limit of the first eigenvalue of the truncated weighted problem,
/// mu_1(alpha) = -(p+alpha)(Np + p alpha - p - alpha) / p^2.
double mu1_limit(const problem_params& params);

/// d mu_1 / d alpha = -(p(p + 2 alpha + N - 2) - 2 alpha) / p^2, always
/// negative for admissible parameters.
double dmu1_dalpha(const problem_params& params);

} // namespace henon
