/// @file harmonics.cpp
/// @brief Closed-form spectral bookkeeping implementation.

#include "henon/harmonics.hpp"

#include <cmath>
#include <stdexcept>

namespace henon {

namespace {

/// Exact binomial coefficient via the standard stepwise multiply/divide
/// loop (every prefix product is divisible by i!), guarded against the
/// ranges that would overflow a signed 64-bit intermediate.
std::int64_t binomial(int n, int r) {
    if (r < 0 || r > n) return 0;
    if (r > n - r) r = n - r;
    if (n > 61) throw std::invalid_argument("binomial: n too large for exact arithmetic");
    std::int64_t result = 1;
    for (int i = 1; i <= r; ++i) {
        result = result * (n - r + i) / i;
    }
    return result;
}

} // namespace

std::int64_t lambda_k(int k, int N) {
    if (k < 0) throw std::invalid_argument("lambda_k: k must be >= 0");
    if (N < 2) throw std::invalid_argument("lambda_k: N must be >= 2");
    return static_cast<std::int64_t>(k) * (N + k - 2);
}

std::int64_t multiplicity(int k, int N) {
    if (k < 0) throw std::invalid_argument("multiplicity: k must be >= 0");
    if (N < 2) throw std::invalid_argument("multiplicity: N must be >= 2");
    if (k == 0) return 1;
    // (N+2k-2) (N+k-3)! / ((N-2)! k!)  =  (N+2k-2) C(N+k-3, N-2) / k,
    // exactly divisible by k since the result is a dimension count.
    __int128 prod = static_cast<__int128>(N + 2 * k - 2) * binomial(N + k - 3, N - 2);
    if (prod % k != 0)
        throw std::logic_error("multiplicity: exact division failed");
    __int128 result = prod / k;
    if (result > static_cast<__int128>(INT64_MAX))
        throw std::invalid_argument("multiplicity: result exceeds 64-bit range");
    return static_cast<std::int64_t>(result);
}

double alpha_crit(int k, int N, double p) {
    if (k < 1) throw std::invalid_argument("alpha_crit: k must be >= 1");
    if (N < 2) throw std::invalid_argument("alpha_crit: N must be >= 2");
    if (!(p > 1.0) || !(p < static_cast<double>(N)))
        throw std::invalid_argument("alpha_crit: requires 1 < p < N");
    const double b = static_cast<double>(N) + p - 2.0;
    const double disc = b * b + 4.0 * (k - 1.0) * (p - 1.0) * (k + N - 1.0);
    return p * (std::sqrt(disc) - b) / (2.0 * (p - 1.0));
}

double zeta(const problem_params& params) {
    params.validate();
    const double N = params.N, p = params.p, a = params.alpha;
    const double disc =
        4.0 * (p - 1.0) * a * a + 4.0 * p * (N + p - 2.0) * a + N * N * p * p;
    return ((2.0 * p - N * p) + std::sqrt(disc)) / (2.0 * p);
}

morse_index_result morse_index(const problem_params& params) {
    params.validate();
    morse_index_result out;
    const double z = zeta(params);
    // Detect the degenerate boundary: alpha equal to some critical alpha(k).
    for (int k = 1; k <= static_cast<int>(z) + 1; ++k) {
        double ak = alpha_crit(k, params.N, params.p);
        if (std::abs(params.alpha - ak) <= 1e-9 * (1.0 + params.alpha)) {
            out.degenerate = true;
            out.degenerate_k = k;
            break;
        }
        if (ak > params.alpha + 1.0) break;
    }
    // On the degenerate boundary zeta is an exact integer up to rounding;
    // report the count from below (strictly k < zeta).
    const int k_end = out.degenerate ? out.degenerate_k
                                     : static_cast<int>(std::ceil(z)) ;
    for (int k = 0; k < k_end && static_cast<double>(k) < z; ++k)
        out.value += multiplicity(k, params.N);
    return out;
}

double mu1_limit(const problem_params& params) {
    params.validate();
    const double N = params.N, p = params.p, a = params.alpha;
    return -(p + a) * (N * p + p * a - p - a) / (p * p);
}

double dmu1_dalpha(const problem_params& params) {
    params.validate();
    const double N = params.N, p = params.p, a = params.alpha;
    return -(p * (p + 2.0 * a + N - 2.0) - 2.0 * a) / (p * p);
}

} // namespace henon
