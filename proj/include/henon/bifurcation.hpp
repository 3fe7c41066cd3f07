/// @file bifurcation.hpp
/// @brief Location of the degenerate weight exponents of the ball
///        linearization.  For each angular degree k >= 1 the first-eigenvalue
///        curve alpha -> mu_1^eps(alpha) is strictly decreasing and crosses
///        the level -lambda_k = -k(N+k-2) exactly once; at the crossing
///        alpha_k^eps a degree-k perturbation enters the kernel and the Morse
///        index jumps by the multiplicity of the degree-k harmonics.  As the
///        ball grows (eps -> 0) the crossing converges to the closed-form
///        critical exponent alpha_crit(k, N, p).  This module provides the
///        root locator, convergence tables toward that limit, the
///        symmetry-breaking tangent profile with its closed-form limit, and
///        degeneracy scans over a weight-exponent range.
#pragma once

#include <henon/errors.hpp>
#include <henon/sturm_liouville.hpp>
#include <henon/types.hpp>

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace henon {

/// A located degeneracy of the ball linearization: the weight exponent at
/// which the degree-k angular perturbation enters the kernel, together with
/// the first eigenfunction there (the radial factor of the symmetry-breaking
/// tangent direction; the full tangent is tangent(r) times a degree-k
/// spherical harmonic).
struct bifurcation_point {
    int k = 0;                    ///< angular harmonic degree, >= 1
    double eps = 0.0;             ///< inverse ball radius
    double alpha_k_eps = 0.0;     ///< located root of mu_1^eps(alpha) + lambda_k
    double limit_alpha = 0.0;     ///< closed-form limit alpha_crit(k, N, p)
    double mu_residual = 0.0;     ///< |mu_1^eps(alpha_k_eps) + lambda_k|
    double root_tolerance = 0.0;  ///< residual tolerance the root was solved to
    problem_params params;        ///< (N, p) with alpha = alpha_k_eps
    radial_function tangent;      ///< first eigenfunction at the root:
                                  ///< nonnegative, sup-norm 1

    /// Structural invariants: k >= 1, eps > 0, params.alpha equals
    /// alpha_k_eps, limit_alpha equals alpha_crit(k, N, p), the residual
    /// meets root_tolerance, and the tangent profile is a nonnegative
    /// unit-sup-norm radial function.  Throws solver_error("invalid-point").
    void validate() const;
};

/// Controls for locate_alpha_k and the operations built on it.
struct locate_options {
    double root_tolerance = 1e-10;  ///< accept once |mu_1 + lambda_k| is below
    double alpha_tolerance = 1e-8;  ///< bisect the bracket to this width first
    double bracket_lo = -1.0;       ///< custom initial bracket: set both ends
    double bracket_hi = -1.0;       ///< nonnegative; default seeds around alpha_crit(k)
    int bracket_expansions = 6;     ///< directed bracket shifts before giving up
    eigen_options eigen;            ///< eigensolver controls per evaluation
};

/// Locates alpha_k^eps, the unique root of g(alpha) = mu_1^eps(alpha) +
/// lambda_k, for k >= 1.  Bisection is justified by the strict monotone
/// decrease of mu_1^eps in alpha, spot-checked on three bracket points and
/// re-checked once on a doubled grid before "nonmonotone" is thrown.  The
/// default bracket is [alpha_crit(k)/2 + 1e-6, 2 alpha_crit(k) + 2] (the
/// offset keeps the left end positive for k = 1, whose limit exponent is
/// zero).  A bracket without a sign change is shifted in the direction the
/// monotone decrease dictates, up to bracket_expansions times; if no sign
/// change is found, throws solver_error("bracket-failed") listing the sampled
/// g values.  The bracket is first bisected down to alpha_tolerance width,
/// then the root is polished by guarded secant steps until the residual
/// meets root_tolerance.  base.alpha is ignored; the weight exponent is the
/// unknown being solved for.
bifurcation_point locate_alpha_k(const problem_params& base, int k, double eps,
                                 const locate_options& options = {});

/// One row of a convergence table toward the closed-form limit exponent.
struct convergence_row {
    double eps = 0.0;          ///< inverse ball radius of this row
    double alpha_k_eps = 0.0;  ///< located crossing
    double error = 0.0;        ///< |alpha_k_eps - alpha_crit(k, N, p)|
};

/// Result of a convergence sweep over a decreasing eps list.
struct convergence_table_result {
    int k = 0;
    double limit_alpha = 0.0;            ///< alpha_crit(k, N, p)
    std::vector<convergence_row> rows;   ///< one row per eps, in input order
    std::vector<double> pairwise_rates;  ///< log(e_i/e_{i+1}) / log(eps_i/eps_{i+1})
    double empirical_rate = 0.0;         ///< least-squares slope of log(error)
                                         ///< against log(eps) over rows whose
                                         ///< error exceeds the round-off floor
                                         ///< 256 eps_machine (1 + limit_alpha);
                                         ///< 0 if fewer than two rows qualify
    bool errors_strictly_decreasing = false;  ///< measured relation on the rows
};

/// Locates alpha_k^eps for every eps in the strictly decreasing `eps_list`
/// and tabulates the distance to the closed-form limit, with empirical
/// convergence rates.  Throws std::invalid_argument if the list is empty,
/// not strictly decreasing, or contains nonpositive entries.
convergence_table_result convergence_table(const problem_params& base, int k,
                                           const std::vector<double>& eps_list,
                                           const locate_options& options = {});

/// Writes the table as CSV with header "eps,k,alpha_k_eps,limit_alpha,error",
/// one row per table row, shortest round-trip number formatting.
void write_diagram_csv(std::ostream& out, const convergence_table_result& table);

/// Re-solves the first eigenfunction at the located exponent with the given
/// eigensolver controls (e.g. a finer grid than the locate run used) and
/// returns its profile: nonnegative, sup-norm 1.
radial_function tangent_field(const bifurcation_point& point,
                              const eigen_options& options = {});

/// Closed-form large-ball limit of the normalized tangent profile,
///     w(r) = r^a (1 + r^E)^{-b} / w(r_peak),
/// with a = (p+alpha)/(p(p-1)), E = (p+alpha)/(p-1), b = (N+alpha)/(p+alpha),
/// normalized to unit maximum.  Evaluates with params.alpha as given (pass
/// alpha = alpha_k_eps or the limit exponent).  w(0) = 0 exactly.
double tangent_limit_value(const problem_params& params, double r);

/// Radius of the maximum of the limit profile: the first-order condition
/// a (1 + r^E) = b E r^E gives r_peak = ((p+alpha)/(pN + p alpha - p -
/// alpha))^{(p-1)/(p+alpha)}.
double tangent_limit_peak(const problem_params& params);

/// One crossing found by degeneracy_scan.
struct degeneracy {
    int k = 0;                    ///< angular degree whose level is crossed
    double alpha = 0.0;           ///< located crossing exponent
    std::int64_t morse_jump = 0;  ///< Morse-index jump: multiplicity(k, N),
                                  ///< valid while mu2 stays positive
    double mu_residual = 0.0;     ///< |mu_1^eps(alpha) + lambda_k| at the root
    double mu2 = 0.0;             ///< second eigenvalue at the crossing;
                                  ///< mu2 + lambda_k > 0 certifies that only
                                  ///< the first eigenvalue crosses
};

/// Finds every crossing of mu_1^eps(alpha) + lambda_k, k = 0..k_max, with
/// alpha in [alpha_lo, alpha_hi].  mu_1^eps is sampled on a grid over the
/// range and checked for strict monotone decrease (refined once before
/// throwing "nonmonotone"); monotonicity means any sampling brackets every
/// crossing, each exactly once.  Returns the crossings sorted by alpha.
/// k = 0 is scanned like any other degree; a crossing there would mean the
/// operator degenerates radially, which does not happen on large balls.
std::vector<degeneracy> degeneracy_scan(const problem_params& base, double eps,
                                        double alpha_lo, double alpha_hi, int k_max,
                                        const locate_options& options = {});

/// Writes the point as a single-line JSON record (all fields, including the
/// tangent profile) suitable for consumption by the continuation driver.
void write_point_json(std::ostream& out, const bifurcation_point& point);

/// Reads a record written by write_point_json and validates it.  Throws
/// solver_error("bad-point-record") on malformed input and
/// solver_error("invalid-point") if the parsed record violates the
/// structural invariants.
bifurcation_point read_point_json(std::istream& in);

} // namespace henon
