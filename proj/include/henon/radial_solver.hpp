/// @file radial_solver.hpp
/// @brief Nonlinear radial shooting solver for the shifted critical problem on
///        a truncated ball, plus the validators built on top of it: flux-form
///        equation residuals, boundary (Pohozaev-type) identity mismatches,
///        the energy identity, and far-field decay-exponent fits.
#pragma once

#include <iosfwd>
#include <vector>

#include "henon/errors.hpp"
#include "henon/model.hpp"
#include "henon/types.hpp"

namespace henon {

/// Boundary-value problem on the ball of radius 1/eps:
///
///   -(r^{N-1}|u'|^{p-2} u')' = r^{N-1+alpha} (u + shift)^{ps-1}   on (0, 1/eps),
///   u'(0) = 0,  u(1/eps) = 0,
///
/// where ps = p(N+alpha)/(N-p) and shift = U(1/eps) is the boundary value of
/// the entire-space profile, so that u = U - shift is an exact solution.
struct radial_bvp {
    problem_params params;
    double eps = 0.0;          ///< domain is the ball of radius 1/eps
    double shift = 0.0;        ///< additive constant inside the nonlinearity
    std::vector<double> grid;  ///< radii, {0} followed by geometric nodes up to 1/eps

    double radius() const { return 1.0 / eps; }

    /// Structural checks; throws std::invalid_argument on violation.
    /// Requires 0 < eps < (p-1)^{-(p-1)/(p+alpha)} (the admissibility bound
    /// below which the truncated profile stays positive and decreasing),
    /// shift > 0, and a strictly increasing grid from 0 to 1/eps.
    void validate() const;
};

/// Build the standard problem for given (params, eps): shift = U(1/eps) and a
/// grid {0, r0, ..., 1/eps} whose positive part is geometric with `intervals`
/// cells starting at r0 = 1e-7/eps.  Throws on inadmissible eps.
radial_bvp make_radial_bvp(const problem_params& params, double eps, int intervals = 3200);

/// Shooting result: the profile together with its derivative and the radial
/// flux F = r^{N-1}|u'|^{p-2}u' (which the integrator carries exactly).
struct shooting_solution {
    radial_function profile;         ///< u on the problem grid (node 0 included)
    std::vector<double> derivative;  ///< u'(grid[i]), u'(0) = 0
    std::vector<double> flux;        ///< r^{N-1}|u'|^{p-2}u' (non-positive)
    double center_value = 0.0;       ///< converged u(0)
    double boundary_mismatch = 0.0;  ///< u(1/eps) of the accepted shot
    int bisection_steps = 0;         ///< bisection iterations used
};

/// Tuning knobs for the shooting bisection.
struct shooting_options {
    double bracket_ratio = 4.0;    ///< initial bracket [guess/ratio, guess*ratio]
    int bracket_expansions = 8;    ///< extra ratio-steps allowed per endpoint
    double tolerance = 1e-13;      ///< stop when bracket width <= tolerance * u(0)
    double overflow_factor = 1e6;  ///< abort when |u| exceeds factor * u(0)
};

/// Solve the BVP by shooting on the centre value.  The radial equation is
/// integrated in its flux-integral form
///
///   -u'(r) = ( r^{1-N} \int_0^r t^{N-1+alpha} (u+shift)^{ps-1} dt )^{1/(p-1)},
///
/// which is regular at the origin for every p in (1, N) (the second-order form
/// is singular there when p < 2).  A fourth-order step in log(r) marches the
/// pair (u, flux quotient) outward from a series start at the first positive
/// node; u(0) is then bisected until u(1/eps) = 0.  Bisection is globally
/// convergent here because the centre-value-to-boundary-value map has a single
/// sign change (larger centre values produce a stronger source, hence faster
/// decay).  Returns a strictly decreasing profile, positive on [0, 1/eps).
///
/// Throws solver_error("shoot-bracket-failed") if no sign change of u(1/eps)
/// is found over the expanded bracket, and solver_error("blowup") if a shot
/// exceeds the overflow guard.
shooting_solution solve_radial_shooting(const radial_bvp& bvp, double u0_guess,
                                        const shooting_options& options = {});

/// Strong-form equation residual in flux variables: the identity
/// F(r) + \int_0^r t^{N-1+alpha}(u+shift)^{ps-1} dt = 0 with
/// F = r^{N-1}|u'|^{p-2}u' holds exactly for solutions (it is the
/// once-integrated equation, using F(0) = 0), and its derivative recovers the
/// pointwise equation.  Returns the maximum over interior nodes of the
/// violation scaled by the local accumulated source magnitude.
///
/// The first overload uses the integrator-carried derivative; the second
/// reconstructs u' from centered differences on the sampled values (coarser,
/// second-order in the mesh) and starts scanning past the origin plateau,
/// where value differences fall below derivative resolution.
double pde_residual(const problem_params& params, const shooting_solution& sol, double shift);
double pde_residual(const problem_params& params, const radial_function& fn, double shift);

/// Boundary identity for solutions on the ball of radius R = 1/eps,
/// obtained by combining the r u' and u multiplier identities:
///
///   (p-1)/p * R \int_{\partial B_R} |grad u|^p dS
///     = (N-p)/p * shift * \int_{B_R} |x|^alpha (u+shift)^{ps-1} dx
///       - (1/ps) R^{N+alpha} shift^{ps} w_{N-1},
///
/// with all integrals reduced to radial quadrature times the exact sphere
/// area w_{N-1}.  Returns |lhs - rhs| / max(|lhs|, |rhs|).
/// Throws solver_error("not-a-solution") when the flux residual of `sol`
/// exceeds the gate below.
double pohozaev_residual_ball(const problem_params& params, const shooting_solution& sol,
                              double eps);

/// Gate used by the boundary-identity validators: profiles whose scaled flux
/// residual exceeds this are rejected as non-solutions.
inline constexpr double pde_residual_gate = 1e-4;

/// Energy identity for solutions (test of quadrature + solve consistency):
///
///   \int_{B_R} |grad u|^p dx + shift \int_{\partial B_R} |grad u|^{p-1} dS
///     = \int_{B_R} |x|^alpha (u+shift)^{ps} dx,
///
/// reduced to radial quadrature.  Returns the relative mismatch.
double energy_identity_residual(const problem_params& params, const shooting_solution& sol,
                                double eps);

/// Boundary-difference combination for two profiles u, v on a common grid,
/// evaluated on the sphere r = (p-1)^{(p-1)/(p+alpha)} (the radius where the
/// dilation kernel Z vanishes), clamped into [r_inner, r_outer]:
///
///   w_{N-1} r^{N-1} [ (p-1)/p * r * (|u'|^p - |v'|^p)
///                     + (N-p)/p * ( |u'|^{p-2}u'(u+shift) - |v'|^{p-2}v'(v+shift) ) ].
///
/// For two exact solutions the combination vanishes; its magnitude (scaled by
/// the same bracket evaluated on u alone) measures how far v is from u in the
/// sense of the uniqueness argument.  Profiles are interpolated to the
/// evaluation radius with a cubic in log r.
///
/// Throws std::invalid_argument unless 0 < r_inner < r_outer and both lie
/// strictly inside the common grid.
double pohozaev_residual_annulus(const problem_params& params, const shooting_solution& fn_u,
                                 const shooting_solution& fn_v, double shift, double r_inner,
                                 double r_outer);

/// Which field of a profile a decay fit should examine.
enum class decay_target { value, gradient };

/// Result of a least-squares power-law fit log|f| = log(constant) + exponent*log(r).
struct decay_fit {
    double exponent = 0.0;   ///< fitted slope (negative for decaying profiles)
    double constant = 0.0;   ///< amplitude exp(intercept)
    double r_squared = 0.0;  ///< coefficient of determination of the fit
    std::size_t window_points = 0;
};

/// Fit the far-field decay exponent of a profile over the window
/// [R/100, R/2], where R is the largest radius at which the profile is
/// nonzero (so trailing zeros of truncated profiles are excluded and the
/// window ends at half the truncation radius).  Expected exponents:
/// -(N-p)/(p-1) for values and -(N-1)/(p-1) for gradients.  The first
/// overload differentiates the sampled values for the gradient target; the
/// second uses the integrator-carried derivative.
///
/// Throws solver_error("window-too-small") if fewer than 50 samples fall in
/// the window.
decay_fit decay_exponent_fit(const radial_function& fn, decay_target which);
decay_fit decay_exponent_fit(const shooting_solution& sol, decay_target which);

/// Sample the exact truncated profile u = U - U(1/eps) (values, derivative,
/// flux) on the given grid, in the same layout the shooting solver produces.
/// Used by validators and identity checks that want a closed-form reference.
shooting_solution sample_truncated_bubble(const problem_params& params, double eps,
                                          const std::vector<double>& grid);

/// Default exponent for the weighted sup norm sup (1+r)^gamma |u(r)|: the
/// midpoint of the admissible window
/// ( N(N-p)/(Np-(N-p)), (N-p)/(p-1) ).  Exposed as a knob because any value
/// in the open window yields an equivalent norm.
double default_weighted_exponent(const problem_params& params);

/// sup over the grid of (1+r)^gamma |fn(r)|.
double weighted_sup_norm(const radial_function& fn, double gamma);

/// Write a profile as CSV with header "r,u,du,flux", shortest round-trip
/// number formatting, one row per grid node.
void write_profile_csv(std::ostream& out, const shooting_solution& sol);

} // namespace henon
