/// @file continuation.hpp
/// @brief Non-radial branch continuation in symmetry-reduced sectors.
///
/// A solution candidate is reduced to a small set of angular modes
/// u(r, phi) = sum_j c_j(r) P_j(phi), where the P_j are the invariant
/// harmonic profiles of the chosen sector (Gegenbauer polynomials for the
/// axisymmetric sector, Jacobi polynomials in cos(2 phi) for the block
/// sector).  The p-Laplacian flux is applied pointwise on a Gauss
/// collocation grid in the angle and projected back onto the modes; the
/// radial direction uses fourth-order finite differences on a log-uniform
/// grid.  On top of that residual sit a pseudo-arclength predictor-corrector
/// (branch continuation off a located degenerate exponent), a solution
/// validator, and the closed-form non-radial family at (N, p, alpha) =
/// (4, 2, 2) used as an end-to-end cross-check of the whole pipeline.
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "henon/bifurcation.hpp"
#include "henon/errors.hpp"
#include "henon/types.hpp"

namespace henon {

/// Symmetry sector the reduction runs in.
enum class sector_kind {
    zonal,  ///< invariant under rotations fixing one axis; angle = polar angle
    block   ///< invariant under block rotations O(l) x O(N-l); angle phi with
            ///< |x'| = r sin(phi) (first l coordinates), |x''| = r cos(phi)
};

/// A symmetry sector together with the base harmonic degree k of the branch.
/// The retained modes have degrees {0, k, 2k, ..., J k}.  Block sectors admit
/// only even degrees (their invariant harmonics are polynomials in |x'|^2 and
/// |x''|^2), hence require k even.
struct sector {
    sector_kind kind = sector_kind::zonal;
    int N = 4;  ///< ambient dimension
    int k = 2;  ///< base harmonic degree of the branch
    int l = 0;  ///< block size, 1 <= l <= N/2 (block sectors only, else 0)

    /// Harmonic degree of retained mode index j (j = 0, 1, 2, ...).
    int mode_degree(int j) const { return j * k; }

    /// Structural checks; throws std::invalid_argument on violation.
    void validate() const;
};

/// Axisymmetric sector; any base degree k >= 1.
sector make_zonal_sector(int N, int k);

/// Block sector O(l) x O(N-l), 1 <= l <= N/2.  Invariant harmonics exist in
/// even degrees only, so odd k is refused (std::invalid_argument).
sector make_block_sector(int N, int l, int k);

/// Collocation rule for a sector: Gauss nodes/weights for the invariant
/// measure and tables of the mode profiles (normalized to P_j = 1 at the
/// angle where the Jacobi variable t equals 1).
struct angular_rule {
    std::vector<double> phi;     ///< collocation angles
    std::vector<double> t;      ///< Jacobi variable at the nodes (cos 2phi or cos theta)
    std::vector<double> weight; ///< quadrature weights against the sector measure
    std::vector<std::vector<double>> P;   ///< P[j][q], mode j at node q
    std::vector<std::vector<double>> dP;  ///< d P_j / d phi at the nodes
    std::vector<double> norm;   ///< <P_j, P_j> under the rule
    std::vector<int> degree;    ///< harmonic degree of each mode
};

/// Build the collocation rule with `mode_count` modes and `points` Gauss
/// nodes.  Throws std::invalid_argument for nonpositive sizes or when the
/// rule cannot resolve the mode set (points <= highest polynomial degree).
angular_rule build_angular_rule(const sector& sec, int mode_count, int points);

/// Polynomial exactness degree the angular quadrature must reach before the
/// projected nonlinearity is treated as alias-free: twice the (rounded-up)
/// source power times the highest retained harmonic degree.
int required_angular_degree(const problem_params& params, const sector& sec, int mode_count);

/// Evaluate the mode profile of degree-index j at Jacobi variable t
/// (normalized to 1 at t = 1).  Exposed for reconstruction and tests.
double sector_mode_value(const sector& sec, int mode_index, double t);

/// One point on a branch: the continuation parameter, the per-mode radial
/// amplitude profiles on a shared log-uniform grid (last node = 1/eps where
/// every amplitude vanishes), and the bookkeeping scalars.
struct branch_state {
    double alpha = 0.0;
    std::vector<double> grid;                     ///< radii, strictly increasing
    std::vector<std::vector<double>> amplitudes;  ///< [mode][node]
    double arclength = 0.0;        ///< cumulative pseudo-arclength
    double symmetry_defect = 0.0;  ///< sup_r |c_k(r)| (mode index 1)
    double newton_residual = 0.0;  ///< last corrector residual (sup norm)

    /// Structural checks; throws std::invalid_argument on violation.
    void validate() const;
};

/// Discretization knobs shared by the residual evaluator and the builders.
struct galerkin_options {
    int mode_count = 4;          ///< retained modes {0, k, 2k, 3k}
    int quadrature_points = 0;   ///< 0 = smallest alias-free count
    int nodes_per_decade = 400;  ///< radial resolution (log-uniform)
    double r_min = 1e-3;         ///< inner end of the radial grid
};

/// The purely radial solution as a branch state: mode 0 carries the
/// closed-form profile U - beta at weight exponent `alpha`, all other modes
/// are zero.  `base.alpha` is ignored in favor of the explicit argument.
branch_state make_radial_state(const problem_params& base, double alpha, double eps,
                               const sector& sec, const galerkin_options& opt = {});

/// Resample a radial profile onto another grid by cubic interpolation in
/// log r (constant below the first node, zero beyond the last).
std::vector<double> resample_profile(const radial_function& f, const std::vector<double>& grid);

/// Mode-projected residual of the state in log-radial form: for each
/// retained mode, the radial profile of
///
///   r^2 < -div(|grad u|^{p-2} grad u) - r^alpha sgn(u+beta)|u+beta|^{ps-1}, P_j >
///   ------------------------------------------------------------------------
///                              < P_j, P_j >
///
/// evaluated by pointwise flux collocation in the angle, quadrature
/// projection, and fourth-order log-grid differences in r (the weight
/// exponent is state.alpha; beta is the closed-form boundary value at that
/// exponent, and the signed power keeps the evaluation defined for iterates
/// that dip below -beta).  The r^2 weight is the natural scaling of the
/// operator on a geometric grid (log-radial variables): it keeps row
/// magnitudes commensurate across the grid instead of letting the inner-edge
/// rows blow up like 1/r^2, which would otherwise drown them in the rounding
/// granularity of the nodal values themselves.  For p = 2 the flux is linear
/// and the angular treatment is exact up to the quadrature degree.
///
/// `quadrature_points` = 0 picks the smallest alias-free count; an explicit
/// count whose polynomial exactness degree falls short of
/// required_angular_degree() is rejected with solver_error("aliasing") whose
/// message reports the required degree.
///
/// `derivative_order` (4 or 6) selects the finite-difference order; 6 is
/// used by the validator as an independent discretization.
std::vector<std::vector<double>> galerkin_residual(const branch_state& state, const sector& sec,
                                                   const problem_params& base, double eps,
                                                   int quadrature_points = 0,
                                                   int derivative_order = 4);

/// Pseudo-arclength continuation knobs.
struct continuation_options {
    int steps = 20;                      ///< accepted states to aim for
    double ds = 1e-2;                    ///< initial arclength step
    double ds_min = 1e-4;                ///< halving floor
    double ds_max = 1e-1;                ///< doubling ceiling
    double corrector_tolerance = 1e-10;  ///< sup-norm residual at acceptance
    int max_newton = 12;                 ///< corrector iterations per attempt
    int max_halvings = 6;                ///< step halvings before giving up
    int predictor_sign = +1;             ///< initial direction along the tangent
    double seed_amplitude = 0.0;         ///< 0 = 10 sqrt(corrector_tolerance)
    galerkin_options discretization{4, 0, 220, 1e-3};
};

/// A computed branch: accepted states in order plus diagnostics.
struct branch_result {
    problem_params base;  ///< (N, p); alpha = starting exponent
    double eps = 0.0;
    sector sec;
    int predictor_sign = +1;
    std::vector<branch_state> states;
    std::vector<double> step_sizes;  ///< arclength step used per accepted state
    std::vector<int> fold_steps;     ///< states where d alpha changed sign
    std::string abort_reason;        ///< empty, "corrector-diverged", or "positivity-lost"
};

/// Follow the non-radial branch leaving the radial family at a located
/// degenerate exponent.  The first predictor displaces the radial state by
/// the seed amplitude times the located tangent profile placed in mode k;
/// each subsequent step is a secant predictor plus a Newton corrector on the
/// extended system (mode residuals, regularity rows at the inner edge, and
/// the arclength constraint), with the Jacobian assembled by grouped
/// directional differences and solved by a banded LU with a bordered
/// alpha-column.  Steps halve on corrector failure (up to max_halvings) and
/// double after fast convergence; a sign change of d alpha between accepted
/// states is recorded in fold_steps (not fatal).  Positivity of u + beta is
/// checked at the collocation points of every accepted state.
///
/// Stops early with abort_reason set when the corrector keeps failing
/// ("corrector-diverged") or positivity is lost; throws the same codes as
/// solver_error only when not even one state could be accepted.  Throws
/// std::invalid_argument when the sector does not match the starting point
/// (dimension or base degree) or options are malformed.
branch_result continue_branch(const bifurcation_point& start, const sector& sec,
                              const continuation_options& opt = {});

/// Mode-truncation self-check: run `probe_steps` steps with the configured
/// mode count and again with one extra mode, and return the largest
/// difference between the accepted states (alpha and shared-mode amplitude
/// profiles, sup norm).
double mode_convergence_check(const bifurcation_point& start, const sector& sec,
                              const continuation_options& opt = {}, int probe_steps = 3);

/// Validator knobs; `corrector_tolerance` is the reference solver tolerance
/// the oscillation and separation thresholds are expressed in.
struct validation_options {
    double residual_tolerance = 1e-6;   ///< for the independent re-evaluation
    double corrector_tolerance = 1e-10;
    double oscillation_factor = 10.0;   ///< non-radiality threshold factor
    double decay_tolerance = 0.05;      ///< relative slack on decay exponents
    double separation_floor = 1e-9;     ///< minimal sup distance to the radial family
    int angular_samples = 256;          ///< dense angle count for oscillation
};

/// Itemized validation report for one state (see branch_solution_validate).
struct validation_report {
    double residual = 0.0;  ///< sup residual, order-6 stencils + enriched quadrature
    bool residual_ok = false;
    double oscillation = 0.0;  ///< max_r (max_phi(u+beta)/min_phi(u+beta) - 1)
    bool nonradial_ok = false;
    double value_exponent = 0.0;
    double gradient_exponent = 0.0;
    bool value_decay_ok = false;
    bool gradient_decay_ok = false;
    bool window_truncated = false;  ///< decay window ends before r = 100
    double separation = 0.0;  ///< sup |u - u_radial(alpha)| over collocation
    bool separation_ok = false;

    /// Decay-exponent fits are enforced only when the grid reaches far enough
    /// into the far field for the power law to dominate; on truncated windows
    /// the fitted exponents are still reported but do not gate the verdict.
    bool all_ok() const {
        return residual_ok && nonradial_ok && separation_ok &&
               (window_truncated || (value_decay_ok && gradient_decay_ok));
    }
};

/// Re-examine one accepted state independently of the corrector: (a) full
/// nonlinear residual with sixth-order radial stencils and an enriched
/// angular rule, (b) non-radiality via the relative angular oscillation of
/// u + beta on a dense angle set, (c) far-field decay fits of the spherical
/// mean (value and gradient) against -(N-p)/(p-1) and -(N-1)/(p-1), flagged
/// as truncated when the window ends before r = 100, and (d) the sup-norm
/// separation from the radial solution at the same exponent.
validation_report branch_solution_validate(const branch_state& state, const sector& sec,
                                           const problem_params& base, double eps,
                                           const validation_options& opt = {});

/// Reconstruct the solution value at a Cartesian point (dimension sec.N)
/// from the mode profiles: amplitudes are interpolated in log r (power-law
/// continuation below the grid, zero beyond it) and synthesized with the
/// sector profiles.  Returns u (without the beta shift).
double reconstruct_value(const branch_state& state, const sector& sec,
                         const std::vector<double>& x);

/// Invariance of the reconstruction under the sector's symmetry group:
/// sample `samples` random points and random group elements (block rotations
/// for block sectors, rotations fixing the last axis for zonal) from the
/// seeded generator and return max |u(Q x) - u(x)|.
double equivariance_defect(const branch_state& state, const sector& sec, std::uint64_t seed,
                           int samples = 64);

/// Smallest-singular-value indicator of the reduced radial-state Jacobian
/// (no arclength border): the inverse of max ||J^{-1} g|| over a few seeded
/// random unit vectors.  At a located degenerate exponent the indicator
/// collapses; `spike_ratio` = off-point indicator / on-point indicator.
struct nullspace_probe {
    double sigma_at = 0.0;   ///< indicator at the located exponent
    double sigma_off = 0.0;  ///< indicator at alpha +/- offset (smaller of the two)
    double spike_ratio = 0.0;
};
nullspace_probe radial_nullspace_probe(const bifurcation_point& start, const sector& sec,
                                       double alpha_offset = 1e-2,
                                       const continuation_options& opt = {});

/// The closed-form non-radial solution family at (N, p, alpha) = (4, 2, 2)
/// in the library normalization (family parameter a; a = 0 is the radial
/// profile): value at radius r and angle with cos(2 phi) = c2phi.
double explicit_family_value(double a, double r, double c2phi);

/// Constancy check of the family: the ratio of -Laplacian(u_a) (evaluated by
/// the collocation machinery with a deep mode set) to r^2 u_a^5 across a
/// log-uniform collocation grid.  mean_ratio is 1 for the exact family in
/// this normalization.  The default window brackets the region where the
/// angular mixing is strongest (around r = 1); in the far field both sides
/// of the identity decay like r^-8, so a pointwise ratio there only
/// amplifies differencing error by r^6 without testing the family.
struct family_constancy_result {
    double mean_ratio = 0.0;
    double max_relative_deviation = 0.0;
    std::size_t samples = 0;
};
family_constancy_result explicit_family_constancy(double a, int nodes_per_decade = 400,
                                                  double r_lo = 0.2, double r_hi = 5.0);

/// Compare a computed block-sector branch at (4, 2) against the closed-form
/// family member with parameter `a`: project the family onto the branch's
/// modes, pick the accepted state whose symmetry defect is nearest to the
/// family's, and report relative sup-norm profile errors (mode 0 compared
/// with the beta shift restored; the mode-k comparison tolerates the global
/// sign of the branch).  Throws std::invalid_argument unless the branch ran
/// in the block sector with N = 4, p = 2, k = 2.
struct family_match_result {
    double a = 0.0;
    double family_defect = 0.0;
    int matched_state = -1;
    double state_defect = 0.0;
    double alpha = 0.0;
    double mode0_error = 0.0;
    double modek_error = 0.0;
};
family_match_result match_explicit_family(const branch_result& branch, double a);

/// One JSON record per accepted state (alpha, arclength, symmetry_defect,
/// newton_residual, decay fits), shortest round-trip number formatting.
void write_branch_jsonl(std::ostream& out, const branch_result& branch);

/// CSV dump of one state's mode profiles: header "r,mode<d0>,mode<d1>,...".
void write_mode_profiles_csv(std::ostream& out, const branch_state& state, const sector& sec);

} // namespace henon
