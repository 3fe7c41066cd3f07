/// @file model.hpp
/// @brief Closed-form layer: the explicit radial solution family, its
///        truncation to the ball, and the kernel/eigenfunction profiles.
///
/// All functions are pure; everything downstream (eigen-solvers, shooting,
/// continuation) assembles its coefficients from these closed forms rather
/// than from numerically differentiated profiles.
#pragma once

#include "henon/types.hpp"

namespace henon {

/// Critical growth exponent p(N+alpha)/(N-p).
double critical_exponent(const problem_params& params);

/// Normalization constant of the explicit profile,
/// ((N+alpha)((N-p)/(p-1))^{p-1})^{(N-p)/(p(p+alpha))}.
double talenti_constant(const problem_params& params);

/// The explicit positive radial solution
/// U(r) = C lambda^{(N-p)/p} (1 + lambda^{(p+alpha)/(p-1)} r^{(p+alpha)/(p-1)})^{-(N-p)/(p+alpha)}.
double evaluate_bubble(const problem_params& params, double lambda, double r);

/// Analytic radial derivative dU/dr; zero at r = 0, negative for r > 0.
double evaluate_bubble_derivative(const problem_params& params, double lambda, double r);

/// Radial-mode kernel profile ((p-1) - r^{(p+alpha)/(p-1)}) /
/// (1 + r^{(p+alpha)/(p-1)})^{(N+alpha)/(p+alpha)}.
double kernel_Z(const problem_params& params, double r);

/// Radius where kernel_Z changes sign: (p-1)^{(p-1)/(p+alpha)}.
double kernel_Z_root(const problem_params& params);

/// Degree-k kernel radial factor
/// r^{(p+alpha)/(p(p-1))} (1 + r^{(p+alpha)/(p-1)})^{-(N+alpha)/(p+alpha)}.
/// Only defined at the critical weight exponent for degree k; rejects
/// (solver_error "degenerate-gate") unless |alpha - alpha_crit(k)| <= 1e-9 (1+alpha).
double kernel_Zk(const problem_params& params, int k, double r);

/// First eigenfunction of the degree-k weighted problem in closed form.
struct phi_k_eval {
    double rho;   ///< origin power
    double nu;    ///< outer power ratio
    double value; ///< r^rho (1 + r^{(p+alpha)/(p-1)})^{-nu}
};

/// Exponents (rho_k, nu_k) by the radical formulas plus the profile value.
phi_k_eval eigenfunction_phi_k(const problem_params& params, int k, double r);

/// First eigenvalue of the degree-k weighted problem,
/// ((p+alpha)^2 nu_k(nu_k+1) + nu_k(p+alpha)(p-2)(N+alpha)) /
/// ((N+alpha)(Np+p alpha-N+p)).
double mu_1k(const problem_params& params, int k);

/// Boundary value of the profile on the sphere of radius 1/eps,
/// beta(eps) = U(1, 1/eps).
double beta_boundary(const problem_params& params, double eps);

/// Largest admissible eps for the truncated problem, (p-1)^{-(p-1)/(p+alpha)}.
double eps_upper_bound(const problem_params& params);

/// Truncated profile U(r) - beta(eps) for r <= 1/eps, and 0 beyond;
/// rejects eps outside (0, eps_upper_bound).
double approx_radial_solution(const problem_params& params, double eps, double r);

/// Surface area of the unit sphere in dimension N, 2 pi^{N/2} / Gamma(N/2).
double sphere_area(int N);

} // namespace henon
