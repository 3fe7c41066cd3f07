/// @file model.cpp
/// @brief Closed-form layer implementation.

#include "henon/model.hpp"

#include <cmath>

#include "henon/detail/closed_forms.hpp"
#include "henon/errors.hpp"
#include "henon/harmonics.hpp"

namespace henon {

namespace {

detail::profile_family<double> family(const problem_params& params) {
    params.validate();
    return detail::profile_family<double>(static_cast<double>(params.N), params.p,
                                          params.alpha);
}

} // namespace

double critical_exponent(const problem_params& params) {
    params.validate();
    return params.p_star();
}

double talenti_constant(const problem_params& params) { return family(params).C; }

double evaluate_bubble(const problem_params& params, double lambda, double r) {
    if (!(lambda > 0.0)) throw std::invalid_argument("evaluate_bubble: lambda must be > 0");
    if (!(r >= 0.0)) throw std::invalid_argument("evaluate_bubble: r must be >= 0");
    return family(params).u(lambda, r);
}

double evaluate_bubble_derivative(const problem_params& params, double lambda, double r) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("evaluate_bubble_derivative: lambda must be > 0");
    if (!(r >= 0.0)) throw std::invalid_argument("evaluate_bubble_derivative: r must be >= 0");
    return family(params).du(lambda, r);
}

double kernel_Z(const problem_params& params, double r) { return family(params).z(r); }

double kernel_Z_root(const problem_params& params) {
    params.validate();
    return std::pow(params.p - 1.0, (params.p - 1.0) / (params.p + params.alpha));
}

double kernel_Zk(const problem_params& params, int k, double r) {
    params.validate();
    if (k < 1) throw std::invalid_argument("kernel_Zk: k must be >= 1");
    double ak = alpha_crit(k, params.N, params.p);
    if (std::abs(params.alpha - ak) > 1e-9 * (1.0 + params.alpha))
        throw solver_error("degenerate-gate",
                           "kernel_Zk requires alpha = alpha_crit(k); got alpha = " +
                               std::to_string(params.alpha) + ", alpha_crit(" +
                               std::to_string(k) + ") = " + std::to_string(ak));
    auto fam = family(params);
    double rho = (params.p + params.alpha) / (params.p * (params.p - 1.0));
    double nu = (params.N + params.alpha) / (params.p + params.alpha);
    return fam.power_profile(rho, nu, r);
}

phi_k_eval eigenfunction_phi_k(const problem_params& params, int k, double r) {
    params.validate();
    if (k < 0) throw std::invalid_argument("eigenfunction_phi_k: k must be >= 0");
    const double N = params.N, p = params.p, a = params.alpha;
    const double lk = static_cast<double>(lambda_k(k, params.N));
    const double X = (p - 2.0) * (N + a) + N - p;
    phi_k_eval out;
    out.rho = (std::sqrt(X * X + 4.0 * (p - 1.0) * lk) - X) / (2.0 * (p - 1.0));
    out.nu = (std::sqrt((N - p) * (N - p) + 4.0 * (p - 1.0) * lk) +
              2.0 * out.rho * (p - 1.0) + N - p) /
             (2.0 * (p + a));
    out.value = family(params).power_profile(out.rho, out.nu, r);
    return out;
}

double mu_1k(const problem_params& params, int k) {
    const double N = params.N, p = params.p, a = params.alpha;
    const double nu = eigenfunction_phi_k(params, k, 1.0).nu;
    return ((p + a) * (p + a) * nu * (nu + 1.0) + nu * (p + a) * (p - 2.0) * (N + a)) /
           ((N + a) * (N * p + p * a - N + p));
}

double beta_boundary(const problem_params& params, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("beta_boundary: eps must be > 0");
    return evaluate_bubble(params, 1.0, 1.0 / eps);
}

double eps_upper_bound(const problem_params& params) {
    params.validate();
    return std::pow(params.p - 1.0, -(params.p - 1.0) / (params.p + params.alpha));
}

double approx_radial_solution(const problem_params& params, double eps, double r) {
    params.validate();
    if (!(eps > 0.0) || !(eps < eps_upper_bound(params)))
        throw solver_error("eps-out-of-range",
                           "approx_radial_solution: eps must lie in (0, " +
                               std::to_string(eps_upper_bound(params)) + ")");
    if (r > 1.0 / eps) return 0.0;
    return evaluate_bubble(params, 1.0, r) - beta_boundary(params, eps);
}

double sphere_area(int N) {
    if (N < 1) throw std::invalid_argument("sphere_area: N must be >= 1");
    double half = 0.5 * N;
    return 2.0 * std::pow(std::acos(-1.0), half) / std::tgamma(half);
}

} // namespace henon
