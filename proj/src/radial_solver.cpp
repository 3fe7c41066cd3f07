/// @file radial_solver.cpp
/// @brief Shooting solver in flux-integral form, boundary-identity validators,
///        and decay-exponent fits for the truncated-ball problem.

#include "henon/radial_solver.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace henon {

namespace {

/// Three-point derivative on a possibly non-uniform grid, exact for quadratics.
double central_derivative(const std::vector<double>& x, const std::vector<double>& y,
                          std::size_t i) {
    const double xl = x[i - 1], xc = x[i], xr = x[i + 1];
    const double dl = xc - xl, dr = xr - xc;
    const double wl = -dr / (dl * (dl + dr));
    const double wc = (dr - dl) / (dl * dr);
    const double wr = dl / (dr * (dl + dr));
    return wl * y[i - 1] + wc * y[i] + wr * y[i + 1];
}

/// Verify the layout every quadrature below relies on: grid[0] == 0 and the
/// positive nodes uniformly spaced in log r.
void require_log_uniform(const std::vector<double>& grid, const char* who) {
    if (grid.size() < 6 || grid[0] != 0.0 || !(grid[1] > 0.0))
        throw std::invalid_argument(std::string(who) +
                                    ": grid must start at 0 followed by positive nodes");
    const double h = std::log(grid[2] / grid[1]);
    for (std::size_t i = 2; i + 1 < grid.size(); ++i) {
        const double hi = std::log(grid[i + 1] / grid[i]);
        if (std::abs(hi - h) > 1e-8 * std::max(1.0, std::abs(h)))
            throw std::invalid_argument(std::string(who) +
                                        ": positive grid nodes must be geometric");
    }
}

/// Cumulative integral of f over the grid {0, r_1, ..., r_m} (positive part
/// geometric).  The head cell [0, r_1] is integrated with the power law
/// f ~ f(r_1) (r/r_1)^head_power; the rest uses the cumulative third-degree
/// Newton-Cotes rule in t = log r (fourth-order accurate), with dr = r dt.
std::vector<double> cumulative_radial_integral(const std::vector<double>& r,
                                               const std::vector<double>& f,
                                               double head_power) {
    require_log_uniform(r, "cumulative_radial_integral");
    const std::size_t n = r.size();
    const std::size_t m = n - 1;  // positive nodes are r[1..m]
    const double h = std::log(r[2] / r[1]);
    std::vector<double> I(n, 0.0);
    auto g = [&](std::size_t j) { return f[j] * r[j]; };
    I[1] = f[1] * r[1] / (head_power + 1.0);
    for (std::size_t j = 1; j < m; ++j) {
        double dI;
        if (j == 1)
            dI = h / 24.0 * (9.0 * g(1) + 19.0 * g(2) - 5.0 * g(3) + g(4));
        else if (j == m - 1)
            dI = h / 24.0 * (g(m - 3) - 5.0 * g(m - 2) + 19.0 * g(m - 1) + 9.0 * g(m));
        else
            dI = h / 24.0 * (-g(j - 1) + 13.0 * g(j) + 13.0 * g(j + 1) - g(j + 2));
        I[j + 1] = I[j] + dI;
    }
    return I;
}

/// Cubic interpolation in t = log r of nodal data at a target radius inside
/// the positive part of the grid.
double interpolate_log_cubic(const std::vector<double>& r, const std::vector<double>& y,
                             double target) {
    const std::size_t n = r.size();
    const double h = std::log(r[2] / r[1]);
    const double pos = (std::log(target) - std::log(r[1])) / h;
    std::ptrdiff_t j = static_cast<std::ptrdiff_t>(std::floor(pos)) + 1;  // grid index
    std::ptrdiff_t s = std::clamp<std::ptrdiff_t>(j - 1, 1, static_cast<std::ptrdiff_t>(n) - 4);
    const double t = std::log(target);
    double out = 0.0;
    for (std::ptrdiff_t a = s; a < s + 4; ++a) {
        double w = 1.0;
        for (std::ptrdiff_t b = s; b < s + 4; ++b) {
            if (b == a) continue;
            w *= (t - std::log(r[static_cast<std::size_t>(b)])) /
                 (std::log(r[static_cast<std::size_t>(a)]) -
                  std::log(r[static_cast<std::size_t>(b)]));
        }
        out += w * y[static_cast<std::size_t>(a)];
    }
    return out;
}

/// Signed p-flux density |d|^{p-2} d with the d = 0 limit handled for p < 2.
double signed_power(double d, double p) {
    if (d == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(d), p - 1.0), d);
}

struct march_result {
    double boundary_value = 0.0;
    bool crashed_low = false;
};

struct march_record {
    std::vector<double> u, du, flux;
};

/// Outward integrator for the first-order system in t = log r obtained from
/// the flux-integral form.  With J(r) = r^{1-N} \int_0^r s^{N-1+alpha} w^{ps-1} ds
/// (w = u + shift, source clamped at w <= 0):
///
///   du/dt = -r J^{1/(p-1)},        dJ/dt = (1-N) J + r^{1+alpha} w^{ps-1},
///
/// so the radial flux is exactly F = -r^{N-1} J.  A classical fourth-order
/// step per grid cell, seeded by the leading series at the first positive node.
class shooter {
  public:
    shooter(const radial_bvp& bvp)
        : r_(bvp.grid),
          N_(bvp.params.N),
          p_(bvp.params.p),
          alpha_(bvp.params.alpha),
          ps_(bvp.params.p_star()),
          E_(bvp.params.shape_exponent()),
          shift_(bvp.shift) {
        rmid_.resize(r_.size());
        for (std::size_t j = 1; j + 1 < r_.size(); ++j) rmid_[j] = std::sqrt(r_[j] * r_[j + 1]);
    }

    march_result run(double u0, const shooting_options& opt, march_record* rec) const {
        if (!(u0 > 0.0))
            throw std::invalid_argument("solve_radial_shooting: centre value must be positive");
        const std::size_t n = r_.size();
        const double w0 = u0 + shift_;
        const double s0 = std::pow(w0, ps_ - 1.0);
        const double r1 = r_[1];
        double u = u0 - std::pow(s0 / (N_ + alpha_), 1.0 / (p_ - 1.0)) * (p_ - 1.0) /
                            (p_ + alpha_) * std::pow(r1, E_);
        double J = std::pow(r1, 1.0 + alpha_) * s0 / (N_ + alpha_);
        if (rec) {
            rec->u.assign(n, 0.0);
            rec->du.assign(n, 0.0);
            rec->flux.assign(n, 0.0);
            rec->u[0] = u0;
            store(*rec, 1, u, J);
        }
        const double cap_hi = opt.overflow_factor * std::max(u0, 1.0);
        const double cap_lo = -opt.overflow_factor * std::max(w0, 1.0);
        march_result out;
        for (std::size_t j = 1; j + 1 < n; ++j) {
            const double h = std::log(r_[j + 1] / r_[j]);
            double k1u, k1J, k2u, k2J, k3u, k3J, k4u, k4J;
            rhs(r_[j], u, J, k1u, k1J);
            rhs(rmid_[j], u + 0.5 * h * k1u, J + 0.5 * h * k1J, k2u, k2J);
            rhs(rmid_[j], u + 0.5 * h * k2u, J + 0.5 * h * k2J, k3u, k3J);
            rhs(r_[j + 1], u + h * k3u, J + h * k3J, k4u, k4J);
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            J = std::max(J + h / 6.0 * (k1J + 2.0 * k2J + 2.0 * k3J + k4J), 0.0);
            if (u > cap_hi)
                throw solver_error("blowup", "solve_radial_shooting: profile exceeded " +
                                                 std::to_string(opt.overflow_factor) +
                                                 " times the centre value");
            if (rec) store(*rec, j + 1, u, J);
            if (u < cap_lo) {
                out.crashed_low = true;
                if (rec)
                    for (std::size_t k = j + 2; k < n; ++k) rec->u[k] = u;
                break;
            }
        }
        out.boundary_value = u;
        return out;
    }

  private:
    void rhs(double rr, double uu, double JJ, double& du_dt, double& dJ_dt) const {
        const double Jp = std::max(JJ, 0.0);
        du_dt = -rr * std::pow(Jp, 1.0 / (p_ - 1.0));
        const double w = uu + shift_;
        const double src = w > 0.0 ? std::pow(w, ps_ - 1.0) : 0.0;
        dJ_dt = (1.0 - N_) * JJ + std::pow(rr, 1.0 + alpha_) * src;
    }

    void store(march_record& rec, std::size_t j, double u, double J) const {
        rec.u[j] = u;
        rec.du[j] = -std::pow(std::max(J, 0.0), 1.0 / (p_ - 1.0));
        rec.flux[j] = -std::pow(r_[j], N_ - 1.0) * std::max(J, 0.0);
    }

    const std::vector<double>& r_;
    std::vector<double> rmid_;
    double N_, p_, alpha_, ps_, E_, shift_;
};

/// Flux values r^{N-1}|d|^{p-2} d from a stored derivative array.
std::vector<double> flux_from_derivative(const std::vector<double>& r,
                                         const std::vector<double>& du, double N, double p) {
    std::vector<double> F(r.size(), 0.0);
    for (std::size_t j = 1; j < r.size(); ++j)
        F[j] = std::pow(r[j], N - 1.0) * signed_power(du[j], p);
    return F;
}

/// Shared core of the residual overloads: compares the flux against the
/// accumulated source, scaled by the accumulated source.  `first` is the
/// first interior node examined (the finite-difference overload starts at 2
/// because the derivative stencil at node 1 straddles the origin, where the
/// profile is a fractional power the quadratic fit cannot represent).
double flux_residual_core(const problem_params& params, const std::vector<double>& grid,
                          const std::vector<double>& values, const std::vector<double>& F,
                          double shift, std::size_t first) {
    const double ps = params.p_star();
    std::vector<double> src(grid.size(), 0.0);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double w = values[j] + shift;
        src[j] = w > 0.0 ? std::pow(grid[j], params.N - 1.0 + params.alpha) *
                               std::pow(w, ps - 1.0)
                         : 0.0;
    }
    const std::vector<double> Q =
        cumulative_radial_integral(grid, src, params.N - 1.0 + params.alpha);
    double worst = 0.0;
    for (std::size_t j = first; j + 1 < grid.size(); ++j) {
        const double scale = Q[j] + std::numeric_limits<double>::min();
        worst = std::max(worst, std::abs(F[j] + Q[j]) / scale);
    }
    return worst;
}

/// Least-squares line through (x, y); returns slope, intercept, and the
/// coefficient of determination.
void fit_line(const std::vector<double>& x, const std::vector<double>& y, double& slope,
              double& intercept, double& r2) {
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i];
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    slope = sxy / sxx;
    intercept = my - slope * mx;
    double ssres = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (intercept + slope * x[i]);
        ssres += e * e;
    }
    r2 = syy > 0.0 ? 1.0 - ssres / syy : 1.0;
}

decay_fit fit_decay_window(const std::vector<double>& grid, const std::vector<double>& field) {
    double r_eff = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (field[i] != 0.0) r_eff = grid[i];
    std::vector<double> x, y;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= r_eff / 100.0) || !(grid[i] <= r_eff / 2.0)) continue;
        const double f = std::abs(field[i]);
        if (!(f > 0.0)) continue;
        x.push_back(std::log(grid[i]));
        y.push_back(std::log(f));
    }
    if (x.size() < 50)
        throw solver_error("window-too-small",
                           "decay_exponent_fit: need at least 50 samples in [R/100, R/2], got " +
                               std::to_string(x.size()));
    decay_fit out;
    double intercept = 0.0;
    fit_line(x, y, out.exponent, intercept, out.r_squared);
    out.constant = std::exp(intercept);
    out.window_points = x.size();
    return out;
}

}  // namespace

void radial_bvp::validate() const {
    params.validate();
    if (!(eps > 0.0) || !(eps < eps_upper_bound(params)))
        throw std::invalid_argument("radial_bvp: eps must lie in (0, (p-1)^{-(p-1)/(p+alpha)})");
    if (!(shift > 0.0)) throw std::invalid_argument("radial_bvp: shift must be positive");
    require_log_uniform(grid, "radial_bvp");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("radial_bvp: grid not strictly increasing");
    if (std::abs(grid.back() * eps - 1.0) > 1e-9)
        throw std::invalid_argument("radial_bvp: grid must end at 1/eps");
}

radial_bvp make_radial_bvp(const problem_params& params, double eps, int intervals) {
    params.validate();
    if (!(eps > 0.0) || !(eps < eps_upper_bound(params)))
        throw std::invalid_argument("make_radial_bvp: eps must lie in (0, (p-1)^{-(p-1)/(p+alpha)})");
    if (intervals < 8) throw std::invalid_argument("make_radial_bvp: need at least 8 intervals");
    radial_bvp bvp;
    bvp.params = params;
    bvp.eps = eps;
    bvp.shift = beta_boundary(params, eps);
    const double R = 1.0 / eps;
    const double r0 = 1e-7 * R;
    const double h = std::log(R / r0) / intervals;
    bvp.grid.resize(static_cast<std::size_t>(intervals) + 2);
    bvp.grid[0] = 0.0;
    for (int i = 0; i <= intervals; ++i)
        bvp.grid[static_cast<std::size_t>(i) + 1] = r0 * std::exp(i * h);
    bvp.grid.back() = R;
    return bvp;
}

shooting_solution solve_radial_shooting(const radial_bvp& bvp, double u0_guess,
                                        const shooting_options& options) {
    bvp.validate();
    if (!(u0_guess > 0.0))
        throw std::invalid_argument("solve_radial_shooting: u0_guess must be positive");
    const shooter sh(bvp);
    auto boundary = [&](double c) { return sh.run(c, options, nullptr).boundary_value; };

    // Bracket a sign change of u(1/eps): positive (undershoot) at the low end,
    // negative (overshoot) at the high end; larger centre values decay faster.
    double lo = u0_guess / options.bracket_ratio;
    double hi = u0_guess * options.bracket_ratio;
    double s_lo = boundary(lo);
    double s_hi = boundary(hi);
    for (int k = 0; s_lo <= 0.0 && k < options.bracket_expansions; ++k) {
        hi = lo;
        s_hi = s_lo;
        lo /= options.bracket_ratio;
        s_lo = boundary(lo);
    }
    for (int k = 0; s_hi >= 0.0 && k < options.bracket_expansions; ++k) {
        lo = hi;
        s_lo = s_hi;
        hi *= options.bracket_ratio;
        s_hi = boundary(hi);
    }
    if (!(s_lo > 0.0) || !(s_hi < 0.0))
        throw solver_error("shoot-bracket-failed",
                           "solve_radial_shooting: no sign change of the boundary value over "
                           "[" + std::to_string(lo) + ", " + std::to_string(hi) + "]");

    int steps = 0;
    while (hi - lo > options.tolerance * hi && steps < 200) {
        const double mid = 0.5 * (lo + hi);
        const double s = boundary(mid);
        (s > 0.0 ? lo : hi) = mid;
        ++steps;
    }
    const double u0 = 0.5 * (lo + hi);

    march_record rec;
    const march_result last = sh.run(u0, options, &rec);
    shooting_solution sol;
    sol.profile.grid = bvp.grid;
    sol.profile.values = std::move(rec.u);
    sol.derivative = std::move(rec.du);
    sol.flux = std::move(rec.flux);
    sol.center_value = u0;
    sol.boundary_mismatch = last.boundary_value;
    sol.bisection_steps = steps;
    return sol;
}

double pde_residual(const problem_params& params, const shooting_solution& sol, double shift) {
    params.validate();
    sol.profile.validate();
    if (sol.derivative.size() != sol.profile.size())
        throw std::invalid_argument("pde_residual: derivative/profile size mismatch");
    const std::vector<double> F =
        flux_from_derivative(sol.profile.grid, sol.derivative, params.N, params.p);
    return flux_residual_core(params, sol.profile.grid, sol.profile.values, F, shift, 1);
}

double pde_residual(const problem_params& params, const radial_function& fn, double shift) {
    params.validate();
    fn.validate();
    const std::vector<double>& r = fn.grid;
    std::vector<double> du(r.size(), 0.0);
    for (std::size_t j = 1; j + 1 < r.size(); ++j)
        du[j] = central_derivative(r, fn.values, j);
    if (r.size() >= 2) du.back() = du[r.size() - 2];
    const std::vector<double> F = flux_from_derivative(r, du, params.N, params.p);
    // Skip the origin plateau, where the sampled values have not yet dropped
    // by more than sqrt(machine epsilon): differences there are rounding
    // noise, and dividing the (tiny) flux by the (tiny) accumulated source
    // would amplify that noise instead of measuring the equation.
    std::size_t first = 2;
    const double drop =
        std::sqrt(std::numeric_limits<double>::epsilon()) * std::abs(fn.values.front());
    while (first + 2 < r.size() && std::abs(fn.values.front() - fn.values[first]) <= drop)
        ++first;
    return flux_residual_core(params, r, fn.values, F, shift, first);
}

double pohozaev_residual_ball(const problem_params& params, const shooting_solution& sol,
                              double eps) {
    params.validate();
    const double shift = beta_boundary(params, eps);
    const double resid = pde_residual(params, sol, shift);
    if (resid > pde_residual_gate)
        throw solver_error("not-a-solution",
                           "pohozaev_residual_ball: flux residual " + std::to_string(resid) +
                               " exceeds the gate " + std::to_string(pde_residual_gate));
    const std::vector<double>& r = sol.profile.grid;
    const double R = 1.0 / eps;
    if (std::abs(r.back() - R) > 1e-9 * R)
        throw std::invalid_argument("pohozaev_residual_ball: grid does not end at 1/eps");
    const double p = params.p, N = params.N, ps = params.p_star();
    const double om = sphere_area(params.N);
    const double du_R = std::abs(sol.derivative.back());
    const double lhs = (p - 1.0) / p * R * om * std::pow(R, N - 1.0) * std::pow(du_R, p);
    std::vector<double> src(r.size(), 0.0);
    for (std::size_t j = 0; j < r.size(); ++j) {
        const double w = sol.profile.values[j] + shift;
        src[j] = w > 0.0 ? std::pow(r[j], N - 1.0 + params.alpha) * std::pow(w, ps - 1.0) : 0.0;
    }
    const double Q =
        cumulative_radial_integral(r, src, N - 1.0 + params.alpha).back();
    const double rhs = (N - p) / p * shift * om * Q -
                       (1.0 / ps) * std::pow(R, N + params.alpha) * std::pow(shift, ps) * om;
    return std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs));
}

double energy_identity_residual(const problem_params& params, const shooting_solution& sol,
                                double eps) {
    params.validate();
    const double shift = beta_boundary(params, eps);
    const std::vector<double>& r = sol.profile.grid;
    const double R = 1.0 / eps;
    if (std::abs(r.back() - R) > 1e-9 * R)
        throw std::invalid_argument("energy_identity_residual: grid does not end at 1/eps");
    const double p = params.p, N = params.N, ps = params.p_star();
    const double om = sphere_area(params.N);
    std::vector<double> grad_den(r.size(), 0.0), src_den(r.size(), 0.0);
    for (std::size_t j = 0; j < r.size(); ++j) {
        grad_den[j] = std::pow(r[j], N - 1.0) * std::pow(std::abs(sol.derivative[j]), p);
        const double w = sol.profile.values[j] + shift;
        src_den[j] = w > 0.0 ? std::pow(r[j], N - 1.0 + params.alpha) * std::pow(w, ps) : 0.0;
    }
    // near the origin |u'| ~ r^{E-1}, so |u'|^p r^{N-1} ~ r^{N-1+p(E-1)}
    const double head_grad = N - 1.0 + p * (params.shape_exponent() - 1.0);
    const double lhs = om * cumulative_radial_integral(r, grad_den, head_grad).back() +
                       shift * om * std::pow(R, N - 1.0) *
                           std::pow(std::abs(sol.derivative.back()), p - 1.0);
    const double rhs =
        om * cumulative_radial_integral(r, src_den, N - 1.0 + params.alpha).back();
    return std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs));
}

double pohozaev_residual_annulus(const problem_params& params, const shooting_solution& fn_u,
                                 const shooting_solution& fn_v, double shift, double r_inner,
                                 double r_outer) {
    params.validate();
    const std::vector<double>& r = fn_u.profile.grid;
    if (fn_v.profile.grid != r)
        throw std::invalid_argument("pohozaev_residual_annulus: profiles must share a grid");
    require_log_uniform(r, "pohozaev_residual_annulus");
    if (!(r_inner > 0.0) || !(r_inner < r_outer))
        throw std::invalid_argument("pohozaev_residual_annulus: need 0 < r_inner < r_outer");
    if (!(r_inner >= r[1]) || !(r_outer <= r.back()))
        throw std::invalid_argument("pohozaev_residual_annulus: window outside the grid");
    const double re = std::clamp(kernel_Z_root(params), r_inner, r_outer);
    const double u = interpolate_log_cubic(r, fn_u.profile.values, re);
    const double du = interpolate_log_cubic(r, fn_u.derivative, re);
    const double v = interpolate_log_cubic(r, fn_v.profile.values, re);
    const double dv = interpolate_log_cubic(r, fn_v.derivative, re);
    const double p = params.p, N = params.N;
    const double term_grad =
        (p - 1.0) / p * re * (std::pow(std::abs(du), p) - std::pow(std::abs(dv), p));
    const double term_mixed = (N - p) / p * (signed_power(du, p) * (u + shift) -
                                             signed_power(dv, p) * (v + shift));
    const double om = sphere_area(params.N);
    const double surface = om * std::pow(re, N - 1.0);
    const double num = surface * std::abs(term_grad + term_mixed);
    const double scale = surface * ((p - 1.0) / p * re * std::pow(std::abs(du), p) +
                                    (N - p) / p * std::pow(std::abs(du), p - 1.0) *
                                        std::abs(u + shift)) +
                         std::numeric_limits<double>::min();
    return num / scale;
}

decay_fit decay_exponent_fit(const radial_function& fn, decay_target which) {
    fn.validate();
    if (which == decay_target::value) return fit_decay_window(fn.grid, fn.values);
    std::vector<double> du(fn.grid.size(), 0.0);
    for (std::size_t j = 1; j + 1 < fn.grid.size(); ++j)
        du[j] = central_derivative(fn.grid, fn.values, j);
    return fit_decay_window(fn.grid, du);
}

decay_fit decay_exponent_fit(const shooting_solution& sol, decay_target which) {
    sol.profile.validate();
    if (which == decay_target::value) return fit_decay_window(sol.profile.grid, sol.profile.values);
    if (sol.derivative.size() != sol.profile.size())
        throw std::invalid_argument("decay_exponent_fit: derivative/profile size mismatch");
    return fit_decay_window(sol.profile.grid, sol.derivative);
}

shooting_solution sample_truncated_bubble(const problem_params& params, double eps,
                                          const std::vector<double>& grid) {
    params.validate();
    shooting_solution sol;
    sol.profile.grid = grid;
    sol.profile.values.resize(grid.size());
    sol.derivative.resize(grid.size());
    sol.flux.resize(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        sol.profile.values[j] = approx_radial_solution(params, eps, grid[j]);
        sol.derivative[j] = evaluate_bubble_derivative(params, 1.0, grid[j]);
        sol.flux[j] = grid[j] > 0.0 ? std::pow(grid[j], params.N - 1.0) *
                                          signed_power(sol.derivative[j], params.p)
                                    : 0.0;
    }
    sol.center_value = approx_radial_solution(params, eps, 0.0);
    sol.boundary_mismatch = sol.profile.values.back();
    sol.bisection_steps = 0;
    return sol;
}

double default_weighted_exponent(const problem_params& params) {
    params.validate();
    const double N = params.N, p = params.p;
    const double lo = N * (N - p) / (N * p - (N - p));
    const double hi = (N - p) / (p - 1.0);
    return 0.5 * (lo + hi);
}

double weighted_sup_norm(const radial_function& fn, double gamma) {
    fn.validate();
    double out = 0.0;
    for (std::size_t j = 0; j < fn.size(); ++j)
        out = std::max(out, std::pow(1.0 + fn.grid[j], gamma) * std::abs(fn.values[j]));
    return out;
}

namespace {
void put_number(std::ostream& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, res.ptr - buf);
}
}  // namespace

void write_profile_csv(std::ostream& out, const shooting_solution& sol) {
    out << "r,u,du,flux\n";
    for (std::size_t j = 0; j < sol.profile.size(); ++j) {
        put_number(out, sol.profile.grid[j]);
        out.put(',');
        put_number(out, sol.profile.values[j]);
        out.put(',');
        put_number(out, sol.derivative[j]);
        out.put(',');
        put_number(out, sol.flux[j]);
        out.put('\n');
    }
}

}  // namespace henon
