/// @file closed_forms.hpp
/// @brief Closed-form radial profiles and the weighted Sturm-Liouville
///        coefficient triple, templated on the floating type.
///
/// Everything here is evaluated in log-space for the power terms: exponents
/// like (N+alpha)/(p+alpha) combined with radii up to 1e4 (or tiny epsilon)
/// overflow naive powering, while log1p/exp compositions stay finite and
/// lose at most a few ulp.  The `long double` instantiation is what the
/// eigenvalue machinery assembles its matrices from; the public double API
/// wraps the same code.
#pragma once

#include <cmath>
#include <limits>

namespace henon::detail {

/// Numerically safe log(1 + exp(y)), valid for any y including -inf.
template <class F>
F log1p_exp(F y) {
    if (y > F(0)) return y + std::log1p(std::exp(-y));
    return std::log1p(std::exp(y));
}

/// The explicit radial solution family and its linearization coefficients
/// for real "dimension" N (non-integer N arises from the transformed,
/// weight-free form of the problem).
template <class F>
struct profile_family {
    F N, p, alpha;
    F E;      ///< shape power (p+alpha)/(p-1)
    F decay;  ///< outer power ratio (N-p)/(p+alpha)
    F pstar;  ///< critical growth exponent p(N+alpha)/(N-p)
    F C;      ///< profile normalization constant

    profile_family(F N_, F p_, F alpha_)
        : N(N_), p(p_), alpha(alpha_),
          E((p_ + alpha_) / (p_ - F(1))),
          decay((N_ - p_) / (p_ + alpha_)),
          pstar(p_ * (N_ + alpha_) / (N_ - p_)),
          C(std::exp((N_ - p_) / (p_ * (p_ + alpha_)) *
                     std::log((N_ + alpha_) *
                              std::pow((N_ - p_) / (p_ - F(1)), p_ - F(1))))) {}

    /// Profile value C * lam^{(N-p)/p} (1 + (lam r)^E)^{-decay}.
    F u(F lam, F r) const {
        F y = E * (std::log(lam) + std::log(r));
        return C * std::exp((N - p) / p * std::log(lam) - decay * log1p_exp(y));
    }

    /// log |u'(lam=1, r)|; r must be > 0.
    F log_abs_du(F r) const { return log_abs_du_at(std::log(r)); }

    /// Radial derivative of the profile at scale lam (negative for r > 0).
    F du(F lam, F r) const {
        if (r <= F(0)) return F(0);
        F llam = std::log(lam);
        return -std::exp(((N - p) / p + F(1)) * llam + log_abs_du_at(std::log(r) + llam));
    }

    /// Generic two-power profile r^rho (1 + r^E)^{-nu}.
    F power_profile(F rho, F nu, F r) const {
        if (r <= F(0)) return rho == F(0) ? F(1) : F(0);
        F lr = std::log(r);
        return std::exp(rho * lr - nu * log1p_exp(E * lr));
    }

    /// Radial kernel profile ((p-1) - r^E) / (1 + r^E)^{(N+alpha)/(p+alpha)}.
    F z(F r) const {
        F c = (N + alpha) / (p + alpha);
        if (r <= F(0)) return p - F(1);
        F y = E * std::log(r);
        F L = log1p_exp(y);
        if (y <= F(0)) return ((p - F(1)) - std::exp(y)) * std::exp(-c * L);
        return ((p - F(1)) * std::exp(-y) - F(1)) * std::exp(y - c * L);
    }

    // ---- weighted Sturm-Liouville triple at the lam=1 profile ----
    //
    // Self-adjoint flux form  -(a v')' - c v = mu b v  with
    //   a(r) = (p-1) r^{N-1} |u'|^{p-2}
    //   b(r) = r^{N-3} |u'|^{p-2}
    //   c(r) = (pstar-1) r^{N-1+alpha} u^{pstar-2}
    // A degree-k perturbation profile solves the linearized equation
    // exactly when mu = -k(N+k-2).

    F a_coeff(F r) const {
        return std::exp(std::log(p - F(1)) + (N - F(1)) * std::log(r) +
                        (p - F(2)) * log_abs_du(r));
    }

    F b_coeff(F r) const {
        return std::exp((N - F(3)) * std::log(r) + (p - F(2)) * log_abs_du(r));
    }

    F c_coeff(F r) const {
        F lr = std::log(r);
        F logu = std::log(C) - decay * log1p_exp(E * lr);
        return (pstar - F(1)) *
               std::exp((N - F(1) + alpha) * lr + (pstar - F(2)) * logu);
    }

    /// Power m0 with a(r) ~ const * r^{m0} as r -> 0.
    F origin_diffusion_power() const {
        return N - F(1) + (F(1) + alpha) * (p - F(2)) / (p - F(1));
    }

    /// Power mt with a(r) ~ const * r^{mt} as r -> infinity; equals (N-1)/(p-1).
    F tail_diffusion_power() const { return (N - F(1)) / (p - F(1)); }

    /// Regular Frobenius exponent at the origin for eigenvalue parameter mu
    /// (the coefficient of b on the right-hand side): the balance
    /// (p-1) rho (rho + m0 - 1) = -mu, larger root.
    F origin_exponent(F mu) const {
        F m1 = origin_diffusion_power() - F(1);
        F disc = m1 * m1 - F(4) * mu / (p - F(1));
        if (disc < F(0)) disc = F(0);
        return (std::sqrt(disc) - m1) / F(2);
    }

    /// Decaying tail exponent tau for eigenvalue parameter mu: v ~ r^{-tau}
    /// far out, from (p-1) tau (mt - 1 - tau) = mu, decaying branch
    /// (the larger root; at mu = 0 it reduces to mt - 1 = (N-p)/(p-1)).
    F tail_exponent(F mu) const {
        F m1 = tail_diffusion_power() - F(1);
        F disc = m1 * m1 - F(4) * mu / (p - F(1));
        if (disc < F(0)) disc = F(0);
        return (m1 + std::sqrt(disc)) / F(2);
    }

private:
    /// log |d/dx profile(1, x)| expressed through log x (shared by du()).
    F log_abs_du_at(F lx) const {
        return std::log(C * (N - p) / (p - F(1))) +
               (F(1) + alpha) / (p - F(1)) * lx -
               (decay + F(1)) * log1p_exp(E * lx);
    }
};

} // namespace henon::detail
