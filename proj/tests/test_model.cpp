/// @file test_model.cpp
/// @brief Closed-form layer: constants, profiles, kernels, truncation.
///
/// Reference values were computed independently with 50-digit arithmetic
/// and are frozen here to full double precision.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "henon/errors.hpp"
#include "henon/harmonics.hpp"
#include "henon/model.hpp"

using namespace henon;

namespace {

problem_params make(int N, double p, double alpha) { return problem_params{N, p, alpha}; }

// The six-case parameter matrix exercised everywhere.
const problem_params kMatrix[] = {
    make(4, 2.0, 0.0),   make(4, 2.0, 2.0), make(3, 2.0, 1.0),
    make(5, 3.0, 1.0),   make(3, 1.5, 0.5), make(6, 2.5, 2.0),
};

} // namespace

TEST_CASE("critical exponent") {
    CHECK(critical_exponent(make(4, 2, 0)) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(critical_exponent(make(4, 2, 2)) == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(critical_exponent(make(5, 3, 1)) == doctest::Approx(9.0).epsilon(1e-15));
    CHECK(critical_exponent(make(3, 2, 1)) == doctest::Approx(8.0).epsilon(1e-15));
    CHECK(critical_exponent(make(3, 1.5, 0.5)) == doctest::Approx(3.5).epsilon(1e-15));
    CHECK(critical_exponent(make(6, 2.5, 2)) ==
          doctest::Approx(40.0 / 7.0).epsilon(1e-15));
    // always supercritical relative to p
    for (const auto& params : kMatrix) CHECK(critical_exponent(params) > params.p);
}

TEST_CASE("normalization constant, frozen references") {
    CHECK(talenti_constant(make(4, 2, 0)) ==
          doctest::Approx(2.8284271247461903).epsilon(1e-15));
    CHECK(talenti_constant(make(4, 2, 2)) ==
          doctest::Approx(1.8612097182041991).epsilon(1e-15));
    CHECK(talenti_constant(make(3, 2, 1)) ==
          doctest::Approx(1.2599210498948732).epsilon(1e-15));
    CHECK(talenti_constant(make(5, 3, 1)) ==
          doctest::Approx(1.3480061545972777).epsilon(1e-15));
    CHECK(talenti_constant(make(3, 1.5, 0.5)) ==
          doctest::Approx(2.4621490260524586).epsilon(1e-15));
    CHECK(talenti_constant(make(6, 2.5, 2)) ==
          doctest::Approx(2.8358537456741503).epsilon(1e-15));
    // unit inner base: (N+alpha)((N-p)/(p-1))^{p-1} = 1 gives constant 1.
    // At N=2+p-1=..., pick p such that N-p = p-1 and N+alpha = 1: impossible
    // for alpha >= 0, N >= 2; instead verify the exponent path with a direct
    // identity: C^{p(p+alpha)/(N-p)} equals the inner base.
    for (const auto& params : kMatrix) {
        double base = (params.N + params.alpha) *
                      std::pow((params.N - params.p) / (params.p - 1.0), params.p - 1.0);
        double C = talenti_constant(params);
        CHECK(std::pow(C, params.p * (params.p + params.alpha) / (params.N - params.p)) ==
              doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("bubble values and scale covariance") {
    for (const auto& params : kMatrix) {
        double C = talenti_constant(params);
        CHECK(evaluate_bubble(params, 1.0, 0.0) == doctest::Approx(C).epsilon(1e-15));
        double expo = (params.N - params.p) / (params.p + params.alpha);
        CHECK(evaluate_bubble(params, 1.0, 1.0) ==
              doctest::Approx(C * std::pow(2.0, -expo)).epsilon(1e-14));
        // scale covariance U_lam(r) = lam^{(N-p)/p} U_1(lam r)
        for (double lam : {0.5, 2.0, 7.0}) {
            for (double r : {0.1, 1.0, 13.0}) {
                double lhs = evaluate_bubble(params, lam, r);
                double rhs = std::pow(lam, (params.N - params.p) / params.p) *
                             evaluate_bubble(params, 1.0, lam * r);
                CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
            }
        }
        // strict monotone decrease
        double prev = evaluate_bubble(params, 1.0, 0.0);
        for (double r = 0.25; r < 32.0; r *= 2.0) {
            double v = evaluate_bubble(params, 1.0, r);
            CHECK(v < prev);
            CHECK(v > 0.0);
            prev = v;
        }
    }
}

TEST_CASE("bubble derivative: origin, finite differences, tail constant") {
    for (const auto& params : kMatrix)
        CHECK(evaluate_bubble_derivative(params, 1.0, 0.0) == 0.0);

    auto params = make(4, 2, 2);
    double h = 1e-5;
    double fd = (evaluate_bubble(params, 1.0, 1.0 + h) -
                 evaluate_bubble(params, 1.0, 1.0 - h)) /
                (2.0 * h);
    CHECK(evaluate_bubble_derivative(params, 1.0, 1.0) ==
          doctest::Approx(fd).epsilon(1e-8));

    for (const auto& pp : kMatrix) {
        CHECK(evaluate_bubble_derivative(pp, 1.0, 0.5) < 0.0);
        // |U'(r)| r^{(N-1)/(p-1)} approaches a positive constant
        double g1 = std::abs(evaluate_bubble_derivative(pp, 1.0, 1e3)) *
                    std::pow(1e3, pp.gradient_decay_exponent());
        double g2 = std::abs(evaluate_bubble_derivative(pp, 1.0, 1e4)) *
                    std::pow(1e4, pp.gradient_decay_exponent());
        CHECK(g1 > 0.0);
        CHECK(g2 == doctest::Approx(g1).epsilon(2e-2));
    }
}

TEST_CASE("value decay constant at large radii") {
    // r^{(N-p)/(p-1)} U(r) tends to a positive constant; sampled at 1e2..1e4.
    for (const auto& params : kMatrix) {
        double c2 = evaluate_bubble(params, 1.0, 1e2) *
                    std::pow(1e2, params.value_decay_exponent());
        double c3 = evaluate_bubble(params, 1.0, 1e3) *
                    std::pow(1e3, params.value_decay_exponent());
        double c4 = evaluate_bubble(params, 1.0, 1e4) *
                    std::pow(1e4, params.value_decay_exponent());
        CHECK(c3 == doctest::Approx(c4).epsilon(1e-2));
        CHECK(c2 == doctest::Approx(c4).epsilon(5e-2));
        CHECK(c4 > 0.0);
    }
}

TEST_CASE("radial kernel profile") {
    for (const auto& params : kMatrix) {
        CHECK(kernel_Z(params, 0.0) == doctest::Approx(params.p - 1.0).epsilon(1e-15));
        double root = kernel_Z_root(params);
        CHECK(std::abs(kernel_Z(params, root)) < 1e-12);
        // exactly one sign change: positive before, negative after
        CHECK(kernel_Z(params, 0.5 * root) > 0.0);
        CHECK(kernel_Z(params, 2.0 * root) < 0.0);
        CHECK(kernel_Z(params, 10.0 * root) < 0.0);
    }
    // p=2 cases have root exactly 1
    CHECK(kernel_Z_root(make(4, 2, 2)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(kernel_Z(make(4, 2, 2), 1.0)) < 1e-15);
}

TEST_CASE("degree-k kernel factor: gating and consistency") {
    // requires alpha = alpha_crit(k)
    CHECK_THROWS_AS(kernel_Zk(make(4, 2, 1.0), 2, 1.0), solver_error);

    for (int k : {2, 3}) {
        for (auto base : {std::pair{4, 2.0}, std::pair{5, 3.0}}) {
            auto [N, p] = base;
            double ak = alpha_crit(k, N, p);
            auto params = make(N, p, ak);
            // at the critical weight, rho_k collapses to (p+alpha)/(p(p-1))
            auto phi = eigenfunction_phi_k(params, k, 1.7);
            CHECK(phi.rho ==
                  doctest::Approx((p + ak) / (p * (p - 1.0))).epsilon(1e-10));
            // and the kernel factor coincides with the eigenfunction profile
            for (double r : {0.0, 0.3, 1.0, 5.0, 40.0}) {
                CHECK(kernel_Zk(params, k, r) ==
                      doctest::Approx(eigenfunction_phi_k(params, k, r).value)
                          .epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("first eigenfunction exponents and eigenvalue, frozen references") {
    {
        auto e = eigenfunction_phi_k(make(4, 2, 0), 1, 1.0);
        CHECK(e.rho == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(e.nu == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(mu_1k(make(4, 2, 0), 1) == doctest::Approx(1.0).epsilon(1e-14));
    }
    {
        auto e = eigenfunction_phi_k(make(4, 2, 0), 0, 1.0);
        CHECK(e.rho == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(e.nu == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(mu_1k(make(4, 2, 0), 0) ==
              doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    }
    {
        auto e = eigenfunction_phi_k(make(3, 1.5, 0.5), 0, 1.0);
        CHECK(e.rho == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(e.nu == doctest::Approx(0.875).epsilon(1e-14));
        CHECK(mu_1k(make(3, 1.5, 0.5), 0) ==
              doctest::Approx(0.26666666666666666).epsilon(1e-13));
    }
    {
        auto e = eigenfunction_phi_k(make(5, 3, 1), 2, 1.0);
        CHECK(e.rho == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(e.nu == doctest::Approx(1.8956439237389600).epsilon(1e-14));
        CHECK(mu_1k(make(5, 3, 1), 2) ==
              doctest::Approx(1.3887626158259733).epsilon(1e-13));
    }
    {
        auto e = eigenfunction_phi_k(make(6, 2.5, 2), 3, 1.0);
        CHECK(e.rho == doctest::Approx(2.0).epsilon(1e-13));
        CHECK(e.nu == doctest::Approx(2.3619973351449830).epsilon(1e-13));
        CHECK(mu_1k(make(6, 2.5, 2), 3) ==
              doctest::Approx(1.5403165465662396).epsilon(1e-13));
    }
    // mu_{1,k} = 1 exactly at alpha = alpha_crit(k); monotone increasing in k
    for (auto base : {std::pair{4, 2.0}, std::pair{5, 3.0}, std::pair{6, 2.5}}) {
        auto [N, p] = base;
        for (int k : {1, 2, 3, 4}) {
            auto params = make(N, p, alpha_crit(k, N, p));
            CHECK(mu_1k(params, k) == doctest::Approx(1.0).epsilon(1e-12));
        }
        auto params = make(N, p, 1.25);
        double prev = mu_1k(params, 0);
        for (int k = 1; k <= 6; ++k) {
            double cur = mu_1k(params, k);
            CHECK(cur > prev);
            prev = cur;
        }
    }
}

TEST_CASE("boundary shift and truncated profile") {
    CHECK(beta_boundary(make(4, 2, 2), 0.05) ==
          doctest::Approx(0.0046530097548777335).epsilon(1e-14));
    CHECK(beta_boundary(make(4, 2, 2), 0.01) ==
          doctest::Approx(1.8612097088981506e-4).epsilon(1e-14));
    CHECK(beta_boundary(make(5, 3, 1), 0.1) ==
          doctest::Approx(0.13413162564562474).epsilon(1e-14));
    for (const auto& params : kMatrix) {
        CHECK(beta_boundary(params, 0.07) ==
              doctest::Approx(evaluate_bubble(params, 1.0, 1.0 / 0.07)).epsilon(1e-15));
        // leading-order small-eps behavior beta ~ C eps^{(N-p)/(p-1)}
        double eps = 1e-5;
        double lead = talenti_constant(params) *
                      std::pow(eps, params.value_decay_exponent());
        CHECK(beta_boundary(params, eps) == doctest::Approx(lead).epsilon(1e-3));
    }

    auto params = make(4, 2, 2);
    double eps = 0.05;
    CHECK(approx_radial_solution(params, eps, 1.0 / eps) == 0.0);
    CHECK(approx_radial_solution(params, eps, 25.0) < 1e-12);
    double at0 = approx_radial_solution(params, eps, 0.0);
    CHECK(at0 == doctest::Approx(talenti_constant(params) -
                                 beta_boundary(params, eps)).epsilon(1e-15));
    CHECK(at0 > 0.0);
    CHECK_THROWS_AS(approx_radial_solution(params, 0.0, 1.0), std::exception);
    CHECK_THROWS_AS(
        approx_radial_solution(params, eps_upper_bound(params) + 0.1, 1.0),
        solver_error);
    // admissibility bound for p=2 is 1 regardless of alpha
    CHECK(eps_upper_bound(make(4, 2, 2)) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("sphere areas, frozen references") {
    CHECK(sphere_area(3) == doctest::Approx(12.566370614359172).epsilon(1e-15));
    CHECK(sphere_area(4) == doctest::Approx(19.739208802178716).epsilon(1e-15));
    CHECK(sphere_area(5) == doctest::Approx(26.318945069571622).epsilon(1e-15));
    CHECK(sphere_area(6) == doctest::Approx(31.006276680299820).epsilon(1e-15));
}

TEST_CASE("log-space evaluation survives extreme arguments") {
    auto params = make(3, 1.5, 0.5); // shape exponent 4: r^4 terms
    double v = evaluate_bubble(params, 1.0, 1e6);
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
    // matches the pure power asymptotic to first order
    double c1 = v * std::pow(1e6, params.value_decay_exponent());
    double c2 = evaluate_bubble(params, 1.0, 1e7) *
                std::pow(1e7, params.value_decay_exponent());
    CHECK(c1 == doctest::Approx(c2).epsilon(1e-3));
    CHECK(std::isfinite(kernel_Z(params, 1e6)));
    CHECK(std::isfinite(evaluate_bubble(params, 37.0, 1e5)));
    CHECK(evaluate_bubble(params, 1.0, 1e300) >= 0.0);
}
