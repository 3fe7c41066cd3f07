// Eigenproblem assembly and solver tests: coefficient identities against the
// closed-form model, recovery of the known transformed decay pair (M-1, 0),
// first-eigenvalue convergence on growing balls, method cross-checks, and
// decay-bound certification of eigenfunctions.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <henon/detail/closed_forms.hpp>
#include <henon/grid.hpp>
#include <henon/harmonics.hpp>
#include <henon/model.hpp>
#include <henon/sturm_liouville.hpp>

#include <cmath>
#include <random>
#include <vector>

using namespace henon;

namespace {

// Sup-distance between a computed profile and an analytic reference on
// grid points with r <= r_cap, after normalizing the reference to sup 1.
template <class Fn>
double profile_sup_error(const radial_function& profile, Fn&& reference, double r_cap) {
    double ref_sup = 0.0;
    for (std::size_t i = 0; i < profile.grid.size(); ++i) {
        if (profile.grid[i] > r_cap) break;
        ref_sup = std::max(ref_sup, std::fabs(reference(profile.grid[i])));
    }
    REQUIRE(ref_sup > 0.0);
    double err = 0.0;
    for (std::size_t i = 0; i < profile.grid.size(); ++i) {
        if (profile.grid[i] > r_cap) break;
        err = std::max(err, std::fabs(profile.values[i] - reference(profile.grid[i]) / ref_sup));
    }
    return err;
}

} // namespace

TEST_CASE("change of variable: exponent, dimension parameter, round trip") {
    problem_params flat{4, 2.0, 0.0};
    liouville_map id = liouville_transform(flat);
    CHECK(id.q == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(id.M == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(id.apply(3.7) == doctest::Approx(3.7).epsilon(1e-15));

    problem_params params{4, 2.0, 2.0};
    liouville_map fwd = liouville_transform(params);
    CHECK(fwd.q == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(fwd.M == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(fwd.apply(4.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(fwd.invert(2.0) == doctest::Approx(4.0).epsilon(1e-15));

    liouville_map bwd = liouville_transform(params, map_direction::to_original);
    CHECK(bwd.apply(2.0) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(bwd.invert(4.0) == doctest::Approx(2.0).epsilon(1e-15));

    // round trip across magnitudes
    for (double r : {1e-8, 1e-3, 0.5, 1.0, 7.3, 1e4, 1e8}) {
        CHECK(fwd.invert(fwd.apply(r)) == doctest::Approx(r).epsilon(1e-14));
        CHECK(bwd.invert(bwd.apply(r)) == doctest::Approx(r).epsilon(1e-14));
    }
}

TEST_CASE("assembled coefficients match the closed-form model at sampled radii") {
    const problem_params cases[] = {
        {4, 2.0, 0.0}, {4, 2.0, 2.0}, {3, 2.0, 1.0},
        {5, 3.0, 1.0}, {3, 1.5, 0.5}, {6, 2.5, 2.0},
    };
    for (const auto& params : cases) {
        CAPTURE(params.N);
        CAPTURE(params.p);
        CAPTURE(params.alpha);
        sl_problem prob = assemble_mode_problem(params, 0, 1e-3);
        CHECK(prob.r_max == doctest::Approx(1000.0));
        CHECK_FALSE(prob.truncated_line);

        const double N = params.N, p = params.p, al = params.alpha;
        const double E = params.shape_exponent();
        const double ps = params.p_star();
        const double K = (N + al) * (N * p + p * al - N + p) / (p - 1.0);
        for (int i = 0; i < 20; ++i) {
            const double r = 1e-4 * std::pow(10.0, 7.0 * i / 19.0);  // spans [1e-4, 1e3]
            const double U = evaluate_bubble(params, 1.0, r);
            const double dU = std::fabs(evaluate_bubble_derivative(params, 1.0, r));
            const double a_ref = (p - 1.0) * std::pow(r, N - 1.0) * std::pow(dU, p - 2.0);
            const double b_ref = std::pow(r, N - 3.0) * std::pow(dU, p - 2.0);
            // two equivalent forms of the zeroth-order coefficient
            const double c_ref = (ps - 1.0) * std::pow(r, N - 1.0 + al) * std::pow(U, ps - 2.0);
            const double c_alt = K * std::pow(r, E - 2.0 + N - 1.0) * std::pow(dU, p - 2.0) /
                                 ((1.0 + std::pow(r, E)) * (1.0 + std::pow(r, E)));
            CHECK(static_cast<double>(prob.diffusion(r)) == doctest::Approx(a_ref).epsilon(1e-10));
            CHECK(static_cast<double>(prob.angular_weight(r)) ==
                  doctest::Approx(b_ref).epsilon(1e-10));
            CHECK(static_cast<double>(prob.source_weight(r)) ==
                  doctest::Approx(c_ref).epsilon(1e-10));
            CHECK(c_alt == doctest::Approx(c_ref).epsilon(1e-9));
        }

        // endpoint exponents: at mu = 0 the tail exponent is the value decay
        // rate, and the origin exponent is the larger indicial root
        // max(0, 1 - m0), which is positive once the diffusion degenerates
        // strongly enough at the origin (m0 < 1, only possible for p < 2)
        CHECK(prob.tail_exponent(0.0) ==
              doctest::Approx(params.value_decay_exponent()).epsilon(1e-12));
        const double m0 = N - 1.0 + (1.0 + al) * (p - 2.0) / (p - 1.0);
        CHECK(prob.origin_exponent(0.0) ==
              doctest::Approx(std::max(0.0, 1.0 - m0)).epsilon(1e-12));
    }
    // ball radius follows the inverse of eps
    CHECK(assemble_mode_problem(problem_params{4, 2.0, 2.0}, 0, 0.1).r_max ==
          doctest::Approx(10.0));
}

TEST_CASE("eps parsing accepts positive reals and the infinity spelling") {
    problem_params params{4, 2.0, 2.0};
    CHECK(assemble_mode_problem(params, 0, "0.1").r_max == doctest::Approx(10.0));
    sl_problem line = assemble_mode_problem(params, 1, "infinity");
    CHECK(line.truncated_line);
    CHECK(line.r_max == doctest::Approx(1000.0));
    CHECK_THROWS_AS(assemble_mode_problem(params, 0, "brie"), std::invalid_argument);
    CHECK_THROWS_AS(assemble_mode_problem(params, 0, "-0.5"), std::invalid_argument);
    CHECK_THROWS_AS(assemble_mode_problem(params, 0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(assemble_mode_problem(params, -1, 0.1), std::invalid_argument);
}

TEST_CASE("endpoint exponents reproduce the known kernel behaviors") {
    // At mu = -k(N+k-2) the origin exponent equals the kernel-mode exponent.
    problem_params flat{4, 2.0, 0.0};
    sl_problem prob = assemble_mode_problem(flat, 1, 0.1);
    CHECK(prob.origin_exponent(-3.0) == doctest::Approx(1.0).epsilon(1e-12));
    // decaying branch at the first-eigenvalue limit of the (4, 2, 2) case
    problem_params params{4, 2.0, 2.0};
    sl_problem prob2 = assemble_mode_problem(params, 0, 0.1);
    CHECK(prob2.tail_exponent(-8.0) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(prob2.tail_exponent(0.0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("transformed problem recovers the known decay pair and eigenfunctions") {
    problem_params params{4, 2.0, 2.0};  // M = 3, p = 2
    sl_problem prob = assemble_transformed_problem(params);
    CHECK(prob.transformed);
    CHECK(prob.dim == doctest::Approx(3.0));

    std::vector<eigen_pair> eig = solve_spectrum(prob, 3);
    const double gamma1 = -eig[0].value;
    const double gamma2 = -eig[1].value;
    const double gamma3 = -eig[2].value;
    const double M = 3.0;
    CHECK(std::fabs(gamma1 - (M - 1.0)) <= 1e-6 * (M - 1.0));
    CHECK(std::fabs(gamma2) <= 1e-6);
    CHECK(gamma3 <= 1e-6);  // gamma_j <= 0 from the third one on

    // strictly increasing eigenvalues, oscillation counts 0..2
    CHECK(eig[0].value < eig[1].value);
    CHECK(eig[1].value < eig[2].value);
    CHECK(eig[0].sign_changes == 0);
    CHECK(eig[1].sign_changes == 1);
    CHECK(eig[2].sign_changes == 2);

    // first eigenfunction positive with sup-norm 1
    double vmax = 0.0, vmin = 1e300;
    for (double v : eig[0].profile.values) {
        vmax = std::max(vmax, v);
        vmin = std::min(vmin, v);
    }
    CHECK(vmax == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(vmin >= -1e-10);

    // eigenfunctions match the closed forms s^{1/(p-1)} (1+s^{p/(p-1)})^{-M/p}
    // and ((p-1) - s^{p/(p-1)}) (1+s^{p/(p-1)})^{-M/p} on [0, 10]
    detail::profile_family<double> fam{M, 2.0, 0.0};
    auto psi1 = [&](double s) { return fam.power_profile(1.0, M / 2.0, s); };
    auto psi2 = [&](double s) { return fam.z(s); };
    CHECK(profile_sup_error(eig[0].profile, psi1, 10.0) <= 1e-4);
    CHECK(profile_sup_error(eig[1].profile, psi2, 10.0) <= 1e-4);
}

TEST_CASE("transformed decay pair persists at fractional dimension parameters") {
    {
        problem_params params{5, 3.0, 1.0};  // M = 4.5, p = 3
        sl_problem prob = assemble_transformed_problem(params);
        CHECK(prob.dim == doctest::Approx(4.5));
        std::vector<eigen_pair> eig = solve_spectrum(prob, 2);
        CHECK(std::fabs(-eig[0].value - 3.5) <= 1e-6 * 3.5);
        CHECK(std::fabs(eig[1].value) <= 1e-6);

        detail::profile_family<double> fam{4.5, 3.0, 0.0};
        auto psi1 = [&](double s) { return fam.power_profile(0.5, 1.5, s); };
        auto psi2 = [&](double s) { return fam.z(s); };
        CHECK(profile_sup_error(eig[0].profile, psi1, 10.0) <= 1e-4);
        CHECK(profile_sup_error(eig[1].profile, psi2, 10.0) <= 1e-4);
    }
    {
        problem_params params{6, 2.5, 2.0};  // M = 40/9
        sl_problem prob = assemble_transformed_problem(params);
        const double M = 40.0 / 9.0;
        CHECK(prob.dim == doctest::Approx(M).epsilon(1e-14));
        eigen_pair first = solve_first_eigen(prob);
        CHECK(std::fabs(-first.value - (M - 1.0)) <= 1e-6 * (M - 1.0));
    }
}

TEST_CASE("whole-line problem: degree-one eigenvalue and kernel-mode profile") {
    // At alpha = 0 the first eigenvalue of the whole-line problem equals
    // -(N-1), i.e. minus the degree-1 angular eigenvalue: the translation
    // modes sit at the bottom of the spectrum.
    problem_params flat{4, 2.0, 0.0};
    sl_problem prob = assemble_mode_problem_whole_line(flat, 1);
    eigen_pair first = solve_first_eigen(prob);
    CHECK(std::fabs(first.value + 3.0) <= 1e-6);

    // eigenfunction = degree-1 kernel profile r (1 + r^2)^{-2}
    detail::profile_family<double> fam{4.0, 2.0, 0.0};
    auto phi1 = [&](double r) { return fam.power_profile(1.0, 2.0, r); };
    CHECK(profile_sup_error(first.profile, phi1, 10.0) <= 1e-4);
    CHECK(first.profile.origin_exponent == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("whole-line problem: radial zero mode sits at zero with one sign change") {
    problem_params params{4, 2.0, 2.0};
    sl_problem prob = assemble_mode_problem_whole_line(params, 0);
    std::vector<eigen_pair> eig = solve_spectrum(prob, 2);
    CHECK(std::fabs(eig[0].value + 8.0) <= 1e-8);  // closed-form first eigenvalue
    CHECK(std::fabs(eig[1].value) <= 5e-5);        // zero mode, truncation-limited
    CHECK(eig[1].sign_changes == 1);

    detail::profile_family<double> fam{4.0, 2.0, 2.0};
    auto zprof = [&](double r) { return fam.z(r); };
    CHECK(profile_sup_error(eig[1].profile, zprof, 10.0) <= 1e-3);
}

TEST_CASE("ball first eigenvalue converges to the closed-form limit") {
    problem_params params{4, 2.0, 2.0};

    eigen_options coarse;
    coarse.nodes_per_decade = 260;
    const double mu_eps1 = solve_first_eigen(assemble_mode_problem(params, 0, 1e-1), coarse).value;
    eigen_options fine;
    fine.nodes_per_decade = 420;
    const double mu_eps2 = solve_first_eigen(assemble_mode_problem(params, 0, 1e-2), fine).value;

    // gaps to the limit -8 shrink like the sixth power of the ball radius
    const double gap1 = mu_eps1 + 8.0;
    const double gap2 = mu_eps2 + 8.0;
    CHECK(gap1 > 6.0e-5);
    CHECK(gap1 < 6.2e-5);
    CHECK(gap2 > 5.5e-11);
    CHECK(gap2 < 6.7e-11);
    CHECK(mu_eps1 < 0.0);
    CHECK(mu_eps2 < 0.0);
}

TEST_CASE("ball second eigenvalue is positive for small eps") {
    problem_params params{4, 2.0, 2.0};
    eigen_options opt;
    opt.nodes_per_decade = 260;
    std::vector<eigen_pair> eig = solve_spectrum(assemble_mode_problem(params, 0, 1e-1), 2, opt);
    CHECK(eig[1].value > 5.3e-2);
    CHECK(eig[1].value < 5.6e-2);  // frozen reference 5.4589e-2
    CHECK(eig[0].value < 0.0);
    CHECK(eig[1].sign_changes == 1);

    eigen_options opt2;
    opt2.nodes_per_decade = 300;
    std::vector<eigen_pair> eig2 = solve_spectrum(assemble_mode_problem(params, 0, 1e-2), 2, opt2);
    CHECK(eig2[1].value > 4e-4);
    CHECK(eig2[1].value < 6e-4);  // frozen reference 5.102e-4
}

TEST_CASE("first eigenvalue decreases strictly in alpha and in domain size") {
    problem_params base{4, 2.0, 0.0};
    eigen_options opt;
    opt.nodes_per_decade = 160;
    opt.r_min = 1e-5;

    // strict decrease in alpha at fixed eps
    double previous = 1e300;
    for (double alpha : {1.0, 1.5, 2.0, 2.5}) {
        const double mu = mu1_of_alpha(base, alpha, 0.1, opt);
        CHECK(mu < previous);
        previous = mu;
    }

    // strict decrease as the ball grows, staying above the limit value
    problem_params params{4, 2.0, 2.0};
    previous = 1e300;
    for (double eps : {0.25, 0.2, 0.125, 0.1}) {
        const double mu = solve_first_eigen(assemble_mode_problem(params, 0, eps), opt).value;
        CHECK(mu < previous);
        CHECK(mu > -8.0);
        previous = mu;
    }
}

TEST_CASE("alpha-derivative of the first eigenvalue matches the closed form") {
    problem_params base{4, 2.0, 2.0};
    eigen_options opt;
    opt.nodes_per_decade = 300;
    const double delta = 1e-3;
    const double up = mu1_of_alpha(base, 2.0 + delta, 1e-2, opt);
    const double dn = mu1_of_alpha(base, 2.0 - delta, 1e-2, opt);
    const double fd = (up - dn) / (2.0 * delta);
    CHECK(std::fabs(fd - dmu1_dalpha(base)) <= 1e-6);  // closed form gives -3
}

TEST_CASE("ball first eigenfunction approaches its closed-form limit profile") {
    problem_params params{4, 2.0, 2.0};
    eigen_options opt;
    opt.nodes_per_decade = 420;
    eigen_pair first = solve_first_eigen(assemble_mode_problem(params, 0, 1e-2), opt);

    // limit profile r^{(p+alpha)/(p(p-1))} (1 + r^{(p+alpha)/(p-1)})^{-(N+alpha)/(p+alpha)}
    detail::profile_family<double> fam{4.0, 2.0, 2.0};
    auto limit = [&](double r) { return fam.power_profile(2.0, 1.5, r); };
    CHECK(profile_sup_error(first.profile, limit, 10.0) <= 1e-4);
    CHECK(first.residual <= 1e-14);
}

TEST_CASE("matrix and phase-shooting eigenvalues agree within tolerance") {
    problem_params params{4, 2.0, 2.0};
    eigen_options opt;
    opt.nodes_per_decade = 260;
    opt.verify_with_pruefer = true;

    // ball problem, both signs of the eigenvalue; agreement is bounded by the
    // methods' own error estimates (the phase route is the coarser one here)
    std::vector<eigen_pair> eig = solve_spectrum(assemble_mode_problem(params, 0, 0.1), 2, opt);
    CHECK(eig[0].verified);
    CHECK(std::fabs(eig[0].verified_value - eig[0].value) <= 1e-4);
    CHECK(eig[1].verified);
    CHECK(std::fabs(eig[1].verified_value - eig[1].value) <= 1e-6);

    // truncated-line problem with the decay-matched right end
    eigen_options lopt;
    lopt.nodes_per_decade = 150;
    lopt.verify_with_pruefer = true;
    sl_problem line = assemble_transformed_problem(params, 1e3);
    eigen_pair first = solve_first_eigen(line, lopt);
    CHECK(first.verified);
    CHECK(std::fabs(first.verified_value - first.value) <= 1e-5);
}

TEST_CASE("method disagreement on demand: tightened tolerance trips the check") {
    problem_params params{4, 2.0, 2.0};
    eigen_options opt;
    opt.nodes_per_decade = 20;
    opt.richardson_levels = 1;
    opt.verify_with_pruefer = true;
    opt.agreement_factor = 1e-6;  // far below any realistic method agreement
    try {
        solve_first_eigen(assemble_mode_problem(params, 0, 0.1), opt);
        FAIL("expected the cross-check to fail at this tolerance");
    } catch (const solver_error& err) {
        CHECK(std::string(err.code()) == "grid-too-coarse");
    }
}

TEST_CASE("eigenvalue index beyond the discrete problem reports no convergence") {
    problem_params params{4, 2.0, 2.0};
    eigen_options opt;
    opt.nodes_per_decade = 16;
    opt.r_min = 0.05;
    opt.richardson_levels = 1;
    try {
        solve_spectrum(assemble_mode_problem(params, 0, 0.1), 500, opt);
        FAIL("expected failure: index exceeds matrix dimension");
    } catch (const solver_error& err) {
        CHECK(std::string(err.code()) == "no-convergence");
    }
}

TEST_CASE("grid refinement converges at second order") {
    problem_params params{4, 2.0, 2.0};
    sl_problem prob = assemble_transformed_problem(params, 1e3);
    double vals[3];
    for (int i = 0; i < 3; ++i) {
        eigen_options opt;
        opt.nodes_per_decade = 60 << i;  // exact doubling across calls
        opt.richardson_levels = 1;
        opt.boundary_rounds = 4;
        vals[i] = solve_first_eigen(prob, opt).value;
    }
    const double order = std::log2(std::fabs((vals[0] - vals[1]) / (vals[1] - vals[2])));
    CHECK(order >= 1.8);
    CHECK(order <= 2.2);
}

TEST_CASE("decay bounds: ball eigenfunction is certified, window slope is the decaying branch") {
    problem_params params{4, 2.0, 2.0};
    eigen_options opt;
    opt.nodes_per_decade = 300;
    eigen_pair first = solve_first_eigen(assemble_mode_problem(params, 0, 1e-2), opt);
    decay_check_report report = eigenfunction_decay_check(first, params);
    CHECK(report.pass);
    CHECK(report.value_pass);
    CHECK(report.gradient_pass);
    CHECK(report.window_points >= 50);
    CHECK(report.value_exponent == doctest::Approx(2.0));
    CHECK(report.gradient_exponent == doctest::Approx(3.0));
    // The actual far-field exponent is the decaying branch at mu_1 ~ -8,
    // i.e. slope -4: strictly faster than the bound, which is what the
    // certification checks.
    CHECK(report.value_slope == doctest::Approx(-4.0).epsilon(0.08));
    CHECK(report.gradient_slope == doctest::Approx(-5.0).epsilon(0.08));
    CHECK(report.value_constant > 0.0);
    CHECK(report.gradient_constant > 0.0);
}

TEST_CASE("decay bounds: radial kernel profile saturates the value exponent") {
    problem_params params{4, 2.0, 2.0};
    detail::profile_family<double> fam{4.0, 2.0, 2.0};
    eigen_pair pair;
    pair.index = 2;
    std::vector<double> grid = geometric_grid(1e-6, 1e3, 4000);
    pair.profile.grid = grid;
    pair.profile.values.reserve(grid.size());
    for (double r : grid) pair.profile.values.push_back(fam.z(r));
    decay_check_report report = eigenfunction_decay_check(pair, params);
    CHECK(std::fabs(report.value_slope + 2.0) <= 0.05 * 2.0);
    CHECK(std::fabs(report.gradient_slope + 3.0) <= 0.05 * 3.0);
    CHECK(report.pass);
}

TEST_CASE("decay check refuses windows with too few points") {
    problem_params params{4, 2.0, 2.0};
    eigen_pair pair;
    std::vector<double> grid = geometric_grid(1e-2, 1e2, 80);  // ~14 points in window
    pair.profile.grid = grid;
    pair.profile.values.assign(grid.size(), 1.0);
    try {
        eigenfunction_decay_check(pair, params);
        FAIL("expected rejection of the thin window");
    } catch (const solver_error& err) {
        CHECK(std::string(err.code()) == "window-too-small");
    }
}

TEST_CASE("weighted quadratic-form embedding holds with a modest constant") {
    // For smooth compactly supported profiles phi, the weighted mass
    // integral r^{beta+N-1} U^{p*-2} phi^2 is controlled by the gradient
    // integral r^{N-1} |U'|^{p-2} phi'^2, for beta inside the admissible
    // window.  Twenty random bump profiles; the ratio stays bounded.
    const problem_params cases[] = {
        {4, 2.0, 0.0}, {4, 2.0, 2.0}, {3, 2.0, 1.0},
        {5, 3.0, 1.0}, {3, 1.5, 0.5}, {6, 2.5, 2.0},
    };
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> center_dist(0.6, 2.0);
    std::uniform_real_distribution<double> width_dist(0.2, 0.45);
    double max_ratio = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const problem_params& params = cases[trial % 6];
        sl_problem prob = assemble_mode_problem_whole_line(params, 0);
        const double N = params.N, p = params.p, al = params.alpha;
        // admissible weight exponent: midpoint of the valid window
        const double lo = std::max((p * al - 2.0 * al - p) / (p - 1.0),
                                   (p * al + 2.0 * p - N) / (p - 1.0) + 1e-6);
        const double hi = (p + p * al) / (p - 1.0);
        REQUIRE(lo < hi);
        const double beta = 0.5 * (lo + hi);
        const double ps = params.p_star();

        const double c0 = center_dist(rng), w0 = width_dist(rng);
        auto bump = [&](double r) {
            const double y = (r - c0) / w0;
            return std::fabs(y) < 1.0 ? std::exp(-1.0 / (1.0 - y * y)) : 0.0;
        };
        auto dbump = [&](double r) {
            const double y = (r - c0) / w0;
            if (!(std::fabs(y) < 1.0)) return 0.0;
            const double f = std::exp(-1.0 / (1.0 - y * y));
            const double g = 1.0 - y * y;
            return f * (-2.0 * y / (g * g)) / w0;
        };

        const int n = 4000;
        const double a_end = c0 - w0, b_end = c0 + w0;
        const double h = (b_end - a_end) / n;
        double mass = 0.0, grad = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double r = a_end + h * i;
            const double wq = (i == 0 || i == n) ? 0.5 : 1.0;
            const double phi = bump(r), dphi = dbump(r);
            // weights from the assembled coefficients:
            //   r^{beta+N-1} U^{p*-2} = c(r) r^{beta-alpha} / (p*-1)
            //   r^{N-1} |U'|^{p-2}    = a(r) / (p-1)
            const double wmass = static_cast<double>(prob.source_weight(r)) *
                                 std::pow(r, beta - al) / (ps - 1.0);
            const double wgrad = static_cast<double>(prob.diffusion(r)) / (p - 1.0);
            mass += wq * h * wmass * phi * phi;
            grad += wq * h * wgrad * dphi * dphi;
        }
        REQUIRE(grad > 0.0);
        const double ratio = mass / grad;
        CHECK(ratio > 0.0);
        CHECK(ratio < 1e3);
        max_ratio = std::max(max_ratio, ratio);
    }
    MESSAGE("max embedding ratio over 20 random profiles: ", max_ratio);
    CHECK(max_ratio < 1e3);
}

TEST_CASE("solver input validation") {
    problem_params params{4, 2.0, 2.0};
    sl_problem prob = assemble_mode_problem(params, 0, 0.1);
    eigen_options opt;
    opt.r_min = 5.0;  // not well inside the domain
    CHECK_THROWS_AS(solve_first_eigen(prob, opt), std::invalid_argument);
    CHECK_THROWS_AS(solve_spectrum(prob, 0), std::invalid_argument);
    sl_problem empty;
    CHECK_THROWS_AS(solve_first_eigen(empty), std::invalid_argument);
    eigen_options tiny;
    tiny.nodes_per_decade = 4;
    CHECK_THROWS_AS(solve_first_eigen(prob, tiny), std::invalid_argument);
}
