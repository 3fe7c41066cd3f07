#include <henon/bifurcation.hpp>

#include <henon/harmonics.hpp>

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace henon {
namespace {

// Left end of the default bracket: alpha_crit(k)/2 plus this offset, which
// keeps the end strictly positive for k = 1 (limit exponent zero).
constexpr double seed_offset = 1e-6;

void check_options(const locate_options& options) {
    if (!(options.root_tolerance > 0.0))
        throw std::invalid_argument("locate_alpha_k: root_tolerance must be positive");
    if (!(options.alpha_tolerance > 0.0))
        throw std::invalid_argument("locate_alpha_k: alpha_tolerance must be positive");
    if (options.bracket_expansions < 0)
        throw std::invalid_argument("locate_alpha_k: bracket_expansions must be >= 0");
    const bool lo_set = options.bracket_lo >= 0.0;
    const bool hi_set = options.bracket_hi >= 0.0;
    if (lo_set != hi_set)
        throw std::invalid_argument("locate_alpha_k: set both bracket ends or neither");
    if (lo_set && !(options.bracket_lo < options.bracket_hi))
        throw std::invalid_argument("locate_alpha_k: bracket_lo must be below bracket_hi");
}

// Evaluation cache for g(alpha) = mu_1^eps(alpha) + lambda_k.  Every sample
// is kept for the bracket-failure diagnostics and the secant polish.
struct root_context {
    problem_params base;
    int k = 0;
    double eps = 0.0;
    double lambda = 0.0;
    eigen_options eigen;
    std::vector<std::pair<double, double>> samples;  // (alpha, g), eval order

    double eval(double alpha) {
        const double g = mu1_of_alpha(base, alpha, eps, eigen) + lambda;
        samples.emplace_back(alpha, g);
        return g;
    }
};

std::string sample_dump(const root_context& ctx) {
    std::ostringstream s;
    s.setf(std::ios::scientific);
    s.precision(6);
    for (const auto& [alpha, g] : ctx.samples) s << " g(" << alpha << ") = " << g;
    return s.str();
}

// Strict monotone decrease of mu_1^eps across three sampled alphas (g differs
// from mu_1 by a constant).  A violation is re-checked once on a grid with
// doubled resolution before "nonmonotone" is thrown, to separate
// discretization noise from a genuine failure.
void check_monotone_decrease(const root_context& ctx, double a1, double g1, double a2,
                             double g2, double a3, double g3) {
    if (g1 > g2 && g2 > g3) return;
    root_context refined{ctx.base, ctx.k, ctx.eps, ctx.lambda, ctx.eigen, {}};
    refined.eigen.nodes_per_decade *= 2;
    const double h1 = refined.eval(a1);
    const double h2 = refined.eval(a2);
    const double h3 = refined.eval(a3);
    if (h1 > h2 && h2 > h3) return;
    std::ostringstream s;
    s.setf(std::ios::scientific);
    s.precision(6);
    s << "first eigenvalue not strictly decreasing across alpha = {" << a1 << ", " << a2
      << ", " << a3 << "}: refined values {" << h1 - ctx.lambda << ", " << h2 - ctx.lambda
      << ", " << h3 - ctx.lambda << "}";
    throw solver_error("nonmonotone", s.str());
}

struct alpha_bracket {
    double lo = 0.0, hi = 0.0;
    double glo = 0.0, ghi = 0.0;
};

// Establishes g(lo) > 0 > g(hi).  Monotone decrease dictates the direction a
// sign-change-free bracket must shift: both g negative means the root lies
// left of lo, both positive means right of hi.  Left shifts switch from
// subtraction to division near zero so the end stays positive.
alpha_bracket establish_bracket(root_context& ctx, double lo, double hi, int expansions) {
    double glo = ctx.eval(lo);
    double ghi = ctx.eval(hi);
    for (int round = 0;; ++round) {
        if (glo > 0.0 && ghi < 0.0) return {lo, hi, glo, ghi};
        if (glo == 0.0 || ghi == 0.0) {
            // landed on the root exactly; return a degenerate bracket around it
            const double at = glo == 0.0 ? lo : hi;
            return {at, at, 0.0, 0.0};
        }
        if (round >= expansions)
            throw solver_error("bracket-failed",
                               "no sign change of mu_1 + lambda_k; sampled:" + sample_dump(ctx));
        const double width = hi - lo;
        if (glo < 0.0) {
            hi = lo;
            ghi = glo;
            lo = lo > 2.0 * width ? lo - 2.0 * width : lo / 8.0;
            glo = ctx.eval(lo);
        } else {
            lo = hi;
            glo = ghi;
            hi = hi + 2.0 * width;
            ghi = ctx.eval(hi);
        }
    }
}

struct located_root {
    double alpha = 0.0;
    double residual = 0.0;  // |g| at alpha
};

// Shared core of locate_alpha_k and degeneracy_scan (which also scans k = 0).
located_root locate_core(const problem_params& base, int k, double eps,
                         const locate_options& options) {
    check_options(options);
    if (!(eps > 0.0)) throw std::invalid_argument("locate_alpha_k: eps must be positive");
    problem_params checked{base.N, base.p, 0.0};
    checked.validate();

    root_context ctx{checked, k, eps, static_cast<double>(lambda_k(k, base.N)),
                     options.eigen, {}};
    const bool custom = options.bracket_lo >= 0.0;
    const double limit = alpha_crit(k, base.N, base.p);
    double lo = custom ? options.bracket_lo : limit / 2.0 + seed_offset;
    double hi = custom ? options.bracket_hi : 2.0 * limit + 2.0;

    alpha_bracket br = establish_bracket(ctx, lo, hi, options.bracket_expansions);
    if (br.lo == br.hi) return {br.lo, 0.0};

    // three-point monotonicity spot-check on the established bracket
    double mid = 0.5 * (br.lo + br.hi);
    double gmid = ctx.eval(mid);
    check_monotone_decrease(ctx, br.lo, br.glo, mid, gmid, br.hi, br.ghi);

    double best_alpha = mid;
    double best_abs = std::fabs(gmid);

    // fold the spot-check midpoint into the bracket, then bisect
    if (gmid > 0.0) {
        br.lo = mid;
        br.glo = gmid;
    } else {
        br.hi = mid;
        br.ghi = gmid;
    }
    while (best_abs > options.root_tolerance && br.hi - br.lo > options.alpha_tolerance) {
        mid = 0.5 * (br.lo + br.hi);
        gmid = ctx.eval(mid);
        if (std::fabs(gmid) < best_abs) {
            best_abs = std::fabs(gmid);
            best_alpha = mid;
        }
        if (gmid > 0.0) {
            br.lo = mid;
            br.glo = gmid;
        } else {
            br.hi = mid;
            br.ghi = gmid;
        }
    }

    // guarded secant polish down to the residual tolerance
    for (int step = 0; step < 40 && best_abs > options.root_tolerance; ++step) {
        double trial = br.lo - br.glo * (br.hi - br.lo) / (br.ghi - br.glo);
        if (!(trial > br.lo && trial < br.hi)) trial = 0.5 * (br.lo + br.hi);
        const double gtrial = ctx.eval(trial);
        if (std::fabs(gtrial) < best_abs) {
            best_abs = std::fabs(gtrial);
            best_alpha = trial;
        }
        if (gtrial > 0.0) {
            br.lo = trial;
            br.glo = gtrial;
        } else if (gtrial < 0.0) {
            br.hi = trial;
            br.ghi = gtrial;
        } else {
            break;
        }
    }
    return {best_alpha, best_abs};
}

void put_number(std::ostream& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, res.ptr - buf);
}

struct limit_profile_shape {
    double a = 0.0;     // power at the origin
    double E = 0.0;     // denominator exponent
    double b = 0.0;     // denominator power
    double peak = 0.0;  // radius of the maximum
    double max = 0.0;   // value there, before normalization
};

limit_profile_shape limit_shape(const problem_params& params) {
    params.validate();
    const double p = params.p, N = params.N, al = params.alpha;
    limit_profile_shape s;
    s.a = (p + al) / (p * (p - 1.0));
    s.E = (p + al) / (p - 1.0);
    s.b = (N + al) / (p + al);
    s.peak = std::pow((p + al) / (p * N + p * al - p - al), (p - 1.0) / (p + al));
    s.max = std::pow(s.peak, s.a) * std::pow(1.0 + std::pow(s.peak, s.E), -s.b);
    return s;
}

}  // namespace

void bifurcation_point::validate() const {
    const auto fail = [](const std::string& what) {
        throw solver_error("invalid-point", "bifurcation_point: " + what);
    };
    if (k < 1) fail("k must be >= 1");
    if (!(eps > 0.0)) fail("eps must be positive");
    params.validate();
    if (!(root_tolerance > 0.0)) fail("root_tolerance must be positive");
    if (!(std::fabs(params.alpha - alpha_k_eps) <=
          1e-12 * (1.0 + std::fabs(alpha_k_eps))))
        fail("params.alpha must equal alpha_k_eps");
    const double limit = alpha_crit(k, params.N, params.p);
    if (!(std::fabs(limit_alpha - limit) <= 1e-9 * (1.0 + std::fabs(limit))))
        fail("limit_alpha must equal alpha_crit(k, N, p)");
    if (!(mu_residual <= root_tolerance))
        fail("mu_residual exceeds root_tolerance: residual " + std::to_string(mu_residual));
    tangent.validate();
    if (tangent.size() < 2) fail("tangent profile needs at least two nodes");
    double vmax = 0.0, vmin = std::numeric_limits<double>::infinity();
    for (double v : tangent.values) {
        vmax = std::max(vmax, v);
        vmin = std::min(vmin, v);
    }
    if (!(std::fabs(vmax - 1.0) <= 1e-9)) fail("tangent must have sup-norm 1");
    if (!(vmin >= -1e-12)) fail("tangent must be nonnegative");
}

bifurcation_point locate_alpha_k(const problem_params& base, int k, double eps,
                                 const locate_options& options) {
    if (k < 1) throw std::invalid_argument("locate_alpha_k: k must be >= 1");
    const located_root root = locate_core(base, k, eps, options);

    problem_params at_root{base.N, base.p, root.alpha};
    const eigen_pair pair =
        solve_first_eigen(assemble_mode_problem(at_root, k, eps), options.eigen);

    bifurcation_point point;
    point.k = k;
    point.eps = eps;
    point.alpha_k_eps = root.alpha;
    point.limit_alpha = alpha_crit(k, base.N, base.p);
    point.mu_residual = std::fabs(pair.value + static_cast<double>(lambda_k(k, base.N)));
    point.root_tolerance = options.root_tolerance;
    point.params = at_root;
    point.tangent = pair.profile;
    point.validate();
    return point;
}

convergence_table_result convergence_table(const problem_params& base, int k,
                                           const std::vector<double>& eps_list,
                                           const locate_options& options) {
    if (eps_list.empty())
        throw std::invalid_argument("convergence_table: eps_list must not be empty");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0))
            throw std::invalid_argument("convergence_table: eps values must be positive");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
            throw std::invalid_argument(
                "convergence_table: eps_list must be strictly decreasing");
    }

    convergence_table_result table;
    table.k = k;
    table.limit_alpha = alpha_crit(k, base.N, base.p);
    for (double eps : eps_list) {
        const bifurcation_point point = locate_alpha_k(base, k, eps, options);
        table.rows.push_back(
            {eps, point.alpha_k_eps, std::fabs(point.alpha_k_eps - table.limit_alpha)});
    }

    table.errors_strictly_decreasing = true;
    for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
        const double e0 = table.rows[i].error, e1 = table.rows[i + 1].error;
        if (!(e1 < e0)) table.errors_strictly_decreasing = false;
        table.pairwise_rates.push_back(
            std::log(e0 / e1) / std::log(eps_list[i] / eps_list[i + 1]));
    }

    // rate fit over rows whose error is above the double-precision floor of
    // the located exponents; rows at the floor carry no convergence signal
    const double floor_guard = 256.0 * std::numeric_limits<double>::epsilon() *
                               (1.0 + std::fabs(table.limit_alpha));
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (const convergence_row& row : table.rows) {
        if (!(row.error > floor_guard)) continue;
        const double x = std::log(row.eps), y = std::log(row.error);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    table.empirical_rate =
        n >= 2 ? (static_cast<double>(n) * sxy - sx * sy) /
                     (static_cast<double>(n) * sxx - sx * sx)
               : 0.0;
    return table;
}

void write_diagram_csv(std::ostream& out, const convergence_table_result& table) {
    out << "eps,k,alpha_k_eps,limit_alpha,error\n";
    for (const convergence_row& row : table.rows) {
        put_number(out, row.eps);
        out.put(',');
        out << table.k;
        out.put(',');
        put_number(out, row.alpha_k_eps);
        out.put(',');
        put_number(out, table.limit_alpha);
        out.put(',');
        put_number(out, row.error);
        out.put('\n');
    }
}

radial_function tangent_field(const bifurcation_point& point, const eigen_options& options) {
    point.validate();
    return solve_first_eigen(assemble_mode_problem(point.params, point.k, point.eps), options)
        .profile;
}

double tangent_limit_value(const problem_params& params, double r) {
    if (!(r >= 0.0))
        throw std::invalid_argument("tangent_limit_value: r must be nonnegative");
    const limit_profile_shape s = limit_shape(params);
    if (r == 0.0) return 0.0;
    return std::pow(r, s.a) * std::pow(1.0 + std::pow(r, s.E), -s.b) / s.max;
}

double tangent_limit_peak(const problem_params& params) { return limit_shape(params).peak; }

std::vector<degeneracy> degeneracy_scan(const problem_params& base, double eps,
                                        double alpha_lo, double alpha_hi, int k_max,
                                        const locate_options& options) {
    check_options(options);
    if (!(eps > 0.0)) throw std::invalid_argument("degeneracy_scan: eps must be positive");
    if (!(alpha_lo >= 0.0 && alpha_lo < alpha_hi) || !std::isfinite(alpha_hi))
        throw std::invalid_argument("degeneracy_scan: need 0 <= alpha_lo < alpha_hi < inf");
    if (k_max < 0) throw std::invalid_argument("degeneracy_scan: k_max must be >= 0");
    problem_params checked{base.N, base.p, 0.0};
    checked.validate();

    // sample mu_1^eps over the range; monotone decrease means any sampling
    // brackets every level crossing exactly once
    constexpr int n_samples = 12;
    root_context ctx{checked, 0, eps, 0.0, options.eigen, {}};
    std::vector<double> alphas(n_samples), mus(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        alphas[i] = alpha_lo + (alpha_hi - alpha_lo) * i / (n_samples - 1);
        mus[i] = ctx.eval(alphas[i]);
    }
    for (int i = 0; i + 2 < n_samples; ++i)
        check_monotone_decrease(ctx, alphas[i], mus[i], alphas[i + 1], mus[i + 1],
                                alphas[i + 2], mus[i + 2]);

    std::vector<degeneracy> found;
    for (int k = 0; k <= k_max; ++k) {
        const double lambda = static_cast<double>(lambda_k(k, base.N));
        for (int i = 0; i + 1 < n_samples; ++i) {
            if (!(mus[i] + lambda > 0.0 && mus[i + 1] + lambda <= 0.0)) continue;
            locate_options sub = options;
            sub.bracket_lo = alphas[i];
            sub.bracket_hi = alphas[i + 1];
            sub.bracket_expansions = 0;
            const located_root root = locate_core(base, k, eps, sub);
            problem_params at_root{base.N, base.p, root.alpha};
            const std::vector<eigen_pair> spectrum =
                solve_spectrum(assemble_mode_problem(at_root, k, eps), 2, options.eigen);
            found.push_back({k, root.alpha, multiplicity(k, base.N), root.residual,
                             spectrum[1].value});
            break;  // strict monotonicity: at most one crossing per degree
        }
    }
    std::sort(found.begin(), found.end(),
              [](const degeneracy& x, const degeneracy& y) { return x.alpha < y.alpha; });
    return found;
}

void write_point_json(std::ostream& out, const bifurcation_point& point) {
    nlohmann::json j;
    j["k"] = point.k;
    j["eps"] = point.eps;
    j["alpha_k_eps"] = point.alpha_k_eps;
    j["limit_alpha"] = point.limit_alpha;
    j["mu_residual"] = point.mu_residual;
    j["root_tolerance"] = point.root_tolerance;
    j["params"] = {{"N", point.params.N}, {"p", point.params.p}, {"alpha", point.params.alpha}};
    j["tangent"] = {{"grid", point.tangent.grid},
                    {"values", point.tangent.values},
                    {"origin_exponent", point.tangent.origin_exponent},
                    {"tail_exponent", point.tangent.tail_exponent}};
    out << j.dump() << '\n';
}

bifurcation_point read_point_json(std::istream& in) {
    bifurcation_point point;
    try {
        nlohmann::json j;
        in >> j;
        point.k = j.at("k").get<int>();
        point.eps = j.at("eps").get<double>();
        point.alpha_k_eps = j.at("alpha_k_eps").get<double>();
        point.limit_alpha = j.at("limit_alpha").get<double>();
        point.mu_residual = j.at("mu_residual").get<double>();
        point.root_tolerance = j.at("root_tolerance").get<double>();
        const nlohmann::json& params = j.at("params");
        point.params.N = params.at("N").get<int>();
        point.params.p = params.at("p").get<double>();
        point.params.alpha = params.at("alpha").get<double>();
        const nlohmann::json& tangent = j.at("tangent");
        point.tangent.grid = tangent.at("grid").get<std::vector<double>>();
        point.tangent.values = tangent.at("values").get<std::vector<double>>();
        point.tangent.origin_exponent = tangent.at("origin_exponent").get<double>();
        point.tangent.tail_exponent = tangent.at("tail_exponent").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw solver_error("bad-point-record",
                           std::string("read_point_json: ") + e.what());
    }
    point.validate();
    return point;
}

} // namespace henon
