#include <henon/continuation.hpp>

#include <henon/grid.hpp>
#include <henon/harmonics.hpp>
#include <henon/model.hpp>
#include <henon/radial_solver.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace henon {
namespace {

constexpr double pi_const = 3.14159265358979323846;

void put_number(std::ostream& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, res.ptr - buf);
}

/// sgn(x) |x|^e; when e is a small integer the power is formed by repeated
/// multiplication (exact parity handling through the explicit sign).
double sgn_pow(double x, double e, int int_e) {
    const double ax = std::abs(x);
    double mag;
    if (int_e >= 0) {
        mag = 1.0;
        double base = ax;
        int n = int_e;
        while (n > 0) {
            if (n & 1) mag *= base;
            base *= base;
            n >>= 1;
        }
    } else {
        mag = std::pow(ax, e);
    }
    return x < 0.0 ? -mag : mag;
}

int integer_exponent(double e) {
    const double r = std::round(e);
    if (r > 0.0 && r < 64.0 && std::abs(e - r) < 1e-12) return static_cast<int>(r);
    return -1;
}

// ---------------------------------------------------------------------------
// Jacobi polynomials and Gauss quadrature for the sector measures
// ---------------------------------------------------------------------------

double jacobi_value(int n, double a, double b, double x) {
    if (n == 0) return 1.0;
    double pm1 = 1.0;
    double p = 0.5 * (a - b) + (1.0 + 0.5 * (a + b)) * x;
    for (int i = 2; i <= n; ++i) {
        const double c1 = 2.0 * i * (i + a + b) * (2.0 * i + a + b - 2.0);
        const double c2 = (2.0 * i + a + b - 1.0) * (a * a - b * b);
        const double c3 = (2.0 * i + a + b - 1.0) * (2.0 * i + a + b) * (2.0 * i + a + b - 2.0);
        const double c4 = 2.0 * (i + a - 1.0) * (i + b - 1.0) * (2.0 * i + a + b);
        const double next = ((c2 + c3 * x) * p - c4 * pm1) / c1;
        pm1 = p;
        p = next;
    }
    return p;
}

double jacobi_derivative(int n, double a, double b, double x) {
    if (n == 0) return 0.0;
    return 0.5 * (n + a + b + 1.0) * jacobi_value(n - 1, a + 1.0, b + 1.0, x);
}

double jacobi_at_one(int n, double a) {
    double v = 1.0;
    for (int i = 1; i <= n; ++i) v *= (a + i) / i;
    return v;
}

struct gauss_rule {
    std::vector<double> x, w;
};

/// Nodes and weights of the q-point Gauss rule for (1-x)^a (1+x)^b dx on
/// [-1, 1]: roots of the degree-q Jacobi polynomial by dense sampling plus
/// Newton polish, weights from the classical derivative formula.
gauss_rule gauss_jacobi(int q, double a, double b) {
    gauss_rule out;
    const int samples = 16 * q + 32;
    std::vector<double> roots;
    roots.reserve(q);
    double x_prev = std::cos(0.0);
    double f_prev = jacobi_value(q, a, b, x_prev);
    for (int i = 1; i <= samples; ++i) {
        const double x = std::cos(pi_const * i / samples);
        const double f = jacobi_value(q, a, b, x);
        if (f_prev == 0.0) {
            roots.push_back(x_prev);
        } else if (f_prev * f < 0.0) {
            double lo = x, hi = x_prev, flo = f;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = jacobi_value(q, a, b, mid);
                if (fm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if (fm * flo > 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
                if (hi - lo < 1e-15) break;
            }
            double r = 0.5 * (lo + hi);
            for (int it = 0; it < 8; ++it) {
                const double f0 = jacobi_value(q, a, b, r);
                const double d0 = jacobi_derivative(q, a, b, r);
                if (d0 == 0.0) break;
                const double step = f0 / d0;
                r -= step;
                if (!(r > -1.0 && r < 1.0)) {
                    r = 0.5 * (lo + hi);
                    break;
                }
                if (std::abs(step) < 1e-16) break;
            }
            roots.push_back(r);
        }
        x_prev = x;
        f_prev = f;
    }
    if (static_cast<int>(roots.size()) != q)
        throw solver_error("quadrature-failed",
                           "found " + std::to_string(roots.size()) + " of " + std::to_string(q) +
                               " Gauss nodes");
    const double ln_g = (a + b + 1.0) * std::log(2.0) + std::lgamma(q + a + 1.0) +
                        std::lgamma(q + b + 1.0) - std::lgamma(q + 1.0) -
                        std::lgamma(q + a + b + 1.0);
    const double g = std::exp(ln_g);
    out.x = std::move(roots);
    out.w.resize(q);
    for (int i = 0; i < q; ++i) {
        const double xi = out.x[i];
        const double dp = jacobi_derivative(q, a, b, xi);
        out.w[i] = g / ((1.0 - xi * xi) * dp * dp);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Finite-difference weights (arbitrary nodes, Fornberg recursion)
// ---------------------------------------------------------------------------

std::vector<double> fd_weights(double z, const std::vector<double>& xs, int m) {
    const int nd = static_cast<int>(xs.size()) - 1;
    std::vector<std::vector<double>> c(nd + 1, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = xs[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i <= nd; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = xs[i] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int s = mn; s >= 1; --s)
                    c[i][s] = c1 * (s * c[i - 1][s - 1] - c5 * c[i - 1][s]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int s = mn; s >= 1; --s) c[j][s] = (c4 * c[j][s] - s * c[j][s - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(nd + 1);
    for (int i = 0; i <= nd; ++i) w[i] = c[i][m];
    return w;
}

/// First-derivative stencils on a uniform grid of spacing h: one weight row
/// per offset class (interior rows centered, edge rows one-sided).
struct stencil_table {
    int width = 5;
    int m = 0;
    std::vector<std::vector<double>> rows;  // rows[i - start(i)]

    int start(int i) const { return std::clamp(i - width / 2, 0, m - width); }

    void build(int nodes, double h, int order) {
        width = order + 1;
        m = nodes;
        if (m < width + 2) throw std::invalid_argument("stencil_table: grid too small");
        std::vector<double> xs(width);
        for (int s = 0; s < width; ++s) xs[s] = s * h;
        rows.assign(width, {});
        for (int o = 0; o < width; ++o) rows[o] = fd_weights(o * h, xs, 1);
    }

    void apply(const double* f, double* df) const {
        for (int i = 0; i < m; ++i) {
            const int s0 = start(i);
            const auto& w = rows[i - s0];
            double acc = 0.0;
            for (int s = 0; s < width; ++s) acc += w[s] * f[s0 + s];
            df[i] = acc;
        }
    }
};

// ---------------------------------------------------------------------------
// Banded least-structure linear algebra: Givens QR on a fixed-offset row
// layout (row r covers columns [r - kl, r - kl + width - 1]); orthogonal
// elimination needs no pivoting, and the recorded rotations replay on any
// number of right-hand sides.
// ---------------------------------------------------------------------------

struct banded_qr {
    int n = 0, kl = 0, ku = 0, width = 0;
    std::vector<double> a;
    struct rot {
        int r1, r2;
        double c, s;
    };
    std::vector<rot> rots;
    bool factored = false;

    banded_qr(int n_, int kl_, int ku_)
        : n(n_), kl(kl_), ku(ku_), width(2 * kl_ + ku_ + 1),
          a(static_cast<std::size_t>(n_) * width, 0.0) {}

    double get(int r, int c) const {
        const int off = c - (r - kl);
        if (off < 0 || off >= width || c < 0 || c >= n) return 0.0;
        return a[static_cast<std::size_t>(r) * width + off];
    }
    void set(int r, int c, double v) {
        const int off = c - (r - kl);
        if (off < 0 || off >= width || c < 0 || c >= n)
            throw solver_error("internal-band", "entry outside the stored bandwidth");
        a[static_cast<std::size_t>(r) * width + off] = v;
    }
    void add(int r, int c, double v) {
        const int off = c - (r - kl);
        if (off < 0 || off >= width || c < 0 || c >= n)
            throw solver_error("internal-band", "entry outside the stored bandwidth");
        a[static_cast<std::size_t>(r) * width + off] += v;
    }

    void factor() {
        rots.clear();
        rots.reserve(static_cast<std::size_t>(n) * kl);
        for (int j = 0; j < n; ++j) {
            const int rmax = std::min(j + kl, n - 1);
            for (int r = j + 1; r <= rmax; ++r) {
                const double arj = get(r, j);
                if (arj == 0.0) continue;
                const double ajj = get(j, j);
                const double h = std::hypot(ajj, arj);
                const double c = ajj / h, s = arj / h;
                const int cmax = std::min(j + kl + ku, n - 1);
                for (int c2 = j; c2 <= cmax; ++c2) {
                    const double vj = get(j, c2);
                    const double vr = get(r, c2);
                    set(j, c2, c * vj + s * vr);
                    set(r, c2, -s * vj + c * vr);
                }
                set(r, j, 0.0);
                rots.push_back({j, r, c, s});
            }
        }
        factored = true;
    }

    void solve(std::vector<double>& b) const {
        for (const auto& g : rots) {
            const double bj = b[g.r1], br = b[g.r2];
            b[g.r1] = g.c * bj + g.s * br;
            b[g.r2] = -g.s * bj + g.c * br;
        }
        for (int i = n - 1; i >= 0; --i) {
            double acc = b[i];
            const int cmax = std::min(i + kl + ku, n - 1);
            for (int c2 = i + 1; c2 <= cmax; ++c2) acc -= get(i, c2) * b[c2];
            const double d = get(i, i);
            if (std::abs(d) < 1e-300)
                throw solver_error("singular-jacobian", "zero pivot in the banded solve");
            b[i] = acc / d;
        }
    }
};

// ---------------------------------------------------------------------------
// Sector reduction engine: collocated flux, mode projection, log-grid
// radial differences
// ---------------------------------------------------------------------------

int sector_measure_factor(const sector& sec) {
    return sec.kind == sector_kind::block ? 2 : 1;
}

int auto_quadrature_points(const sector& sec, int mode_count, int required_degree) {
    const int f = sector_measure_factor(sec);
    const int top_t_degree = sec.mode_degree(mode_count - 1) / f;
    const int need = (required_degree + f - 1) / f;  // ceil in the Jacobi variable
    const int q_alias = (need + 2) / 2;              // smallest q with 2q - 1 >= need
    return std::max({q_alias, top_t_degree + 1, 6});
}

struct reduction_engine {
    sector sec;
    problem_params base;  // alpha field unused; varies along the branch
    double eps = 0.0;
    std::vector<double> grid, logr, rn1;
    double h = 0.0;
    int m = 0, nm = 0, q = 0;
    angular_rule rule;
    stencil_table deriv;
    bool linear_flux = false;
    double flux_exponent = 0.0;

    // scratch for pde_rows
    std::vector<std::vector<double>> cd, gproj, hterm, sterm;
    std::vector<double> uq, urq, upq, flux_r, flux_p, srcq, aexp, fj, dfj, cshift;
    double min_shift = 0.0;

    reduction_engine(const sector& s, const problem_params& b, double eps_,
                     std::vector<double> grid_, int mode_count, int points, int fd_order)
        : sec(s), base(b), eps(eps_), grid(std::move(grid_)) {
        m = static_cast<int>(grid.size());
        nm = mode_count;
        q = points;
        logr.resize(m);
        rn1.resize(m);
        for (int i = 0; i < m; ++i) {
            logr[i] = std::log(grid[i]);
            rn1[i] = std::pow(grid[i], base.N - 1.0);
        }
        h = (logr.back() - logr.front()) / (m - 1);
        deriv.build(m, h, fd_order);
        rule = build_angular_rule(sec, nm, q);
        linear_flux = std::abs(base.p - 2.0) < 1e-14;
        flux_exponent = 0.5 * (base.p - 2.0);
        cd.assign(nm, std::vector<double>(m, 0.0));
        gproj = hterm = sterm = cd;
        uq.assign(q, 0.0);
        urq = upq = flux_r = flux_p = srcq = uq;
        aexp.assign(m, 0.0);
        fj.assign(m, 0.0);
        dfj = fj;
        cshift = fj;
    }

    /// Mode-projected residual of the log-radial form of the equation (the
    /// equation multiplied by r^2, the natural scaling on a geometric grid:
    /// it removes the 1/r^2 growth of the row derivatives toward the inner
    /// edge, so row magnitudes stay commensurate with nodal-value precision
    /// across the whole grid).  Also records the smallest value of u + beta
    /// seen at the collocation points.
    void pde_rows(const std::vector<std::vector<double>>& c, double alpha,
                  std::vector<std::vector<double>>& out) {
        const problem_params at{base.N, base.p, alpha};
        const double ps = at.p_star();
        const double esrc = ps - 1.0;
        const int int_e = integer_exponent(esrc);
        const double beta = beta_boundary(at, eps);
        // r^{alpha+2}: the source weight carries the r^2 of the scaled form
        for (int i = 0; i < m; ++i) aexp[i] = std::exp((alpha + 2.0) * logr[i]);
        // difference against the inner-edge value: constants drop out of the
        // derivative exactly, and near the origin (where the profiles are
        // nearly constant) the differences then carry their own scale instead
        // of cancelling O(1) values
        for (int j = 0; j < nm; ++j) {
            const double c0 = c[j][0];
            for (int i = 0; i < m; ++i) cshift[i] = c[j][i] - c0;
            deriv.apply(cshift.data(), cd[j].data());
        }
        min_shift = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            const double r = grid[i];
            const double inv_r = 1.0 / r;
            std::fill(uq.begin(), uq.end(), 0.0);
            std::fill(urq.begin(), urq.end(), 0.0);
            std::fill(upq.begin(), upq.end(), 0.0);
            for (int j = 0; j < nm; ++j) {
                const double cj = c[j][i];
                const double cdj = cd[j][i];
                const double* pj = rule.P[j].data();
                const double* dpj = rule.dP[j].data();
                for (int s = 0; s < q; ++s) {
                    uq[s] += cj * pj[s];
                    urq[s] += cdj * pj[s];
                    upq[s] += cj * dpj[s];
                }
            }
            for (int s = 0; s < q; ++s) {
                const double du_r = urq[s] * inv_r;
                const double du_a = upq[s] * inv_r;  // angular gradient component
                double amp = 1.0;
                if (!linear_flux) {
                    const double g2 = std::max(du_r * du_r + du_a * du_a, 1e-300);
                    amp = std::pow(g2, flux_exponent);
                }
                flux_r[s] = amp * du_r;
                flux_p[s] = amp * upq[s];
                const double shift = uq[s] + beta;
                min_shift = std::min(min_shift, shift);
                srcq[s] = aexp[i] * sgn_pow(shift, esrc, int_e);
            }
            for (int j = 0; j < nm; ++j) {
                const double* pj = rule.P[j].data();
                const double* dpj = rule.dP[j].data();
                const double* w = rule.weight.data();
                double gs = 0.0, hs = 0.0, ss = 0.0;
                for (int s = 0; s < q; ++s) {
                    gs += w[s] * flux_r[s] * pj[s];
                    hs += w[s] * flux_p[s] * dpj[s];
                    ss += w[s] * srcq[s] * pj[s];
                }
                const double inv_norm = 1.0 / rule.norm[j];
                gproj[j][i] = gs * inv_norm;
                hterm[j][i] = hs * inv_norm;
                sterm[j][i] = ss * inv_norm;
            }
        }
        // flux divergence: r^2 * div = D_t(r^{N-2} A D_t u) / r^{N-2},
        // with r^{N-2} A D_t u = r^{N-1} A du/dr
        for (int j = 0; j < nm; ++j) {
            for (int i = 0; i < m; ++i) fj[i] = rn1[i] * gproj[j][i];
            deriv.apply(fj.data(), dfj.data());
            for (int i = 0; i < m; ++i)
                out[j][i] = -dfj[i] * grid[i] / rn1[i] + hterm[j][i] - sterm[j][i];
        }
    }

    /// Inner-edge regularity row for mode j: d c_j / d log r matches the
    /// harmonic degree of the mode.
    double bc_row(const std::vector<std::vector<double>>& c, int j) const {
        const auto& w = deriv.rows[0];
        double acc = 0.0;
        for (int s = 0; s < deriv.width; ++s) acc += w[s] * (c[j][s] - c[j][0]);
        return acc - rule.degree[j] * c[j][0];
    }
};

std::vector<double> log_grid(double r_min, double r_max, int nodes_per_decade) {
    const double decades = std::log10(r_max / r_min);
    const int intervals = std::max(64, static_cast<int>(std::ceil(nodes_per_decade * decades)));
    return geometric_grid<double>(r_min, r_max, intervals);
}

void check_galerkin_options(const galerkin_options& opt, double eps) {
    if (opt.mode_count < 1) throw std::invalid_argument("galerkin_options: mode_count < 1");
    if (opt.quadrature_points < 0)
        throw std::invalid_argument("galerkin_options: negative quadrature_points");
    if (opt.nodes_per_decade < 32)
        throw std::invalid_argument("galerkin_options: nodes_per_decade too small");
    if (!(opt.r_min > 0.0) || !(opt.r_min * eps < 1.0))
        throw std::invalid_argument("galerkin_options: r_min outside (0, 1/eps)");
}

std::vector<double> radial_mode0(const problem_params& at, double eps,
                                 const std::vector<double>& grid) {
    std::vector<double> c0(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        c0[i] = approx_radial_solution(at, eps, grid[i]);
    c0.back() = 0.0;
    return c0;
}

double interp_log_cubic(const std::vector<double>& grid, const std::vector<double>& vals,
                        double r) {
    const int n = static_cast<int>(grid.size());
    if (r <= grid.front()) return vals.front();
    if (r >= grid.back()) return r > grid.back() * (1.0 + 1e-12) ? 0.0 : vals.back();
    const int hi = static_cast<int>(std::upper_bound(grid.begin(), grid.end(), r) - grid.begin());
    const int s0 = std::clamp(hi - 2, 0, n - 4);
    const double x = std::log(r);
    double xs[4], acc = 0.0;
    for (int s = 0; s < 4; ++s) xs[s] = std::log(grid[s0 + s]);
    for (int s = 0; s < 4; ++s) {
        double ls = 1.0;
        for (int t = 0; t < 4; ++t)
            if (t != s) ls *= (x - xs[t]) / (xs[s] - xs[t]);
        acc += ls * vals[s0 + s];
    }
    return acc;
}

// ------------------------------------------------------------------
// Corrector machinery: packed unknowns, grouped-difference Jacobian,
// bordered banded solve
// ------------------------------------------------------------------

constexpr int band_reach = 6;  // node-distance coupling bound for 5-point stencils

struct corrector {
    reduction_engine* eng;
    int m, nm, n_unk;
    std::vector<std::vector<double>> cwork, rwork;

    corrector(reduction_engine* e)
        : eng(e), m(e->m), nm(e->nm), n_unk((e->m - 1) * e->nm),
          cwork(e->nm, std::vector<double>(e->m, 0.0)),
          rwork(e->nm, std::vector<double>(e->m, 0.0)) {}

    double scaled_dot(const std::vector<double>& x, const std::vector<double>& y) const {
        double acc = 0.0;
        for (int i = 0; i < n_unk; ++i) acc += x[i] * y[i];
        return acc / n_unk + x[n_unk] * y[n_unk];
    }
    double scaled_norm(const std::vector<double>& x) const {
        return std::sqrt(std::max(scaled_dot(x, x), 0.0));
    }

    void unpack(const std::vector<double>& x) {
        for (int i = 0; i + 1 < m; ++i)
            for (int j = 0; j < nm; ++j) cwork[j][i] = x[static_cast<std::size_t>(i) * nm + j];
        for (int j = 0; j < nm; ++j) cwork[j][m - 1] = 0.0;
    }

    /// Full residual vector: regularity rows at the inner node, projected
    /// equation rows at interior nodes, arclength constraint last.
    bool rows(const std::vector<double>& x, const std::vector<double>& x_prev,
              const std::vector<double>& tangent, double ds, std::vector<double>& out) {
        const double alpha = x[n_unk];
        if (!(alpha > 1e-12) || !(alpha < 64.0)) return false;
        unpack(x);
        eng->pde_rows(cwork, alpha, rwork);
        for (int j = 0; j < nm; ++j) out[j] = eng->bc_row(cwork, j);
        for (int i = 1; i + 1 < m; ++i)
            for (int j = 0; j < nm; ++j) out[static_cast<std::size_t>(i) * nm + j] = rwork[j][i];
        double arc = 0.0;
        for (int i = 0; i < n_unk; ++i) arc += (x[i] - x_prev[i]) * tangent[i];
        arc = arc / n_unk + (x[n_unk] - x_prev[n_unk]) * tangent[n_unk] - ds;
        out[n_unk] = arc;
        for (int i = 0; i <= n_unk; ++i)
            if (!std::isfinite(out[i])) return false;
        return true;
    }

    /// Assemble the banded block (grouped directional differences) and the
    /// dense alpha column.
    void jacobian(const std::vector<double>& x, const std::vector<double>& x_prev,
                  const std::vector<double>& tangent, double ds,
                  const std::vector<double>& base_rows, banded_qr& band,
                  std::vector<double>& alpha_col, std::vector<double>& x_pert,
                  std::vector<double>& rows_pert) {
        const int stride = 2 * band_reach + 1;
        std::fill(band.a.begin(), band.a.end(), 0.0);
        band.factored = false;
        const double delta0 = std::ldexp(1.0, -26);
        for (int color = 0; color < stride; ++color) {
            for (int jm = 0; jm < nm; ++jm) {
                x_pert = x;
                bool any = false;
                for (int i = color; i + 1 < m; i += stride) {
                    const std::size_t u = static_cast<std::size_t>(i) * nm + jm;
                    x_pert[u] += delta0 * (1.0 + std::abs(x[u]));
                    any = true;
                }
                if (!any) continue;
                if (!rows(x_pert, x_prev, tangent, ds, rows_pert))
                    throw solver_error("corrector-diverged",
                                       "non-finite residual while assembling the Jacobian");
                for (int i = color; i + 1 < m; i += stride) {
                    const std::size_t u = static_cast<std::size_t>(i) * nm + jm;
                    const double delta = delta0 * (1.0 + std::abs(x[u]));
                    const int r_lo = std::max(0, i - band_reach);
                    const int r_hi = std::min(m - 2, i + band_reach);
                    for (int rn = r_lo; rn <= r_hi; ++rn) {
                        for (int jr = 0; jr < nm; ++jr) {
                            const std::size_t rr = static_cast<std::size_t>(rn) * nm + jr;
                            const double dv = (rows_pert[rr] - base_rows[rr]) / delta;
                            if (dv != 0.0) band.add(static_cast<int>(rr), static_cast<int>(u), dv);
                        }
                    }
                }
            }
        }
        x_pert = x;
        const double dalpha = 1e-7 * (1.0 + std::abs(x[n_unk]));
        x_pert[n_unk] += dalpha;
        if (!rows(x_pert, x_prev, tangent, ds, rows_pert))
            throw solver_error("corrector-diverged",
                               "non-finite residual while assembling the Jacobian");
        for (int i = 0; i < n_unk; ++i) alpha_col[i] = (rows_pert[i] - base_rows[i]) / dalpha;
    }
};

struct newton_report {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
    double min_shift = 0.0;
};

/// Newton loop on the extended system with a bordered banded solve and one
/// pass of iterative refinement on the full extended system.
newton_report newton_correct(corrector& cor, std::vector<double>& x,
                             const std::vector<double>& x_prev, const std::vector<double>& tangent,
                             double ds, double tol, int max_iter) {
    const int n = cor.n_unk;
    const int kl = band_reach * cor.nm + cor.nm - 1;
    std::vector<double> base_rows(n + 1), rows_pert(n + 1), x_pert(n + 1);
    std::vector<double> alpha_col(n), scale(n), y(n), z(n), dc(n), rc(n);
    banded_qr band(n, kl, kl);
    newton_report rep;
    for (int it = 0; it <= max_iter; ++it) {
        if (!cor.rows(x, x_prev, tangent, ds, base_rows)) return rep;
        double res = 0.0;
        int argmax = 0;
        for (int i = 0; i <= n; ++i)
            if (std::abs(base_rows[i]) > res) { res = std::abs(base_rows[i]); argmax = i; }
        if (std::getenv("HENON_NEWTON_DEBUG"))
            std::fprintf(stderr, "[newton] it=%d res=%.6e argmax=%d (node %d mode %d)%s\n", it,
                         res, argmax, argmax / cor.nm, argmax % cor.nm,
                         argmax == n ? " [arc]" : "");
        rep.iterations = it;
        rep.residual = res;
        rep.min_shift = cor.eng->min_shift;
        if (res <= tol) {
            rep.converged = true;
            return rep;
        }
        if (it == max_iter) return rep;
        cor.jacobian(x, x_prev, tangent, ds, base_rows, band, alpha_col, x_pert, rows_pert);
        std::vector<double> band_copy = band.a;  // pristine block for refinement matvec
        for (int r = 0; r < n; ++r) {
            double mx = std::abs(alpha_col[r]);
            const std::size_t off = static_cast<std::size_t>(r) * band.width;
            for (int c = 0; c < band.width; ++c) mx = std::max(mx, std::abs(band.a[off + c]));
            scale[r] = mx > 0.0 ? 1.0 / mx : 1.0;
            for (int c = 0; c < band.width; ++c) band.a[off + c] *= scale[r];
        }
        try {
            band.factor();
        } catch (const solver_error&) {
            return rep;  // singular block: treat as a failed attempt
        }
        const double d_border = tangent[n];
        for (int r = 0; r < n; ++r) y[r] = scale[r] * alpha_col[r];
        band.solve(y);
        double cy = 0.0;
        for (int r = 0; r < n; ++r) cy += tangent[r] * y[r];
        cy /= n;
        const double denom = d_border - cy;
        if (denom == 0.0 || !std::isfinite(denom)) return rep;
        auto solve_ext = [&](const std::vector<double>& rhs_c, double rhs_a,
                             std::vector<double>& out_c, double& out_a) {
            for (int r = 0; r < n; ++r) z[r] = scale[r] * rhs_c[r];
            band.solve(z);
            double cz = 0.0;
            for (int r = 0; r < n; ++r) cz += tangent[r] * z[r];
            cz /= n;
            out_a = (rhs_a - cz) / denom;
            for (int r = 0; r < n; ++r) out_c[r] = z[r] - y[r] * out_a;
        };
        double da = 0.0;
        for (int r = 0; r < n; ++r) rc[r] = -base_rows[r];
        solve_ext(rc, -base_rows[n], dc, da);
        // one refinement pass against the unscaled extended system
        double ca = 0.0;
        for (int r = 0; r < n; ++r) {
            const std::size_t off = static_cast<std::size_t>(r) * band.width;
            double acc = 0.0;
            const int c_lo = std::max(0, r - kl);
            const int c_hi = std::min(n - 1, r - kl + band.width - 1);
            for (int c = c_lo; c <= c_hi; ++c) acc += band_copy[off + (c - (r - kl))] * dc[c];
            rc[r] = -base_rows[r] - acc - alpha_col[r] * da;
        }
        for (int r = 0; r < n; ++r) ca += tangent[r] * dc[r];
        ca = ca / n + d_border * da;
        const double ra_ref = -base_rows[n] - ca;
        std::vector<double> ec(n);
        double ea = 0.0;
        solve_ext(rc, ra_ref, ec, ea);
        bool finite = std::isfinite(ea);
        for (int r = 0; r < n && finite; ++r) finite = std::isfinite(dc[r] + ec[r]);
        if (!finite) return rep;
        for (int r = 0; r < n; ++r) x[r] += dc[r] + ec[r];
        x[n] += da + ea;
    }
    return rep;
}

branch_state pack_state(const corrector& cor, const std::vector<double>& x,
                        const std::vector<double>& grid, double arclength, double residual) {
    branch_state st;
    st.alpha = x[cor.n_unk];
    st.grid = grid;
    st.amplitudes.assign(cor.nm, std::vector<double>(cor.m, 0.0));
    for (int i = 0; i + 1 < cor.m; ++i)
        for (int j = 0; j < cor.nm; ++j)
            st.amplitudes[j][i] = x[static_cast<std::size_t>(i) * cor.nm + j];
    st.arclength = arclength;
    double defect = 0.0;
    if (cor.nm > 1)
        for (int i = 0; i < cor.m; ++i) defect = std::max(defect, std::abs(st.amplitudes[1][i]));
    st.symmetry_defect = defect;
    st.newton_residual = residual;
    return st;
}

void require(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
}

}  // namespace

// ---------------------------------------------------------------------------
// sectors and angular rules
// ---------------------------------------------------------------------------

void sector::validate() const {
    if (kind == sector_kind::zonal) {
        require(N >= 2, "sector: dimension must be at least 2");
        require(k >= 1, "sector: base degree must be positive");
        require(l == 0, "sector: zonal sectors carry no block size");
    } else {
        require(N >= 2, "sector: dimension must be at least 2");
        require(l >= 1 && 2 * l <= N, "sector: block size must satisfy 1 <= l <= N/2");
        require(k >= 2 && k % 2 == 0,
                "sector: block sectors admit even invariant degrees only, so k must be even");
    }
}

sector make_zonal_sector(int N, int k) {
    sector s{sector_kind::zonal, N, k, 0};
    s.validate();
    return s;
}

sector make_block_sector(int N, int l, int k) {
    sector s{sector_kind::block, N, k, l};
    s.validate();
    return s;
}

angular_rule build_angular_rule(const sector& sec, int mode_count, int points) {
    sec.validate();
    require(mode_count >= 1, "build_angular_rule: mode_count must be positive");
    const int f = sector_measure_factor(sec);
    const int top_t_degree = sec.mode_degree(mode_count - 1) / f;
    require(points > top_t_degree, "build_angular_rule: too few points for the mode set");
    double a, b, measure_const;
    if (sec.kind == sector_kind::zonal) {
        a = b = 0.5 * (sec.N - 3);
        measure_const = 1.0;
    } else {
        a = 0.5 * (sec.l - 2);
        b = 0.5 * (sec.N - sec.l - 2);
        measure_const = std::pow(2.0, -0.5 * sec.N);
    }
    const gauss_rule gr = gauss_jacobi(points, a, b);
    angular_rule rule;
    rule.phi.resize(points);
    rule.t.resize(points);
    rule.weight.resize(points);
    std::vector<int> order(points);
    std::iota(order.begin(), order.end(), 0);
    // ascending angle = descending Jacobi variable
    std::sort(order.begin(), order.end(), [&](int i, int j) { return gr.x[i] > gr.x[j]; });
    for (int s = 0; s < points; ++s) {
        const double t = gr.x[order[s]];
        rule.t[s] = t;
        rule.phi[s] = sec.kind == sector_kind::zonal ? std::acos(std::clamp(t, -1.0, 1.0))
                                                     : 0.5 * std::acos(std::clamp(t, -1.0, 1.0));
        rule.weight[s] = measure_const * gr.w[order[s]];
    }
    rule.P.assign(mode_count, std::vector<double>(points, 0.0));
    rule.dP = rule.P;
    rule.norm.assign(mode_count, 0.0);
    rule.degree.resize(mode_count);
    for (int j = 0; j < mode_count; ++j) {
        const int d = sec.mode_degree(j);
        rule.degree[j] = d;
        const int n_poly = d / f;
        const double p1 = jacobi_at_one(n_poly, a);
        for (int s = 0; s < points; ++s) {
            const double t = rule.t[s];
            rule.P[j][s] = jacobi_value(n_poly, a, b, t) / p1;
            const double dt_dphi = sec.kind == sector_kind::zonal
                                       ? -std::sin(rule.phi[s])
                                       : -2.0 * std::sin(2.0 * rule.phi[s]);
            rule.dP[j][s] = jacobi_derivative(n_poly, a, b, t) * dt_dphi / p1;
        }
        double nrm = 0.0;
        for (int s = 0; s < points; ++s) nrm += rule.weight[s] * rule.P[j][s] * rule.P[j][s];
        rule.norm[j] = nrm;
    }
    return rule;
}

int required_angular_degree(const problem_params& params, const sector& sec, int mode_count) {
    params.validate();
    sec.validate();
    require(mode_count >= 1, "required_angular_degree: mode_count must be positive");
    const double ps = params.p_star();
    const int d_src = static_cast<int>(std::ceil(ps - 1.0 - 1e-12));
    return 2 * d_src * sec.mode_degree(mode_count - 1);
}

double sector_mode_value(const sector& sec, int mode_index, double t) {
    sec.validate();
    require(mode_index >= 0, "sector_mode_value: negative mode index");
    require(t >= -1.0 && t <= 1.0, "sector_mode_value: t outside [-1, 1]");
    const int f = sector_measure_factor(sec);
    const int n_poly = sec.mode_degree(mode_index) / f;
    double a, b;
    if (sec.kind == sector_kind::zonal) {
        a = b = 0.5 * (sec.N - 3);
    } else {
        a = 0.5 * (sec.l - 2);
        b = 0.5 * (sec.N - sec.l - 2);
    }
    return jacobi_value(n_poly, a, b, t) / jacobi_at_one(n_poly, a);
}

// ---------------------------------------------------------------------------
// states and residuals
// ---------------------------------------------------------------------------

void branch_state::validate() const {
    require(grid.size() >= 2, "branch_state: grid too small");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        require(std::isfinite(grid[i]) && grid[i] > 0.0, "branch_state: grid must be positive");
        require(i == 0 || grid[i] > grid[i - 1], "branch_state: grid must be increasing");
    }
    require(!amplitudes.empty(), "branch_state: no modes");
    for (const auto& c : amplitudes) {
        require(c.size() == grid.size(), "branch_state: amplitude size mismatch");
        for (double v : c) require(std::isfinite(v), "branch_state: non-finite amplitude");
    }
    require(std::isfinite(alpha) && alpha >= 0.0, "branch_state: bad alpha");
    require(std::isfinite(arclength) && arclength >= 0.0, "branch_state: bad arclength");
    require(std::isfinite(symmetry_defect) && symmetry_defect >= 0.0,
            "branch_state: bad symmetry defect");
    require(std::isfinite(newton_residual) && newton_residual >= 0.0,
            "branch_state: bad residual");
}

branch_state make_radial_state(const problem_params& base, double alpha, double eps,
                               const sector& sec, const galerkin_options& opt) {
    const problem_params at{base.N, base.p, alpha};
    at.validate();
    sec.validate();
    require(sec.N == base.N, "make_radial_state: sector dimension mismatch");
    require(eps > 0.0, "make_radial_state: eps must be positive");
    check_galerkin_options(opt, eps);
    branch_state st;
    st.alpha = alpha;
    st.grid = log_grid(opt.r_min, 1.0 / eps, opt.nodes_per_decade);
    st.amplitudes.assign(opt.mode_count, std::vector<double>(st.grid.size(), 0.0));
    st.amplitudes[0] = radial_mode0(at, eps, st.grid);
    return st;
}

std::vector<double> resample_profile(const radial_function& f, const std::vector<double>& grid) {
    f.validate();
    require(f.size() >= 4, "resample_profile: source profile too small");
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        out[i] = interp_log_cubic(f.grid, f.values, grid[i]);
    return out;
}

std::vector<std::vector<double>> galerkin_residual(const branch_state& state, const sector& sec,
                                                   const problem_params& base, double eps,
                                                   int quadrature_points, int derivative_order) {
    state.validate();
    sec.validate();
    require(sec.N == base.N, "galerkin_residual: sector dimension mismatch");
    require(eps > 0.0, "galerkin_residual: eps must be positive");
    require(derivative_order == 4 || derivative_order == 6,
            "galerkin_residual: derivative order must be 4 or 6");
    require(quadrature_points >= 0, "galerkin_residual: negative quadrature_points");
    const int nm = static_cast<int>(state.amplitudes.size());
    const problem_params at{base.N, base.p, state.alpha};
    const int needed = required_angular_degree(at, sec, nm);
    const int f = sector_measure_factor(sec);
    int points = quadrature_points;
    if (points == 0) {
        points = auto_quadrature_points(sec, nm, needed);
    } else {
        const int exact = (2 * points - 1) * f;
        if (exact < needed)
            throw solver_error("aliasing", "angular rule resolves degree " +
                                               std::to_string(exact) + ", need " +
                                               std::to_string(needed));
    }
    reduction_engine eng(sec, base, eps, state.grid, nm, points, derivative_order);
    std::vector<std::vector<double>> out(nm, std::vector<double>(eng.m, 0.0));
    eng.pde_rows(state.amplitudes, state.alpha, out);
    return out;
}

// ---------------------------------------------------------------------------
// continuation
// ---------------------------------------------------------------------------

namespace {

void check_continuation_options(const continuation_options& opt) {
    require(opt.steps >= 1, "continuation_options: steps must be positive");
    require(opt.ds > 0.0 && std::isfinite(opt.ds), "continuation_options: bad ds");
    require(opt.ds_min > 0.0 && opt.ds_min <= opt.ds && opt.ds <= opt.ds_max,
            "continuation_options: need ds_min <= ds <= ds_max");
    require(opt.corrector_tolerance > 0.0, "continuation_options: bad corrector tolerance");
    require(opt.max_newton >= 2, "continuation_options: max_newton too small");
    require(opt.max_halvings >= 0, "continuation_options: negative max_halvings");
    require(opt.predictor_sign == 1 || opt.predictor_sign == -1,
            "continuation_options: predictor_sign must be +1 or -1");
    require(opt.seed_amplitude >= 0.0, "continuation_options: negative seed amplitude");
    require(opt.discretization.mode_count >= 2,
            "continuation_options: continuation needs at least two modes");
}

struct branch_setup {
    reduction_engine eng;
    corrector cor;
    std::vector<double> x;  // radial state, packed
    double alpha0;

    branch_setup(const bifurcation_point& start, const sector& sec,
                 const continuation_options& opt, int extra_degree_margin)
        : eng(sec, problem_params{start.params.N, start.params.p, 0.0}, start.eps,
              log_grid(opt.discretization.r_min, 1.0 / start.eps,
                       opt.discretization.nodes_per_decade),
              opt.discretization.mode_count,
              [&] {
                  if (opt.discretization.quadrature_points > 0)
                      return opt.discretization.quadrature_points;
                  const problem_params at{start.params.N, start.params.p, start.alpha_k_eps};
                  const int needed =
                      required_angular_degree(at, sec, opt.discretization.mode_count) +
                      2 * extra_degree_margin * sec.mode_degree(opt.discretization.mode_count - 1);
                  return auto_quadrature_points(sec, opt.discretization.mode_count, needed);
              }(),
              4),
          cor(&eng), alpha0(start.alpha_k_eps) {
        const problem_params at{start.params.N, start.params.p, alpha0};
        const auto c0 = radial_mode0(at, start.eps, eng.grid);
        x.assign(cor.n_unk + 1, 0.0);
        for (int i = 0; i + 1 < eng.m; ++i) x[static_cast<std::size_t>(i) * eng.nm] = c0[i];
        x[cor.n_unk] = alpha0;
    }
};

}  // namespace

branch_result continue_branch(const bifurcation_point& start, const sector& sec,
                              const continuation_options& opt) {
    start.validate();
    sec.validate();
    check_continuation_options(opt);
    check_galerkin_options(opt.discretization, start.eps);
    require(sec.N == start.params.N, "continue_branch: sector dimension mismatch");
    require(sec.k == start.k, "continue_branch: sector base degree mismatch");

    branch_setup setup(start, sec, opt, 1);
    corrector& cor = setup.cor;
    reduction_engine& eng = setup.eng;
    const int n = cor.n_unk;

    branch_result result;
    result.base = problem_params{start.params.N, start.params.p, start.alpha_k_eps};
    result.eps = start.eps;
    result.sec = sec;
    result.predictor_sign = opt.predictor_sign;

    // seed displacement: located tangent profile placed in the base mode
    std::vector<double> w_seed = resample_profile(start.tangent, eng.grid);
    double w_sup = 0.0;
    for (double v : w_seed) w_sup = std::max(w_sup, std::abs(v));
    require(w_sup > 0.0, "continue_branch: degenerate tangent profile");
    for (double& v : w_seed) v /= w_sup;
    w_seed.back() = 0.0;
    const double t0 =
        opt.seed_amplitude > 0.0 ? opt.seed_amplitude : 10.0 * std::sqrt(opt.corrector_tolerance);

    std::vector<double> tangent(n + 1, 0.0);
    for (int i = 0; i + 1 < eng.m; ++i)
        tangent[static_cast<std::size_t>(i) * eng.nm + 1] = opt.predictor_sign * w_seed[i];
    const double eta = cor.scaled_norm(tangent);
    for (double& v : tangent) v /= eta;

    std::vector<double> x_prev = setup.x;
    std::vector<double> x(n + 1), diff(n + 1);
    double arclength = 0.0;
    double ds_cur = opt.ds;
    double d_alpha_last = 0.0;
    std::string abort_code, abort_detail;

    for (int step = 0; step < opt.steps; ++step) {
        double ds_use = step == 0 ? t0 * eta : ds_cur;
        newton_report rep;
        bool accepted = false;
        int halvings = 0;
        for (; halvings <= opt.max_halvings; ++halvings) {
            x = x_prev;
            for (int i = 0; i <= n; ++i) x[i] += ds_use * tangent[i];
            try {
                rep = newton_correct(cor, x, x_prev, tangent, ds_use, opt.corrector_tolerance,
                                     opt.max_newton);
            } catch (const solver_error& e) {
                if (e.code() == "internal-band") throw;
                rep = {};
            }
            if (rep.converged) {
                accepted = true;
                break;
            }
            if (ds_use <= opt.ds_min * (1.0 + 1e-12) && step > 0) break;
            ds_use = step == 0 ? 0.5 * ds_use : std::max(0.5 * ds_use, opt.ds_min);
        }
        if (!accepted) {
            abort_code = "corrector-diverged";
            abort_detail = "corrector failed at step " + std::to_string(step) + " (residual " +
                           std::to_string(rep.residual) + ")";
            break;
        }
        if (!(rep.min_shift > 0.0)) {
            abort_code = "positivity-lost";
            abort_detail = "shifted solution non-positive at step " + std::to_string(step);
            break;
        }
        for (int i = 0; i <= n; ++i) diff[i] = x[i] - x_prev[i];
        const double moved = cor.scaled_norm(diff);
        arclength += moved;
        result.states.push_back(pack_state(cor, x, eng.grid, arclength, rep.residual));
        result.step_sizes.push_back(ds_use);
        const double d_alpha = x[n] - x_prev[n];
        const double fold_floor = std::max(10.0 * opt.corrector_tolerance, 1e-12);
        if (step >= 1 && d_alpha * d_alpha_last < 0.0 && std::abs(d_alpha) > fold_floor &&
            std::abs(d_alpha_last) > fold_floor)
            result.fold_steps.push_back(static_cast<int>(result.states.size()) - 1);
        d_alpha_last = d_alpha;
        if (moved > 0.0)
            for (int i = 0; i <= n; ++i) tangent[i] = diff[i] / moved;
        x_prev = x;
        if (halvings == 0 && rep.iterations <= 3)
            ds_cur = std::min(2.0 * ds_cur, opt.ds_max);
        else if (halvings > 0)
            ds_cur = std::max(ds_use, opt.ds_min);
    }
    if (!abort_code.empty()) {
        if (result.states.empty()) throw solver_error(abort_code, abort_detail);
        result.abort_reason = abort_code;
    }
    return result;
}

double mode_convergence_check(const bifurcation_point& start, const sector& sec,
                              const continuation_options& opt, int probe_steps) {
    require(probe_steps >= 1, "mode_convergence_check: probe_steps must be positive");
    continuation_options fixed = opt;
    fixed.steps = probe_steps;
    fixed.ds_min = fixed.ds_max = fixed.ds;  // freeze adaptation so states align
    continuation_options richer = fixed;
    richer.discretization.mode_count += 1;
    if (richer.discretization.quadrature_points > 0) richer.discretization.quadrature_points = 0;
    const branch_result lo = continue_branch(start, sec, fixed);
    const branch_result hi = continue_branch(start, sec, richer);
    const std::size_t pairs = std::min(lo.states.size(), hi.states.size());
    double diff = 0.0;
    for (std::size_t s = 0; s < pairs; ++s) {
        diff = std::max(diff, std::abs(lo.states[s].alpha - hi.states[s].alpha));
        for (std::size_t j = 0; j < lo.states[s].amplitudes.size(); ++j)
            for (std::size_t i = 0; i < lo.states[s].grid.size(); ++i)
                diff = std::max(diff, std::abs(lo.states[s].amplitudes[j][i] -
                                               hi.states[s].amplitudes[j][i]));
    }
    return diff;
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

validation_report branch_solution_validate(const branch_state& state, const sector& sec,
                                           const problem_params& base, double eps,
                                           const validation_options& opt) {
    state.validate();
    sec.validate();
    require(sec.N == base.N, "branch_solution_validate: sector dimension mismatch");
    require(eps > 0.0, "branch_solution_validate: eps must be positive");
    require(opt.residual_tolerance > 0.0 && opt.corrector_tolerance > 0.0 &&
                opt.oscillation_factor > 0.0 && opt.decay_tolerance > 0.0 &&
                opt.separation_floor > 0.0 && opt.angular_samples >= 8,
            "branch_solution_validate: malformed options");
    const int nm = static_cast<int>(state.amplitudes.size());
    const problem_params at{base.N, base.p, state.alpha};
    const double beta = beta_boundary(at, eps);

    validation_report rep;
    // (a) independent residual: sixth-order stencils, enriched quadrature
    const int needed = required_angular_degree(at, sec, nm);
    const int points = auto_quadrature_points(sec, nm, needed) + 8;
    const auto rows = galerkin_residual(state, sec, base, eps, points, 6);
    double res = 0.0;
    for (const auto& rj : rows)
        for (double v : rj) res = std::max(res, std::abs(v));
    rep.residual = res;
    rep.residual_ok = res <= opt.residual_tolerance;

    // (b) relative angular oscillation of the shifted solution
    const double phi_max = sec.kind == sector_kind::block ? 0.5 * pi_const : pi_const;
    double osc = 0.0;
    for (std::size_t i = 0; i < state.grid.size(); ++i) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int s = 0; s < opt.angular_samples; ++s) {
            const double phi = (s + 0.5) * phi_max / opt.angular_samples;
            const double t = sec.kind == sector_kind::block ? std::cos(2.0 * phi) : std::cos(phi);
            double u = 0.0;
            for (int j = 0; j < nm; ++j)
                u += state.amplitudes[j][i] * sector_mode_value(sec, j, t);
            lo = std::min(lo, u + beta);
            hi = std::max(hi, u + beta);
        }
        if (lo > 0.0) osc = std::max(osc, hi / lo - 1.0);
        else osc = std::numeric_limits<double>::infinity();
    }
    rep.oscillation = osc;
    rep.nonradial_ok = osc > opt.oscillation_factor * opt.corrector_tolerance;

    // (c) far-field decay of the angular mean
    radial_function mean;
    mean.grid = state.grid;
    mean.values.resize(state.grid.size());
    for (std::size_t i = 0; i < state.grid.size(); ++i)
        mean.values[i] = state.amplitudes[0][i] + beta;
    mean.origin_exponent = 0.0;
    mean.tail_exponent = at.value_decay_exponent();
    const auto fit_v = decay_exponent_fit(mean, decay_target::value);
    const auto fit_g = decay_exponent_fit(mean, decay_target::gradient);
    rep.value_exponent = fit_v.exponent;
    rep.gradient_exponent = fit_g.exponent;
    const double tv = at.value_decay_exponent();
    const double tg = at.gradient_decay_exponent();
    rep.value_decay_ok = std::abs(fit_v.exponent + tv) <= opt.decay_tolerance * tv;
    rep.gradient_decay_ok = std::abs(fit_g.exponent + tg) <= opt.decay_tolerance * tg;
    rep.window_truncated = state.grid.back() < 100.0;

    // (d) sup distance from the radial solution at the same exponent
    double sep = 0.0;
    const int qsep = std::max(32, opt.angular_samples / 4);
    for (std::size_t i = 0; i < state.grid.size(); ++i) {
        const double u_rad = approx_radial_solution(at, eps, state.grid[i]);
        for (int s = 0; s < qsep; ++s) {
            const double phi = (s + 0.5) * phi_max / qsep;
            const double t = sec.kind == sector_kind::block ? std::cos(2.0 * phi) : std::cos(phi);
            double u = 0.0;
            for (int j = 0; j < nm; ++j)
                u += state.amplitudes[j][i] * sector_mode_value(sec, j, t);
            sep = std::max(sep, std::abs(u - u_rad));
        }
    }
    rep.separation = sep;
    rep.separation_ok = sep >= opt.separation_floor;
    return rep;
}

// ---------------------------------------------------------------------------
// reconstruction and symmetry
// ---------------------------------------------------------------------------

double reconstruct_value(const branch_state& state, const sector& sec,
                         const std::vector<double>& x) {
    state.validate();
    sec.validate();
    require(static_cast<int>(x.size()) == sec.N, "reconstruct_value: wrong point dimension");
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    const double r = std::sqrt(r2);
    double t;
    if (r == 0.0) {
        t = 1.0;
    } else if (sec.kind == sector_kind::zonal) {
        t = std::clamp(x[sec.N - 1] / r, -1.0, 1.0);
    } else {
        double s1 = 0.0;
        for (int i = 0; i < sec.l; ++i) s1 += x[i] * x[i];
        t = std::clamp(1.0 - 2.0 * s1 / r2, -1.0, 1.0);
    }
    const auto& grid = state.grid;
    double u = 0.0;
    for (std::size_t j = 0; j < state.amplitudes.size(); ++j) {
        double cj;
        if (r < grid.front()) {
            const int d = sec.mode_degree(static_cast<int>(j));
            cj = state.amplitudes[j].front() *
                 (d == 0 ? 1.0 : std::pow(r / grid.front(), static_cast<double>(d)));
        } else {
            cj = interp_log_cubic(grid, state.amplitudes[j], r);
        }
        if (cj != 0.0) u += cj * sector_mode_value(sec, static_cast<int>(j), t);
    }
    return u;
}

double equivariance_defect(const branch_state& state, const sector& sec, std::uint64_t seed,
                           int samples) {
    state.validate();
    sec.validate();
    require(samples >= 1, "equivariance_defect: samples must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double r_lo = state.grid.front() * 2.0;
    const double r_hi = state.grid.back() * 0.5;
    const int N = sec.N;
    double defect = 0.0;
    std::vector<double> x(N), y(N);
    auto rotate_pair = [&](std::vector<double>& v, int i, int j) {
        const double th = 2.0 * pi_const * unif(rng);
        const double c = std::cos(th), s = std::sin(th);
        const double vi = v[i], vj = v[j];
        v[i] = c * vi - s * vj;
        v[j] = s * vi + c * vj;
    };
    for (int it = 0; it < samples; ++it) {
        const double r = r_lo * std::pow(r_hi / r_lo, unif(rng));
        double n2 = 0.0;
        for (int i = 0; i < N; ++i) {
            x[i] = gauss(rng);
            n2 += x[i] * x[i];
        }
        const double inv = r / std::sqrt(n2);
        for (int i = 0; i < N; ++i) x[i] *= inv;
        y = x;
        if (sec.kind == sector_kind::zonal) {
            for (int rep = 0; rep < 3; ++rep) {
                if (N - 1 >= 2) {
                    int i = static_cast<int>(unif(rng) * (N - 1)) % (N - 1);
                    int j = static_cast<int>(unif(rng) * (N - 1)) % (N - 1);
                    if (i != j) rotate_pair(y, i, j);
                } else if (unif(rng) < 0.5) {
                    y[0] = -y[0];
                }
            }
        } else {
            for (int rep = 0; rep < 3; ++rep) {
                if (sec.l >= 2) {
                    int i = static_cast<int>(unif(rng) * sec.l) % sec.l;
                    int j = static_cast<int>(unif(rng) * sec.l) % sec.l;
                    if (i != j) rotate_pair(y, i, j);
                } else if (unif(rng) < 0.5) {
                    y[0] = -y[0];
                }
                const int nrest = N - sec.l;
                if (nrest >= 2) {
                    int i = sec.l + static_cast<int>(unif(rng) * nrest) % nrest;
                    int j = sec.l + static_cast<int>(unif(rng) * nrest) % nrest;
                    if (i != j) rotate_pair(y, i, j);
                } else if (unif(rng) < 0.5) {
                    y[sec.l] = -y[sec.l];
                }
            }
        }
        defect = std::max(defect,
                          std::abs(reconstruct_value(state, sec, y) -
                                   reconstruct_value(state, sec, x)));
    }
    return defect;
}

nullspace_probe radial_nullspace_probe(const bifurcation_point& start, const sector& sec,
                                       double alpha_offset, const continuation_options& opt) {
    start.validate();
    sec.validate();
    check_continuation_options(opt);
    check_galerkin_options(opt.discretization, start.eps);
    require(sec.N == start.params.N, "radial_nullspace_probe: sector dimension mismatch");
    require(sec.k == start.k, "radial_nullspace_probe: sector base degree mismatch");
    require(alpha_offset > 0.0, "radial_nullspace_probe: offset must be positive");

    branch_setup setup(start, sec, opt, 1);
    corrector& cor = setup.cor;
    reduction_engine& eng = setup.eng;
    const int n = cor.n_unk;
    const int kl = band_reach * cor.nm + cor.nm - 1;

    auto indicator = [&](double alpha) {
        // pack the radial state at this exponent
        const problem_params at{start.params.N, start.params.p, alpha};
        std::vector<double> x(n + 1, 0.0);
        const auto c0 = radial_mode0(at, start.eps, eng.grid);
        for (int i = 0; i + 1 < eng.m; ++i) x[static_cast<std::size_t>(i) * eng.nm] = c0[i];
        x[n] = alpha;
        std::vector<double> base_rows(n + 1), rows_pert(n + 1), x_pert(n + 1);
        std::vector<double> alpha_col(n), dummy_tangent(n + 1, 0.0);
        dummy_tangent[n] = 1.0;
        if (!cor.rows(x, x, dummy_tangent, 0.0, base_rows))
            throw solver_error("corrector-diverged", "non-finite residual at the probe state");
        banded_qr band(n, kl, kl);
        cor.jacobian(x, x, dummy_tangent, 0.0, base_rows, band, alpha_col, x_pert, rows_pert);
        band.factor();
        std::mt19937_64 rng(0x5eedu);
        std::normal_distribution<double> gauss(0.0, 1.0);
        double worst = 0.0;
        std::vector<double> g(n);
        for (int trial = 0; trial < 6; ++trial) {
            double n2 = 0.0;
            for (int i = 0; i < n; ++i) {
                g[i] = gauss(rng);
                n2 += g[i] * g[i];
            }
            const double inv = 1.0 / std::sqrt(n2);
            for (int i = 0; i < n; ++i) g[i] *= inv;
            band.solve(g);
            double m2 = 0.0;
            for (int i = 0; i < n; ++i) m2 += g[i] * g[i];
            worst = std::max(worst, std::sqrt(m2));
        }
        return worst > 0.0 ? 1.0 / worst : 0.0;
    };

    nullspace_probe probe;
    probe.sigma_at = indicator(start.alpha_k_eps);
    probe.sigma_off = std::min(indicator(start.alpha_k_eps + alpha_offset),
                               indicator(start.alpha_k_eps - alpha_offset));
    probe.spike_ratio = probe.sigma_at > 0.0
                            ? probe.sigma_off / probe.sigma_at
                            : std::numeric_limits<double>::infinity();
    return probe;
}

// ---------------------------------------------------------------------------
// the closed-form family at (N, p, alpha) = (4, 2, 2)
// ---------------------------------------------------------------------------

double explicit_family_value(double a, double r, double c2phi) {
    require(std::isfinite(a) && std::isfinite(r) && r >= 0.0, "explicit_family_value: bad inputs");
    require(c2phi >= -1.0 && c2phi <= 1.0, "explicit_family_value: c2phi outside [-1, 1]");
    const problem_params at{4, 2.0, 2.0};
    const double scale = talenti_constant(at);
    const double r2 = r * r;
    const double q = 1.0 + a * a + r2 * r2 + 2.0 * a * r2 * c2phi;
    return scale / std::sqrt(q);
}

family_constancy_result explicit_family_constancy(double a, int nodes_per_decade, double r_lo,
                                                  double r_hi) {
    require(std::isfinite(a) && std::abs(a) < 1.0, "explicit_family_constancy: |a| must be < 1");
    require(nodes_per_decade >= 32, "explicit_family_constancy: nodes_per_decade too small");
    require(r_lo > 0.0 && r_hi > r_lo * 10.0, "explicit_family_constancy: bad radial window");
    const sector sec = make_block_sector(4, 2, 2);
    const int mode_count = 14;  // harmonic degrees 0..26
    const int points = 40;
    const angular_rule rule = build_angular_rule(sec, mode_count, points);
    const std::vector<double> grid = log_grid(r_lo, r_hi, nodes_per_decade);
    const int m = static_cast<int>(grid.size());
    const double h = std::log(grid[1] / grid[0]);
    stencil_table deriv;
    deriv.build(m, h, 4);

    // project the family onto the modes
    std::vector<std::vector<double>> c(mode_count, std::vector<double>(m, 0.0));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < mode_count; ++j) {
            double acc = 0.0;
            for (int s = 0; s < points; ++s)
                acc += rule.weight[s] * explicit_family_value(a, grid[i], rule.t[s]) *
                       rule.P[j][s];
            c[j][i] = acc / rule.norm[j];
        }

    // per-mode contribution to -Laplacian: flux divergence plus the
    // spherical-harmonic eigenvalue term
    std::vector<std::vector<double>> lap(mode_count, std::vector<double>(m, 0.0));
    std::vector<double> cd(m), flux(m), dflux(m), shifted(m);
    for (int j = 0; j < mode_count; ++j) {
        for (int i = 0; i < m; ++i) shifted[i] = c[j][i] - c[j][0];
        deriv.apply(shifted.data(), cd.data());
        for (int i = 0; i < m; ++i) flux[i] = grid[i] * grid[i] * cd[i];  // r^{N-1} dc/dr = r^2 cd
        deriv.apply(flux.data(), dflux.data());
        const double lam = static_cast<double>(lambda_k(rule.degree[j], 4));
        for (int i = 0; i < m; ++i) {
            const double r = grid[i];
            lap[j][i] = -dflux[i] / (r * r * r * r) + lam * c[j][i] / (r * r);
        }
    }

    family_constancy_result out;
    double sum = 0.0;
    std::vector<double> ratios;
    ratios.reserve(static_cast<std::size_t>(m) * points);
    // Sample the ratio only at rows resolved by centered stencils: the
    // one-sided rows at the two grid ends measure the differencing scheme's
    // boundary treatment, not the family.
    const int skirt = deriv.width - 1;
    for (int i = skirt; i < m - skirt; ++i)
        for (int s = 0; s < points; ++s) {
            double minus_lap = 0.0;
            for (int j = 0; j < mode_count; ++j) minus_lap += lap[j][i] * rule.P[j][s];
            const double u = explicit_family_value(a, grid[i], rule.t[s]);
            const double denom = grid[i] * grid[i] * u * u * u * u * u;
            const double ratio = minus_lap / denom;
            ratios.push_back(ratio);
            sum += ratio;
        }
    out.samples = ratios.size();
    out.mean_ratio = sum / static_cast<double>(ratios.size());
    double dev = 0.0;
    for (double v : ratios) dev = std::max(dev, std::abs(v - out.mean_ratio));
    out.max_relative_deviation = dev / std::abs(out.mean_ratio);
    return out;
}

family_match_result match_explicit_family(const branch_result& branch, double a) {
    require(!branch.states.empty(), "match_explicit_family: empty branch");
    require(branch.sec.kind == sector_kind::block && branch.sec.N == 4 && branch.sec.k == 2,
            "match_explicit_family: branch must run in the block sector at N = 4, k = 2");
    require(std::abs(branch.base.p - 2.0) < 1e-12, "match_explicit_family: branch must have p = 2");
    require(std::isfinite(a) && std::abs(a) < 1.0, "match_explicit_family: |a| must be < 1");
    const branch_state& first = branch.states.front();
    const int nm = static_cast<int>(first.amplitudes.size());
    const angular_rule rule = build_angular_rule(branch.sec, nm, 24);
    const auto& grid = first.grid;
    const int m = static_cast<int>(grid.size());

    std::vector<std::vector<double>> fam(nm, std::vector<double>(m, 0.0));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < nm; ++j) {
            double acc = 0.0;
            for (std::size_t s = 0; s < rule.t.size(); ++s)
                acc += rule.weight[s] * explicit_family_value(a, grid[i], rule.t[s]) *
                       rule.P[j][s];
            fam[j][i] = acc / rule.norm[j];
        }

    family_match_result out;
    out.a = a;
    double fam_defect = 0.0;
    for (int i = 0; i < m; ++i) fam_defect = std::max(fam_defect, std::abs(fam[1][i]));
    out.family_defect = fam_defect;

    int best = 0;
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < branch.states.size(); ++s) {
        const double gap = std::abs(branch.states[s].symmetry_defect - fam_defect);
        if (gap < best_gap) {
            best_gap = gap;
            best = static_cast<int>(s);
        }
    }
    const branch_state& st = branch.states[best];
    out.matched_state = best;
    out.state_defect = st.symmetry_defect;
    out.alpha = st.alpha;

    const problem_params at{4, 2.0, st.alpha};
    const double beta = beta_boundary(at, branch.eps);
    double sup0 = 0.0, err0 = 0.0;
    for (int i = 0; i < m; ++i) {
        sup0 = std::max(sup0, std::abs(fam[0][i]));
        err0 = std::max(err0, std::abs(st.amplitudes[0][i] + beta - fam[0][i]));
    }
    out.mode0_error = err0 / sup0;

    double supk = 0.0, err_plus = 0.0, err_minus = 0.0;
    for (int i = 0; i < m; ++i) {
        supk = std::max(supk, std::abs(fam[1][i]));
        err_plus = std::max(err_plus, std::abs(st.amplitudes[1][i] - fam[1][i]));
        err_minus = std::max(err_minus, std::abs(-st.amplitudes[1][i] - fam[1][i]));
    }
    out.modek_error = std::min(err_plus, err_minus) / supk;
    return out;
}

// ---------------------------------------------------------------------------
// writers
// ---------------------------------------------------------------------------

void write_branch_jsonl(std::ostream& out, const branch_result& branch) {
    for (const auto& st : branch.states) {
        const problem_params at{branch.base.N, branch.base.p, st.alpha};
        const double beta = beta_boundary(at, branch.eps);
        radial_function mean;
        mean.grid = st.grid;
        mean.values.resize(st.grid.size());
        for (std::size_t i = 0; i < st.grid.size(); ++i)
            mean.values[i] = st.amplitudes[0][i] + beta;
        mean.tail_exponent = at.value_decay_exponent();
        bool have_fit = true;
        double fit_v = 0.0, fit_g = 0.0;
        try {
            fit_v = decay_exponent_fit(mean, decay_target::value).exponent;
            fit_g = decay_exponent_fit(mean, decay_target::gradient).exponent;
        } catch (const solver_error&) {
            have_fit = false;
        }
        out << "{\"alpha\":";
        put_number(out, st.alpha);
        out << ",\"arclength\":";
        put_number(out, st.arclength);
        out << ",\"symmetry_defect\":";
        put_number(out, st.symmetry_defect);
        out << ",\"newton_residual\":";
        put_number(out, st.newton_residual);
        out << ",\"value_decay\":";
        if (have_fit) put_number(out, fit_v);
        else out << "null";
        out << ",\"gradient_decay\":";
        if (have_fit) put_number(out, fit_g);
        else out << "null";
        out << "}\n";
    }
}

void write_mode_profiles_csv(std::ostream& out, const branch_state& state, const sector& sec) {
    state.validate();
    sec.validate();
    out << "r";
    for (std::size_t j = 0; j < state.amplitudes.size(); ++j)
        out << ",mode" << sec.mode_degree(static_cast<int>(j));
    out << "\n";
    for (std::size_t i = 0; i < state.grid.size(); ++i) {
        put_number(out, state.grid[i]);
        for (std::size_t j = 0; j < state.amplitudes.size(); ++j) {
            out.put(',');
            put_number(out, state.amplitudes[j][i]);
        }
        out.put('\n');
    }
}

}  // namespace henon
