#include "z2glue/flat_solver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "z2glue/errors.hpp"
#include "z2glue/linalg.hpp"

namespace z2glue {

namespace {

/** Stencil coefficients of one interior row, acting on (u_{j-1}, u_j, u_{j+1}). */
struct Row {
    double cm, c0, cp;
};

/** Second-order stencil for u'' + u'/r - (mu/r)^2 u on nonuniform nodes. */
Row standard_row(double rm, double rj, double rp, double mu) {
    const double hm = rj - rm, hp = rp - rj;
    const double D = hm * hp * (hm + hp);
    Row w;
    w.cm = 2.0 * hp / D - hp * hp / (D * rj);
    w.c0 = -2.0 * (hm + hp) / D + (hp * hp - hm * hm) / (D * rj);
    w.cp = 2.0 * hm / D + hm * hm / (D * rj);
    const double q = mu / rj;
    w.c0 -= q * q;
    return w;
}

/**
 * Row fitted to annihilate r^mu and reproduce the operator exactly on
 * r^{mu+1}, r^{mu+2}; removes the order loss the half-integer singularity
 * inflicts on polynomial stencils. Solved in column-scaled form (unknown
 * d_i = c_i (r_i/r_j)^mu against a small Vandermonde in the extra power) so
 * the conditioning is independent of mu; falls back to the standard stencil
 * when the back-scaling factor would be extreme.
 */
Row fitted_row(double rm, double rj, double rp, double mu) {
    if (rm == 0.0) {
        // first row: u_{j-1} is the origin value 0, fit the two remaining
        // coefficients to r^mu (homogeneous) and r^{mu+1}
        const double t = rp / rj;
        const double dp = (2.0 * mu + 1.0) / (rj * rj) / (t - 1.0);
        Row w;
        w.cm = 0.0;
        w.cp = dp * std::pow(rj / rp, mu);
        w.c0 = -dp;
        return w;
    }
    const double back = mu * std::log(rj / rm);
    if (back > 30.0) return standard_row(rm, rj, rp, mu);
    const double tm = rm / rj, tp = rp / rj;
    std::vector<double> V = {1.0, 1.0, 1.0, tm, 1.0, tp, tm * tm, 1.0, tp * tp};
    std::vector<double> b = {0.0, (2.0 * mu + 1.0) / (rj * rj), (4.0 * mu + 4.0) / (rj * rj)};
    std::vector<double> d = solve_dense(V, b);
    Row w;
    w.cm = d[0] * std::pow(rj / rm, mu);
    w.c0 = d[1];
    w.cp = d[2] * std::pow(rj / rp, mu);
    return w;
}

void build_rows(const std::vector<double>& r, double mu, std::vector<Row>& rows) {
    const int J = static_cast<int>(r.size()) - 1;
    rows.resize(J);  // rows[1..J-1] used
    for (int j = 1; j < J; ++j) rows[j] = fitted_row(r[j - 1], r[j], r[j + 1], mu);
}

double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

} // namespace

std::vector<double> graded_mesh(double R, int J) {
    if (!(R > 0.0) || J < 2) throw config_error("graded_mesh: need R > 0 and J >= 2");
    std::vector<double> r(J + 1);
    for (int j = 0; j <= J; ++j) r[j] = R * std::pow(j / static_cast<double>(J), 1.5);
    return r;
}

BranchedGrid make_branched_mesh(double R, int J, int n_theta) {
    std::vector<double> mesh = graded_mesh(R, J);
    return make_grid(std::vector<double>(mesh.begin() + 1, mesh.end() - 1), n_theta);
}

RadialSolution solve_mode(const ModeSource& src, int grid_size) {
    if (grid_size < 64) throw config_error("solve_mode: grid_size below 64");
    if (src.l < 0) throw config_error("solve_mode: negative mode index");
    if (!(src.R > 0.0)) throw config_error("solve_mode: domain radius must be positive");
    const int J = grid_size;
    if (static_cast<int>(src.rho.size()) != J + 1)
        throw config_error("solve_mode: rho needs grid_size + 1 samples on the graded mesh");

    const double mu = src.l + 0.5;
    const std::vector<double> r = graded_mesh(src.R, J);

    RadialSolution out;
    out.l = src.l;
    out.R = src.R;
    out.u.assign(J + 1, 0.0);
    out.leading_coeff = 0.0;

    int ja = 0;  // first interior node with a nonzero source
    for (int j = 1; j < J && ja == 0; ++j)
        if (src.rho[j] != 0.0) ja = j;
    if (ja == 0) return out;

    std::vector<Row> rows;
    build_rows(r, mu, rows);

    // source vanishing on an inner disk: continue by the exact homogeneous
    // power there and fold the continuation into the first retained row
    const int j0 = (ja >= 4) ? ja - 1 : 1;
    const int m = J - j0;  // unknowns u_{j0} .. u_{J-1}
    std::vector<double> sub(m), diag(m), sup(m), rhs(m);
    for (int j = j0; j < J; ++j) {
        const int i = j - j0;
        sub[i] = rows[j].cm;
        diag[i] = rows[j].c0;
        sup[i] = rows[j].cp;
        rhs[i] = src.rho[j];
    }
    if (j0 > 1) diag[0] += rows[j0].cm * std::pow(r[j0 - 1] / r[j0], mu);
    sub[0] = 0.0;
    sup[m - 1] = 0.0;  // u_J = 0 (Dirichlet)

    std::vector<double> x = solve_tridiag(sub, diag, sup, rhs);
    for (int i = 0; i < m; ++i) {
        if (!std::isfinite(x[i])) throw precision_error("solve_mode: nonfinite solve");
        out.u[j0 + i] = x[i];
    }
    for (int j = 1; j < j0; ++j) out.u[j] = x[0] * std::pow(r[j] / r[j0], mu);
    out.leading_coeff = safe_ratio(out.u[j0 > 1 ? j0 : 1], std::pow(r[j0 > 1 ? j0 : 1], mu));
    return out;
}

namespace {

/** Interior graded nodes: recover J from the grid and check the node set. */
int require_mesh(const BranchedGrid& g, double R) {
    validate(g);
    const int J = static_cast<int>(g.r_nodes.size()) + 1;
    if (J < 64) throw config_error("flat_solver: grid too coarse, need J >= 64");
    for (int i = 0; i + 1 < J; ++i) {
        const double want = R * std::pow((i + 1) / static_cast<double>(J), 1.5);
        if (std::abs(g.r_nodes[i] - want) > 1e-12 * R)
            throw config_error("flat_solver: grid nodes are not the interior graded mesh");
    }
    return J;
}

void require_support(const BranchedGrid& g, double R) {
    const int nt = g.n_theta;
    for (size_t i = 0; i < g.r_nodes.size(); ++i) {
        if (g.r_nodes[i] <= 0.9 * R) continue;
        for (int j = 0; j < nt; ++j)
            if (g.values[i * nt + j] != 0.0)
                throw config_error("flat_solver: source support exceeds 0.9 R");
    }
}

std::complex<double> ring_mode(const BranchedGrid& g, int ir, int l) {
    const int n2 = 2 * g.n_theta;
    const double w = (l + 0.5) * g.theta_step();
    std::complex<double> acc(0.0, 0.0);
    for (int j = 0; j < n2; ++j) acc += g.value(ir, j) * std::polar(1.0, -w * j);
    return acc / static_cast<double>(g.n_theta);
}

/** Green solve without the support gate (iteration sources reach the rim). */
BranchedGrid green_impl(const BranchedGrid& rho, double R, int l_max) {
    const int J = require_mesh(rho, R);
    const int nr = J - 1;
    const int nt = rho.n_theta;
    std::vector<std::vector<std::complex<double>>> modes(l_max + 1);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int l = 0; l <= l_max; ++l) {
        ModeSource re{l, std::vector<double>(J + 1, 0.0), R};
        ModeSource im{l, std::vector<double>(J + 1, 0.0), R};
        for (int i = 0; i < nr; ++i) {
            const std::complex<double> c = ring_mode(rho, i, l);
            re.rho[i + 1] = c.real();
            im.rho[i + 1] = c.imag();
        }
        RadialSolution ur = solve_mode(re, J);
        RadialSolution ui = solve_mode(im, J);
        std::vector<std::complex<double>> u(nr);
        for (int i = 0; i < nr; ++i) u[i] = {ur.u[i + 1], ui.u[i + 1]};
        modes[l] = std::move(u);
    }

    BranchedGrid out = make_grid(rho.r_nodes, nt);
    for (int l = 0; l <= l_max; ++l) {
        const double w = l + 0.5;
        for (int i = 0; i < nr; ++i) {
            const std::complex<double> c = modes[l][i];
            for (int j = 0; j < nt; ++j)
                out.stored(i, j) += (c * std::polar(1.0, w * out.theta(j))).real();
        }
    }
    return out;
}

} // namespace

BranchedGrid green_apply(const BranchedGrid& rho, double R, int l_max) {
    if (l_max < 2) throw config_error("green_apply: l_max must be at least 2");
    if (l_max >= rho.n_theta) throw config_error("green_apply: l_max exceeds angular resolution");
    require_mesh(rho, R);
    require_support(rho, R);
    return green_impl(rho, R, l_max);
}

AbExtraction ab_of_source(const BranchedGrid& rho, double R) {
    const int J = require_mesh(rho, R);
    require_support(rho, R);
    const int nt = rho.n_theta;
    const int nr = J - 1;

    int jnz = -1;  // innermost ring carrying source
    for (int i = 0; i < nr && jnz < 0; ++i)
        for (int j = 0; j < nt; ++j)
            if (rho.values[(size_t)i * nt + j] != 0.0) { jnz = i; break; }

    AbExtraction out;
    out.fit = {{0.0, 0.0}, {0.0, 0.0}, 0.0};
    out.exact_region = true;
    if (jnz < 0) return out;

    const int l_use = std::min(16, rho.n_theta - 1);
    const BranchedGrid u = green_impl(rho, R, l_use);

    if (jnz >= 3) {
        // coefficients from the exactly homogeneous inner region
        std::complex<double> lead[2];
        for (int l = 0; l <= 1; ++l) {
            ModeSource re{l, std::vector<double>(J + 1, 0.0), R};
            ModeSource im{l, std::vector<double>(J + 1, 0.0), R};
            for (int i = 0; i < nr; ++i) {
                const std::complex<double> c = ring_mode(rho, i, l);
                re.rho[i + 1] = c.real();
                im.rho[i + 1] = c.imag();
            }
            lead[l] = {solve_mode(re, J).leading_coeff, solve_mode(im, J).leading_coeff};
        }
        out.fit.A = lead[0];
        out.fit.B = lead[1];
        const double r_in = rho.r_nodes[jnz];
        double res = 0.0;
        for (int i = 0; i < nr; ++i) {
            const double r = rho.r_nodes[i];
            if (r >= 0.7 * r_in) break;
            for (int j = 0; j < 2 * nt; ++j) {
                const double th = u.theta_step() * j;
                const double model = (out.fit.A * std::polar(1.0, 0.5 * th)).real() * std::sqrt(r) +
                                     (out.fit.B * std::polar(1.0, 1.5 * th)).real() * std::pow(r, 1.5);
                res = std::max(res, std::abs(u.value(i, j) - model) / std::pow(r, 2.5));
            }
        }
        out.fit.residual = res;
        return out;
    }

    // source reaches the innermost rings: window fit only, accuracy downgraded
    out.exact_region = false;
    out.fit = fit_half_integer(u, 0.04 * R, 0.16 * R);
    return out;
}

BranchedGrid tangential_apply(const TangentialOp& op, const BranchedGrid& u, int l_max) {
    validate(u);
    const int nr = static_cast<int>(u.r_nodes.size());
    const int nt = u.n_theta;
    if (l_max < 0 || l_max >= nt) throw config_error("tangential_apply: bad l_max");
    if (nr < 3) throw config_error("tangential_apply: need at least 3 rings");
    const std::vector<double>& r = u.r_nodes;

    // nonuniform first derivative, one-sided at the two boundary rings
    auto rdr = [&](const std::vector<std::complex<double>>& c) {
        std::vector<std::complex<double>> d(nr);
        for (int i = 0; i < nr; ++i) {
            int a = std::clamp(i, 1, nr - 2);
            const double r0 = r[a - 1], r1 = r[a], r2 = r[a + 1], rr = r[i];
            // derivative weights of the quadratic through the three nodes
            const double w0 = (2.0 * rr - r1 - r2) / ((r0 - r1) * (r0 - r2));
            const double w1 = (2.0 * rr - r0 - r2) / ((r1 - r0) * (r1 - r2));
            const double w2 = (2.0 * rr - r0 - r1) / ((r2 - r0) * (r2 - r1));
            d[i] = rr * (w0 * c[a - 1] + w1 * c[a] + w2 * c[a + 1]);
        }
        return d;
    };

    BranchedGrid out = make_grid(u.r_nodes, nt);
    for (int l = 0; l <= l_max; ++l) {
        std::vector<std::complex<double>> c(nr);
        for (int i = 0; i < nr; ++i) c[i] = ring_mode(u, i, l);
        const std::vector<std::complex<double>> d1 = rdr(c);
        const std::vector<std::complex<double>> d2 = rdr(d1);
        const std::complex<double> it(0.0, l + 0.5);
        const double w = l + 0.5;
        for (int i = 0; i < nr; ++i) {
            const std::complex<double> m = op.rr * d2[i] + op.r * d1[i] - op.tt * w * w * c[i] +
                                           op.t * it * c[i] + op.rt * it * d1[i] + op.id * c[i];
            for (int j = 0; j < nt; ++j)
                out.stored(i, j) += (m * std::polar(1.0, w * out.theta(j))).real();
        }
    }
    return out;
}

PerturbedSolution perturbed_solve(const BranchedGrid& rho, const TangentialOp& op, double R,
                                  int l_max) {
    const int J = require_mesh(rho, R);
    (void)J;
    if (l_max < 2 || l_max >= rho.n_theta)
        throw config_error("perturbed_solve: bad l_max");

    auto sup = [](const BranchedGrid& g) {
        double s = 0.0;
        for (double v : g.values) s = std::max(s, std::abs(v));
        return s;
    };
    auto diff_sup = [](const BranchedGrid& a, const BranchedGrid& b) {
        double s = 0.0;
        for (size_t i = 0; i < a.values.size(); ++i)
            s = std::max(s, std::abs(a.values[i] - b.values[i]));
        return s;
    };

    const double norm_rho = sup(rho);
    PerturbedSolution out;
    out.iterations = 0;
    out.residual = 0.0;
    out.contraction_factor = 0.0;
    out.converged = true;
    if (norm_rho == 0.0) {
        out.u = make_grid(rho.r_nodes, rho.n_theta);
        return out;
    }

    BranchedGrid sigma = rho;
    BranchedGrid u = green_impl(sigma, R, l_max);
    BranchedGrid Lu = tangential_apply(op, u, l_max);
    BranchedGrid next = rho;
    for (size_t i = 0; i < next.values.size(); ++i) next.values[i] -= Lu.values[i];
    out.residual = diff_sup(next, sigma);
    out.contraction_factor = out.residual / norm_rho;
    out.iterations = 1;
    if (out.contraction_factor >= 0.5)
        throw convergence_error("perturbed_solve: measured contraction factor at or above 1/2",
                                out.contraction_factor);

    const double target = 1e-8 * norm_rho;
    while (out.residual > target && out.iterations < 40) {
        sigma = next;
        u = green_impl(sigma, R, l_max);
        Lu = tangential_apply(op, u, l_max);
        next = rho;
        for (size_t i = 0; i < next.values.size(); ++i) next.values[i] -= Lu.values[i];
        out.residual = diff_sup(next, sigma);
        ++out.iterations;
    }
    out.converged = out.residual <= target;
    out.u = green_impl(next, R, l_max);
    return out;
}

} // namespace z2glue
