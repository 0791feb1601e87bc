#include "z2glue/models.hpp"
#include "z2glue/errors.hpp"
#include "z2glue/linalg.hpp"
#include "z2glue/quadrature.hpp"
#include "z2glue/rng.hpp"
#include <algorithm>
#include <cmath>
#include <numeric>

namespace z2glue {

namespace {

double l2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

/** Coefficients of C(x) = prod_j (1 + x/h_j^2), C[0] = 1. */
std::vector<double> c_poly(const std::vector<double>& h) {
    std::vector<double> E{1.0};
    for (double hj : h) {
        double c = 1.0 / (hj * hj);
        std::vector<double> nE(E.size() + 1, 0.0);
        for (size_t i = 0; i < E.size(); ++i) {
            nE[i] += E[i];
            nE[i + 1] += E[i] * c;
        }
        E = std::move(nE);
    }
    return E;
}

/** sqrt(C(x)) as a stable product, x >= 0. */
double sqrt_c(const std::vector<double>& h, double x) {
    double v = 1.0;
    for (double hj : h) v *= std::sqrt(1.0 + x / (hj * hj));
    return v;
}

/** e(x) = (C(x) - 1)/x evaluated as a polynomial; e(0) = sum 1/h_j^2. */
double e_poly(const std::vector<double>& E, double x) {
    double v = 0.0;
    for (size_t m = E.size() - 1; m >= 1; --m) v = v * x + E[m];
    return v;
}

double beta_axial_integrand(const std::vector<double>& h, const std::vector<double>& E, double y) {
    double c = sqrt_c(h, y * y);
    return -e_poly(E, y * y) / (c * (c + 1.0));
}

} // namespace

void validate(const ModelParams& p) {
    if (p.n < 3) throw config_error("ModelParams: n must be >= 3");
    if ((int)p.h.size() != p.n - 1) throw config_error("ModelParams: h must have n-1 entries");
    for (double hj : p.h)
        if (!(hj > 0.0) || !std::isfinite(hj)) throw config_error("ModelParams: h entries must be positive");
}

QuadricCoeffs asymptotic_coeffs(const ModelParams& p) {
    validate(p);
    const auto& h = p.h;
    double hmin = *std::min_element(h.begin(), h.end());
    double hmax = *std::max_element(h.begin(), h.end());
    if (hmax / hmin > 1e8)
        throw precision_error("asymptotic_coeffs: semi-axis ratio too large for reliable quadrature");

    double P = 0.5;
    for (double hj : h) P *= hj;
    auto sqrt_s = [&](double u) {
        double v = 1.0;
        for (double hj : h) v *= std::sqrt(u * u + hj * hj);
        return v;
    };

    QuadricCoeffs out;
    out.a.resize(p.n);
    for (int i = 0; i + 1 < p.n; ++i) {
        double hi2 = h[i] * h[i];
        out.a[i] = P * integrate_half_line([&](double u) { return 1.0 / ((u * u + hi2) * sqrt_s(u)); });
    }
    out.a[p.n - 1] = -P * integrate_half_line([&](double u) {
        double y = u * u, sum = 0.0;
        for (double hj : h) sum += 1.0 / (y + hj * hj);
        return sum / sqrt_s(u);
    });
    out.a0 = P * integrate_half_line([&](double u) { return 1.0 / sqrt_s(u); });
    return out;
}

ModelParams solve_h_for_a(int n, const std::vector<double>& a_target) {
    if (n < 3) throw config_error("solve_h_for_a: n must be >= 3");
    if ((int)a_target.size() != n - 1) throw config_error("solve_h_for_a: need n-1 targets");
    for (double a : a_target)
        if (!(a > 0.0) || !std::isfinite(a)) throw config_error("solve_h_for_a: targets must be positive");

    const int m = n - 1;
    double scale = *std::max_element(a_target.begin(), a_target.end());

    auto coeffs_at = [&](const std::vector<double>& xi) {
        ModelParams q{n, std::vector<double>(m)};
        for (int j = 0; j < m; ++j) q.h[j] = std::exp(xi[j]);
        return asymptotic_coeffs(q);
    };
    auto resid = [&](const std::vector<double>& xi) {
        QuadricCoeffs c = coeffs_at(xi);
        std::vector<double> r(m);
        for (int j = 0; j < m; ++j) r[j] = c.a[j] - a_target[j];
        return r;
    };
    auto sup = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s = std::max(s, std::abs(x));
        return s;
    };

    // a(lambda h) = a(h)/lambda fixes the isotropic starting scale
    ModelParams iso{n, std::vector<double>(m, 1.0)};
    double abar = asymptotic_coeffs(iso).a[0];
    double tbar = std::accumulate(a_target.begin(), a_target.end(), 0.0) / m;
    std::vector<double> xi(m, std::log(abar / tbar));

    std::vector<double> r = resid(xi);
    double rn = sup(r), best = rn;
    const double tol = 1e-10 * scale, accept = 1e-8 * scale;
    const double dxi = 1e-4;

    for (int it = 0; it < 80; ++it) {
        if (rn <= tol) break;
        std::vector<double> J(m * m);
        for (int j = 0; j < m; ++j) {
            std::vector<double> xp = xi, xm = xi;
            xp[j] += dxi;
            xm[j] -= dxi;
            std::vector<double> rp = resid(xp), rm = resid(xm);
            for (int i = 0; i < m; ++i) J[i * m + j] = (rp[i] - rm[i]) / (2.0 * dxi);
        }
        std::vector<double> step = solve_dense(J, r);
        double t = 1.0;
        bool moved = false;
        for (int bt = 0; bt < 8; ++bt, t *= 0.5) {
            std::vector<double> xt(m);
            for (int j = 0; j < m; ++j) xt[j] = xi[j] - t * step[j];
            std::vector<double> rt = resid(xt);
            double rtn = sup(rt);
            if (rtn < (1.0 - 0.25 * t) * rn) {
                xi = std::move(xt);
                r = std::move(rt);
                rn = rtn;
                best = std::min(best, rn);
                moved = true;
                break;
            }
        }
        if (!moved) break;
    }
    if (rn > accept) throw convergence_error("solve_h_for_a: no convergence", best);

    ModelParams out{n, std::vector<double>(m)};
    for (int j = 0; j < m; ++j) out.h[j] = std::exp(xi[j]);
    return out;
}

double beta_transverse(const ModelParams& p, int k, double s) {
    validate(p);
    if (k < 0 || k >= p.n - 1) throw config_error("beta_transverse: k out of range");
    double hk2 = p.h[k] * p.h[k];
    double sign = s < 0 ? -1.0 : 1.0;
    double S = std::abs(s);
    if (S == 0.0) return 0.0;
    return sign * integrate([&](double y) { return 1.0 / ((hk2 + y * y) * sqrt_c(p.h, y * y)); }, 0.0, S);
}

double beta_transverse_inf(const ModelParams& p, int k) {
    validate(p);
    if (k < 0 || k >= p.n - 1) throw config_error("beta_transverse_inf: k out of range");
    double hk2 = p.h[k] * p.h[k];
    return integrate_half_line([&](double y) { return 1.0 / ((hk2 + y * y) * sqrt_c(p.h, y * y)); });
}

double beta_axial(const ModelParams& p, double s) {
    validate(p);
    auto E = c_poly(p.h);
    double sign = s < 0 ? -1.0 : 1.0;
    double S = std::abs(s);
    if (S == 0.0) return 0.0;
    return sign * integrate([&](double y) { return beta_axial_integrand(p.h, E, y); }, 0.0, S);
}

double beta_axial_inf(const ModelParams& p) {
    validate(p);
    auto E = c_poly(p.h);
    return integrate_half_line([&](double y) { return beta_axial_integrand(p.h, E, y); });
}

GraphPoint lawlor_graph(const ModelParams& p, std::vector<double> w, double s) {
    validate(p);
    if ((int)w.size() != p.n) throw config_error("lawlor_graph: w must have n entries");
    double nw = l2(w);
    if (std::abs(nw - 1.0) > 1e-12) throw config_error("lawlor_graph: w must be a unit vector");
    for (double& wi : w) wi /= nw;

    GraphPoint g;
    g.w = w;
    g.s = s;
    g.x.resize(p.n);
    g.y.resize(p.n);
    double bn = beta_axial(p, s);
    for (int k = 0; k + 1 < p.n; ++k) {
        double rad = std::sqrt(p.h[k] * p.h[k] + s * s);
        g.x[k] = w[k] * rad;
        g.y[k] = w[k] * beta_transverse(p, k, s) * rad;
    }
    g.x[p.n - 1] = -w[p.n - 1] * s;
    g.y[p.n - 1] = w[p.n - 1] * (1.0 - s * bn);
    return g;
}

SheetValue reconstruct_model(const ModelParams& p, const std::vector<double>& x) {
    validate(p);
    const int n = p.n;
    if ((int)x.size() != n) throw config_error("reconstruct_model: x must have n entries");
    double R = l2(x);
    if (R == 0.0) throw geometry_error("reconstruct_model: origin lies on the branch cut");

    double xn = x[n - 1];
    if (xn == 0.0) {
        double q = 0.0;
        for (int k = 0; k + 1 < n; ++k) q += x[k] * x[k] / (p.h[k] * p.h[k]);
        if (q < 1.0 - 1e-12) throw geometry_error("reconstruct_model: point on the branch cut");
    }

    // g is strictly decreasing in s > 0 with a unique root outside the branching set
    auto gfun = [&](double s) {
        double v = -1.0, s2 = s * s;
        for (int k = 0; k + 1 < n; ++k) v += x[k] * x[k] / (p.h[k] * p.h[k] + s2);
        if (xn != 0.0) v += xn * xn / s2;
        return v;
    };
    auto gder = [&](double s) {
        double v = 0.0, s2 = s * s;
        for (int k = 0; k + 1 < n; ++k) {
            double d = p.h[k] * p.h[k] + s2;
            v -= 2.0 * s * x[k] * x[k] / (d * d);
        }
        if (xn != 0.0) v -= 2.0 * xn * xn / (s2 * s);
        return v;
    };

    double lo = 0.0, hi = 2.0 * R;  // g(0+) > 0, g(2R) <= -1/2
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        (gfun(mid) > 0.0 ? lo : hi) = mid;
    }
    double s = 0.5 * (lo + hi);
    for (int it = 0; it < 3; ++it) {
        double d = gder(s);
        if (d == 0.0) break;
        double sn = s - gfun(s) / d;
        if (sn > lo * 0.5 && sn < hi * 2.0 && sn > 0.0) s = sn;
    }
    if (s <= 1e-9 * (1.0 + R))
        throw geometry_error("reconstruct_model: too close to the branching set");

    std::vector<double> w(n);
    for (int k = 0; k + 1 < n; ++k) w[k] = x[k] / std::sqrt(p.h[k] * p.h[k] + s * s);
    w[n - 1] = -xn / s;
    double nw = l2(w);
    for (double& wi : w) wi /= nw;

    auto E = c_poly(p.h);
    double bn = beta_axial(p, s);
    double Jv = integrate(
        [&](double y) { return -y * y * beta_axial_integrand(p.h, E, y); }, 0.0, s);

    // f on this branch, vanishing on the branching set and on the cut
    double f = 0.0;
    std::vector<double> y(n);
    for (int k = 0; k + 1 < n; ++k) {
        double hk2 = p.h[k] * p.h[k];
        double bk = beta_transverse(p, k, s);
        double Ik = integrate(
            [&](double t) { return t * t / ((hk2 + t * t) * sqrt_c(p.h, t * t)); }, 0.0, s);
        f += w[k] * w[k] * 0.5 * (s * s * bk - Ik);
        y[k] = w[k] * bk * std::sqrt(hk2 + s * s);
    }
    double wn = w[n - 1];
    f += -wn * wn * s + wn * wn * 0.5 * (s * s * bn + Jv);
    y[n - 1] = wn * (1.0 - s * bn);

    // principal sheet: far field a0 - sum a_i x_i^2
    SheetValue out;
    out.f = -f;
    out.grad.resize(n);
    for (int i = 0; i < n; ++i) out.grad[i] = -y[i];
    out.sheet = +1;
    return out;
}

ZeroClassification classify_zero(const FieldFn& field, const std::vector<double>& p, double scale) {
    const int n = (int)p.size();
    if (n < 2) throw config_error("classify_zero: need dimension >= 2");
    if (!(scale > 0.0)) throw config_error("classify_zero: scale must be positive");

    const int nsamp = 2 * n * n;
    Rng rng(0x9e3779b97f4a7c15ull);
    std::vector<std::vector<double>> u(nsamp, std::vector<double>(n));
    for (auto& ui : u) {
        double norm = 0.0;
        for (int i = 0; i < n; i += 2) {
            double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
            double rad = std::sqrt(-2.0 * std::log(u1));
            ui[i] = rad * std::cos(2.0 * M_PI * u2);
            if (i + 1 < n) ui[i + 1] = rad * std::sin(2.0 * M_PI * u2);
        }
        for (double v : ui) norm += v * v;
        norm = std::sqrt(norm);
        for (double& v : ui) v /= norm;
    }

    std::vector<std::vector<double>> b(nsamp);
    double sup_b = 0.0;
    for (int t = 0; t < nsamp; ++t) {
        std::vector<double> q(n);
        for (int i = 0; i < n; ++i) q[i] = p[i] + scale * u[t][i];
        b[t] = field(q);
        if ((int)b[t].size() != n) throw config_error("classify_zero: field dimension mismatch");
        sup_b = std::max(sup_b, l2(b[t]));
    }
    std::vector<double> f0 = field(p);
    if (l2(f0) > 1e-6 * std::max(scale, sup_b))
        throw config_error("classify_zero: field does not vanish at p");

    // symmetric linearization b ~ A (scale u), unknowns A_ij for i <= j
    const int m = n * (n + 1) / 2;
    std::vector<std::vector<double>> cols(m, std::vector<double>(nsamp * n, 0.0));
    std::vector<double> rhs(nsamp * n);
    for (int t = 0; t < nsamp; ++t)
        for (int c = 0; c < n; ++c) rhs[t * n + c] = b[t][c];
    {
        int col = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j, ++col)
                for (int t = 0; t < nsamp; ++t) {
                    if (i == j) {
                        cols[col][t * n + i] = scale * u[t][i];
                    } else {
                        cols[col][t * n + i] = scale * u[t][j];
                        cols[col][t * n + j] = scale * u[t][i];
                    }
                }
    }
    std::vector<double> sol = lsq_columns(cols, rhs);

    std::vector<double> A(n * n, 0.0);
    {
        int col = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j, ++col) A[i * n + j] = A[j * n + i] = sol[col];
    }

    double num = 0.0, den = 0.0;
    for (int t = 0; t < nsamp; ++t)
        for (int c = 0; c < n; ++c) {
            double pred = 0.0;
            for (int j = 0; j < n; ++j) pred += A[c * n + j] * scale * u[t][j];
            num += (pred - b[t][c]) * (pred - b[t][c]);
            den += b[t][c] * b[t][c];
        }

    ZeroClassification out;
    out.fit_residual = den > 0.0 ? std::sqrt(num / den) : 0.0;
    out.quadratic_fit_ok = out.fit_residual <= 0.1;

    SymEig eig = eig_sym(A, n);
    double maxabs = 0.0, minabs = 0.0;
    int neg = 0;
    for (double lam : eig.values) maxabs = std::max(maxabs, std::abs(lam));
    minabs = maxabs;
    for (double lam : eig.values) {
        minabs = std::min(minabs, std::abs(lam));
        if (lam < 0.0) ++neg;
    }
    out.is_regular = out.quadratic_fit_ok && maxabs > 0.0 && minabs >= 1e-6 * maxabs;
    out.index_pair = {neg, n - neg};
    out.quadric.a0 = 0.0;
    out.quadric.a.resize(n);
    for (int i = 0; i < n; ++i) out.quadric.a[i] = -0.5 * eig.values[i];
    return out;
}

} // namespace z2glue
