#include "z2glue/preglue.hpp"

#include <algorithm>
#include <cmath>

#include "z2glue/errors.hpp"
#include "z2glue/linalg.hpp"
#include "z2glue/profiles.hpp"
#include "z2glue/rng.hpp"

namespace z2glue {

void validate(const GlueConfig& cfg) {
    if (cfg.n < 3) throw config_error("glue config: dimension below 3");
    if (!(cfg.eps > 0.0 && cfg.eps < 1.0)) throw config_error("glue config: eps outside (0,1)");
    if (!(cfg.sigma > 0.0 && cfg.sigma < 1.0))
        throw config_error("glue config: sigma outside (0,1)");
    if (!(cfg.delta > 0.0)) throw config_error("glue config: delta must be positive");
    if (cfg.N < 2) throw config_error("glue config: N below 2");
    if (!(cfg.tau < 0.0)) throw config_error("glue config: tau must be negative");
    if (!(2.0 * cfg.N * cfg.eps < cfg.delta))
        throw config_error("glue config: middle weight regime empty (2 N eps >= delta)");
    if (!(std::pow(cfg.eps, 1.0 - cfg.sigma) < cfg.delta / 4.0))
        throw config_error("glue config: gluing annulus too close to the outer radius");
    if (!(2.0 * cfg.delta <= cfg.N))
        throw config_error("glue config: first weight blend not monotone (needs 2 delta <= N)");
}

std::pair<double, double> cutoff_pair(double s) {
    const double g1 = smooth_step(s - 1.0);
    return {g1, 1.0 - g1};
}

std::array<double, 4> weight_breakpoints(const GlueConfig& cfg) {
    return {cfg.N * cfg.eps, 2.0 * cfg.N * cfg.eps, cfg.delta, 2.0 * cfg.delta};
}

double weight(const GlueConfig& cfg, double rho_q) {
    validate(cfg);
    if (!(rho_q >= 0.0)) throw config_error("weight: rho_q must be nonnegative");
    const double ne = cfg.N * cfg.eps;
    if (rho_q < ne) return cfg.eps;
    if (rho_q <= 2.0 * ne) {
        const double g = smooth_step(rho_q / ne - 1.0);
        return (1.0 - g) * cfg.eps + g * rho_q / (2.0 * cfg.delta);
    }
    if (rho_q < cfg.delta) return rho_q / (2.0 * cfg.delta);
    if (rho_q <= 2.0 * cfg.delta) {
        const double g = smooth_step(rho_q / cfg.delta - 1.0);
        return (1.0 - g) * rho_q / (2.0 * cfg.delta) + g;
    }
    return 1.0;
}

double background_primitive(const Background& b, const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    double f = 0.0;
    for (int i = 0; i < n; ++i) f -= b.quad.a[i] * x[i] * x[i];
    if (b.cubic != 0.0) f += b.cubic * (x[0] * x[0] * x[0] - 3.0 * x[0] * x[n - 1] * x[n - 1]);
    return f;
}

std::vector<double> background_gradient(const Background& b, const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = -2.0 * b.quad.a[i] * x[i];
    if (b.cubic != 0.0) {
        g[0] += b.cubic * (3.0 * x[0] * x[0] - 3.0 * x[n - 1] * x[n - 1]);
        g[n - 1] -= b.cubic * 6.0 * x[0] * x[n - 1];
    }
    return g;
}

Lattice make_lattice(int n, double rho_min, double rho_max, int shells, int dirs,
                     unsigned long long seed) {
    if (n < 2 || shells < 2 || dirs < 1 || !(rho_min > 0.0) || !(rho_max > rho_min))
        throw config_error("make_lattice: bad arguments");
    Lattice lat;
    lat.radii.resize(shells);
    const double q = std::log(rho_max / rho_min) / (shells - 1);
    for (int i = 0; i < shells; ++i) lat.radii[i] = rho_min * std::exp(q * i);
    Rng rng(seed);
    lat.directions.resize(dirs);
    for (int d = 0; d < dirs; ++d) {
        std::vector<double> v(n);
        double nn = 0.0;
        do {
            nn = 0.0;
            for (int i = 0; i < n; ++i) {
                const double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
                v[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
                nn += v[i] * v[i];
            }
        } while (nn < 1e-12);
        const double inv = 1.0 / std::sqrt(nn);
        for (double& c : v) c *= inv;
        lat.directions[d] = std::move(v);
    }
    return lat;
}

namespace {

double norm2(const std::vector<double>& x) {
    double s = 0.0;
    for (double c : x) s += c * c;
    return std::sqrt(s);
}

} // namespace

double Pregluing::primitive(const std::vector<double>& x) const {
    const double rho = norm2(x);
    const double s = rho / std::pow(cfg.eps, 1.0 - cfg.sigma);
    const double fq = background_primitive(background, x);
    if (s >= 2.0) return fq;
    std::vector<double> y(x);
    for (double& c : y) c /= cfg.eps;
    const double hg = reconstruct_model(model, y).f - a0;
    const auto [g1, g2] = cutoff_pair(s);
    return g1 * fq + g2 * cfg.eps * cfg.eps * hg;
}

std::vector<double> Pregluing::field(const std::vector<double>& x) const {
    const double rho = norm2(x);
    const double s = rho / std::pow(cfg.eps, 1.0 - cfg.sigma);
    if (s >= 2.0) return background_gradient(background, x);

    std::vector<double> y(x);
    for (double& c : y) c /= cfg.eps;
    const SheetValue mv = reconstruct_model(model, y);
    const int n = static_cast<int>(x.size());
    std::vector<double> out(n);
    if (s <= 1.0) {
        for (int i = 0; i < n; ++i) out[i] = cfg.eps * mv.grad[i];
        return out;
    }
    const auto [g1, g2] = cutoff_pair(s);
    const double g1p = smooth_step_d1(s - 1.0);
    const double fq = background_primitive(background, x);
    const std::vector<double> gq = background_gradient(background, x);
    const double rem = fq - cfg.eps * cfg.eps * (mv.f - a0);
    const double radial = g1p * std::pow(cfg.eps, cfg.sigma - 1.0) * rem / rho;
    for (int i = 0; i < n; ++i)
        out[i] = g1 * gq[i] + g2 * cfg.eps * mv.grad[i] + radial * x[i];
    return out;
}

double Pregluing::primitive_mismatch(const std::vector<double>& x) const {
    return primitive(x) - background_primitive(background, x);
}

double Pregluing::divergence(const std::vector<double>& x) const {
    const double rho = norm2(x);
    const double ell = std::pow(cfg.eps, 1.0 - cfg.sigma);
    const double s = rho / ell;
    if (s <= 1.0 || s >= 2.0) return 0.0;  // both interpolants are harmonic

    std::vector<double> y(x);
    for (double& c : y) c /= cfg.eps;
    const SheetValue mv = reconstruct_model(model, y);
    const double fq = background_primitive(background, x);
    const std::vector<double> gq = background_gradient(background, x);
    const double rem = fq - cfg.eps * cfg.eps * (mv.f - a0);
    double rad = 0.0;  // unit-radial derivative of the remainder
    for (size_t i = 0; i < x.size(); ++i)
        rad += (gq[i] - cfg.eps * mv.grad[i]) * x[i] / rho;

    const double g1p = smooth_step_d1(s - 1.0);
    const double g1pp = smooth_step_d2(s - 1.0);
    const int n = cfg.n;
    return g1pp / (ell * ell) * rem + g1p / ell * ((n - 1) / rho * rem + 2.0 * rad);
}

Pregluing make_pregluing(const Background& b, const ModelParams& model, const GlueConfig& cfg) {
    validate(cfg);
    validate(model);
    if (model.n != cfg.n) throw config_error("pregluing: model dimension differs from config");
    if (static_cast<int>(b.quad.a.size()) != cfg.n)
        throw config_error("pregluing: quadric size differs from dimension");
    const QuadricCoeffs ac = asymptotic_coeffs(model);
    double scale = 0.0, worst = 0.0;
    for (int i = 0; i < cfg.n; ++i) {
        scale = std::max(scale, std::abs(ac.a[i]));
        worst = std::max(worst, std::abs(ac.a[i] - b.quad.a[i]));
    }
    if (worst > 1e-6 * scale)
        throw config_error("pregluing: background quadric does not match the model coefficients");
    Pregluing p;
    p.background = b;
    p.model = model;
    p.cfg = cfg;
    p.a0 = ac.a0;
    return p;
}

namespace {

FieldGrid build_impl(const Background& b, const ModelParams& model, const GlueConfig& cfg,
                     const Lattice& lattice, bool parallel) {
    FieldGrid grid;
    grid.source = make_pregluing(b, model, cfg);
    grid.has_source = true;
    grid.lattice = lattice;
    grid.comps = cfg.n;
    const int ns = static_cast<int>(lattice.radii.size());
    const int nd = static_cast<int>(lattice.directions.size());
    grid.values.assign(static_cast<size_t>(ns) * nd * cfg.n, 0.0);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) collapse(2) if (parallel)
#endif
    for (int i = 0; i < ns; ++i)
        for (int d = 0; d < nd; ++d) {
            std::vector<double> x(cfg.n);
            for (int c = 0; c < cfg.n; ++c) x[c] = lattice.radii[i] * lattice.directions[d][c];
            const std::vector<double> v = grid.source.field(x);
            std::copy(v.begin(), v.end(), grid.values.begin() + grid.index(i, d));
        }
    (void)parallel;
    return grid;
}

} // namespace

FieldGrid build_pregluing(const Background& b, const ModelParams& model, const GlueConfig& cfg,
                          const Lattice& lattice) {
    return build_impl(b, model, cfg, lattice, true);
}

FieldGrid build_pregluing_serial(const Background& b, const ModelParams& model,
                                 const GlueConfig& cfg, const Lattice& lattice) {
    return build_impl(b, model, cfg, lattice, false);
}

FieldGrid divergence_error(const FieldGrid& field, const GlueConfig& cfg) {
    if (!field.has_source) throw config_error("divergence_error: grid lacks its ansatz");
    validate(cfg);
    FieldGrid out;
    out.lattice = field.lattice;
    out.comps = 1;
    out.source = field.source;
    out.has_source = true;
    const int ns = static_cast<int>(out.lattice.radii.size());
    const int nd = static_cast<int>(out.lattice.directions.size());
    out.values.assign(static_cast<size_t>(ns) * nd, 0.0);

    // resolution gate: radial spacing inside the annulus vs eps^{1-sigma}/16
    const double ell = std::pow(cfg.eps, 1.0 - cfg.sigma);
    double gap = 0.0;
    for (int i = 0; i + 1 < ns; ++i) {
        const double lo = out.lattice.radii[i], hi = out.lattice.radii[i + 1];
        if (hi < ell || lo > 2.0 * ell) continue;
        gap = std::max(gap, hi - lo);
    }
    out.under_resolved = gap > ell / 16.0;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) collapse(2)
#endif
    for (int i = 0; i < ns; ++i)
        for (int d = 0; d < nd; ++d) {
            std::vector<double> x(cfg.n);
            for (int c = 0; c < cfg.n; ++c)
                x[c] = out.lattice.radii[i] * out.lattice.directions[d][c];
            out.values[out.index(i, d)] = out.source.divergence(x);
        }
    return out;
}

ScanReport error_scan(const Background& b, const ModelParams& model, const GlueConfig& tmpl,
                      std::vector<double> eps_list) {
    if (eps_list.size() < 4) throw config_error("error_scan: need at least 4 eps values");
    std::sort(eps_list.rbegin(), eps_list.rend());
    for (size_t i = 0; i + 1 < eps_list.size(); ++i)
        if (std::abs(eps_list[i] / eps_list[i + 1] - 2.0) > 1e-9)
            throw config_error("error_scan: eps list must be geometric with ratio 2");

    ScanReport rep;
    for (double eps : eps_list) {
        GlueConfig cfg = tmpl;
        cfg.eps = eps;
        const double ell = std::pow(eps, 1.0 - cfg.sigma);
        const Lattice lat = make_lattice(cfg.n, 0.95 * ell, 2.05 * ell, 40, 48);
        const FieldGrid grid = build_pregluing(b, model, cfg, lat);
        const FieldGrid div = divergence_error(grid, cfg);

        const int ns = static_cast<int>(lat.radii.size());
        const int nd = static_cast<int>(lat.directions.size());
        double sp = 0.0, sd = 0.0, sw = 0.0;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) reduction(max : sp, sd, sw)
#endif
        for (int i = 0; i < ns; ++i) {
            const double rho = lat.radii[i];
            const double wgt = std::pow(weight(cfg, rho), 2.0 - cfg.tau);
            for (int d = 0; d < nd; ++d) {
                const double dv = std::abs(div.values[div.index(i, d)]);
                sd = std::max(sd, dv);
                sw = std::max(sw, wgt * dv);
                if (rho >= ell && rho <= 2.0 * ell) {
                    std::vector<double> x(cfg.n);
                    for (int c = 0; c < cfg.n; ++c) x[c] = rho * lat.directions[d][c];
                    sp = std::max(sp, std::abs(grid.source.primitive_mismatch(x)));
                }
            }
        }
        rep.rows.push_back({eps, sp, sd, sw});
    }

    std::vector<double> e, p, d, w;
    rep.monotone = true;
    for (size_t i = 0; i < rep.rows.size(); ++i) {
        e.push_back(rep.rows[i].eps);
        p.push_back(rep.rows[i].sup_primitive);
        d.push_back(rep.rows[i].sup_div);
        w.push_back(rep.rows[i].weighted_sup);
        if (i > 0)
            rep.monotone = rep.monotone && p[i] < p[i - 1] && d[i] < d[i - 1] && w[i] < w[i - 1];
    }
    rep.slope_primitive = loglog_slope(e, p);
    rep.slope_div = loglog_slope(e, d);
    rep.slope_weighted = loglog_slope(e, w);
    return rep;
}

} // namespace z2glue
