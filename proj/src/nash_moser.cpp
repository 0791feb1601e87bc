#include "z2glue/nash_moser.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "z2glue/emit.hpp"
#include "z2glue/errors.hpp"
#include "z2glue/linalg.hpp"

namespace z2glue {

namespace {

/** Evaluate a trig polynomial [c_0, c..., s...] and two derivatives at x. */
void trig_eval(const std::vector<double>& u, int band, double x, double& p, double& dp,
               double& d2p) {
    p = u[0];
    dp = 0.0;
    d2p = 0.0;
    for (int l = 1; l <= band; ++l) {
        const double c = u[l], s = u[band + l];
        const double cl = std::cos(l * x), sl = std::sin(l * x);
        p += c * cl + s * sl;
        dp += l * (s * cl - c * sl);
        d2p -= l * l * (c * cl + s * sl);
    }
}

/** Sup norm of a trig polynomial: scan grid argmax, then Newton on the
 *  derivative to land on the true critical point. */
double trig_sup(const std::vector<double>& u, int band) {
    const int G = 256;
    double best = 0.0, xbest = 0.0;
    for (int i = 0; i < G; ++i) {
        const double x = 2.0 * M_PI * i / G;
        double p, dp, d2p;
        trig_eval(u, band, x, p, dp, d2p);
        if (std::abs(p) > best) {
            best = std::abs(p);
            xbest = x;
        }
    }
    double x = xbest;
    for (int it = 0; it < 3; ++it) {
        double p, dp, d2p;
        trig_eval(u, band, x, p, dp, d2p);
        if (std::abs(d2p) < 1e-280) break;
        x -= dp / d2p;
    }
    double p, dp, d2p;
    trig_eval(u, band, x, p, dp, d2p);
    return std::max(best, std::abs(p));
}

void check_profile(const std::function<double(double)>& gamma) {
    if (!(gamma(0.0) == 1.0) || !(gamma(1.0) == 1.0))
        throw config_error("smoothing profile: gamma must equal 1 on [0,1]");
    if (!(gamma(2.0) == 0.0) || !(gamma(2.5) == 0.0))
        throw config_error("smoothing profile: gamma must vanish on [2,inf)");
    double prev = gamma(0.0);
    for (int i = 1; i <= 250; ++i) {
        const double v = gamma(2.5 * i / 250.0);
        if (v > prev + 1e-12) throw config_error("smoothing profile: gamma must be non-increasing");
        prev = v;
    }
}

void check_theta(double theta) {
    if (!(theta >= 1.0)) throw config_error("smoothing: theta must be >= 1");
}

/** Multiply the band payload [c_0, c.., s..] by a per-frequency symbol. */
GradedVector apply_symbol(const GradedVector& x, int band,
                          const std::function<double(int)>& symbol) {
    if ((int)x.data.size() != 2 * band + 1)
        throw config_error("smoothing: payload size does not match the band");
    GradedVector out = x;
    out.data[0] *= symbol(0);
    for (int l = 1; l <= band; ++l) {
        const double g = symbol(l);
        out.data[l] *= g;
        out.data[band + l] *= g;
    }
    return out;
}

} // namespace

SequenceSpace::SequenceSpace(int dim, int k_max, bool degenerate)
    : dim_(dim), kmax_(k_max), degenerate_(degenerate) {
    if (dim < 1 || k_max < 0) throw config_error("SequenceSpace: bad arguments");
}

double SequenceSpace::norm(const GradedVector& x, int k) const {
    if ((int)x.data.size() != dim_) throw config_error("SequenceSpace: payload size mismatch");
    if (k < 0 || k > kmax_) throw config_error("SequenceSpace: grade out of range");
    double m = 0.0;
    for (int j = 0; j < dim_; ++j) {
        const double w = degenerate_ ? 1.0 : std::pow(1.0 + j, k);
        m = std::max(m, std::abs(x.data[j]) * w);
    }
    return m;
}

CircleSpace::CircleSpace(int band, int k_max) : band_(band), kmax_(k_max) {
    if (band < 1 || k_max < 0) throw config_error("CircleSpace: bad arguments");
}

GradedVector CircleSpace::derivative(const GradedVector& u) const {
    GradedVector d;
    d.data.assign(2 * band_ + 1, 0.0);
    for (int l = 1; l <= band_; ++l) {
        d.data[l] = l * u.data[band_ + l];
        d.data[band_ + l] = -l * u.data[l];
    }
    return d;
}

GradedVector CircleSpace::product(const GradedVector& u, const GradedVector& v) const {
    using cd = std::complex<double>;
    const int N = band_;
    auto hat = [&](const GradedVector& w, int l) -> cd {
        if (l == 0) return cd(w.data[0], 0.0);
        const int a = std::abs(l);
        const cd h(0.5 * w.data[a], -0.5 * w.data[N + a]);
        return l > 0 ? h : std::conj(h);
    };
    GradedVector out;
    out.data.assign(2 * N + 1, 0.0);
    for (int q = 0; q <= N; ++q) {
        cd acc(0.0, 0.0);
        for (int a = std::max(-N, q - N); a <= std::min(N, q + N); ++a)
            acc += hat(u, a) * hat(v, q - a);
        if (q == 0) {
            out.data[0] = acc.real();
        } else {
            out.data[q] = 2.0 * acc.real();
            out.data[N + q] = -2.0 * acc.imag();
        }
    }
    return out;
}

double CircleSpace::eval(const GradedVector& u, double x) const {
    double p, dp, d2p;
    trig_eval(u.data, band_, x, p, dp, d2p);
    return p;
}

double CircleSpace::norm(const GradedVector& u, int k) const {
    if ((int)u.data.size() != dimension()) throw config_error("CircleSpace: payload size mismatch");
    if (k < 0 || k > kmax_) throw config_error("CircleSpace: grade out of range");
    double m = 0.0;
    GradedVector d = u;
    for (int order = 0; order <= k; ++order) {
        m = std::max(m, trig_sup(d.data, band_));
        if (order < k) d = derivative(d);
    }
    return m;
}

SmoothingFamily mollifier_smoothing(const PeriodicGridSpec& grid,
                                    std::function<double(double)> gamma) {
    if (grid.size < 8 || grid.band < 1) throw config_error("mollifier_smoothing: bad grid spec");
    check_profile(gamma);
    const int G = grid.size, band = grid.band;
    SmoothingFamily fam;
    fam.name = "mollifier";
    fam.apply = [G, band, gamma](double theta, const GradedVector& x) {
        check_theta(theta);
        const double h = 2.0 * M_PI / G;
        const int K = (int)std::ceil(2.0 / (theta * h));
        if (2 * K + 1 > G)
            throw config_error("mollifier_smoothing: kernel support exceeds the grid");
        std::vector<double> w(K + 1);
        double total = 0.0;
        for (int k = 1; k <= K; ++k) {
            w[k] = gamma(theta * k * h);
            total += 2.0 * w[k];
        }
        w[0] = gamma(0.0);
        total += w[0];
        auto symbol = [&](int l) {
            double s = w[0];
            for (int k = 1; k <= K; ++k) s += 2.0 * w[k] * std::cos(l * k * h);
            return s / total;
        };
        return apply_symbol(x, band, symbol);
    };
    return fam;
}

SmoothingFamily spectral_smoothing(int band, std::function<double(double)> gamma) {
    if (band < 1) throw config_error("spectral_smoothing: band must be positive");
    check_profile(gamma);
    SmoothingFamily fam;
    fam.name = "spectral";
    fam.apply = [band, gamma](double theta, const GradedVector& x) {
        check_theta(theta);
        return apply_symbol(x, band, [&](int l) { return l == 0 ? 1.0 : gamma(l / theta); });
    };
    return fam;
}

SmoothingFamily sequence_smoothing(std::function<double(double)> gamma) {
    check_profile(gamma);
    SmoothingFamily fam;
    fam.name = "sequence";
    fam.apply = [gamma](double theta, const GradedVector& x) {
        check_theta(theta);
        GradedVector out = x;
        for (size_t j = 1; j < out.data.size(); ++j) out.data[j] *= gamma(j / theta);
        return out;
    };
    return fam;
}

SmoothingFamily identity_smoothing() {
    SmoothingFamily fam;
    fam.name = "identity";
    fam.apply = [](double theta, const GradedVector& x) {
        check_theta(theta);
        return x;
    };
    return fam;
}

DiagonalToy::DiagonalToy(SequenceSpace space, GradedVector g, int m, double delta)
    : space_(space), g_(std::move(g)), m_(m), delta_(delta) {
    if ((int)g_.data.size() != space_.dimension())
        throw config_error("DiagonalToy: rhs size mismatch");
    if (m < 1 || 3 * m + 4 > space_.k_max())
        throw config_error("DiagonalToy: grading does not reach 3m+4");
}

GradedVector DiagonalToy::F(const GradedVector& x) const {
    GradedVector out = x;
    for (size_t j = 0; j < out.data.size(); ++j)
        out.data[j] = x.data[j] + x.data[j] * x.data[j] - g_.data[j];
    return out;
}

GradedVector DiagonalToy::DF(const GradedVector& x, const GradedVector& v) const {
    GradedVector out = v;
    for (size_t j = 0; j < out.data.size(); ++j) out.data[j] = (1.0 + 2.0 * x.data[j]) * v.data[j];
    return out;
}

GradedVector DiagonalToy::V(const GradedVector& x, const GradedVector&,
                            const GradedVector& a) const {
    GradedVector out = a;
    for (size_t j = 0; j < out.data.size(); ++j) {
        const double den = 1.0 + 2.0 * x.data[j];
        out.data[j] = std::abs(den) > 0.1 ? a.data[j] / den : 0.0;
    }
    return out;
}

GradedVector DiagonalToy::decaying_rhs(const SequenceSpace& s, int m, double target) {
    GradedVector g;
    g.data.resize(s.dimension());
    for (int j = 0; j < s.dimension(); ++j) g.data[j] = std::pow(1.0 + j, -18.0);
    const double n = s.norm(g, 2 * m);
    for (double& c : g.data) c *= target / n;
    return g;
}

CircleToy::CircleToy(CircleSpace space, GradedVector g, int m, double delta)
    : space_(space), g_(std::move(g)), m_(m), delta_(delta) {
    if ((int)g_.data.size() != space_.dimension())
        throw config_error("CircleToy: rhs size mismatch");
    if (m < 1 || 3 * m + 4 > space_.k_max())
        throw config_error("CircleToy: grading does not reach 3m+4");
}

GradedVector CircleToy::F(const GradedVector& u) const {
    GradedVector out = space_.product(u, space_.derivative(u));
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += u.data[i] - g_.data[i];
    return out;
}

GradedVector CircleToy::DF(const GradedVector& u, const GradedVector& v) const {
    GradedVector a = space_.product(u, space_.derivative(v));
    const GradedVector b = space_.product(space_.derivative(u), v);
    for (size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i] + v.data[i];
    return a;
}

GradedVector CircleToy::V(const GradedVector& u, const GradedVector&,
                          const GradedVector& a) const {
    const int D = space_.dimension();
    std::vector<double> A(D * D);
    GradedVector e;
    e.data.assign(D, 0.0);
    for (int i = 0; i < D; ++i) {
        e.data[i] = 1.0;
        const GradedVector col = DF(u, e);
        for (int r = 0; r < D; ++r) A[r * D + i] = col.data[r];
        e.data[i] = 0.0;
    }
    GradedVector out;
    out.data = solve_dense(A, a.data);
    return out;
}

GradedVector CircleToy::decaying_rhs(const CircleSpace& s, int m, double target) {
    GradedVector g;
    g.data.assign(s.dimension(), 0.0);
    for (int l = 1; l <= s.band(); ++l) {
        g.data[l] = std::pow(0.3, l);
        g.data[s.band() + l] = 0.5 * std::pow(0.3, l) * (l % 2 ? 1.0 : -1.0);
    }
    const double n = s.norm(g, 2 * m);
    for (double& c : g.data) c *= target / n;
    return g;
}

GradedVector CircleToy::random_rhs(const CircleSpace& s, int m, double target, Rng& rng) {
    GradedVector g;
    g.data.resize(s.dimension());
    for (double& c : g.data) c = rng.uniform(-1.0, 1.0);
    const double n = s.norm(g, 2 * m);
    for (double& c : g.data) c *= target / n;
    return g;
}

RunResult run(const TameProblem& problem, const SmoothingFamily& smoothing, double theta0,
              int budget, double tol, bool override_precondition) {
    if (!(theta0 >= 2.0)) throw config_error("run: theta0 must be >= 2");
    if (budget < 0) throw config_error("run: negative budget");
    const GradedSpace& sp = problem.space();
    const int m = problem.m();

    RunResult rr;
    IterationTrace& tr = rr.trace;
    tr.theta0 = theta0;
    tr.m = m;
    tr.delta = problem.delta();

    GradedVector x;
    x.data.assign(sp.dimension(), 0.0);
    GradedVector Fx = problem.F(x);
    double res = sp.norm(Fx, 2 * m);
    tr.f0_2m = res;
    tr.precondition_ok = res <= std::pow(theta0, -4.0);
    tr.overridden = override_precondition;
    if (!tr.precondition_ok && !override_precondition)
        throw config_error("run: norm(F(0), 2m) exceeds theta0^-4; override to proceed");

    double theta = theta0;
    while (true) {
        if (res <= tol) {
            tr.converged = true;
            break;
        }
        if (sp.norm(x, 3 * m) >= problem.delta()) {
            tr.trust_violation = true;
            break;
        }
        if ((int)tr.steps.size() >= budget) break;

        GradedVector v = problem.V(x, Fx, Fx);
        for (double& c : v.data) c = -c;

        StepRecord rec;
        rec.theta = theta;
        rec.res_2m = res;
        rec.v_m = sp.norm(v, m);
        rec.v_3m = sp.norm(v, 3 * m);
        rec.v_3m3 = sp.norm(v, 3 * m + 3);
        rec.x_3m = sp.norm(x, 3 * m);
        tr.steps.push_back(rec);

        const GradedVector sv = smoothing.apply(theta, v);
        for (size_t i = 0; i < x.data.size(); ++i) x.data[i] += sv.data[i];
        theta = std::pow(theta, 1.25);
        Fx = problem.F(x);
        res = sp.norm(Fx, 2 * m);
    }

    tr.final_res = res;
    tr.final_x_m = sp.norm(x, m);
    tr.final_x_3m = sp.norm(x, 3 * m);
    rr.x = std::move(x);
    return rr;
}

SmoothingReport verify_smoothing(const SmoothingFamily& fam, const GradedSpace& space,
                                 const std::vector<GradedVector>& corpus, int grade_max,
                                 const std::vector<double>& theta_grid) {
    if (corpus.empty()) throw config_error("verify_smoothing: empty corpus");
    if (theta_grid.empty()) throw config_error("verify_smoothing: empty theta grid");
    if (grade_max < 0 || grade_max > space.k_max())
        throw config_error("verify_smoothing: grade_max out of range");

    std::vector<double> grid = theta_grid;
    std::sort(grid.begin(), grid.end());
    const int base = (int)grid.size();
    grid.push_back(2.0 * grid.back());  // range doubling probe

    const int nf = (int)corpus.size(), nt = (int)grid.size(), ng = grade_max + 1;
    // norm tables: [f][k], [t][f][k]
    std::vector<std::vector<double>> nx(nf, std::vector<double>(ng));
    std::vector<std::vector<std::vector<double>>> ns(nt), nr(nt);
    for (int f = 0; f < nf; ++f)
        for (int k = 0; k < ng; ++k) nx[f][k] = space.norm(corpus[f], k);
    for (int t = 0; t < nt; ++t) {
        ns[t].assign(nf, std::vector<double>(ng));
        nr[t].assign(nf, std::vector<double>(ng));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
        for (int f = 0; f < nf; ++f) {
            const GradedVector s = fam.apply(grid[t], corpus[f]);
            GradedVector r = corpus[f];
            for (size_t i = 0; i < r.data.size(); ++i) r.data[i] -= s.data[i];
            for (int k = 0; k < ng; ++k) {
                ns[t][f][k] = space.norm(s, k);
                nr[t][f][k] = space.norm(r, k);
            }
        }
    }

    SmoothingReport rep;
    rep.theta_grid.assign(grid.begin(), grid.begin() + base);
    rep.finite = true;
    rep.stable = true;
    for (int k1 = 0; k1 <= grade_max; ++k1)
        for (int k2 = k1; k2 <= grade_max; ++k2) {
            double cs = 0.0, cr = 0.0, cs_ext = 0.0, cr_ext = 0.0;
            for (int t = 0; t < nt; ++t) {
                const double gap = std::pow(grid[t], k2 - k1);
                for (int f = 0; f < nf; ++f) {
                    const double r1 = nx[f][k1] > 0.0 ? ns[t][f][k2] / (gap * nx[f][k1]) : 0.0;
                    const double r2 = nx[f][k2] > 0.0 ? nr[t][f][k1] * gap / nx[f][k2] : 0.0;
                    cs_ext = std::max(cs_ext, r1);
                    cr_ext = std::max(cr_ext, r2);
                    if (t < base) {
                        cs = std::max(cs, r1);
                        cr = std::max(cr, r2);
                    }
                }
            }
            SmoothingPairStat st;
            st.k1 = k1;
            st.k2 = k2;
            st.c_smooth = cs;
            st.c_remainder = cr;
            st.drift_smooth = cs > 0.0 ? cs_ext / cs : 1.0;
            st.drift_remainder = cr > 0.0 ? cr_ext / cr : 1.0;
            rep.pairs.push_back(st);
            rep.finite = rep.finite && std::isfinite(cs) && std::isfinite(cr);
            rep.stable = rep.stable && st.drift_smooth < 2.0 && st.drift_remainder < 2.0;
        }

    rep.limit_row.resize(base);
    for (int t = 0; t < base; ++t) {
        double m = 0.0;
        for (int f = 0; f < nf; ++f) m = std::max(m, nr[t][f][0]);
        rep.limit_row[t] = m;
    }
    rep.limit_decreasing = true;
    for (int t = 1; t < base; ++t)
        rep.limit_decreasing =
            rep.limit_decreasing && rep.limit_row[t] <= rep.limit_row[t - 1] * (1.0 + 1e-12);
    rep.pass = rep.finite && rep.stable && rep.limit_decreasing;
    return rep;
}

std::vector<InterpolationEntry> interpolation_check(
    const GradedSpace& space, const std::vector<GradedVector>& corpus,
    const std::vector<std::array<int, 3>>& triples) {
    if (corpus.empty()) throw config_error("interpolation_check: empty corpus");
    for (const auto& f : corpus)
        if (!(space.norm(f, 0) > 0.0))
            throw config_error("interpolation_check: corpus must consist of nonzero vectors");

    std::vector<InterpolationEntry> table;
    for (const auto& t : triples) {
        const int k1 = t[0], k2 = t[1], k3 = t[2];
        if (!(0 <= k1 && k1 <= k2 && k2 <= k3 && k3 <= space.k_max()))
            throw config_error("interpolation_check: bad grade triple");
        double c = 0.0;
        for (const auto& f : corpus) {
            const double n1 = space.norm(f, k1), n2 = space.norm(f, k2), n3 = space.norm(f, k3);
            const double lg = (k3 - k1) * std::log(n2) - (k3 - k2) * std::log(n1) -
                              (k2 - k1) * std::log(n3);
            c = std::max(c, std::exp(lg));
        }
        table.push_back({k1, k2, k3, c});
    }
    return table;
}

AuditReport audit_trace(const IterationTrace& trace, int m, double delta) {
    AuditReport rep;
    const int n = (int)trace.steps.size();
    rep.cond_i.resize(n);
    rep.cond_ii.resize(n);
    rep.cond_iii.resize(n);
    if (n == 0) {
        rep.pass = true;
        return rep;
    }

    // smallest constants making II and III hold on the recorded data
    double M = 0.0, D = 0.0;
    bool finite = true;
    for (int j = 0; j < n; ++j) {
        const auto& s = trace.steps[j];
        M = std::max(M, s.v_3m3 * std::pow(s.theta, 3.0));
        const double xn = j + 1 < n ? trace.steps[j + 1].x_3m : trace.final_x_3m;
        D = std::max(D, (1.0 + xn) / (std::pow(s.theta, 2.0 * m) * (1.0 + s.x_3m)));
        finite = finite && std::isfinite(s.theta) && std::isfinite(s.res_2m) &&
                 std::isfinite(s.v_3m3) && std::isfinite(xn);
    }
    rep.fitted_m = M;
    rep.fitted_d = D;

    const double slack = 1.0 + 1e-9;
    bool all = finite;
    for (int j = 0; j < n; ++j) {
        const auto& s = trace.steps[j];
        rep.cond_i[j] = s.x_3m < delta && s.res_2m <= std::pow(s.theta, -4.0);
        rep.cond_ii[j] = std::isfinite(s.v_3m3) && s.v_3m3 <= M * std::pow(s.theta, -3.0) * slack;
        const double xn = j + 1 < n ? trace.steps[j + 1].x_3m : trace.final_x_3m;
        rep.cond_iii[j] = std::isfinite(xn) &&
                          1.0 + xn <= D * std::pow(s.theta, 2.0 * m) * (1.0 + s.x_3m) * slack;
        all = all && rep.cond_i[j] && rep.cond_ii[j] && rep.cond_iii[j];
        if (rep.first_violation.empty()) {
            if (!rep.cond_i[j]) {
                rep.first_violation = "I";
                rep.first_violation_step = j;
            } else if (!rep.cond_ii[j]) {
                rep.first_violation = "II";
                rep.first_violation_step = j;
            } else if (!rep.cond_iii[j]) {
                rep.first_violation = "III";
                rep.first_violation_step = j;
            }
        }
    }
    rep.pass = all;
    return rep;
}

std::string trace_to_json(const IterationTrace& trace) {
    ordered_json steps = ordered_json::array();
    for (const auto& s : trace.steps) {
        steps.push_back({{"theta", s.theta},
                         {"res_2m", s.res_2m},
                         {"v_m", s.v_m},
                         {"v_3m", s.v_3m},
                         {"v_3m3", s.v_3m3},
                         {"x_3m", s.x_3m}});
    }
    ordered_json j{{"theta0", trace.theta0},
                   {"m", trace.m},
                   {"delta", trace.delta},
                   {"f0_2m", trace.f0_2m},
                   {"precondition_ok", trace.precondition_ok},
                   {"overridden", trace.overridden},
                   {"converged", trace.converged},
                   {"trust_violation", trace.trust_violation},
                   {"steps", steps},
                   {"final_res", trace.final_res},
                   {"final_x_m", trace.final_x_m},
                   {"final_x_3m", trace.final_x_3m}};
    return json_round12(j).dump(2);
}

} // namespace z2glue
