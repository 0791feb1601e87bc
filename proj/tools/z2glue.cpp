#include <CLI11.hpp>

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "z2glue/branched_field.hpp"
#include "z2glue/emit.hpp"
#include "z2glue/errors.hpp"
#include "z2glue/flat_solver.hpp"
#include "z2glue/models.hpp"
#include "z2glue/morse_forge.hpp"
#include "z2glue/nash_moser.hpp"
#include "z2glue/preglue.hpp"
#include "z2glue/profiles.hpp"
#include "z2glue/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace z2glue;

namespace {

double cutoff(double u) { return plateau(u); }

/** All tunables in one place so config-file overrides can target them. */
struct Options {
    std::string config, out, format;

    int n = 3;
    std::vector<double> h;
    std::vector<double> a;
    int samples = 25;
    double smax = 10.0;
    double scale = 0.1;

    int grid = 512;
    int l = 0;
    int ntheta = 16;
    int lmax = 3;
    double R = 1.0;
    double tol = 1e-3;
    unsigned seed = 1;
    double op_scale = 0.1;

    double sigma = 0.1;
    double delta_outer = 0.2;
    int nmult = 4;
    double tau = -1.0;
    bool p3 = false;
    double cubic = 0.1;
    std::vector<double> eps{0.0125, 0.00625, 0.003125, 0.0015625};
    double eps_one = 0.01;
    int wsamples = 200;

    std::string demo = "circle";
    double theta0 = 4.0;
    int band = 8;
    int kmax = 16;
    int m = 4;
    double delta_trust = -1.0;
    int dim = 12;
    double gscale = 1.0;
    int budget = 25;
    double runtol = 1e-10;
    bool override_pre = false;
    std::string family = "spectral";
    int grades = 6;
    int corpus = 50;
    unsigned nmseed = 2026;
    std::vector<double> thetas{2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
    int kernel = 4096;

    double M = 10.0;
    int morse_n = 3;
    int morse_r = 1;
    bool positivity = false;
};

nlohmann::json file_cfg;
std::vector<std::function<void()>> overrides;

template <class T>
CLI::Option* opt_cfg(CLI::App* cmd, const std::string& flag, T& var, const std::string& help,
                     const std::string& key) {
    CLI::Option* o = cmd->add_option(flag, var, help);
    if constexpr (std::is_same_v<T, std::vector<double>>) o->delimiter(',');
    overrides.push_back([o, &var, key]() {
        if (o->count() == 0 && file_cfg.contains(key)) var = file_cfg.at(key).get<T>();
    });
    return o;
}

/** Frees the short -h so a subcommand can expose an --h option. */
void long_help_only(CLI::App* cmd) { cmd->set_help_flag("--help", "print help and exit"); }

CLI::Option* flag_cfg(CLI::App* cmd, const std::string& flag, bool& var, const std::string& help,
                      const std::string& key) {
    CLI::Option* o = cmd->add_flag(flag, var, help);
    overrides.push_back([o, &var, key]() {
        if (o->count() == 0 && file_cfg.contains(key)) var = file_cfg.at(key).get<bool>();
    });
    return o;
}

/** Writes to the output path, or stdout when none is set; exit 1 on failure. */
int write_text(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::fputs(text.c_str(), stdout);
        return 0;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        std::fprintf(stderr, "cannot open output path %s\n", path.c_str());
        return 1;
    }
    os << text;
    os.flush();
    if (!os) {
        std::fprintf(stderr, "write failed for %s\n", path.c_str());
        return 1;
    }
    return 0;
}

std::string json_text(const ordered_json& j) { return json_round12(j).dump(2) + "\n"; }

int emit_json(const ordered_json& j, const Options& o) { return write_text(json_text(j), o.out); }

std::vector<double> default_h(int n, const std::vector<double>& given) {
    if (!given.empty()) return given;
    return std::vector<double>((size_t)std::max(0, n - 1), 1.0);
}

ModelParams model_of(const Options& o) {
    ModelParams p{o.n, default_h(o.n, o.h)};
    validate(p);
    return p;
}

int run_model_coeffs(const Options& o) {
    const QuadricCoeffs qc = asymptotic_coeffs(model_of(o));
    ordered_json j;
    j["a0"] = qc.a0;
    j["a"] = qc.a;
    return emit_json(j, o);
}

int run_model_solve_h(const Options& o) {
    std::vector<double> target = o.a;
    if (target.empty()) target.assign((size_t)std::max(0, o.n - 1), M_PI / 8.0);
    const ModelParams sol = solve_h_for_a(o.n, target);
    const QuadricCoeffs qc = asymptotic_coeffs(sol);
    double rel = 0.0, top = 0.0;
    for (size_t i = 0; i < target.size(); ++i) {
        rel = std::max(rel, std::abs(qc.a[i] - target[i]));
        top = std::max(top, std::abs(target[i]));
    }
    rel /= top > 0.0 ? top : 1.0;
    ordered_json j;
    j["h"] = sol.h;
    j["a_target"] = target;
    j["a_achieved"] = qc.a;
    j["rel_err"] = rel;
    return emit_json(j, o);
}

int run_model_graph(const Options& o) {
    const ModelParams p = model_of(o);
    const QuadricCoeffs qc = asymptotic_coeffs(p);
    const double beta1_inf = beta_transverse_inf(p, 0);
    const double gap = std::abs(beta1_inf - 2.0 * qc.a[0]);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i <= o.samples; ++i) {
        const double s = o.smax * i / o.samples;
        std::vector<double> row{s};
        for (int k = 0; k < p.n - 1; ++k) row.push_back(beta_transverse(p, k, s));
        row.push_back(beta_axial(p, s));
        rows.push_back(row);
    }
    if (o.format == "csv") {
        std::ostringstream os;
        std::vector<std::string> names{"s"};
        for (int k = 0; k < p.n - 1; ++k) names.push_back("beta" + std::to_string(k + 1));
        names.push_back("beta_axial");
        csv_header(os, names);
        for (const auto& row : rows) csv_row(os, row);
        const int rc = write_text(os.str(), o.out);
        return rc != 0 ? rc : (gap <= 1e-6 ? 0 : 1);
    }
    ordered_json j;
    j["beta1_inf"] = beta1_inf;
    j["two_a1"] = 2.0 * qc.a[0];
    j["gap"] = gap;
    j["rows"] = rows;
    const int rc = emit_json(j, o);
    return rc != 0 ? rc : (gap <= 1e-6 ? 0 : 1);
}

int run_model_classify(const Options& o) {
    const ModelParams p = model_of(o);
    const QuadricCoeffs qc = asymptotic_coeffs(p);
    FieldFn field = [qc](const std::vector<double>& x) {
        std::vector<double> g(x.size());
        for (size_t i = 0; i < x.size(); ++i) g[i] = -2.0 * qc.a[i] * x[i];
        return g;
    };
    const ZeroClassification cls =
        classify_zero(field, std::vector<double>((size_t)p.n, 0.0), o.scale);
    ordered_json j;
    j["is_regular"] = cls.is_regular;
    j["index_pair"] = {std::min(cls.index_pair.first, cls.index_pair.second),
                       std::max(cls.index_pair.first, cls.index_pair.second)};
    j["coeffs"] = cls.quadric.a;
    j["fit_residual"] = cls.fit_residual;
    j["fit_ok"] = cls.quadratic_fit_ok;
    const int rc = emit_json(j, o);
    return rc != 0 ? rc : (cls.is_regular ? 0 : 1);
}

/** Manufactured radial mode u = r^mu (R - r)^3 with its exact source; the
 *  cubic rim factor keeps the truncation error generic for the stencil. */
double mode_error(int l, double R, int J, double* leading) {
    const double mu = l + 0.5;
    const std::vector<double> r = graded_mesh(R, J);
    ModeSource src{l, std::vector<double>(r.size(), 0.0), R};
    for (size_t i = 1; i + 1 < r.size(); ++i)
        src.rho[i] = -3.0 * R * R * (2.0 * mu + 1.0) * std::pow(r[i], mu - 1.0) +
                     3.0 * R * (4.0 * mu + 4.0) * std::pow(r[i], mu) -
                     (6.0 * mu + 9.0) * std::pow(r[i], mu + 1.0);
    const RadialSolution sol = solve_mode(src, J);
    if (leading) *leading = sol.leading_coeff;
    double err = 0.0, top = 0.0;
    for (size_t i = 0; i < r.size(); ++i) {
        const double exact = std::pow(r[i], mu) * std::pow(R - r[i], 3.0);
        err = std::max(err, std::abs(sol.u[i] - exact));
        top = std::max(top, std::abs(exact));
    }
    return err / top;
}

int run_flat_solve(const Options& o) {
    if (o.grid < 256) throw config_error("flat solve: grid must be at least 256");
    double leading = 0.0;
    const double e4 = mode_error(o.l, o.R, o.grid / 4, nullptr);
    const double e2 = mode_error(o.l, o.R, o.grid / 2, nullptr);
    const double e1 = mode_error(o.l, o.R, o.grid, &leading);
    ordered_json j;
    j["grid"] = o.grid;
    j["l"] = o.l;
    j["rel_err"] = e1;
    j["order"] = std::log2(e2 / e1);
    j["order_coarse"] = std::log2(e4 / e2);
    j["leading_coeff"] = leading;
    j["leading_err"] = std::abs(leading - o.R * o.R * o.R) / (o.R * o.R * o.R);
    const int rc = emit_json(j, o);
    return rc != 0 ? rc : (e1 <= o.tol ? 0 : 1);
}

/** Half-integer source supported on the annulus [0.25 R, 0.55 R]. */
BranchedGrid annulus_source(const Options& o) {
    BranchedGrid rho = make_branched_mesh(o.R, o.grid, o.ntheta);
    Rng rng(o.seed);
    const double re0 = rng.uniform(-1.0, 1.0), im0 = rng.uniform(-1.0, 1.0);
    const double re1 = rng.uniform(-1.0, 1.0), im1 = rng.uniform(-1.0, 1.0);
    for (size_t ir = 0; ir < rho.r_nodes.size(); ++ir) {
        const double r = rho.r_nodes[ir];
        const double w = smooth_step((r - 0.25 * o.R) / (0.1 * o.R)) *
                         smooth_step((0.55 * o.R - r) / (0.1 * o.R));
        if (w == 0.0) continue;
        for (int jth = 0; jth < rho.n_theta; ++jth) {
            const double th = rho.theta(jth);
            rho.stored(ir, jth) = w * (re0 * std::cos(0.5 * th) - im0 * std::sin(0.5 * th) +
                                       re1 * std::cos(1.5 * th) - im1 * std::sin(1.5 * th));
        }
    }
    return rho;
}

int run_flat_ab(const Options& o) {
    const AbExtraction ext = ab_of_source(annulus_source(o), o.R);
    ordered_json j;
    j["A"] = {ext.fit.A.real(), ext.fit.A.imag()};
    j["B"] = {ext.fit.B.real(), ext.fit.B.imag()};
    j["residual"] = ext.fit.residual;
    j["exact_region"] = ext.exact_region;
    return emit_json(j, o);
}

int run_flat_perturbed(const Options& o) {
    TangentialOp op;
    op.rr = 0.30 * o.op_scale;
    op.r = 0.20 * o.op_scale;
    op.tt = 0.25 * o.op_scale;
    op.t = 0.10 * o.op_scale;
    op.rt = 0.05 * o.op_scale;
    op.id = 0.20 * o.op_scale;
    const PerturbedSolution sol = perturbed_solve(annulus_source(o), op, o.R, o.lmax);
    ordered_json j;
    j["iterations"] = sol.iterations;
    j["residual"] = sol.residual;
    j["contraction_factor"] = sol.contraction_factor;
    j["converged"] = sol.converged;
    const int rc = emit_json(j, o);
    return rc != 0 ? rc : (sol.converged ? 0 : 1);
}

int run_preglue_scan(const Options& o) {
    const bool csv = o.format != "json";
    std::vector<double> eps = o.eps;
    const ModelParams model = model_of(o);
    ScanReport rep;
    if (!eps.empty()) {
        const Background b{asymptotic_coeffs(model), o.p3 ? o.cubic : 0.0};
        GlueConfig tmpl;
        tmpl.n = o.n;
        tmpl.eps = eps.front();
        tmpl.sigma = o.sigma;
        tmpl.delta = o.delta_outer;
        tmpl.N = o.nmult;
        tmpl.tau = o.tau;
        rep = error_scan(b, model, tmpl, eps);
    }
    if (csv) {
        std::ostringstream os;
        csv_header(os, {"eps", "sup_primitive_err", "sup_div", "weighted_sup"});
        for (const auto& row : rep.rows)
            csv_row(os, {row.eps, row.sup_primitive, row.sup_div, row.weighted_sup});
        if (!rep.rows.empty()) {
            os << "slope_primitive," << fmt12(rep.slope_primitive) << ",,\n";
            os << "slope_div," << fmt12(rep.slope_div) << ",,\n";
            os << "slope_weighted," << fmt12(rep.slope_weighted) << ",,\n";
        }
        const int rc = write_text(os.str(), o.out);
        return rc != 0 ? rc : (eps.empty() || rep.monotone ? 0 : 1);
    }
    ordered_json j;
    j["rows"] = ordered_json::array();
    for (const auto& row : rep.rows)
        j["rows"].push_back({{"eps", row.eps},
                             {"sup_primitive_err", row.sup_primitive},
                             {"sup_div", row.sup_div},
                             {"weighted_sup", row.weighted_sup}});
    j["slope_primitive"] = rep.slope_primitive;
    j["slope_div"] = rep.slope_div;
    j["slope_weighted"] = rep.slope_weighted;
    j["monotone"] = rep.monotone;
    const int rc = emit_json(j, o);
    return rc != 0 ? rc : (eps.empty() || rep.monotone ? 0 : 1);
}

int run_preglue_weight(const Options& o) {
    GlueConfig cfg;
    cfg.n = o.n;
    cfg.eps = o.eps_one;
    cfg.sigma = o.sigma;
    cfg.delta = o.delta_outer;
    cfg.N = o.nmult;
    cfg.tau = o.tau;
    validate(cfg);
    const auto bp = weight_breakpoints(cfg);
    std::vector<std::array<double, 2>> rows;
    const double lo = cfg.eps / 4.0, hi = 1.0;
    for (int i = 0; i <= o.wsamples; ++i) {
        const double rho = lo * std::pow(hi / lo, (double)i / o.wsamples);
        rows.push_back({rho, weight(cfg, rho)});
    }
    if (o.format == "csv") {
        std::ostringstream os;
        csv_header(os, {"rho", "weight"});
        for (const auto& row : rows) csv_row(os, {row[0], row[1]});
        return write_text(os.str(), o.out);
    }
    ordered_json j;
    j["breakpoints"] = {bp[0], bp[1], bp[2], bp[3]};
    j["rows"] = ordered_json::array();
    for (const auto& row : rows) j["rows"].push_back({row[0], row[1]});
    return emit_json(j, o);
}

RunResult nm_demo_run(const Options& o) {
    const double trust = o.delta_trust;
    if (o.demo == "circle") {
        // sized so the theta0 = 4 and theta0 = 8 schedules both start inside
        // the residual precondition and the trust radius
        const double target = o.gscale * 0.9 * std::pow(8.0, -4.0);
        CircleSpace sp(o.band, o.kmax);
        CircleToy prob(sp, CircleToy::decaying_rhs(sp, o.m, target), o.m,
                       trust > 0.0 ? trust : 5.0);
        return run(prob, spectral_smoothing(o.band, cutoff), o.theta0, o.budget, o.runtol,
                   o.override_pre);
    }
    if (o.demo == "diag") {
        // deliberately three times past the precondition bound, so this demo
        // is the documented use of --override-precondition
        const double target = o.gscale * 3.0 * std::pow(o.theta0, -4.0);
        SequenceSpace sp(o.dim, o.kmax, true);
        DiagonalToy prob(sp, DiagonalToy::decaying_rhs(sp, o.m, target), o.m,
                         trust > 0.0 ? trust : 1.0);
        return run(prob, identity_smoothing(), o.theta0, o.budget, o.runtol, o.override_pre);
    }
    throw config_error("nm: demo must be circle or diag");
}

int run_nm_run(const Options& o) {
    const RunResult rr = nm_demo_run(o);
    if (o.format == "csv") {
        std::ostringstream os;
        csv_header(os, {"step", "theta", "res_2m", "v_m", "v_3m", "v_3m3", "x_3m"});
        for (size_t i = 0; i < rr.trace.steps.size(); ++i) {
            const StepRecord& s = rr.trace.steps[i];
            csv_row(os, {(double)i, s.theta, s.res_2m, s.v_m, s.v_3m, s.v_3m3, s.x_3m});
        }
        const int rc = write_text(os.str(), o.out);
        return rc != 0 ? rc : (rr.trace.converged ? 0 : 1);
    }
    const int rc = write_text(trace_to_json(rr.trace) + "\n", o.out);
    return rc != 0 ? rc : (rr.trace.converged ? 0 : 1);
}

int run_nm_audit(const Options& o) {
    const RunResult rr = nm_demo_run(o);
    const double trust = o.delta_trust > 0.0 ? o.delta_trust : (o.demo == "circle" ? 5.0 : 1.0);
    const AuditReport audit = audit_trace(rr.trace, o.m, trust);
    ordered_json j;
    j["pass"] = audit.pass;
    j["converged"] = rr.trace.converged;
    j["fitted_m"] = audit.fitted_m;
    j["fitted_d"] = audit.fitted_d;
    j["first_violation"] = audit.first_violation;
    j["first_violation_step"] = audit.first_violation_step;
    j["cond_i"] = audit.cond_i;
    j["cond_ii"] = audit.cond_ii;
    j["cond_iii"] = audit.cond_iii;
    const int rc = emit_json(j, o);
    return rc != 0 ? rc : (audit.pass && rr.trace.converged ? 0 : 1);
}

std::vector<GradedVector> random_corpus(int count, int dim, unsigned seed) {
    Rng rng(seed);
    std::vector<GradedVector> corpus(count);
    for (auto& v : corpus) {
        v.data.resize(dim);
        for (double& c : v.data) c = rng.uniform(-1.0, 1.0);
    }
    return corpus;
}

int run_nm_verify_smoothing(const Options& o) {
    CircleSpace sp(o.band, std::max(o.grades, 2));
    SmoothingFamily fam;
    if (o.family == "spectral")
        fam = spectral_smoothing(o.band, cutoff);
    else if (o.family == "mollifier")
        fam = mollifier_smoothing({o.kernel, o.band}, cutoff);
    else
        throw config_error("nm verify-smoothing: family must be spectral or mollifier");
    const auto corpus = random_corpus(o.corpus, sp.dimension(), o.nmseed);
    const SmoothingReport rep = verify_smoothing(fam, sp, corpus, o.grades, o.thetas);
    ordered_json j;
    j["family"] = o.family;
    j["pairs"] = ordered_json::array();
    for (const auto& p : rep.pairs)
        j["pairs"].push_back({{"k1", p.k1},
                              {"k2", p.k2},
                              {"c_smooth", p.c_smooth},
                              {"c_remainder", p.c_remainder},
                              {"drift_smooth", p.drift_smooth},
                              {"drift_remainder", p.drift_remainder}});
    j["theta_grid"] = rep.theta_grid;
    j["limit_row"] = rep.limit_row;
    j["finite"] = rep.finite;
    j["stable"] = rep.stable;
    j["limit_decreasing"] = rep.limit_decreasing;
    j["pass"] = rep.pass;
    const int rc = emit_json(j, o);
    return rc != 0 ? rc : (rep.pass ? 0 : 1);
}

int run_nm_interp(const Options& o) {
    CircleSpace sp(o.band, std::max(o.grades, 2));
    const auto corpus = random_corpus(o.corpus, sp.dimension(), o.nmseed);
    std::vector<std::array<int, 3>> triples;
    for (int k1 = 0; k1 < o.grades; ++k1)
        for (int k2 = k1 + 1; k2 < o.grades; ++k2)
            for (int k3 = k2 + 1; k3 <= o.grades; ++k3) triples.push_back({k1, k2, k3});
    const auto entries = interpolation_check(sp, corpus, triples);
    double max_c = 0.0;
    for (const auto& e : entries) max_c = std::max(max_c, e.c);

    // single Fourier mode: every interpolation ratio is exactly 1
    GradedVector mode;
    mode.data.assign(sp.dimension(), 0.0);
    mode.data[3] = 1.0;
    const auto eq = interpolation_check(sp, {mode}, {{0, o.grades / 2, o.grades}});
    const double equality_gap = std::abs(eq.front().c - 1.0);

    ordered_json j;
    j["entries"] = ordered_json::array();
    for (const auto& e : entries)
        j["entries"].push_back({{"k1", e.k1}, {"k2", e.k2}, {"k3", e.k3}, {"c", e.c}});
    j["max_c"] = max_c;
    j["equality_gap"] = equality_gap;
    const int rc = emit_json(j, o);
    return rc != 0 ? rc : (std::isfinite(max_c) && equality_gap <= 1e-10 ? 0 : 1);
}

int run_morse_verify(const Options& o) {
    const BirthConfig cfg = make_birth_config(o.M, o.morse_n, o.morse_r);
    const BirthReport rep = verify_birth(cfg, o.positivity);
    const int rc = write_text(birth_report_to_json(rep) + "\n", o.out);
    return rc != 0 ? rc : (rep.pass ? 0 : 1);
}

int run_morse_lift(const Options& o) {
    const LiftedBirth lifted = lift_to_rn(make_birth_config(o.M, o.morse_n, o.morse_r));
    ordered_json j;
    j["n"] = lifted.n();
    j["r"] = lifted.r();
    j["critical"] = ordered_json::array();
    for (const auto& cp : lifted.critical_points())
        j["critical"].push_back({{"location", cp.location},
                                 {"index", cp.index},
                                 {"hessian_eigs", cp.hessian_eigs}});
    return emit_json(j, o);
}

} // namespace

int main(int argc, char** argv) {
#ifdef _OPENMP
    if (const char* cap = std::getenv("Z2GLUE_THREADS")) {
        const int v = std::atoi(cap);
        if (v > 0) omp_set_num_threads(std::min(v, omp_get_max_threads()));
    }
#endif
    Options o;
    CLI::App app{"desk-scale verification toolkit for a gluing construction"};
    app.require_subcommand(1);
    app.add_option("--config", o.config, "JSON config file; command-line flags take precedence");
    app.add_option("--out", o.out, "output path (default: stdout)");
    app.add_option("--format", o.format, "output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));

    CLI::App* model = app.add_subcommand("model", "branched model form on the ellipsoid");
    model->require_subcommand(1);
    model->fallthrough();
    CLI::App* m_coeffs = model->add_subcommand("coeffs", "far-field quadric coefficients");
    m_coeffs->fallthrough();
    long_help_only(m_coeffs);
    opt_cfg(m_coeffs, "--n", o.n, "ambient dimension", "model.coeffs.n");
    opt_cfg(m_coeffs, "--h", o.h, "n-1 semi-axes, comma separated", "model.coeffs.h");
    CLI::App* m_solveh = model->add_subcommand("solve-h", "invert semi-axes from coefficients");
    m_solveh->fallthrough();
    opt_cfg(m_solveh, "--n", o.n, "ambient dimension", "model.solve-h.n");
    opt_cfg(m_solveh, "--a", o.a, "n-1 target transverse coefficients", "model.solve-h.a");
    CLI::App* m_graph = model->add_subcommand("graph", "angle integrals of the neck graph");
    m_graph->fallthrough();
    long_help_only(m_graph);
    opt_cfg(m_graph, "--n", o.n, "ambient dimension", "model.graph.n");
    opt_cfg(m_graph, "--h", o.h, "n-1 semi-axes", "model.graph.h");
    opt_cfg(m_graph, "--samples", o.samples, "parameter samples", "model.graph.samples");
    opt_cfg(m_graph, "--smax", o.smax, "largest graph parameter", "model.graph.smax");
    CLI::App* m_classify = model->add_subcommand("classify", "classify the far-field quadric zero");
    m_classify->fallthrough();
    long_help_only(m_classify);
    opt_cfg(m_classify, "--n", o.n, "ambient dimension", "model.classify.n");
    opt_cfg(m_classify, "--h", o.h, "n-1 semi-axes", "model.classify.h");
    opt_cfg(m_classify, "--scale", o.scale, "sampling sphere radius", "model.classify.scale");

    CLI::App* flat = app.add_subcommand("flat", "flat branched Laplace solver");
    flat->require_subcommand(1);
    flat->fallthrough();
    CLI::App* f_solve = flat->add_subcommand("solve", "manufactured radial mode convergence");
    f_solve->fallthrough();
    opt_cfg(f_solve, "--grid", o.grid, "finest radial grid (>= 256)", "flat.solve.grid");
    opt_cfg(f_solve, "--l", o.l, "angular mode index", "flat.solve.l");
    opt_cfg(f_solve, "--R", o.R, "domain radius", "flat.solve.R");
    opt_cfg(f_solve, "--tol", o.tol, "relative error gate", "flat.solve.tol");
    CLI::App* f_ab = flat->add_subcommand("ab", "leading coefficients of a Green solution");
    f_ab->fallthrough();
    opt_cfg(f_ab, "--grid", o.grid, "radial grid", "flat.ab.grid");
    opt_cfg(f_ab, "--ntheta", o.ntheta, "angular samples", "flat.ab.ntheta");
    opt_cfg(f_ab, "--R", o.R, "domain radius", "flat.ab.R");
    opt_cfg(f_ab, "--seed", o.seed, "source seed", "flat.ab.seed");
    CLI::App* f_pert = flat->add_subcommand("perturbed", "solve with a tangential perturbation");
    f_pert->fallthrough();
    opt_cfg(f_pert, "--grid", o.grid, "radial grid", "flat.perturbed.grid");
    opt_cfg(f_pert, "--ntheta", o.ntheta, "angular samples", "flat.perturbed.ntheta");
    opt_cfg(f_pert, "--lmax", o.lmax, "highest retained mode", "flat.perturbed.lmax");
    opt_cfg(f_pert, "--R", o.R, "domain radius", "flat.perturbed.R");
    opt_cfg(f_pert, "--seed", o.seed, "source seed", "flat.perturbed.seed");
    opt_cfg(f_pert, "--scale", o.op_scale, "perturbation strength", "flat.perturbed.scale");

    CLI::App* preg = app.add_subcommand("preglue", "pre-gluing ansatz error study");
    preg->require_subcommand(1);
    preg->fallthrough();
    CLI::App* p_scan = preg->add_subcommand("scan", "error decay along an eps ladder");
    p_scan->fallthrough();
    long_help_only(p_scan);
    opt_cfg(p_scan, "--n", o.n, "ambient dimension", "preglue.scan.n");
    opt_cfg(p_scan, "--h", o.h, "model semi-axes", "preglue.scan.h");
    opt_cfg(p_scan, "--sigma", o.sigma, "interpolation exponent", "preglue.scan.sigma");
    opt_cfg(p_scan, "--delta", o.delta_outer, "outer radius", "preglue.scan.delta");
    opt_cfg(p_scan, "--nmult", o.nmult, "inner weight multiplier", "preglue.scan.nmult");
    opt_cfg(p_scan, "--tau", o.tau, "weight exponent", "preglue.scan.tau");
    flag_cfg(p_scan, "--p3", o.p3, "include the cubic background term", "preglue.scan.p3");
    opt_cfg(p_scan, "--cubic", o.cubic, "cubic coefficient when --p3 is set",
            "preglue.scan.cubic");
    opt_cfg(p_scan, "--eps", o.eps, "eps ladder, comma separated (geometric, ratio 2)",
            "preglue.scan.eps");
    CLI::App* p_weight = preg->add_subcommand("weight", "piecewise scale function profile");
    p_weight->fallthrough();
    opt_cfg(p_weight, "--n", o.n, "ambient dimension", "preglue.weight.n");
    opt_cfg(p_weight, "--eps", o.eps_one, "model scale", "preglue.weight.eps");
    opt_cfg(p_weight, "--sigma", o.sigma, "interpolation exponent", "preglue.weight.sigma");
    opt_cfg(p_weight, "--delta", o.delta_outer, "outer radius", "preglue.weight.delta");
    opt_cfg(p_weight, "--nmult", o.nmult, "inner weight multiplier", "preglue.weight.nmult");
    opt_cfg(p_weight, "--tau", o.tau, "weight exponent", "preglue.weight.tau");
    opt_cfg(p_weight, "--samples", o.wsamples, "logarithmic samples", "preglue.weight.samples");

    CLI::App* nm = app.add_subcommand("nm", "smoothed Newton iteration engine");
    nm->require_subcommand(1);
    nm->fallthrough();
    auto add_run_flags = [&](CLI::App* cmd, const std::string& ns) {
        cmd->fallthrough();
        opt_cfg(cmd, "--demo", o.demo, "problem: circle or diag", ns + ".demo");
        opt_cfg(cmd, "--theta0", o.theta0, "initial smoothing parameter", ns + ".theta0");
        opt_cfg(cmd, "--band", o.band, "frequency band (circle)", ns + ".band");
        opt_cfg(cmd, "--kmax", o.kmax, "largest grade", ns + ".kmax");
        opt_cfg(cmd, "--m", o.m, "base grade", ns + ".m");
        opt_cfg(cmd, "--delta", o.delta_trust, "trust radius (default by demo)", ns + ".delta");
        opt_cfg(cmd, "--dim", o.dim, "sequence length (diag)", ns + ".dim");
        opt_cfg(cmd, "--gscale", o.gscale, "right-hand-side scale; 0 forces F(0)=0",
                ns + ".gscale");
        opt_cfg(cmd, "--budget", o.budget, "iteration budget", ns + ".budget");
        opt_cfg(cmd, "--tol", o.runtol, "residual tolerance", ns + ".tol");
        flag_cfg(cmd, "--override-precondition", o.override_pre,
                 "run even when the starting residual is too large", ns + ".override-precondition");
    };
    CLI::App* nm_run = nm->add_subcommand("run", "iterate one demo problem");
    add_run_flags(nm_run, "nm.run");
    CLI::App* nm_vs =
        nm->add_subcommand("verify-smoothing", "measured smoothing constants and drifts");
    nm_vs->fallthrough();
    opt_cfg(nm_vs, "--family", o.family, "spectral or mollifier", "nm.verify-smoothing.family");
    opt_cfg(nm_vs, "--band", o.band, "frequency band", "nm.verify-smoothing.band");
    opt_cfg(nm_vs, "--grades", o.grades, "largest grade", "nm.verify-smoothing.grades");
    opt_cfg(nm_vs, "--corpus", o.corpus, "corpus size", "nm.verify-smoothing.corpus");
    opt_cfg(nm_vs, "--seed", o.nmseed, "corpus seed", "nm.verify-smoothing.seed");
    opt_cfg(nm_vs, "--thetas", o.thetas, "theta grid, comma separated",
            "nm.verify-smoothing.thetas");
    opt_cfg(nm_vs, "--kernel", o.kernel, "kernel samples (mollifier)",
            "nm.verify-smoothing.kernel");
    CLI::App* nm_in = nm->add_subcommand("interp", "interpolation inequality constants");
    nm_in->fallthrough();
    opt_cfg(nm_in, "--band", o.band, "frequency band", "nm.interp.band");
    opt_cfg(nm_in, "--grades", o.grades, "largest grade", "nm.interp.grades");
    opt_cfg(nm_in, "--corpus", o.corpus, "corpus size", "nm.interp.corpus");
    opt_cfg(nm_in, "--seed", o.nmseed, "corpus seed", "nm.interp.seed");
    CLI::App* nm_audit = nm->add_subcommand("audit", "run a demo and recheck the trace conditions");
    add_run_flags(nm_audit, "nm.audit");

    CLI::App* morse = app.add_subcommand("morse", "Morse birth function checks");
    morse->require_subcommand(1);
    morse->fallthrough();
    CLI::App* mo_verify = morse->add_subcommand("verify", "full verification report");
    mo_verify->fallthrough();
    opt_cfg(mo_verify, "--M", o.M, "splice radius", "morse.verify.M");
    opt_cfg(mo_verify, "--n", o.morse_n, "lift dimension", "morse.verify.n");
    opt_cfg(mo_verify, "--r", o.morse_r, "index target", "morse.verify.r");
    flag_cfg(mo_verify, "--positivity", o.positivity, "include positivity spot checks",
             "morse.verify.positivity");
    CLI::App* mo_lift = morse->add_subcommand("lift", "critical points of the lifted function");
    mo_lift->fallthrough();
    opt_cfg(mo_lift, "--M", o.M, "splice radius", "morse.lift.M");
    opt_cfg(mo_lift, "--n", o.morse_n, "lift dimension", "morse.lift.n");
    opt_cfg(mo_lift, "--r", o.morse_r, "index target", "morse.lift.r");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << "\n\n" << app.help() << std::flush;
        return 2;
    }

    if (!o.config.empty()) {
        std::ifstream is(o.config);
        if (!is) {
            std::fprintf(stderr, "cannot open config file %s\n", o.config.c_str());
            return 2;
        }
        try {
            is >> file_cfg;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "bad config file: %s\n", e.what());
            return 2;
        }
        for (const auto& apply : overrides) apply();
    }

    try {
        if (m_coeffs->parsed()) return run_model_coeffs(o);
        if (m_solveh->parsed()) return run_model_solve_h(o);
        if (m_graph->parsed()) return run_model_graph(o);
        if (m_classify->parsed()) return run_model_classify(o);
        if (f_solve->parsed()) return run_flat_solve(o);
        if (f_ab->parsed()) return run_flat_ab(o);
        if (f_pert->parsed()) return run_flat_perturbed(o);
        if (p_scan->parsed()) return run_preglue_scan(o);
        if (p_weight->parsed()) return run_preglue_weight(o);
        if (nm_vs->parsed()) return run_nm_verify_smoothing(o);
        if (nm_in->parsed()) return run_nm_interp(o);
        if (nm_run->parsed()) return run_nm_run(o);
        if (nm_audit->parsed()) return run_nm_audit(o);
        if (mo_verify->parsed()) return run_morse_verify(o);
        if (mo_lift->parsed()) return run_morse_lift(o);
    } catch (const config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    std::fprintf(stderr, "no subcommand dispatched\n");
    return 2;
}
