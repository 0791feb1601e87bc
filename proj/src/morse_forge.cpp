#include "z2glue/morse_forge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "z2glue/emit.hpp"
#include "z2glue/errors.hpp"
#include "z2glue/linalg.hpp"
#include "z2glue/profiles.hpp"
#include "z2glue/quadrature.hpp"
#include "z2glue/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace z2glue {

namespace {

constexpr double kRoot3Inv = 0.5773502691896258;

double norm3(double x, double y, double z) { return std::sqrt(x * x + y * y + z * z); }

/** Cubic jet valid on the closed unit ball. */
BirthJet cubic_jet(double x, double y, double z) {
    BirthJet j;
    j.f = x * x * x - x + (x + 1.0) * y * y + (x - 1.0) * z * z;
    j.grad = {3.0 * x * x - 1.0 + y * y + z * z, 2.0 * y * (x + 1.0), 2.0 * z * (x - 1.0)};
    j.hess = {{{6.0 * x, 2.0 * y, 2.0 * z},
               {2.0 * y, 2.0 * (x + 1.0), 0.0},
               {2.0 * z, 0.0, 2.0 * (x - 1.0)}}};
    return j;
}

std::array<double, 3> random_direction(Rng& rng) {
    while (true) {
        std::array<double, 3> v;
        for (int i = 0; i < 3; ++i) {
            const double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
            v[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        }
        const double nn = norm3(v[0], v[1], v[2]);
        if (nn > 1e-12) {
            for (double& c : v) c /= nn;
            return v;
        }
    }
}

int flow_batch(const BirthConfig& cfg, int npoints, unsigned seed, bool parallel) {
    Rng rng(seed);
    std::vector<std::array<double, 3>> starts(npoints);
    for (auto& p : starts) {
        const double rad = rng.uniform(1.05, cfg.M);
        const auto dir = random_direction(rng);
        p = {rad * dir[0], rad * dir[1], rad * dir[2]};
    }
    int count = 0;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) reduction(+ : count) if (parallel)
#endif
    for (int i = 0; i < 2 * npoints; ++i) {
        const FlowResult res = flow_escape(cfg, starts[i / 2], i % 2 == 0 ? 1 : -1);
        count += res.escaped ? 1 : 0;
    }
    return count;
}

} // namespace

RadialProfile birth_profile(double M) {
    if (!(M > 2.0)) throw config_error("birth profile: M must exceed 2");
    // Slope magnitude shaped as pow((M-t)/(M-1), q) with smooth windows at
    // both ends of [1, M].  A slow descent leaves the spliced function
    // non-monotone along the first axis inside the transition annulus, which
    // creates spurious critical pairs, so q is bisected to the fastest value
    // whose realized peak slope sits at 96% of the 2/M budget.
    const double rho = std::min(0.05, (M - 2.0) / 8.0);
    auto shape = [M, rho](double q, double t) {
        if (t <= 1.0 || t >= M) return 0.0;
        return std::pow((M - t) / (M - 1.0), q) * smooth_step((t - 1.0) / rho) *
               smooth_step((M - t) / rho);
    };
    // cumulative mass at panel boundaries, so a lookup integrates one panel
    const int K = 512;
    const double dt = (M - 1.0) / K;
    std::vector<double> cum(K + 1, 0.0);
    auto tabulate = [&](double q) {
        double peak = 0.0;
        for (int k = 1; k <= K; ++k) {
            const double a = 1.0 + (k - 1) * dt;
            cum[k] = cum[k - 1] + integrate([&](double t) { return shape(q, t); }, a, a + dt);
            for (int s = 0; s < 4; ++s) peak = std::max(peak, shape(q, a + 0.25 * s * dt));
        }
        return peak / cum[K];
    };
    const double target = 0.96 * 2.0 / M;
    double q = 0.0;
    if (tabulate(0.0) < target) {
        double lo = 0.0, hi = 2.0;
        while (hi - lo > 1e-6) {
            const double mid = 0.5 * (lo + hi);
            (tabulate(mid) < target ? lo : hi) = mid;
        }
        q = 0.5 * (lo + hi);
        tabulate(q);
    }
    const double Z = cum[K];
    auto psi = [shape, q](double t) { return shape(q, t); };
    RadialProfile p;
    p.value = [M, psi, Z, cum, dt](double t) {
        if (t <= 1.0) return 1.0;
        if (t >= M) return 0.0;
        const int k = std::min((int)((t - 1.0) / dt), (int)cum.size() - 2);
        return 1.0 - (cum[k] + integrate(psi, 1.0 + k * dt, t)) / Z;
    };
    p.d1 = [psi, Z](double t) { return -psi(t) / Z; };
    p.d2 = [M, rho, q, Z](double t) {
        if (t <= 1.0 || t >= M) return 0.0;
        const double a = (t - 1.0) / rho, b = (M - t) / rho;
        const double w1 = smooth_step(a), w2 = smooth_step(b);
        if (w1 * w2 == 0.0) return 0.0;
        const double nu = (M - t) / (M - 1.0);
        const double dpow = -q * std::pow(nu, q - 1.0) / (M - 1.0);
        const double dw = (smooth_step_d1(a) * w2 - w1 * smooth_step_d1(b)) / rho;
        return -(dpow * w1 * w2 + std::pow(nu, q) * dw) / Z;
    };
    return p;
}

BirthConfig make_birth_config(double M, int n, int r) {
    BirthConfig cfg;
    cfg.M = M;
    cfg.n = n;
    cfg.r = r;
    cfg.profile = birth_profile(M);
    return cfg;
}

void validate(const BirthConfig& cfg) {
    if (!(cfg.M > 2.0)) throw config_error("birth config: M must exceed 2");
    if (cfg.n < 3) throw config_error("birth config: dimension must be at least 3");
    if (!(0 < cfg.r && cfg.r < cfg.n - 1))
        throw config_error("birth config: index target must satisfy 0 < r < n-1");
    if (!cfg.profile.value || !cfg.profile.d1 || !cfg.profile.d2)
        throw config_error("birth config: profile with two derivatives required");
    if (cfg.profile.value(0.0) != 1.0 || cfg.profile.value(1.0) != 1.0)
        throw config_error("birth config: profile must equal 1 on [0,1]");
    if (cfg.profile.value(cfg.M) != 0.0 || cfg.profile.value(2.0 * cfg.M) != 0.0)
        throw config_error("birth config: profile must vanish beyond M");
}

BirthJet birth_function(const BirthConfig& cfg, double x, double y, double z) {
    const double r2 = x * x + y * y + z * z;
    if (r2 <= 1.0) return cubic_jet(x, y, z);
    if (r2 >= cfg.M * cfg.M) {
        BirthJet j;
        j.f = x;
        j.grad = {1.0, 0.0, 0.0};
        return j;
    }
    const double r = std::sqrt(r2);
    const double v = cfg.profile.value(r), v1 = cfg.profile.d1(r), v2 = cfg.profile.d2(r);
    const double q = y * y - z * z;
    const double N = x * (r2 - 1.0) + q * v;
    const double D = v + (r2 - 1.0) * (1.0 - v);
    if (!(D > 0.0)) throw config_error("birth function: profile produced a nonpositive denominator");

    const std::array<double, 3> p{x, y, z};
    const std::array<double, 3> ph{x / r, y / r, z / r};
    const std::array<double, 3> gN{r2 - 1.0 + 2.0 * x * x + q * v1 * ph[0],
                                   2.0 * x * y + 2.0 * y * v + q * v1 * ph[1],
                                   2.0 * x * z - 2.0 * z * v + q * v1 * ph[2]};
    const double s1 = v1 * (2.0 - r2) + 2.0 * r * (1.0 - v);
    const std::array<double, 3> gD{s1 * ph[0], s1 * ph[1], s1 * ph[2]};

    BirthJet j;
    j.f = N / D;
    for (int i = 0; i < 3; ++i) j.grad[i] = (gN[i] - j.f * gD[i]) / D;

    // H[gamma(r)] = v2 ph ph^T + v1 (I - ph ph^T)/r
    std::array<std::array<double, 3>, 3> Hg{};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            Hg[a][b] = v2 * ph[a] * ph[b] + v1 * ((a == b ? 1.0 : 0.0) - ph[a] * ph[b]) / r;

    const std::array<double, 3> gq{0.0, 2.0 * y, -2.0 * z};
    const std::array<double, 3> ex{1.0, 0.0, 0.0};
    std::array<std::array<double, 3>, 3> HN{}, HD{};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const double id = a == b ? 1.0 : 0.0;
            double hn = 2.0 * x * id + 2.0 * (ex[a] * p[b] + p[a] * ex[b]);
            hn += v * (a == 1 && b == 1 ? 2.0 : (a == 2 && b == 2 ? -2.0 : 0.0));
            hn += gq[a] * v1 * ph[b] + v1 * ph[a] * gq[b] + q * Hg[a][b];
            HN[a][b] = hn;
            HD[a][b] = Hg[a][b] * (2.0 - r2) + 2.0 * (1.0 - v) * id - 4.0 * v1 * r * ph[a] * ph[b];
        }
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            j.hess[a][b] = (HN[a][b] - j.f * HD[a][b] - j.grad[a] * gD[b] - gD[a] * j.grad[b]) / D;
    return j;
}

std::vector<CriticalPoint> find_critical_points(const BirthConfig& cfg) {
    validate(cfg);
    std::vector<std::array<double, 3>> seeds;
    for (double x = -0.8; x <= 0.85; x += 0.4)
        for (double y = -0.8; y <= 0.85; y += 0.4)
            for (double z = -0.8; z <= 0.85; z += 0.4) seeds.push_back({x, y, z});
    const double step = cfg.M / 3.0;
    for (int i = -3; i <= 3; ++i)
        for (int jj = -3; jj <= 3; ++jj)
            for (int k = -3; k <= 3; ++k) {
                const std::array<double, 3> s{i * step, jj * step, k * step};
                if (norm3(s[0], s[1], s[2]) <= cfg.M) seeds.push_back(s);
            }

    std::vector<std::array<double, 3>> found;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (size_t si = 0; si < seeds.size(); ++si) {
        std::array<double, 3> pt = seeds[si];
        bool ok = false;
        for (int it = 0; it < 60; ++it) {
            BirthJet j;
            try {
                j = birth_function(cfg, pt[0], pt[1], pt[2]);
            } catch (const config_error&) {
                break;
            }
            const double gn = norm3(j.grad[0], j.grad[1], j.grad[2]);
            if (gn <= 1e-12) {
                ok = true;
                break;
            }
            std::vector<double> H(9), g(3);
            for (int a = 0; a < 3; ++a) {
                g[a] = -j.grad[a];
                for (int b = 0; b < 3; ++b) H[a * 3 + b] = j.hess[a][b];
            }
            std::vector<double> delta;
            try {
                delta = solve_dense(H, g);
            } catch (const precision_error&) {
                break;
            }
            const double dn = norm3(delta[0], delta[1], delta[2]);
            if (dn > 0.5)
                for (double& d : delta) d *= 0.5 / dn;
            for (int a = 0; a < 3; ++a) pt[a] += delta[a];
            if (norm3(pt[0], pt[1], pt[2]) > 2.0 * cfg.M) break;
        }
        if (ok) {
#ifdef _OPENMP
#pragma omp critical
#endif
            found.push_back(pt);
        }
    }

    std::sort(found.begin(), found.end());
    std::vector<CriticalPoint> out;
    for (const auto& pt : found) {
        bool dup = false;
        for (const auto& cp : out)
            dup = dup || (std::abs(cp.location[0] - pt[0]) <= 1e-6 &&
                          std::abs(cp.location[1] - pt[1]) <= 1e-6 &&
                          std::abs(cp.location[2] - pt[2]) <= 1e-6);
        if (dup) continue;
        const BirthJet j = birth_function(cfg, pt[0], pt[1], pt[2]);
        std::vector<double> H(9);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) H[a * 3 + b] = j.hess[a][b];
        const SymEig eig = eig_sym(H, 3);
        CriticalPoint cp;
        cp.location = {pt[0], pt[1], pt[2]};
        cp.hessian_eigs = eig.values;
        cp.index = 0;
        for (double e : eig.values)
            if (e < 0.0) ++cp.index;
        out.push_back(cp);
    }
    return out;
}

LiftedBirth::LiftedBirth(const BirthConfig& cfg) : cfg_(cfg) { validate(cfg_); }

double LiftedBirth::value(const std::vector<double>& p) const {
    if ((int)p.size() != cfg_.n) throw config_error("lifted birth: point dimension mismatch");
    double ry2 = 0.0, rz2 = 0.0;
    for (int i = 1; i < cfg_.n - cfg_.r; ++i) ry2 += p[i] * p[i];
    for (int i = cfg_.n - cfg_.r; i < cfg_.n; ++i) rz2 += p[i] * p[i];
    return birth_function(cfg_, p[0], std::sqrt(ry2), std::sqrt(rz2)).f;
}

std::vector<double> LiftedBirth::gradient(const std::vector<double>& p) const {
    if ((int)p.size() != cfg_.n) throw config_error("lifted birth: point dimension mismatch");
    double ry2 = 0.0, rz2 = 0.0;
    for (int i = 1; i < cfg_.n - cfg_.r; ++i) ry2 += p[i] * p[i];
    for (int i = cfg_.n - cfg_.r; i < cfg_.n; ++i) rz2 += p[i] * p[i];
    const double ry = std::sqrt(ry2), rz = std::sqrt(rz2);
    const BirthJet j = birth_function(cfg_, p[0], ry, rz);
    std::vector<double> g(cfg_.n, 0.0);
    g[0] = j.grad[0];
    // radial components vanish on the axes by evenness
    const double fy = ry > 0.0 ? j.grad[1] / ry : 0.0;
    const double fz = rz > 0.0 ? j.grad[2] / rz : 0.0;
    for (int i = 1; i < cfg_.n - cfg_.r; ++i) g[i] = fy * p[i];
    for (int i = cfg_.n - cfg_.r; i < cfg_.n; ++i) g[i] = fz * p[i];
    return g;
}

std::vector<CriticalPoint> LiftedBirth::critical_points() const {
    std::vector<CriticalPoint> out;
    for (const CriticalPoint& base : find_critical_points(cfg_)) {
        const BirthJet j = birth_function(cfg_, base.location[0], 0.0, 0.0);
        CriticalPoint cp;
        cp.location.assign(cfg_.n, 0.0);
        cp.location[0] = base.location[0];
        cp.hessian_eigs.push_back(j.hess[0][0]);
        for (int i = 0; i < cfg_.n - cfg_.r - 1; ++i) cp.hessian_eigs.push_back(j.hess[1][1]);
        for (int i = 0; i < cfg_.r; ++i) cp.hessian_eigs.push_back(j.hess[2][2]);
        cp.index = 0;
        for (double e : cp.hessian_eigs)
            if (e < 0.0) ++cp.index;
        out.push_back(cp);
    }
    return out;
}

LiftedBirth lift_to_rn(const BirthConfig& cfg) { return LiftedBirth(cfg); }

FlowResult flow_escape(const BirthConfig& cfg, const std::array<double, 3>& start, int direction) {
    const double h = 0.1, floor_grad = 1e-4, budget = 30.0 * cfg.M;
    FlowResult res;
    res.min_grad = std::numeric_limits<double>::infinity();
    std::array<double, 3> p = start;
    bool stalled = false;
    auto field = [&](const std::array<double, 3>& q, std::array<double, 3>& k) {
        const BirthJet j = birth_function(cfg, q[0], q[1], q[2]);
        const double gn = norm3(j.grad[0], j.grad[1], j.grad[2]);
        res.min_grad = std::min(res.min_grad, gn);
        if (gn < floor_grad) {
            stalled = true;
            k = {0.0, 0.0, 0.0};
            return;
        }
        for (int i = 0; i < 3; ++i) k[i] = direction * j.grad[i] / gn;
    };
    while (res.path_length < budget) {
        if (norm3(p[0], p[1], p[2]) > cfg.M) {
            res.escaped = true;
            return res;
        }
        std::array<double, 3> k1, k2, k3, k4, q;
        field(p, k1);
        if (stalled) return res;
        for (int i = 0; i < 3; ++i) q[i] = p[i] + 0.5 * h * k1[i];
        field(q, k2);
        if (stalled) return res;
        for (int i = 0; i < 3; ++i) q[i] = p[i] + 0.5 * h * k2[i];
        field(q, k3);
        if (stalled) return res;
        for (int i = 0; i < 3; ++i) q[i] = p[i] + h * k3[i];
        field(q, k4);
        if (stalled) return res;
        for (int i = 0; i < 3; ++i)
            p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        res.path_length += h;
    }
    return res;
}

int escape_count(const BirthConfig& cfg, int npoints, unsigned seed) {
    return flow_batch(cfg, npoints, seed, true);
}

int escape_count_serial(const BirthConfig& cfg, int npoints, unsigned seed) {
    return flow_batch(cfg, npoints, seed, false);
}

BirthReport verify_birth(const BirthConfig& cfg, bool check_positivity) {
    validate(cfg);
    BirthReport rep;

    rep.slope_bound = 2.0 / cfg.M;
    bool monotone = true;
    double prev = cfg.profile.value(0.0);
    for (int i = 0; i <= 10000; ++i) {
        const double t = cfg.M * i / 10000.0;
        rep.max_profile_slope = std::max(rep.max_profile_slope, std::abs(cfg.profile.d1(t)));
        const double v = cfg.profile.value(t);
        monotone = monotone && v <= prev + 1e-12;
        prev = v;
    }
    rep.profile_ok = monotone && rep.max_profile_slope <= rep.slope_bound;

    Rng rng(2026);
    rep.outer_identity = true;
    for (int i = 0; i < 1000; ++i) {
        const double rad = cfg.M * rng.uniform(1.0 + 1e-9, 2.0);
        const auto dir = random_direction(rng);
        const BirthJet j = birth_function(cfg, rad * dir[0], rad * dir[1], rad * dir[2]);
        rep.outer_gap = std::max(rep.outer_gap, std::abs(j.f - rad * dir[0]));
        rep.outer_gap = std::max(rep.outer_gap, std::abs(j.grad[0] - 1.0));
        rep.outer_gap = std::max(rep.outer_gap, std::abs(j.grad[1]));
        rep.outer_gap = std::max(rep.outer_gap, std::abs(j.grad[2]));
    }
    rep.outer_identity = rep.outer_gap <= 1e-12;

    for (int i = 0; i < 200; ++i) {
        const double rad = 1.5 * cfg.M * rng.uniform();
        const auto dir = random_direction(rng);
        const double x = rad * dir[0], y = rad * dir[1], z = rad * dir[2];
        const double f0 = birth_function(cfg, x, y, z).f;
        rep.evenness_gap = std::max(rep.evenness_gap,
                                    std::abs(f0 - birth_function(cfg, x, -y, z).f));
        rep.evenness_gap = std::max(rep.evenness_gap,
                                    std::abs(f0 - birth_function(cfg, x, y, -z).f));
    }
    rep.evenness = rep.evenness_gap <= 1e-12;

    rep.min_denominator = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 10000; ++i) {
        const double r = 1.0 + (cfg.M - 1.0) * i / 10000.0;
        const double v = cfg.profile.value(r);
        rep.min_denominator = std::min(rep.min_denominator, v + (r * r - 1.0) * (1.0 - v));
    }
    rep.denominator_positive = rep.min_denominator > 0.0;

    rep.critical = find_critical_points(cfg);
    rep.critical_ok = rep.critical.size() == 2;
    if (rep.critical_ok) {
        const CriticalPoint& lo = rep.critical[0];
        const CriticalPoint& hi = rep.critical[1];
        rep.critical_ok = std::abs(lo.location[0] + kRoot3Inv) <= 1e-9 &&
                          std::abs(hi.location[0] - kRoot3Inv) <= 1e-9;
        for (const CriticalPoint& cp : rep.critical) {
            rep.critical_ok = rep.critical_ok && std::abs(cp.location[1]) <= 1e-9 &&
                              std::abs(cp.location[2]) <= 1e-9;
            for (double e : cp.hessian_eigs) rep.critical_ok = rep.critical_ok && std::abs(e) > 1e-8;
        }
        rep.critical_ok = rep.critical_ok && lo.index == 2 && hi.index == 1;
    }
    rep.balance_by_rescaling = rep.critical_ok;

    rep.positivity_checked = check_positivity;
    if (check_positivity) {
        for (int i = 0; i < 100; ++i) {
            const double rad = cfg.M * rng.uniform(2.0 + 1e-9, 3.0);
            const auto dir = random_direction(rng);
            const BirthJet j = birth_function(cfg, rad * dir[0], rad * dir[1], rad * dir[2]);
            rep.positivity_ok = rep.positivity_ok && j.grad[0] > 0.0;
        }
        for (double sign : {-1.0, 1.0})
            for (int i = 0; i < 50; ++i) {
                const auto dir = random_direction(rng);
                const BirthJet j = birth_function(cfg, sign * kRoot3Inv + 0.05 * dir[0],
                                                  0.05 * dir[1], 0.05 * dir[2]);
                rep.positivity_ok =
                    rep.positivity_ok && norm3(j.grad[0], j.grad[1], j.grad[2]) > 0.0;
            }
    }

    rep.pass = rep.profile_ok && rep.outer_identity && rep.evenness && rep.denominator_positive &&
               rep.critical_ok && rep.balance_by_rescaling &&
               (!rep.positivity_checked || rep.positivity_ok);
    return rep;
}

std::string birth_report_to_json(const BirthReport& rep) {
    ordered_json crit = ordered_json::array();
    for (const auto& cp : rep.critical)
        crit.push_back({{"location", cp.location},
                        {"index", cp.index},
                        {"hessian_eigs", cp.hessian_eigs}});
    ordered_json j{{"profile_ok", rep.profile_ok},
                   {"max_profile_slope", rep.max_profile_slope},
                   {"slope_bound", rep.slope_bound},
                   {"outer_identity", rep.outer_identity},
                   {"outer_gap", rep.outer_gap},
                   {"evenness", rep.evenness},
                   {"evenness_gap", rep.evenness_gap},
                   {"denominator_positive", rep.denominator_positive},
                   {"min_denominator", rep.min_denominator},
                   {"critical_ok", rep.critical_ok},
                   {"critical", crit},
                   {"balance_by_rescaling", rep.balance_by_rescaling},
                   {"positivity_checked", rep.positivity_checked},
                   {"positivity_ok", rep.positivity_ok},
                   {"pass", rep.pass}};
    return json_round12(j).dump(2);
}

} // namespace z2glue
