#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "z2glue/errors.hpp"
#include "z2glue/nash_moser.hpp"
#include "z2glue/profiles.hpp"
#include "z2glue/rng.hpp"

using namespace z2glue;

namespace {

double cutoff(double u) { return plateau(u); }

const std::vector<double> kThetaGrid{2.0, 4.0, 8.0, 16.0, 32.0, 64.0};

std::vector<GradedVector> random_corpus(int n, int dim, unsigned seed) {
    Rng rng(seed);
    std::vector<GradedVector> out(n);
    for (auto& v : out) {
        v.data.resize(dim);
        for (double& c : v.data) c = rng.uniform(-1.0, 1.0);
    }
    return out;
}

GradedVector pure_cos_mode(int band, int l, double amp) {
    GradedVector u;
    u.data.assign(2 * band + 1, 0.0);
    u.data[l] = amp;
    return u;
}

const SmoothingPairStat& pair_at(const SmoothingReport& rep, int k1, int k2) {
    for (const auto& p : rep.pairs)
        if (p.k1 == k1 && p.k2 == k2) return p;
    REQUIRE(false);
    return rep.pairs.front();
}

} // namespace

TEST_SUITE("nash_moser") {

TEST_CASE("graded norms are nondecreasing in the grade") {
    CircleSpace circ(8, 16);
    SequenceSpace seq(12, 16);
    SequenceSpace flat(12, 16, true);
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        GradedVector u, x;
        u.data.resize(circ.dimension());
        for (double& c : u.data) c = rng.uniform(-1.0, 1.0);
        x.data.resize(seq.dimension());
        for (double& c : x.data) c = rng.uniform(-1.0, 1.0);
        for (int k = 0; k + 1 <= circ.k_max(); ++k) CHECK(circ.norm(u, k) <= circ.norm(u, k + 1));
        for (int k = 0; k + 1 <= seq.k_max(); ++k) CHECK(seq.norm(x, k) <= seq.norm(x, k + 1));
        for (int k = 1; k <= flat.k_max(); ++k) CHECK(flat.norm(x, k) == flat.norm(x, 0));
    }
    GradedVector bad;
    bad.data.assign(5, 0.0);
    CHECK_THROWS_AS(circ.norm(bad, 0), config_error);
    GradedVector ok;
    ok.data.assign(circ.dimension(), 0.0);
    CHECK_THROWS_AS(circ.norm(ok, 17), config_error);
}

TEST_CASE("circle payload calculus: derivative, product, point evaluation") {
    CircleSpace circ(8, 16);
    GradedVector u = pure_cos_mode(8, 1, 1.0);

    const GradedVector du = circ.derivative(u);
    for (double x : {0.3, 1.7, 4.4}) {
        CHECK(circ.eval(u, x) == doctest::Approx(std::cos(x)).epsilon(1e-14));
        CHECK(circ.eval(du, x) == doctest::Approx(-std::sin(x)).epsilon(1e-14));
    }

    // cos^2 x = 1/2 + cos(2x)/2
    const GradedVector sq = circ.product(u, u);
    CHECK(sq.data[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(sq.data[2] == doctest::Approx(0.5).epsilon(1e-14));
    double off = 0.0;
    for (int l : {1, 3, 4, 5, 6, 7, 8}) off = std::max(off, std::abs(sq.data[l]));
    CHECK(off <= 1e-14);

    // cos(5x) cos(6x) = (cos x + cos 11x)/2; mode 11 leaves the band
    const GradedVector m5 = pure_cos_mode(8, 5, 1.0), m6 = pure_cos_mode(8, 6, 1.0);
    const GradedVector p = circ.product(m5, m6);
    CHECK(p.data[1] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::abs(p.data[0]) <= 1e-15);
    CHECK(std::abs(p.data[8]) <= 1e-15);

    // inside the band the projected product matches pointwise multiplication
    Rng rng(17);
    GradedVector a, b;
    a.data.assign(circ.dimension(), 0.0);
    b.data.assign(circ.dimension(), 0.0);
    for (int l : {1, 2, 3}) {
        a.data[l] = rng.uniform(-1.0, 1.0);
        a.data[8 + l] = rng.uniform(-1.0, 1.0);
        b.data[l] = rng.uniform(-1.0, 1.0);
        b.data[8 + l] = rng.uniform(-1.0, 1.0);
    }
    a.data[0] = 0.4;
    b.data[0] = -0.2;
    const GradedVector ab = circ.product(a, b);
    for (double x : {0.1, 0.9, 2.8, 5.5})
        CHECK(circ.eval(ab, x) ==
              doctest::Approx(circ.eval(a, x) * circ.eval(b, x)).epsilon(1e-12));
}

TEST_CASE("sup norms locate off-grid extrema") {
    CircleSpace circ(8, 16);
    GradedVector u;
    u.data.assign(circ.dimension(), 0.0);
    u.data[8 + 5] = 1.0;  // sin(5x)
    for (int k = 0; k <= 6; ++k)
        CHECK(circ.norm(u, k) == doctest::Approx(std::pow(5.0, k)).epsilon(1e-12));

    CircleSpace wide(16, 4);
    const GradedVector m16 = pure_cos_mode(16, 16, 0.7);
    CHECK(wide.norm(m16, 0) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(wide.norm(m16, 2) == doctest::Approx(0.7 * 256.0).epsilon(1e-12));
}

TEST_CASE("theta schedule: recurrence and budget sum") {
    for (double t0 : {2.0, 4.0, 8.0}) {
        double sum = 0.0, t = t0;
        for (int j = 0; j < 60; ++j) {
            sum += std::pow(t, -3.0);
            t = std::pow(t, 1.25);
        }
        CHECK(sum <= 1.0 / t0);
    }
}

TEST_CASE("smoothing profile and argument validation") {
    CHECK_THROWS_AS(spectral_smoothing(8, [](double u) { return std::exp(-u); }), config_error);
    CHECK_THROWS_AS(spectral_smoothing(8, [](double u) { return smooth_step(u); }), config_error);
    auto bump = [](double u) { return u <= 1.3 ? 1.0 : (u < 1.7 ? 1.5 : 0.0); };
    CHECK_THROWS_AS(spectral_smoothing(8, bump), config_error);
    CHECK_THROWS_AS(mollifier_smoothing({4, 8}, cutoff), config_error);

    auto fam = spectral_smoothing(8, cutoff);
    GradedVector x;
    x.data.assign(17, 1.0);
    CHECK_THROWS_AS(fam.apply(0.5, x), config_error);
    GradedVector bad;
    bad.data.assign(5, 1.0);
    CHECK_THROWS_AS(fam.apply(2.0, bad), config_error);
}

TEST_CASE("constant payloads are exact fixed points of every family") {
    GradedVector c;
    c.data.assign(17, 0.0);
    c.data[0] = 3.7;
    auto famM = mollifier_smoothing({4096, 8}, cutoff);
    auto famS = spectral_smoothing(8, cutoff);
    for (double theta : kThetaGrid) {
        for (const auto* fam : {&famM, &famS}) {
            const GradedVector s = fam->apply(theta, c);
            CHECK(s.data[0] == 3.7);
            for (int i = 1; i < 17; ++i) CHECK(s.data[i] == 0.0);
        }
    }
    GradedVector seq;
    seq.data.assign(12, 0.0);
    seq.data[0] = -1.25;
    const GradedVector s = sequence_smoothing(cutoff).apply(2.0, seq);
    CHECK(s.data[0] == -1.25);
}

TEST_CASE("index cutoff smoothing freezes the tail exactly") {
    GradedVector x;
    x.data.assign(12, 1.0);
    const GradedVector s = sequence_smoothing(cutoff).apply(2.0, x);
    CHECK(s.data[0] == 1.0);
    CHECK(s.data[2] == 1.0);   // gamma(1) = 1
    CHECK(s.data[3] == 0.5);   // gamma(3/2) at the symmetric midpoint
    for (int j = 4; j < 12; ++j) CHECK(s.data[j] == 0.0);
}

TEST_CASE("convolution smoothing: contraction, two-grade remainder gain, drift beyond") {
    CircleSpace circ(8, 16);
    auto fam = mollifier_smoothing({4096, 8}, cutoff);
    const auto corpus = random_corpus(50, circ.dimension(), 11);

    const SmoothingReport rep = verify_smoothing(fam, circ, corpus, 4, kThetaGrid);
    CHECK(rep.finite);
    CHECK(rep.limit_decreasing);
    for (const auto& p : rep.pairs) {
        if (p.k1 == p.k2) CHECK(p.c_smooth <= 1.0 + 1e-6);
        CHECK(p.drift_smooth < 2.0);
        if (p.k2 - p.k1 <= 2) CHECK(p.drift_remainder < 2.0);
    }
    // the kernel has a nonzero second moment, so the remainder bound cannot
    // gain four grades: the (0,4) constant grows like theta^2
    const auto& worst = pair_at(rep, 0, 4);
    CHECK(worst.drift_remainder >= 2.0);
    CHECK_FALSE(rep.stable);
    CHECK_FALSE(rep.pass);
    MESSAGE("convolution (0,4) remainder drift under range doubling: ", worst.drift_remainder);

    const SmoothingReport rep2 = verify_smoothing(fam, circ, corpus, 2, kThetaGrid);
    CHECK(rep2.pass);
}

TEST_CASE("frequency cutoff smoothing passes all tables at grade six") {
    CircleSpace circ(8, 16);
    auto fam = spectral_smoothing(8, cutoff);
    const auto corpus = random_corpus(50, circ.dimension(), 11);
    const SmoothingReport rep = verify_smoothing(fam, circ, corpus, 6, kThetaGrid);
    CHECK(rep.finite);
    CHECK(rep.stable);
    CHECK(rep.limit_decreasing);
    CHECK(rep.pass);
    for (const auto& p : rep.pairs)
        if (p.k1 == p.k2) CHECK(p.c_smooth <= 1.1);
    // identity on the band once theta reaches it
    REQUIRE(rep.limit_row.size() == kThetaGrid.size());
    CHECK(rep.limit_row[2] == 0.0);
    CHECK(rep.limit_row[5] == 0.0);
    CHECK(rep.limit_row[0] > 0.0);
}

TEST_CASE("single mode at frequency sixteen peaks where theta matches it") {
    CircleSpace wide(16, 4);
    const GradedVector x = pure_cos_mode(16, 16, 1.0);
    const double n0 = wide.norm(x, 0);

    auto famS = spectral_smoothing(16, cutoff);
    std::vector<double> ratio;
    for (double t : kThetaGrid) {
        const GradedVector s = famS.apply(t, x);
        ratio.push_back(wide.norm(s, 2) / (t * t * n0));
    }
    CHECK(ratio[0] == 0.0);
    CHECK(ratio[1] == 0.0);
    CHECK(ratio[2] == 0.0);
    CHECK(ratio[3] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ratio[4] == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(ratio[5] == doctest::Approx(0.0625).epsilon(1e-9));
    CHECK(std::max_element(ratio.begin(), ratio.end()) - ratio.begin() == 3);

    // the physical kernel shows the same resonance, plus sidelobe ringing
    auto famM = mollifier_smoothing({4096, 16}, cutoff);
    std::vector<double> ratioM;
    for (double t : kThetaGrid) {
        const GradedVector s = famM.apply(t, x);
        ratioM.push_back(wide.norm(s, 2) / (t * t * n0));
    }
    CHECK(ratioM[3] > ratioM[2]);
    CHECK(ratioM[3] > ratioM[4]);
    for (double r : ratioM) CHECK(r <= 1.1);
    MESSAGE("kernel-family mode-16 ratios over the theta grid: ", ratioM[0], " ", ratioM[1], " ",
            ratioM[2], " ", ratioM[3], " ", ratioM[4], " ", ratioM[5]);
}

TEST_CASE("zero vectors yield zero ratios, never NaN") {
    CircleSpace circ(8, 16);
    auto fam = spectral_smoothing(8, cutoff);
    std::vector<GradedVector> corpus = random_corpus(3, circ.dimension(), 5);
    corpus.push_back(GradedVector{std::vector<double>(circ.dimension(), 0.0)});
    const SmoothingReport rep = verify_smoothing(fam, circ, corpus, 4, kThetaGrid);
    CHECK(rep.finite);
    for (const auto& p : rep.pairs) {
        CHECK(std::isfinite(p.c_smooth));
        CHECK(std::isfinite(p.c_remainder));
    }
    CHECK_THROWS_AS(interpolation_check(circ, corpus, {{0, 1, 2}}), config_error);
}

TEST_CASE("interpolation: pure modes are the equality case") {
    CircleSpace circ(8, 16);
    CircleSpace wide(16, 8);
    const std::vector<std::array<int, 3>> triples{{0, 1, 2}, {2, 5, 8}};
    for (const auto& e : interpolation_check(circ, {pure_cos_mode(8, 5, 0.9)}, triples))
        CHECK(std::abs(e.c - 1.0) <= 1e-10);
    for (const auto& e : interpolation_check(wide, {pure_cos_mode(16, 16, 0.7)}, triples))
        CHECK(std::abs(e.c - 1.0) <= 1e-10);
}

TEST_CASE("interpolation: degenerate triples collapse to one exactly") {
    CircleSpace circ(8, 16);
    const auto corpus = random_corpus(20, circ.dimension(), 21);
    const auto table = interpolation_check(circ, corpus, {{3, 3, 7}, {0, 0, 5}});
    for (const auto& e : table) CHECK(e.c == 1.0);
}

TEST_CASE("interpolation: random trigonometric corpus, stable under doubling") {
    CircleSpace sp(32, 8);
    const auto half = random_corpus(25, sp.dimension(), 7);
    const auto full = random_corpus(50, sp.dimension(), 7);
    const auto t1 = interpolation_check(sp, half, {{0, 1, 2}});
    const auto t2 = interpolation_check(sp, full, {{0, 1, 2}});
    CHECK(t2[0].c <= 4.0);
    CHECK(t2[0].c >= t1[0].c);          // the first 25 draws are shared
    CHECK(t2[0].c <= 2.0 * t1[0].c);
    MESSAGE("interpolation (0,1,2) constants: ", t1[0].c, " -> ", t2[0].c);

    CHECK_THROWS_AS(interpolation_check(sp, half, {{2, 1, 3}}), config_error);
    CHECK_THROWS_AS(interpolation_check(sp, {}, {{0, 1, 2}}), config_error);
}

TEST_CASE("engine: zero right-hand side returns zero after zero steps") {
    CircleSpace sp(8, 16);
    GradedVector g;
    g.data.assign(sp.dimension(), 0.0);
    const CircleToy prob(sp, g);
    const RunResult rr = run(prob, spectral_smoothing(8, cutoff), 4.0);
    CHECK(rr.trace.converged);
    CHECK(rr.trace.steps.empty());
    CHECK(rr.trace.final_res == 0.0);
    for (double c : rr.x.data) CHECK(c == 0.0);
}

TEST_CASE("engine: precondition gate and override") {
    SequenceSpace sp(12, 16);
    const double t0 = 2.0;
    const GradedVector g = DiagonalToy::decaying_rhs(sp, 4, 3.0 * std::pow(t0, -4.0));
    const DiagonalToy prob(sp, g);
    CHECK_THROWS_AS(run(prob, identity_smoothing(), t0), config_error);
    const RunResult rr = run(prob, identity_smoothing(), t0, 25, 1e-10, true);
    CHECK_FALSE(rr.trace.precondition_ok);
    CHECK(rr.trace.overridden);
    CHECK(rr.trace.f0_2m == doctest::Approx(0.1875).epsilon(1e-12));
    CHECK_THROWS_AS(run(prob, identity_smoothing(), 1.5), config_error);
}

TEST_CASE("degenerate grading with identity smoothing reproduces plain Newton") {
    SequenceSpace sp(12, 16, true);
    const GradedVector g = DiagonalToy::decaying_rhs(sp, 4, 0.05);
    const DiagonalToy prob(sp, g);
    const RunResult rr = run(prob, identity_smoothing(), 2.0);
    CHECK(rr.trace.converged);

    std::vector<double> x(12, 0.0);
    for (size_t j = 0; j < rr.trace.steps.size(); ++j) {
        double res = 0.0;
        for (int i = 0; i < 12; ++i)
            res = std::max(res, std::abs(x[i] + x[i] * x[i] - g.data[i]));
        CHECK(std::abs(res - rr.trace.steps[j].res_2m) <= 1e-12);
        for (int i = 0; i < 12; ++i)
            x[i] -= (x[i] + x[i] * x[i] - g.data[i]) / (1.0 + 2.0 * x[i]);
    }
    for (int i = 0; i < 12; ++i) CHECK(std::abs(x[i] - rr.x.data[i]) <= 1e-12);
}

TEST_CASE("circle toy under frequency cutoff: fast convergence, clean audit") {
    CircleSpace sp(8, 16);
    const double target = 0.9 * std::pow(8.0, -4.0);
    const CircleToy prob(sp, CircleToy::decaying_rhs(sp, 4, target));
    auto fam = spectral_smoothing(8, cutoff);

    const RunResult rr = run(prob, fam, 4.0);
    CHECK(rr.trace.converged);
    CHECK(rr.trace.steps.size() <= 10);
    CHECK(rr.trace.final_res <= 1e-9);
    for (size_t j = 1; j < rr.trace.steps.size(); ++j)
        CHECK(rr.trace.steps[j].theta == std::pow(rr.trace.steps[j - 1].theta, 1.25));

    const AuditReport audit = audit_trace(rr.trace, prob.m(), prob.delta());
    CHECK(audit.pass);
    CHECK(audit.first_violation.empty());
    CHECK(std::isfinite(audit.fitted_m));
    CHECK(std::isfinite(audit.fitted_d));
    for (size_t j = 0; j < rr.trace.steps.size(); ++j) {
        CHECK(audit.cond_i[j]);
        CHECK(audit.cond_ii[j]);
        CHECK(audit.cond_iii[j]);
    }
    MESSAGE("cutoff-driven run: ", rr.trace.steps.size(), " steps, final residual ",
            rr.trace.final_res);
}

TEST_CASE("circle toy under the convolution kernel: converges, audit chain breaks") {
    CircleSpace sp(8, 16);
    const double target = 0.9 * std::pow(8.0, -4.0);
    const CircleToy prob(sp, CircleToy::decaying_rhs(sp, 4, target));
    auto fam = mollifier_smoothing({4096, 8}, cutoff);

    const RunResult rr = run(prob, fam, 4.0);
    CHECK(rr.trace.converged);
    CHECK(rr.trace.steps.size() <= 10);
    CHECK(rr.trace.final_res <= 1e-9);

    // the two-grade remainder gain cannot keep the residual under theta^{-4}
    // forever; the recheck localizes the first miss
    const AuditReport audit = audit_trace(rr.trace, prob.m(), prob.delta());
    CHECK_FALSE(audit.pass);
    CHECK(audit.first_violation == "I");
    CHECK(audit.first_violation_step == 4);
    MESSAGE("kernel-driven run misses condition I at step ", audit.first_violation_step,
            ": residual ", rr.trace.steps[4].res_2m, " vs bound ",
            std::pow(rr.trace.steps[4].theta, -4.0));
}

TEST_CASE("two admissible schedules agree on the limit") {
    CircleSpace sp(8, 16);
    const double target = 0.9 * std::pow(8.0, -4.0);
    const CircleToy prob(sp, CircleToy::decaying_rhs(sp, 4, target));
    auto fam = spectral_smoothing(8, cutoff);
    const RunResult r4 = run(prob, fam, 4.0);
    const RunResult r8 = run(prob, fam, 8.0);
    CHECK(r4.trace.converged);
    CHECK(r8.trace.converged);
    GradedVector diff = r4.x;
    for (size_t i = 0; i < diff.data.size(); ++i) diff.data[i] -= r8.x.data[i];
    CHECK(sp.norm(diff, prob.m()) <= 1e-8);
}

TEST_CASE("trust radius violation halts with a diagnostic, not an exception") {
    SequenceSpace sp(12, 16);
    const GradedVector g = DiagonalToy::decaying_rhs(sp, 4, 0.05);
    const DiagonalToy prob(sp, g, 4, 1e-9);
    const RunResult rr = run(prob, identity_smoothing(), 2.0);
    CHECK(rr.trace.trust_violation);
    CHECK_FALSE(rr.trace.converged);
    CHECK(rr.trace.steps.size() == 1);
    CHECK(rr.trace.final_x_3m >= 1e-9);
}

TEST_CASE("audit localizes the first violated condition on a bad schedule") {
    SequenceSpace sp(12, 16);
    const double t0 = 2.0;
    const GradedVector g = DiagonalToy::decaying_rhs(sp, 4, 3.0 * std::pow(t0, -4.0));
    const DiagonalToy prob(sp, g);
    const RunResult rr = run(prob, identity_smoothing(), t0, 25, 1e-10, true);
    const AuditReport audit = audit_trace(rr.trace, prob.m(), prob.delta());
    CHECK_FALSE(audit.pass);
    CHECK_FALSE(audit.cond_i[0]);
    CHECK(audit.first_violation == "I");
    CHECK(audit.first_violation_step == 0);
}

TEST_CASE("empty trace audits as trivially passing") {
    IterationTrace empty;
    const AuditReport audit = audit_trace(empty, 4, 1.0);
    CHECK(audit.pass);
    CHECK(audit.first_violation.empty());
}

TEST_CASE("approximate inverse: measured composition residuals") {
    CircleSpace sp(8, 16);
    const CircleToy prob(sp, CircleToy::decaying_rhs(sp, 4, 1e-3));
    Rng rng(31);
    GradedVector u, v;
    u.data.resize(sp.dimension());
    v.data.resize(sp.dimension());
    for (double& c : u.data) c = 1e-2 * rng.uniform(-1.0, 1.0);
    for (double& c : v.data) c = rng.uniform(-1.0, 1.0);
    const GradedVector Fu = prob.F(u);

    // V o DF = Id + Q1 with Q1 at machine scale for the dense band solve
    GradedVector r1 = prob.V(u, Fu, prob.DF(u, v));
    for (size_t i = 0; i < r1.data.size(); ++i) r1.data[i] -= v.data[i];
    CHECK(sp.norm(r1, 2 * prob.m()) <= 1e-9 * std::max(1.0, sp.norm(v, 2 * prob.m())));

    // DF o V = Id + Q2
    GradedVector r2 = prob.DF(u, prob.V(u, Fu, v));
    for (size_t i = 0; i < r2.data.size(); ++i) r2.data[i] -= v.data[i];
    CHECK(sp.norm(r2, 2 * prob.m()) <= 1e-9 * std::max(1.0, sp.norm(v, 2 * prob.m())));

    // diagonal instance: exact inverse away from the truncation set
    SequenceSpace seq(12, 16);
    const DiagonalToy diag(seq, DiagonalToy::decaying_rhs(seq, 4, 0.05));
    GradedVector x, w;
    x.data.assign(12, 0.01);
    w.data.assign(12, 0.0);
    for (int i = 0; i < 12; ++i) w.data[i] = rng.uniform(-1.0, 1.0);
    GradedVector q = diag.V(x, diag.F(x), diag.DF(x, w));
    for (int i = 0; i < 12; ++i) CHECK(q.data[i] == w.data[i]);

    // truncation kicks in near the singular diagonal entry; the measured
    // Q norm stays bounded by the tame product
    x.data[0] = -0.5;
    const GradedVector Fx = diag.F(x);
    GradedVector qt = diag.V(x, Fx, diag.DF(x, w));
    for (int i = 0; i < 12; ++i) qt.data[i] -= w.data[i];
    const double qnorm = seq.norm(qt, 2 * diag.m());
    CHECK(qnorm > 0.0);
    CHECK(qnorm <= 100.0 * seq.norm(Fx, 3 * diag.m()) * seq.norm(w, 3 * diag.m()));
}

TEST_CASE("iteration records serialize to JSON") {
    CircleSpace sp(8, 16);
    const CircleToy prob(sp, CircleToy::decaying_rhs(sp, 4, 0.9 * std::pow(8.0, -4.0)));
    const RunResult rr = run(prob, spectral_smoothing(8, cutoff), 4.0);
    const auto j = nlohmann::json::parse(trace_to_json(rr.trace));
    CHECK(j["theta0"].get<double>() == 4.0);
    CHECK(j["converged"].get<bool>());
    CHECK(j["m"].get<int>() == 4);
    CHECK(j["steps"].size() == rr.trace.steps.size());
    for (const char* key : {"theta", "res_2m", "v_m", "v_3m", "v_3m3", "x_3m"})
        CHECK(j["steps"][0].contains(key));
}

TEST_CASE("identical inputs produce bit-identical runs") {
    CircleSpace sp(8, 16);
    const CircleToy prob(sp, CircleToy::decaying_rhs(sp, 4, 0.9 * std::pow(8.0, -4.0)));
    auto fam = spectral_smoothing(8, cutoff);
    const RunResult a = run(prob, fam, 4.0);
    const RunResult b = run(prob, fam, 4.0);
    CHECK(a.x.data == b.x.data);
    CHECK(trace_to_json(a.trace) == trace_to_json(b.trace));
}

TEST_CASE("solution bound holds across random right-hand sides") {
    CircleSpace sp(8, 16);
    auto fam = spectral_smoothing(8, cutoff);
    Rng rng(99);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        const GradedVector g = CircleToy::random_rhs(sp, 4, 0.9 * std::pow(4.0, -4.0), rng);
        const CircleToy prob(sp, g, 4, 50.0);
        const RunResult rr = run(prob, fam, 4.0);
        CHECK(rr.trace.converged);
        worst = std::max(worst, rr.trace.final_x_m / rr.trace.f0_2m);
    }
    CHECK(worst <= 100.0);
    MESSAGE("max norm(x, m)/norm(F(0), 2m) over 10 random right-hand sides: ", worst);
}

} // TEST_SUITE
