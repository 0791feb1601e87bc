#include <doctest.h>
#include "z2glue/errors.hpp"
#include "z2glue/models.hpp"
#include "z2glue/rng.hpp"
#include <algorithm>
#include <cmath>
#include <vector>

using namespace z2glue;

namespace {

std::vector<double> grad_at(const ModelParams& p, const std::vector<double>& x) {
    return reconstruct_model(p, x).grad;
}

double f_at(const ModelParams& p, const std::vector<double>& x) {
    return reconstruct_model(p, x).f;
}

} // namespace

TEST_SUITE("models") {

TEST_CASE("coefficients: closed forms for the round case") {
    ModelParams p{3, {1.0, 1.0}};
    QuadricCoeffs c = asymptotic_coeffs(p);
    CHECK(std::abs(c.a0 - M_PI / 4.0) < 1e-10);
    CHECK(std::abs(c.a[0] - M_PI / 8.0) < 1e-10);
    CHECK(std::abs(c.a[1] - M_PI / 8.0) < 1e-10);
    CHECK(std::abs(c.a[2] + M_PI / 4.0) < 1e-10);
}

TEST_CASE("coefficients: scaling law") {
    ModelParams p2{3, {2.0, 2.0}};
    CHECK(std::abs(asymptotic_coeffs(p2).a[0] - M_PI / 16.0) < 1e-10);

    ModelParams base{3, {1.3, 0.7}};
    QuadricCoeffs cb = asymptotic_coeffs(base);
    for (double lam : {0.5, 2.0, 10.0}) {
        ModelParams q{3, {lam * 1.3, lam * 0.7}};
        QuadricCoeffs cq = asymptotic_coeffs(q);
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(cq.a[i] - cb.a[i] / lam) < 1e-8 * std::abs(cb.a[i] / lam));
        // the constant term carries one power of length the other way
        CHECK(std::abs(cq.a0 - cb.a0 * lam) < 1e-8 * std::abs(cb.a0 * lam));
    }
}

TEST_CASE("coefficients: trace vanishes and signs are as expected") {
    Rng rng(12345);
    for (int trial = 0; trial < 100; ++trial) {
        int n = trial < 60 ? 3 : 4;
        ModelParams p{n, {}};
        for (int j = 0; j + 1 < n; ++j) p.h.push_back(rng.uniform(0.2, 5.0));
        QuadricCoeffs c = asymptotic_coeffs(p);
        double tr = 0.0, mx = 0.0;
        for (double a : c.a) {
            tr += a;
            mx = std::max(mx, std::abs(a));
        }
        CHECK(std::abs(tr) <= 1e-9 * mx);
        for (int i = 0; i + 1 < n; ++i) CHECK(c.a[i] > 0.0);
        CHECK(c.a[n - 1] < 0.0);
        CHECK(c.a0 > 0.0);
    }
}

TEST_CASE("coefficients: ill conditioned axes are refused") {
    ModelParams p{3, {1.0, 2e8}};
    CHECK_THROWS_AS(asymptotic_coeffs(p), precision_error);
}

TEST_CASE("inverse problem: round case and a generic round trip") {
    ModelParams r = solve_h_for_a(3, {M_PI / 8.0, M_PI / 8.0});
    CHECK(std::abs(r.h[0] - 1.0) < 1e-6);
    CHECK(std::abs(r.h[1] - 1.0) < 1e-6);

    ModelParams truth{3, {1.3, 0.7}};
    QuadricCoeffs c = asymptotic_coeffs(truth);
    ModelParams back = solve_h_for_a(3, {c.a[0], c.a[1]});
    CHECK(std::abs(back.h[0] - 1.3) < 1e-8);
    CHECK(std::abs(back.h[1] - 0.7) < 1e-8);
}

TEST_CASE("inverse problem: permutation equivariance") {
    ModelParams truth{3, {1.3, 0.7}};
    QuadricCoeffs c = asymptotic_coeffs(truth);
    ModelParams ab = solve_h_for_a(3, {c.a[0], c.a[1]});
    ModelParams ba = solve_h_for_a(3, {c.a[1], c.a[0]});
    CHECK(std::abs(ab.h[0] - ba.h[1]) < 1e-8);
    CHECK(std::abs(ab.h[1] - ba.h[0]) < 1e-8);
}

TEST_CASE("inverse problem: invalid targets are refused") {
    CHECK_THROWS_AS(solve_h_for_a(3, {0.1, -0.2}), config_error);
    CHECK_THROWS_AS(solve_h_for_a(3, {0.1}), config_error);
}

TEST_CASE("graph: the s=0 equator lies on the branching ellipsoid") {
    ModelParams p{3, {1.3, 0.7}};
    GraphPoint g = lawlor_graph(p, {0.6, 0.8, 0.0}, 0.0);
    CHECK(std::abs(g.x[0] * g.x[0] / (1.3 * 1.3) + g.x[1] * g.x[1] / (0.7 * 0.7) - 1.0) < 1e-14);
    CHECK(g.x[2] == 0.0);
    for (double yi : g.y) CHECK(std::abs(yi) < 1e-14);
}

TEST_CASE("graph: involution flips the cotangent value only") {
    ModelParams p{3, {1.3, 0.7}};
    std::vector<double> w{0.48, 0.6, 0.64};
    double s = 0.9;
    GraphPoint a = lawlor_graph(p, w, s);
    GraphPoint b = lawlor_graph(p, {w[0], w[1], -w[2]}, -s);
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(a.x[i] - b.x[i]) < 1e-13);
        CHECK(std::abs(a.y[i] + b.y[i]) < 1e-13);
    }
}

TEST_CASE("graph: angle integrals reach twice the quadric coefficients") {
    ModelParams p{3, {1.0, 1.0}};
    CHECK(std::abs(beta_transverse_inf(p, 0) - M_PI / 4.0) < 1e-10);
    CHECK(std::abs(beta_axial_inf(p) + M_PI / 2.0) < 1e-10);

    Rng rng(777);
    for (int trial = 0; trial < 5; ++trial) {
        ModelParams q{3, {rng.uniform(0.3, 3.0), rng.uniform(0.3, 3.0)}};
        QuadricCoeffs c = asymptotic_coeffs(q);
        CHECK(std::abs(beta_transverse_inf(q, 0) - 2.0 * c.a[0]) < 1e-8);
        CHECK(std::abs(beta_transverse_inf(q, 1) - 2.0 * c.a[1]) < 1e-8);
        CHECK(std::abs(beta_axial_inf(q) - 2.0 * c.a[2]) < 1e-8);
    }
}

TEST_CASE("graph: non-unit direction is refused") {
    ModelParams p{3, {1.0, 1.0}};
    CHECK_THROWS_AS(lawlor_graph(p, {1.0, 1.0, 0.0}, 0.5), config_error);
}

TEST_CASE("reconstruction: vanishing rate at the branching set") {
    ModelParams p{3, {1.0, 1.0}};
    // f = -s^3/3 + O(s^5) and |grad| = s + O(s^3) with s^2 = 2d + d^2 on this ray
    for (double d : {1e-2, 1e-3, 1e-4}) {
        SheetValue v = reconstruct_model(p, {1.0 + d, 0.0, 0.0});
        double s3 = std::pow(2.0 * d + d * d, 1.5);
        CHECK(std::abs(v.f + s3 / 3.0) < 0.05 * s3);
        double gn = std::sqrt(v.grad[0] * v.grad[0] + v.grad[1] * v.grad[1] + v.grad[2] * v.grad[2]);
        CHECK(std::abs(gn - std::sqrt(2.0 * d + d * d)) < 0.05 * std::sqrt(d));
    }
}

TEST_CASE("reconstruction: gradient agrees with finite differences of f") {
    ModelParams p{3, {1.3, 0.7}};
    const double h = 1e-4;
    for (auto& x : std::vector<std::vector<double>>{
             {1.5, 0.3, 0.4}, {2.0, -1.0, 0.7}, {0.1, 0.2, 1.0}, {-1.2, 0.5, -0.8}}) {
        SheetValue v = reconstruct_model(p, x);
        double gn = 0.0;
        for (double g : v.grad) gn = std::max(gn, std::abs(g));
        for (int i = 0; i < 3; ++i) {
            std::vector<double> xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            double fd = (f_at(p, xp) - f_at(p, xm)) / (2.0 * h);
            CHECK(std::abs(fd - v.grad[i]) <= 1e-6 * gn);
        }
    }
}

TEST_CASE("reconstruction: far field approaches the quadric at the expected rate") {
    ModelParams p{3, {1.0, 1.0}};
    QuadricCoeffs c = asymptotic_coeffs(p);
    std::vector<double> dir{0.48, 0.6, 0.64};
    std::vector<double> rs{25.0, 50.0, 100.0, 200.0}, errs;
    for (double r : rs) {
        std::vector<double> x{r * dir[0], r * dir[1], r * dir[2]};
        double quad = c.a0;
        for (int i = 0; i < 3; ++i) quad -= c.a[i] * x[i] * x[i];
        errs.push_back(std::abs(f_at(p, x) - quad));
    }
    double slope = 0.0;
    {
        // log-log least squares by hand to keep this test self-contained
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < rs.size(); ++i) {
            double lx = std::log(rs[i]), ly = std::log(errs[i]);
            sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        }
        double m = rs.size();
        slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    }
    CHECK(slope <= -0.9);
}

TEST_CASE("reconstruction: cut and origin are refused") {
    ModelParams p{3, {1.0, 1.0}};
    CHECK_THROWS_AS(reconstruct_model(p, {0.3, 0.2, 0.0}), geometry_error);
    CHECK_THROWS_AS(reconstruct_model(p, {0.0, 0.0, 0.0}), geometry_error);
}

TEST_CASE("reconstruction: harmonicity under finite differences") {
    ModelParams p{3, {1.3, 0.7}};
    const double h = 1e-3;
    for (auto& x : std::vector<std::vector<double>>{
             {1.5, 0.3, 0.4}, {2.0, -1.0, 0.7}, {0.1, 0.2, 1.0}, {-1.2, 0.5, -0.8}}) {
        double f0 = f_at(p, x), lap = 0.0, scale = 0.0;
        for (int i = 0; i < 3; ++i) {
            std::vector<double> xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            double second = (f_at(p, xp) - 2.0 * f0 + f_at(p, xm)) / (h * h);
            lap += second;
            scale += std::abs(second);
        }
        CHECK(std::abs(lap) <= 1e-4 * scale);
    }
}

TEST_CASE("reconstruction: gradient field is curl free") {
    ModelParams p{3, {1.3, 0.7}};
    const double h = 1e-4;
    for (auto& x : std::vector<std::vector<double>>{{1.5, 0.3, 0.4}, {0.1, 0.2, 1.0}}) {
        double gn = 0.0;
        for (double g : grad_at(p, x)) gn = std::max(gn, std::abs(g));
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) {
                std::vector<double> xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                double dgj = (grad_at(p, xp)[j] - grad_at(p, xm)[j]) / (2.0 * h);
                xp = x; xm = x;
                xp[j] += h;
                xm[j] -= h;
                double dgi = (grad_at(p, xp)[i] - grad_at(p, xm)[i]) / (2.0 * h);
                CHECK(std::abs(dgj - dgi) <= 1e-5 * std::max(1.0, gn));
            }
    }
}

TEST_CASE("reconstruction: non-degeneracy near the branching set") {
    ModelParams p{3, {1.3, 0.7}};
    double lower = 1e300;
    for (int iphi = 0; iphi < 16; ++iphi) {
        double phi = 2.0 * M_PI * iphi / 16.0;
        double ex = 1.3 * std::cos(phi), ey = 0.7 * std::sin(phi);
        double nx = 0.7 * std::cos(phi), ny = 1.3 * std::sin(phi);
        double nn = std::sqrt(nx * nx + ny * ny);
        nx /= nn;
        ny /= nn;
        for (int ipsi = 0; ipsi < 8; ++ipsi) {
            double psi = M_PI / 8.0 + ipsi * M_PI / 4.0;
            for (double d : {0.01, 0.025, 0.05, 0.1}) {
                std::vector<double> x{ex + d * std::cos(psi) * nx,
                                      ey + d * std::cos(psi) * ny,
                                      d * std::sin(psi)};
                double gn = 0.0;
                for (double g : grad_at(p, x)) gn += g * g;
                lower = std::min(lower, std::sqrt(gn) / std::sqrt(d));
            }
        }
    }
    CHECK(lower > 0.3);
}

TEST_CASE("classification: exact quadric") {
    FieldFn field = [](const std::vector<double>& x) {
        return std::vector<double>{2.0 * x[0], 2.0 * x[1], -4.0 * x[2]};
    };
    ZeroClassification z = classify_zero(field, {0.0, 0.0, 0.0}, 0.5);
    CHECK(z.is_regular);
    CHECK(z.quadratic_fit_ok);
    CHECK(std::min(z.index_pair.first, z.index_pair.second) == 1);
    CHECK(std::max(z.index_pair.first, z.index_pair.second) == 2);
    CHECK(std::abs(z.quadric.a[0] - 2.0) < 1e-9);
    CHECK(std::abs(z.quadric.a[1] + 1.0) < 1e-9);
    CHECK(std::abs(z.quadric.a[2] + 1.0) < 1e-9);
}

TEST_CASE("classification: cubic leading order is not regular") {
    FieldFn field = [](const std::vector<double>& x) {
        return std::vector<double>{3.0 * (x[0] * x[0] - x[1] * x[1]), -6.0 * x[0] * x[1], 0.0};
    };
    ZeroClassification z = classify_zero(field, {0.0, 0.0, 0.0}, 0.5);
    CHECK_FALSE(z.is_regular);
    CHECK_FALSE(z.quadratic_fit_ok);
    CHECK(z.fit_residual > 0.5);
}

TEST_CASE("classification: small cubic perturbation keeps the index") {
    FieldFn field = [](const std::vector<double>& x) {
        return std::vector<double>{2.0 * x[0] + 0.15 * (x[0] * x[0] - x[1] * x[1]),
                                   2.0 * x[1] - 0.3 * x[0] * x[1], -4.0 * x[2]};
    };
    ZeroClassification z = classify_zero(field, {0.0, 0.0, 0.0}, 0.01);
    CHECK(z.is_regular);
    CHECK(std::min(z.index_pair.first, z.index_pair.second) == 1);
    CHECK(std::max(z.index_pair.first, z.index_pair.second) == 2);
}

TEST_CASE("classification: non-vanishing field is refused") {
    FieldFn field = [](const std::vector<double>&) { return std::vector<double>{1.0, 0.0, 0.0}; };
    CHECK_THROWS_AS(classify_zero(field, {0.0, 0.0, 0.0}, 0.5), config_error);
}

} // TEST_SUITE
