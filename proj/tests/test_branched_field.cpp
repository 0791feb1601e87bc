#include <doctest.h>
#include "z2glue/branched_field.hpp"
#include "z2glue/errors.hpp"
#include <cmath>
#include <vector>

using namespace z2glue;

namespace {

std::vector<double> geometric_radii(double rmin, double rmax, int count) {
    std::vector<double> r(count);
    for (int i = 0; i < count; ++i)
        r[i] = rmin * std::pow(rmax / rmin, (double)i / (count - 1));
    return r;
}

} // namespace

TEST_SUITE("branched_field") {

TEST_CASE("modes: empty list gives the zero grid") {
    BranchedGrid g = section_from_modes({}, {0.5, 1.0}, 8);
    for (double v : g.values) CHECK(v == 0.0);
}

TEST_CASE("modes: single fundamental mode") {
    BranchedGrid g = section_from_modes({{0, 0, 1.0}}, {0.5, 1.0, 2.0}, 16);
    for (size_t ir = 0; ir < g.r_nodes.size(); ++ir)
        for (int j = 0; j < g.n_theta; ++j) {
            double want = std::sqrt(g.r_nodes[ir]) * std::cos(0.5 * g.theta(j));
            CHECK(std::abs(g.value((int)ir, j) - want) < 1e-14);
        }
}

TEST_CASE("modes: superposition is elementwise linear") {
    std::vector<double> r{0.5, 1.0, 2.0};
    BranchedGrid a = section_from_modes({{0, 0, {1.0, -0.5}}}, r, 16);
    BranchedGrid b = section_from_modes({{1, 1, {0.3, 2.0}}}, r, 16);
    BranchedGrid ab = section_from_modes({{0, 0, {1.0, -0.5}}, {1, 1, {0.3, 2.0}}}, r, 16);
    for (size_t i = 0; i < ab.values.size(); ++i)
        CHECK(std::abs(ab.values[i] - (a.values[i] + b.values[i])) < 1e-14);
}

TEST_CASE("modes: negative indices are refused") {
    CHECK_THROWS_AS(section_from_modes({{-1, 0, 1.0}}, {0.5, 1.0}, 8), config_error);
}

TEST_CASE("odd symmetry holds through the accessor") {
    BranchedGrid g = section_from_modes({{0, 0, 1.0}, {2, 1, {0.2, 0.7}}}, {0.5, 1.0}, 8);
    for (int ir = 0; ir < 2; ++ir)
        for (int j = 0; j < g.n_theta; ++j)
            CHECK(g.value(ir, j + g.n_theta) == -g.value(ir, j));
}

TEST_CASE("seminorm: zero section") {
    CHECK(holder_seminorm(make_grid({0.5, 1.0}, 8), 0.3) == 0.0);
}

TEST_CASE("seminorm: absolute homogeneity is exact for exact scalings") {
    BranchedGrid g = section_from_modes({{0, 0, 1.0}, {1, 0, {0.4, -0.3}}},
                                        geometric_radii(0.25, 1.0, 17), 32);
    double base = holder_seminorm(g, 0.4);
    BranchedGrid g2 = g, gm = g;
    for (double& v : g2.values) v *= 2.0;
    for (double& v : gm.values) v *= -2.0;
    CHECK(holder_seminorm(g2, 0.4) == 2.0 * base);
    CHECK(holder_seminorm(gm, 0.4) == 2.0 * base);
}

TEST_CASE("seminorm: serial and parallel scans agree exactly") {
    BranchedGrid g = section_from_modes({{0, 0, {0.8, 0.1}}, {1, 0, {-0.2, 0.5}}},
                                        geometric_radii(0.25, 1.0, 25), 48);
    CHECK(holder_seminorm(g, 0.5) == holder_seminorm_serial(g, 0.5));
}

TEST_CASE("seminorm: critical exponent stabilizes under refinement") {
    std::vector<double> sems;
    for (int m = 0; m < 3; ++m) {
        int nr = 32 * (1 << m) + 1, nth = 64 * (1 << m);
        BranchedGrid g = section_from_modes({{0, 0, 1.0}}, geometric_radii(0.25, 1.0, nr), nth);
        sems.push_back(holder_seminorm(g, 0.5));
    }
    CHECK(std::abs(sems[1] - sems[0]) < 0.05 * sems[0]);
    CHECK(std::abs(sems[2] - sems[1]) < 0.05 * sems[1]);
}

TEST_CASE("seminorm: supercritical exponent diverges under refinement") {
    std::vector<double> sems;
    for (int m = 0; m < 3; ++m) {
        double rmin = std::pow(8.0, -(m + 1));
        int octaves = 3 * (m + 1);
        BranchedGrid g = section_from_modes({{0, 0, 1.0}},
                                            geometric_radii(rmin, 1.0, 16 * octaves + 1), 64);
        sems.push_back(holder_seminorm(g, 0.75));
    }
    CHECK(sems[1] > sems[0]);
    CHECK(sems[2] > sems[1]);
    CHECK(sems[2] > 2.0 * sems[0]);
}

TEST_CASE("seminorm: alpha out of range is refused") {
    BranchedGrid g = make_grid({0.5, 1.0}, 8);
    CHECK_THROWS_AS(holder_seminorm(g, 0.0), config_error);
    CHECK_THROWS_AS(holder_seminorm(g, 1.0), config_error);
}

TEST_CASE("pointwise bound: fundamental mode at the critical exponent") {
    BranchedGrid g = section_from_modes({{0, 0, 1.0}}, geometric_radii(0.25, 1.0, 33), 64);
    double sem = holder_seminorm(g, 0.5);
    double c = pointwise_bound_constant(g, 0.5);
    // C * seminorm = sup |s| / |z|^{1/2}, which is exactly 1 for this mode
    CHECK(std::abs(c * sem - 1.0) < 0.1);
}

TEST_CASE("pointwise bound: zero section and exact scale invariance") {
    CHECK(pointwise_bound_constant(make_grid({0.5, 1.0}, 8), 0.5) == 0.0);
    BranchedGrid g = section_from_modes({{0, 0, {1.0, 0.3}}, {1, 0, 0.5}},
                                        geometric_radii(0.25, 1.0, 17), 32);
    double c1 = pointwise_bound_constant(g, 0.4);
    for (double& v : g.values) v *= 2.0;
    CHECK(pointwise_bound_constant(g, 0.4) == c1);
}

TEST_CASE("pointwise bound: grid with no admissible pairs is degenerate") {
    BranchedGrid g = section_from_modes({{0, 0, 1.0}}, {1.0, 10.0}, 4);
    CHECK(holder_seminorm(g, 0.5) == 0.0);
    CHECK_THROWS_AS(pointwise_bound_constant(g, 0.5), config_error);
}

TEST_CASE("fit: pure leading modes are recovered to machine accuracy") {
    std::vector<double> r = geometric_radii(0.02, 1.0, 65);
    BranchedGrid a = section_from_modes({{0, 0, 1.0}}, r, 32);
    HalfIntegerFit fa = fit_half_integer(a, 0.05, 0.2);
    CHECK(std::abs(fa.A.real() - 1.0) < 1e-10);
    CHECK(std::abs(fa.A.imag()) < 1e-10);
    CHECK(std::abs(fa.B) < 1e-10);
    CHECK(fa.residual <= 1e-10);

    BranchedGrid b = section_from_modes({{1, 0, 3.0}}, r, 32);
    HalfIntegerFit fb = fit_half_integer(b, 0.05, 0.2);
    CHECK(std::abs(fb.A) < 1e-10);
    CHECK(std::abs(fb.B.real() - 3.0) < 1e-10);
    CHECK(std::abs(fb.B.imag()) < 1e-10);

    BranchedGrid c = section_from_modes({{0, 0, {0.0, 1.0}}}, r, 32);
    HalfIntegerFit fc = fit_half_integer(c, 0.05, 0.2);
    CHECK(std::abs(fc.A.real()) < 1e-10);
    CHECK(std::abs(fc.A.imag() - 1.0) < 1e-10);
}

TEST_CASE("fit: manufactured remainder is reported, leading terms unbiased") {
    std::vector<double> r = geometric_radii(0.02, 1.0, 65);
    BranchedGrid g = section_from_modes({{0, 0, 1.0}, {1, 0, 1.0}, {0, 1, 0.01}}, r, 32);
    HalfIntegerFit f = fit_half_integer(g, 0.05, 0.2);
    CHECK(std::abs(f.A.real() - 1.0) < 1e-3);
    CHECK(std::abs(f.B.real() - 1.0) < 1e-3);
    CHECK(std::abs(f.residual - 0.01) < 1e-3);
}

TEST_CASE("fit: linear in the section") {
    std::vector<double> r = geometric_radii(0.02, 1.0, 33);
    BranchedGrid a = section_from_modes({{0, 0, {0.7, 0.2}}, {0, 1, 0.3}}, r, 16);
    BranchedGrid b = section_from_modes({{1, 0, {-0.3, 0.5}}, {1, 1, 0.1}}, r, 16);
    BranchedGrid sum = a;
    for (size_t i = 0; i < sum.values.size(); ++i) sum.values[i] += b.values[i];
    HalfIntegerFit fa = fit_half_integer(a, 0.05, 0.2);
    HalfIntegerFit fb = fit_half_integer(b, 0.05, 0.2);
    HalfIntegerFit fs = fit_half_integer(sum, 0.05, 0.2);
    CHECK(std::abs(fs.A - (fa.A + fb.A)) < 1e-12);
    CHECK(std::abs(fs.B - (fa.B + fb.B)) < 1e-12);
}

TEST_CASE("fit: ill-posed windows are refused") {
    BranchedGrid g = section_from_modes({{0, 0, 1.0}}, geometric_radii(0.02, 1.0, 65), 16);
    CHECK_THROWS_AS(fit_half_integer(g, 0.1, 0.11), config_error);
    CHECK_THROWS_AS(fit_half_integer(g, 0.1, 0.102), config_error);
    BranchedGrid sparse = section_from_modes({{0, 0, 1.0}}, {0.01, 0.05, 0.5, 1.0}, 16);
    CHECK_THROWS_AS(fit_half_integer(sparse, 0.02, 0.2), config_error);
}

} // TEST_SUITE
