#pragma once
#include <array>
#include <utility>
#include <vector>

#include "z2glue/models.hpp"

namespace z2glue {

/**
 * Gluing-scale configuration around a regular zero of the background.
 * eps is the model scale, sigma the small interpolation exponent, delta the
 * outer radius, N the inner weight multiplier, tau the weight exponent.
 */
struct GlueConfig {
    int n = 3;
    double eps = 0.01;
    double sigma = 0.1;
    double delta = 0.2;
    int N = 4;
    double tau = -1.0;
};

/** Throws config_error unless the regime chain eps < N eps < 2 N eps < delta
 *  holds with room, eps^{1-sigma} < delta/4, and the weight blend stays
 *  monotone (2 delta <= N). */
void validate(const GlueConfig& cfg);

/** Smooth partition: gamma1 = 0 for s < 1, 1 for s > 2; gamma2 = 1 - gamma1. */
std::pair<double, double> cutoff_pair(double s);

/** Piecewise weight: eps below N eps, rho/(2 delta) between 2 N eps and
 *  delta, 1 above 2 delta, smooth monotone blends in the two gaps. */
double weight(const GlueConfig& cfg, double rho_q);

/** The four regime breakpoints (N eps, 2 N eps, delta, 2 delta). */
std::array<double, 4> weight_breakpoints(const GlueConfig& cfg);

/** Background primitive near its zero: the matched harmonic quadric
 *  P2 = -sum quad.a[i] x_i^2 plus an optional harmonic cubic
 *  P3 = cubic * (x_1^3 - 3 x_1 x_n^2). quad.a0 is ignored. */
struct Background {
    QuadricCoeffs quad;
    double cubic = 0.0;
};

double background_primitive(const Background& b, const std::vector<double>& x);
std::vector<double> background_gradient(const Background& b, const std::vector<double>& x);

/** Polar-adapted sample lattice: spherical shells times a fixed set of
 *  unit directions. */
struct Lattice {
    std::vector<double> radii;
    std::vector<std::vector<double>> directions;
};

/** Geometric shells on [rho_min, rho_max] with seeded random directions
 *  (generic, so the model branch cut is never sampled). */
Lattice make_lattice(int n, double rho_min, double rho_max, int shells, int dirs,
                     unsigned long long seed = 5);

/**
 * The pre-gluing ansatz as a function: gradient of the primitive
 * F = gamma1(s) f_q + gamma2(s) eps^2 (f_model - a0)(x/eps), s = rho/eps^{1-sigma},
 * which is the model field inside s < 1 and the background field outside s > 2.
 */
struct Pregluing {
    Background background;
    ModelParams model;
    GlueConfig cfg;
    double a0 = 0.0;  // constant subtracted so the interpolants share a zero

    double primitive(const std::vector<double>& x) const;
    std::vector<double> field(const std::vector<double>& x) const;
    /** F minus the background primitive; supported in s < 2. */
    double primitive_mismatch(const std::vector<double>& x) const;
    /** Closed-form divergence of the field. Both interpolants are harmonic,
     *  so only cutoff-derivative terms survive and the support is exactly
     *  the annulus 1 < s < 2. */
    double divergence(const std::vector<double>& x) const;
};

/** Checks the quadric matching condition (1e-6) and assembles the ansatz. */
Pregluing make_pregluing(const Background& b, const ModelParams& model, const GlueConfig& cfg);

/** Lattice samples of a field; comps values per (shell, direction) point.
 *  Grids built here keep their Pregluing so derived quantities can be
 *  evaluated exactly. */
struct FieldGrid {
    Lattice lattice;
    int comps = 0;
    std::vector<double> values;  // shell-major, then direction, then component
    Pregluing source;
    bool has_source = false;
    bool under_resolved = false;

    size_t index(size_t shell, size_t dir) const {
        return (shell * directions() + dir) * comps;
    }
    size_t directions() const { return lattice.directions.size(); }
};

FieldGrid build_pregluing(const Background& b, const ModelParams& model, const GlueConfig& cfg,
                          const Lattice& lattice);
FieldGrid build_pregluing_serial(const Background& b, const ModelParams& model,
                                 const GlueConfig& cfg, const Lattice& lattice);

/** Scalar grid of the divergence of the ansatz. Sets under_resolved when the
 *  lattice's radial spacing inside the annulus exceeds eps^{1-sigma}/16. */
FieldGrid divergence_error(const FieldGrid& field, const GlueConfig& cfg);

struct ScanRow {
    double eps;
    double sup_primitive;  // annulus sup of the primitive mismatch
    double sup_div;
    double weighted_sup;   // sup of rho_eps^{2 - tau} |divergence|
};

struct ScanReport {
    std::vector<ScanRow> rows;  // eps descending
    double slope_primitive = 0.0;
    double slope_div = 0.0;
    double slope_weighted = 0.0;
    bool monotone = false;  // every column decays along the row order
};

/** Decay of the gluing error along a geometric eps list (ratio 2, >= 4
 *  entries); slopes are log-log least-squares fits. */
ScanReport error_scan(const Background& b, const ModelParams& model, const GlueConfig& tmpl,
                      std::vector<double> eps_list);

} // namespace z2glue
