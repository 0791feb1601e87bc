#pragma once
#include <functional>
#include <utility>
#include <vector>

namespace z2glue {

/** Ellipsoid semi-axes of the branching set in R^n. */
struct ModelParams {
    int n;                  // ambient dimension, >= 3
    std::vector<double> h;  // n-1 positive semi-axes
};

/** Throws config_error unless n >= 3, h has n-1 entries, all positive. */
void validate(const ModelParams& p);

/** Far-field quadric data, sign convention f ~ a0 - sum_i a_i x_i^2. */
struct QuadricCoeffs {
    double a0;
    std::vector<double> a;  // n entries, a_1..a_{n-1} > 0, a_n < 0, trace 0
};

/** One point of the graph parametrization: base x and cotangent value y. */
struct GraphPoint {
    std::vector<double> w;  // unit vector in R^n
    double s;
    std::vector<double> x;
    std::vector<double> y;
};

/** Value of the two-valued model function on one sheet. */
struct SheetValue {
    double f;
    std::vector<double> grad;
    int sheet;  // +1: far field a0 - sum a_i x_i^2; the other sheet is the negation
};

/** Outcome of the local quadric fit at a putative zero of a gradient field. */
struct ZeroClassification {
    bool is_regular;                // fit ok and all eigenvalues above the floor
    std::pair<int, int> index_pair; // {#negative eigenvalues, n - #negative}, unordered
    QuadricCoeffs quadric;          // principal-axis coefficients, a0 = 0
    double fit_residual;            // rms misfit relative to field magnitude
    bool quadratic_fit_ok;          // fit_residual <= 0.1
};

/**
 * Far-field coefficients (a0, a_1..a_n) of the model by adaptive quadrature,
 * relative accuracy 1e-10. Throws precision_error when max(h)/min(h) > 1e8.
 */
QuadricCoeffs asymptotic_coeffs(const ModelParams& p);

/**
 * Inverts h -> (a_1..a_{n-1}): returns h with coefficients matching a_target
 * to 1e-8 relative in sup norm. Damped Newton in log h with a finite-difference
 * Jacobian; throws convergence_error (carrying the best residual) on failure.
 */
ModelParams solve_h_for_a(int n, const std::vector<double>& a_target);

/**
 * Transverse angle integral beta_k(s), odd in s; k is 0-based, 0 <= k < n-1.
 * beta_transverse_inf is its s -> +infinity limit (equals 2 a_{k+1}).
 */
double beta_transverse(const ModelParams& p, int k, double s);
double beta_transverse_inf(const ModelParams& p, int k);

/** Axial angle integral beta_n(s), odd in s; limit equals 2 a_n. */
double beta_axial(const ModelParams& p, double s);
double beta_axial_inf(const ModelParams& p);

/**
 * Graph parametrization at (w, s): x_k = w_k sqrt(h_k^2+s^2), x_n = -w_n s,
 * y_k = w_k beta_k(s) sqrt(h_k^2+s^2), y_n = w_n (1 - s beta_n(s)).
 * w must be unit to 1e-12 (normalized internally).
 */
GraphPoint lawlor_graph(const ModelParams& p, std::vector<double> w, double s);

/**
 * Inverts the graph at x: solves for (w, s) with s >= 0 by bracketed bisection,
 * returns f and grad f on the principal sheet (far field a0 - sum a_i x_i^2).
 * f vanishes on the branching ellipsoid. Throws geometry_error on the branch
 * cut, at the origin, or too close to the branching set.
 */
SheetValue reconstruct_model(const ModelParams& p, const std::vector<double>& x);

using FieldFn = std::function<std::vector<double>(const std::vector<double>&)>;

/**
 * Classifies a zero of the gradient field at p from 2n^2 deterministic samples
 * on the sphere of given radius: least-squares symmetric linearization, then
 * eigenvalue signs. Eigenvalue floor 1e-6 of the largest magnitude; a field
 * that fails the linear fit (residual > 0.1) reports is_regular = false.
 * Throws config_error when the field does not vanish at p.
 */
ZeroClassification classify_zero(const FieldFn& field, const std::vector<double>& p, double scale);

} // namespace z2glue
