#pragma once
#include <cmath>
#include <complex>
#include <vector>

namespace z2glue {

/**
 * Polar-grid sample of a section of the flat line bundle with monodromy -1
 * over the punctured plane. The section lives on the double cover, angles
 * [0, 4pi); only the first sheet [0, 2pi) is stored, the accessor supplies
 * the sign flip on the second sheet, so oddness holds by construction.
 */
struct BranchedGrid {
    std::vector<double> r_nodes;  // strictly increasing, positive
    int n_theta = 0;              // stored angular samples, even, >= 4
    std::vector<double> values;   // row-major, r_nodes.size() x n_theta

    double theta_step() const { return 2.0 * M_PI / n_theta; }
    double theta(int j) const { return theta_step() * j; }

    /** Double-cover value, j in [0, 2 n_theta). */
    double value(int ir, int j) const {
        const double v = values[(size_t)ir * n_theta + (j < n_theta ? j : j - n_theta)];
        return j < n_theta ? v : -v;
    }
    double& stored(int ir, int j) { return values[(size_t)ir * n_theta + j]; }
};

void validate(const BranchedGrid& g);

/** Zero-valued grid over the given nodes. */
BranchedGrid make_grid(std::vector<double> r_nodes, int n_theta);

/** One half-integer mode: Re(a e^{i(l+1/2) theta}) r^{l+2k+1/2}. */
struct ModeCoeff {
    int l;
    int k;
    std::complex<double> a;
};

/** Superposition of half-integer modes sampled on the grid nodes. */
BranchedGrid section_from_modes(const std::vector<ModeCoeff>& coeffs,
                                std::vector<double> r_nodes, int n_theta);

/**
 * Singular Holder seminorm: sup over grid pairs with |z-z'| < min(|z|,|z'|)/2
 * of |s(z) - s(z')| / |z-z'|^alpha, the two values compared after parallel
 * transport along the joining segment (equivalently: along the continuous
 * lift to the double cover). alpha in (0, 1); finiteness as the grid refines
 * is expected only for alpha <= 1/2.
 */
double holder_seminorm(const BranchedGrid& s, double alpha);
double holder_seminorm_serial(const BranchedGrid& s, double alpha);

/**
 * Smallest C with |s(z)| <= C * holder_seminorm(s, alpha) * |z|^alpha on the
 * grid; C = 0 for the zero section. Throws config_error when the seminorm
 * degenerates to zero on a nonzero section.
 */
double pointwise_bound_constant(const BranchedGrid& s, double alpha);

/** Leading half-integer asymptotics over a radial window. */
struct HalfIntegerFit {
    std::complex<double> A;  // coefficient of Re(A z^{1/2})
    std::complex<double> B;  // coefficient of Re(B z^{3/2})
    double residual;         // sup |remainder| / r^{5/2} over the window
};

/**
 * Least-squares fit of the l=0 and l=1 angular modes against r^{1/2} and
 * r^{3/2} with r^{5/2}, r^{7/2} nuisance terms keeping the leading
 * coefficients unbiased. Window must satisfy r1/r0 >= 1.2 and contain at
 * least 4 radial nodes.
 */
HalfIntegerFit fit_half_integer(const BranchedGrid& s, double r0, double r1);

} // namespace z2glue
