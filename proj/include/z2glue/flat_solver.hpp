#pragma once
#include "z2glue/branched_field.hpp"
#include <vector>

namespace z2glue {

/** Radial source for one half-integer angular mode, frequency l + 1/2. */
struct ModeSource {
    int l;
    std::vector<double> rho;  // samples on graded_mesh(R, J), size J+1; entries 0 and J unused
    double R;
};

/** Radial solution of one mode, vanishing at 0 and R. */
struct RadialSolution {
    int l;
    std::vector<double> u;    // samples on graded_mesh(R, J)
    double leading_coeff;     // coefficient of r^{l+1/2} at the origin
    double R;
};

/** Graded nodes r_j = R (j/J)^{3/2}, j = 0..J, clustering at the origin. */
std::vector<double> graded_mesh(double R, int J);

/** Zero branched grid over the interior graded nodes r_1..r_{J-1}. */
BranchedGrid make_branched_mesh(double R, int J, int n_theta);

/**
 * Second-order solve of u'' + u'/r - ((l+1/2)/r)^2 u = rho_l with u(0)=u(R)=0.
 * The first rows use stencils fitted to {r^mu, r^{mu+1}, r^{mu+2}} so the
 * singular origin does not degrade the order. A source vanishing on an inner
 * disk is continued there by the exact homogeneous solution c r^{mu}, making
 * leading_coeff exact to solver accuracy.
 */
RadialSolution solve_mode(const ModeSource& src, int grid_size);

/**
 * Green operator: solves Delta u = rho mode by mode on the branched grid.
 * rho must live on make_branched_mesh nodes and be supported in r <= 0.9 R.
 */
BranchedGrid green_apply(const BranchedGrid& rho, double R, int l_max);

/** A/B coefficient extraction result; exact_region is false when the source
 *  reaches the innermost rings and a window fit had to be used instead. */
struct AbExtraction {
    HalfIntegerFit fit;
    bool exact_region;
};

/**
 * Leading r^{1/2} (l=0) and r^{3/2} (l=1) coefficients of the Green solution.
 * With annulus-supported sources the coefficients come from the exactly
 * homogeneous inner region; the residual measures the l>=2 content there.
 */
AbExtraction ab_of_source(const BranchedGrid& rho, double R);

/** Constant-coefficient tangential perturbation
 *  a_rr (r d_r)^2 + a_r (r d_r) + a_tt d_theta^2 + a_t d_theta
 *  + a_rt (r d_r) d_theta + a_id. */
struct TangentialOp {
    double rr = 0.0, r = 0.0, tt = 0.0, t = 0.0, rt = 0.0, id = 0.0;
};

/** Apply the tangential operator to a grid section (modes transformed
 *  exactly in theta, radial factors by finite differences). */
BranchedGrid tangential_apply(const TangentialOp& op, const BranchedGrid& u, int l_max);

struct PerturbedSolution {
    BranchedGrid u;
    int iterations;
    double residual;            // sup norm of the last source update
    double contraction_factor;  // first measured factor of L o G
    bool converged;
};

/**
 * Solves (Delta + L) u = rho by source iteration sigma <- rho - L G sigma.
 * Refuses (convergence_error, carrying the measured factor) when the first
 * contraction factor reaches 1/2. Residual target 1e-8 relative, cap 40.
 */
PerturbedSolution perturbed_solve(const BranchedGrid& rho, const TangentialOp& op, double R,
                                  int l_max);

} // namespace z2glue
