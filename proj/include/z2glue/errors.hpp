#pragma once
#include <stdexcept>
#include <string>

namespace z2glue {

/** Invalid parameters or preconditions violated by the caller. */
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/** Numerical precision cannot be met (quadrature breakdown, extreme conditioning). */
struct precision_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/** Geometric degeneracy: the requested point has no valid inversion. */
struct geometry_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/** Iteration failed to converge; carries the best residual reached. */
struct convergence_error : std::runtime_error {
    double best_residual;
    convergence_error(const std::string& msg, double r)
        : std::runtime_error(msg), best_residual(r) {}
};

} // namespace z2glue
