#pragma once
#include <array>
#include <functional>
#include <string>
#include <vector>

namespace z2glue {

/** Radial cutoff profile with two derivatives, used to splice the inner
 *  cubic into the linear far field. */
struct RadialProfile {
    std::function<double(double)> value;
    std::function<double(double)> d1;
    std::function<double(double)> d2;
};

/** Built-in profile: 1 on [0,1], 0 on [M,inf), non-increasing, slope
 *  magnitude shaped as a power of the remaining distance to M so that the
 *  spliced function stays monotone along the first axis in the transition
 *  annulus; peak slope stays below the 2/M budget. */
RadialProfile birth_profile(double M);

/** Parameters of the critical-point birth model. The pair (n, r) fixes the
 *  rotational lift: the middle block of n-r-1 coordinates enters through
 *  |y'|, the last r coordinates through |z'|. */
struct BirthConfig {
    double M = 10.0;
    int n = 3;
    int r = 1;
    RadialProfile profile;
};

BirthConfig make_birth_config(double M = 10.0, int n = 3, int r = 1);

/** Structural checks: M > 2, 0 < r < n-1, profile callable with the exact
 *  endpoint values. The slope bound is measured by verify_birth, not here. */
void validate(const BirthConfig& cfg);

/** Value, gradient, and Hessian at one point. */
struct BirthJet {
    double f = 0.0;
    std::array<double, 3> grad{};
    std::array<std::array<double, 3>, 3> hess{};
};

/** Closed-form jet of the spliced function. Inside the unit ball this is
 *  the cubic x^3 - x + (x+1)y^2 + (x-1)z^2; beyond radius M it is x
 *  identically; between, the rational interpolation with profile-weighted
 *  denominator (asserted positive). */
BirthJet birth_function(const BirthConfig& cfg, double x, double y, double z);

struct CriticalPoint {
    std::vector<double> location;
    int index = -1;
    std::vector<double> hessian_eigs;
};

/** Newton refinement from a deterministic seed lattice inside the ball of
 *  radius M, deduplicated by location. */
std::vector<CriticalPoint> find_critical_points(const BirthConfig& cfg);

/** The rotationally lifted function on R^n. */
class LiftedBirth {
  public:
    explicit LiftedBirth(const BirthConfig& cfg);
    int n() const { return cfg_.n; }
    int r() const { return cfg_.r; }
    double value(const std::vector<double>& p) const;
    std::vector<double> gradient(const std::vector<double>& p) const;
    /** Critical points on the first axis with the block-replicated Hessian
     *  spectrum; indices r and r+1. */
    std::vector<CriticalPoint> critical_points() const;

  private:
    BirthConfig cfg_;
};

LiftedBirth lift_to_rn(const BirthConfig& cfg);

/** One gradient-flow escape attempt: follow the unit-speed flow of
 *  direction * grad f until the radius exceeds M. Fails on gradient stall
 *  or an exhausted path budget. */
struct FlowResult {
    bool escaped = false;
    double min_grad = 0.0;
    double path_length = 0.0;
};

FlowResult flow_escape(const BirthConfig& cfg, const std::array<double, 3>& start, int direction);

/** Escape count for npoints random starts in 1.05 < r < M, flowed both ways
 *  (2*npoints flows). Parallel and serial twins agree exactly. */
int escape_count(const BirthConfig& cfg, int npoints, unsigned seed);
int escape_count_serial(const BirthConfig& cfg, int npoints, unsigned seed);

struct BirthReport {
    bool profile_ok = false;
    double max_profile_slope = 0.0;
    double slope_bound = 0.0;
    bool outer_identity = false;
    double outer_gap = 0.0;
    bool evenness = false;
    double evenness_gap = 0.0;
    bool denominator_positive = false;
    double min_denominator = 0.0;
    bool critical_ok = false;
    std::vector<CriticalPoint> critical;
    /** Nondegenerate spectra with the expected index split admit Morse
     *  charts whose positive and negative coefficient sums balance; the
     *  condition constrains the chart scaling, not the function. */
    bool balance_by_rescaling = false;
    bool positivity_checked = false;
    bool positivity_ok = true;
    bool pass = false;
};

BirthReport verify_birth(const BirthConfig& cfg, bool check_positivity = false);

std::string birth_report_to_json(const BirthReport& report);

} // namespace z2glue
