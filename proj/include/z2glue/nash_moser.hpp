#pragma once
#include <array>
#include <functional>
#include <string>
#include <vector>

#include "z2glue/rng.hpp"

namespace z2glue {

/** Element of a graded space. The payload layout is owned by the space that
 *  created it; norms are queried through that space. */
struct GradedVector {
    std::vector<double> data;
};

/** A space with an increasing family of norms, grades 0..k_max. */
class GradedSpace {
  public:
    virtual ~GradedSpace() = default;
    virtual int dimension() const = 0;
    virtual int k_max() const = 0;
    /** Nondecreasing in k for every fixed vector. */
    virtual double norm(const GradedVector& x, int k) const = 0;
};

/** Truncated sequence space, norm(x, k) = max_j |x_j| (1+j)^k.
 *  With degenerate grading all grades collapse to max_j |x_j|. */
class SequenceSpace : public GradedSpace {
  public:
    SequenceSpace(int dim, int k_max, bool degenerate = false);
    int dimension() const override { return dim_; }
    int k_max() const override { return kmax_; }
    double norm(const GradedVector& x, int k) const override;
    bool degenerate() const { return degenerate_; }

  private:
    int dim_, kmax_;
    bool degenerate_;
};

/** Band-limited periodic functions stored as [c_0, c_1..c_N, s_1..s_N];
 *  norm(u, k) = max over derivative orders d <= k of sup |u^(d)|, with the
 *  sup located on a scan grid and polished by Newton steps. */
class CircleSpace : public GradedSpace {
  public:
    CircleSpace(int band, int k_max);
    int dimension() const override { return 2 * band_ + 1; }
    int k_max() const override { return kmax_; }
    double norm(const GradedVector& u, int k) const override;
    int band() const { return band_; }

    /** Coefficients of the derivative. */
    GradedVector derivative(const GradedVector& u) const;
    /** Product projected back onto the band. */
    GradedVector product(const GradedVector& u, const GradedVector& v) const;
    double eval(const GradedVector& u, double x) const;

  private:
    int band_, kmax_;
};

/** One smoothing family S_theta; apply requires theta >= 1. */
struct SmoothingFamily {
    std::string name;
    std::function<GradedVector(double theta, const GradedVector&)> apply;
};

/** Positive-kernel convolution smoothing on a periodic grid, realized as the
 *  Fourier multiplier of the sampled, discretely normalized kernel
 *  c theta gamma(theta |x|). Exact on constants. The remainder bound gains at
 *  most two grades (the kernel has a nonzero second moment), which the
 *  verification tables exhibit. */
struct PeriodicGridSpec {
    int size = 256;  // kernel sample count
    int band = 8;    // payload band, fixes the coefficient layout
};
SmoothingFamily mollifier_smoothing(const PeriodicGridSpec& grid,
                                    std::function<double(double)> gamma);

/** Frequency-cutoff smoothing: mode l scaled by gamma(|l|/theta). Satisfies
 *  all smoothing bounds at every grade gap and equals the identity once
 *  theta exceeds the band. */
SmoothingFamily spectral_smoothing(int band, std::function<double(double)> gamma);

/** Index-cutoff smoothing for sequence payloads: entry j scaled by
 *  gamma(j/theta). */
SmoothingFamily sequence_smoothing(std::function<double(double)> gamma);

SmoothingFamily identity_smoothing();

/** A nonlinear problem with tame structure: residual F, derivative DF, and
 *  an approximate inverse V of DF. */
class TameProblem {
  public:
    virtual ~TameProblem() = default;
    virtual const GradedSpace& space() const = 0;
    virtual int m() const = 0;
    virtual double delta() const = 0;
    virtual GradedVector F(const GradedVector& x) const = 0;
    virtual GradedVector DF(const GradedVector& x, const GradedVector& v) const = 0;
    virtual GradedVector V(const GradedVector& x, const GradedVector& Fx,
                           const GradedVector& a) const = 0;
};

/** Componentwise F(x) = x + x^2 - g on a truncated sequence space; V divides
 *  by 1 + 2x (the exact diagonal inverse) wherever the denominator stays
 *  away from zero and truncates to zero elsewhere. */
class DiagonalToy : public TameProblem {
  public:
    DiagonalToy(SequenceSpace space, GradedVector g, int m = 4, double delta = 1.0);
    const GradedSpace& space() const override { return space_; }
    int m() const override { return m_; }
    double delta() const override { return delta_; }
    GradedVector F(const GradedVector& x) const override;
    GradedVector DF(const GradedVector& x, const GradedVector& v) const override;
    GradedVector V(const GradedVector& x, const GradedVector& Fx,
                   const GradedVector& a) const override;

    /** g_j = c (1+j)^{-18} scaled so that norm(g, 2m) = target. */
    static GradedVector decaying_rhs(const SequenceSpace& s, int m, double target);

  private:
    SequenceSpace space_;
    GradedVector g_;
    int m_;
    double delta_;
};

/** F(u) = P_N(u + u u') - g on band-limited periodic functions; DF loses one
 *  derivative; V is the dense solve of the band-restricted linearization. */
class CircleToy : public TameProblem {
  public:
    CircleToy(CircleSpace space, GradedVector g, int m = 4, double delta = 5.0);
    const GradedSpace& space() const override { return space_; }
    int m() const override { return m_; }
    double delta() const override { return delta_; }
    GradedVector F(const GradedVector& u) const override;
    GradedVector DF(const GradedVector& u, const GradedVector& v) const override;
    GradedVector V(const GradedVector& u, const GradedVector& Fu,
                   const GradedVector& a) const override;

    /** Fixed geometric-decay coefficients scaled so norm(g, 2m) = target. */
    static GradedVector decaying_rhs(const CircleSpace& s, int m, double target);
    /** Random band coefficients scaled so norm(g, 2m) = target. */
    static GradedVector random_rhs(const CircleSpace& s, int m, double target, Rng& rng);

  private:
    CircleSpace space_;
    GradedVector g_;
    int m_;
    double delta_;
};

/** One iteration step as logged: state norms before the update, then the
 *  proposed correction norms. */
struct StepRecord {
    double theta;
    double res_2m;  // norm(F(x_j), 2m)
    double v_m, v_3m, v_3m3;
    double x_3m;
};

struct IterationTrace {
    std::vector<StepRecord> steps;
    double theta0 = 0.0;
    double f0_2m = 0.0;
    bool precondition_ok = false;
    bool overridden = false;
    bool converged = false;
    bool trust_violation = false;
    double final_res = 0.0;
    double final_x_m = 0.0;
    double final_x_3m = 0.0;
    int m = 0;
    double delta = 0.0;
};

struct RunResult {
    GradedVector x;
    IterationTrace trace;
};

/** Smoothed Newton iteration x_{j+1} = x_j + S_{theta_j} v_j with
 *  v_j = -V(x_j, F(x_j))(F(x_j)) and theta_{j+1} = theta_j^{5/4}. Stops at
 *  residual tol, exhausted budget, or a trust-radius violation (recorded,
 *  not thrown). The precondition norm(F(0), 2m) <= theta0^{-4} is enforced
 *  unless overridden. */
RunResult run(const TameProblem& problem, const SmoothingFamily& smoothing, double theta0,
              int budget = 25, double tol = 1e-10, bool override_precondition = false);

/** Measured constants for one grade pair over corpus x theta grid. The drift
 *  columns compare against the grid extended to twice its top theta. */
struct SmoothingPairStat {
    int k1, k2;
    double c_smooth;     // sup ||S_t x||_{k2} / (t^{k2-k1} ||x||_{k1})
    double c_remainder;  // sup ||(Id-S_t) x||_{k1} / (t^{k1-k2} ||x||_{k2})
    double drift_smooth;
    double drift_remainder;
};

struct SmoothingReport {
    std::vector<SmoothingPairStat> pairs;
    std::vector<double> theta_grid;
    std::vector<double> limit_row;  // max over corpus of ||(Id-S_t)x||_0 per theta
    bool finite = false;
    bool stable = false;            // every drift < 2
    bool limit_decreasing = false;  // limit_row nonincreasing
    bool pass = false;
};

SmoothingReport verify_smoothing(const SmoothingFamily& fam, const GradedSpace& space,
                                 const std::vector<GradedVector>& corpus, int grade_max,
                                 const std::vector<double>& theta_grid);

struct InterpolationEntry {
    int k1, k2, k3;
    double c;  // max over corpus of ||f||_{k2}^{k3-k1} / (||f||_{k1}^{k3-k2} ||f||_{k3}^{k2-k1})
};

std::vector<InterpolationEntry> interpolation_check(
    const GradedSpace& space, const std::vector<GradedVector>& corpus,
    const std::vector<std::array<int, 3>>& triples);

/** Recheck of the convergence-lemma conditions on a logged trace:
 *  I: ||x_j||_{3m} < delta and ||F(x_j)||_{2m} <= theta_j^{-4};
 *  II: ||v_j||_{3m+3} <= M theta_j^{-3} with the smallest fitted M;
 *  III: 1 + ||x_{j+1}||_{3m} <= D theta_j^{2m} (1 + ||x_j||_{3m}) with the
 *  smallest fitted D. */
struct AuditReport {
    std::vector<bool> cond_i, cond_ii, cond_iii;
    double fitted_m = 0.0;
    double fitted_d = 0.0;
    int first_violation_step = -1;
    std::string first_violation;  // "I", "II", or "III"; empty when clean
    bool pass = false;
};

AuditReport audit_trace(const IterationTrace& trace, int m, double delta);

/** JSON array of per-step records plus a summary object. */
std::string trace_to_json(const IterationTrace& trace);

} // namespace z2glue
