#pragma once
#include <cmath>

namespace z2glue {

/** exp(-1/u) for u > 0, extended by 0; with first two derivatives. */
namespace detail {
inline double expb(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }
inline double expb1(double u) {
    double a = expb(u);
    return a == 0.0 ? 0.0 : a / (u * u);
}
inline double expb2(double u) {
    double a = expb(u);
    return a == 0.0 ? 0.0 : a * (1.0 / (u * u * u * u) - 2.0 / (u * u * u));
}
} // namespace detail

/** C-infinity step: 0 for u <= 0, 1 for u >= 1, strictly increasing between. */
inline double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    double a = detail::expb(u), b = detail::expb(1.0 - u);
    return a / (a + b);
}

inline double smooth_step_d1(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    double a = detail::expb(u), b = detail::expb(1.0 - u);
    double s = a + b;
    return (detail::expb1(u) * b + a * detail::expb1(1.0 - u)) / (s * s);
}

inline double smooth_step_d2(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    double a = detail::expb(u), b = detail::expb(1.0 - u);
    double a1 = detail::expb1(u), b1 = -detail::expb1(1.0 - u);
    double s = a + b;
    double num = a1 * b - a * b1;                                  // s^2 sigma'
    double nump = detail::expb2(u) * b - a * detail::expb2(1.0 - u);
    return (nump * s - 2.0 * num * (a1 + b1)) / (s * s * s);
}

/** Non-increasing plateau profile: 1 on [0,1], 0 on [2,inf). */
inline double plateau(double u) { return 1.0 - smooth_step(u - 1.0); }
inline double plateau_d1(double u) { return -smooth_step_d1(u - 1.0); }

} // namespace z2glue
