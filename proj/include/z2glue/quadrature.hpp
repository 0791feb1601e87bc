#pragma once
#include <cmath>
#include <utility>
#include <vector>

#include "z2glue/errors.hpp"

namespace z2glue {

/**
 * Adaptive Gauss-Kronrod (7,15) quadrature.
 *
 * Panels are bisected while the Kronrod-Gauss discrepancy exceeds the
 * per-panel share of the tolerance.  Endpoints are never evaluated, so
 * integrands may blow up (integrably) at either end of the interval.
 */
namespace gk {

// 15-point Kronrod abscissae on [0,1] side of [-1,1]; even indices are the
// embedded 7-point Gauss nodes.
inline constexpr double XGK[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double WGK[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double WG[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

/** One (7,15) panel on [a,b]: returns {integral, error estimate}. */
template <class F>
std::pair<double, double> panel(F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = WGK[7] * fc;
    double resg = WG[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = h * XGK[i];
        const double fs = f(c - dx) + f(c + dx);
        resk += WGK[i] * fs;
        if (i % 2 == 1) resg += WG[i / 2] * fs;
    }
    return {resk * h, std::fabs(resk - resg) * h};
}

} // namespace gk

/**
 * Integrate f over [a,b] to the requested tolerance.
 * Throws precision_error when the panel budget is exhausted.
 */
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-12,
                 double abs_tol = 1e-15, int max_panels = 4000) {
    if (a == b) return 0.0;
    struct Iv { double a, b, val, err; };
    auto [v0, e0] = gk::panel(f, a, b);
    std::vector<Iv> stack{{a, b, v0, e0}};
    double total = v0, total_err = e0;
    int panels = 1;
    while (!stack.empty()) {
        // grab the worst interval
        size_t worst = 0;
        for (size_t i = 1; i < stack.size(); ++i)
            if (stack[i].err > stack[worst].err) worst = i;
        const double tol = std::max(abs_tol, rel_tol * std::fabs(total));
        if (total_err <= tol) break;
        Iv iv = stack[worst];
        stack.erase(stack.begin() + static_cast<long>(worst));
        if (++panels > max_panels)
            throw precision_error("quadrature: panel budget exhausted");
        const double m = 0.5 * (iv.a + iv.b);
        auto [vl, el] = gk::panel(f, iv.a, m);
        auto [vr, er] = gk::panel(f, m, iv.b);
        total += vl + vr - iv.val;
        total_err += el + er - iv.err;
        stack.push_back({iv.a, m, vl, el});
        stack.push_back({m, iv.b, vr, er});
    }
    return total;
}

/** Integrate f over [0, inf) via u = tan t.  f must decay integrably. */
template <class F>
double integrate_half_line(F&& f, double rel_tol = 1e-12,
                           double abs_tol = 1e-15, int max_panels = 4000) {
    auto g = [&](double t) {
        const double c = std::cos(t);
        const double u = std::tan(t);
        return f(u) / (c * c);
    };
    return integrate(g, 0.0, 1.5707963267948966, rel_tol, abs_tol, max_panels);
}

} // namespace z2glue
