#include "z2glue/branched_field.hpp"
#include "z2glue/errors.hpp"
#include "z2glue/linalg.hpp"
#include <algorithm>
#include <cmath>

namespace z2glue {

void validate(const BranchedGrid& g) {
    if (g.r_nodes.empty()) throw config_error("BranchedGrid: no radial nodes");
    if (g.n_theta < 4 || g.n_theta % 2 != 0)
        throw config_error("BranchedGrid: n_theta must be even and >= 4");
    double prev = 0.0;
    for (double r : g.r_nodes) {
        if (!(r > prev)) throw config_error("BranchedGrid: radii must be positive and increasing");
        prev = r;
    }
    if (g.values.size() != g.r_nodes.size() * (size_t)g.n_theta)
        throw config_error("BranchedGrid: value array shape mismatch");
}

BranchedGrid make_grid(std::vector<double> r_nodes, int n_theta) {
    BranchedGrid g;
    g.r_nodes = std::move(r_nodes);
    g.n_theta = n_theta;
    g.values.assign(g.r_nodes.size() * (size_t)std::max(n_theta, 0), 0.0);
    validate(g);
    return g;
}

BranchedGrid section_from_modes(const std::vector<ModeCoeff>& coeffs,
                                std::vector<double> r_nodes, int n_theta) {
    BranchedGrid g = make_grid(std::move(r_nodes), n_theta);
    for (const auto& c : coeffs)
        if (c.l < 0 || c.k < 0) throw config_error("section_from_modes: l, k must be >= 0");
    for (size_t ir = 0; ir < g.r_nodes.size(); ++ir) {
        double r = g.r_nodes[ir];
        for (int j = 0; j < g.n_theta; ++j) {
            double th = g.theta(j), v = 0.0;
            for (const auto& c : coeffs) {
                double mu = c.l + 0.5;
                v += std::real(c.a * std::polar(std::pow(r, c.l + 2 * c.k + 0.5), mu * th));
            }
            g.stored((int)ir, j) = v;
        }
    }
    return g;
}

namespace {

/** Largest transported difference ratio from one source node to its window. */
double row_max(const BranchedGrid& g, double alpha, int irp, int j) {
    const int nr = (int)g.r_nodes.size(), nth = g.n_theta;
    const double step = g.theta_step();
    const double rp = g.r_nodes[irp], vp = g.value(irp, j);
    // admissible pairs satisfy |dtheta| <= 2 asin(1/4); pad by one node
    const int W = (int)std::ceil(0.5054 / step) + 1;
    double best = 0.0;
    for (int irq = 0; irq < nr; ++irq) {
        const double rq = g.r_nodes[irq];
        const double rmin = std::min(rp, rq);
        if (std::max(rp, rq) >= 1.5 * rmin) continue;
        for (int dj = -W; dj <= W; ++dj) {
            if (irq == irp && dj == 0) continue;
            const double d2 = rp * rp + rq * rq - 2.0 * rp * rq * std::cos(dj * step);
            if (!(d2 < 0.25 * rmin * rmin)) continue;
            int jq = j + dj;
            if (jq < 0) jq += 2 * nth;
            if (jq >= 2 * nth) jq -= 2 * nth;
            // the continuous lift lands on jq directly; the accessor sign is the transport
            const double diff = std::fabs(vp - g.value(irq, jq));
            const double ratio = diff / std::pow(d2, 0.5 * alpha);
            best = std::max(best, ratio);
        }
    }
    return best;
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw config_error("holder seminorm: alpha must be in (0,1)");
}

} // namespace

double holder_seminorm_serial(const BranchedGrid& s, double alpha) {
    validate(s);
    check_alpha(alpha);
    const int rows = (int)s.r_nodes.size() * s.n_theta;
    double best = 0.0;
    for (int row = 0; row < rows; ++row)
        best = std::max(best, row_max(s, alpha, row / s.n_theta, row % s.n_theta));
    return best;
}

double holder_seminorm(const BranchedGrid& s, double alpha) {
    validate(s);
    check_alpha(alpha);
    const int rows = (int)s.r_nodes.size() * s.n_theta;
    double best = 0.0;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16) reduction(max : best)
#endif
    for (int row = 0; row < rows; ++row)
        best = std::max(best, row_max(s, alpha, row / s.n_theta, row % s.n_theta));
    return best;
}

double pointwise_bound_constant(const BranchedGrid& s, double alpha) {
    validate(s);
    check_alpha(alpha);
    double sup = 0.0;
    for (double v : s.values) sup = std::max(sup, std::fabs(v));
    if (sup == 0.0) return 0.0;
    double sem = holder_seminorm(s, alpha);
    if (sem == 0.0)
        throw config_error("pointwise_bound_constant: zero seminorm on a nonzero section (degenerate grid)");
    double c = 0.0;
    for (size_t ir = 0; ir < s.r_nodes.size(); ++ir) {
        double denom = sem * std::pow(s.r_nodes[ir], alpha);
        for (int j = 0; j < s.n_theta; ++j)
            c = std::max(c, std::fabs(s.value((int)ir, j)) / denom);
    }
    return c;
}

HalfIntegerFit fit_half_integer(const BranchedGrid& s, double r0, double r1) {
    validate(s);
    if (!(r0 > 0.0) || !(r1 > r0) || r1 > s.r_nodes.back() * (1.0 + 1e-12))
        throw config_error("fit_half_integer: bad radial window");
    if (r1 / r0 < 1.2) throw config_error("fit_half_integer: window too thin (r1/r0 < 1.2)");

    std::vector<int> win;
    for (size_t i = 0; i < s.r_nodes.size(); ++i)
        if (s.r_nodes[i] >= r0 && s.r_nodes[i] <= r1) win.push_back((int)i);
    if (win.size() < 4) throw config_error("fit_half_integer: fewer than 4 radial nodes in window");

    const int nth = s.n_theta;
    // angular projection on the double cover: c_l(r) with s = sum Re(c_l e^{i(l+1/2)theta})
    auto project = [&](int ir, int l) {
        std::complex<double> acc = 0.0;
        for (int j = 0; j < 2 * nth; ++j)
            acc += s.value(ir, j) * std::polar(1.0, -(l + 0.5) * s.theta(j));
        return acc / (double)nth;
    };

    HalfIntegerFit out;
    std::complex<double>* lead[2] = {&out.A, &out.B};
    for (int l = 0; l < 2; ++l) {
        std::vector<double> col0, col1, re, im;
        for (int ir : win) {
            double r = s.r_nodes[ir];
            col0.push_back(std::pow(r, l + 0.5));
            col1.push_back(std::pow(r, l + 2.5));
            std::complex<double> c = project(ir, l);
            re.push_back(c.real());
            im.push_back(c.imag());
        }
        std::vector<double> sr = lsq_columns({col0, col1}, re);
        std::vector<double> si = lsq_columns({col0, col1}, im);
        *lead[l] = {sr[0], si[0]};
    }

    double res = 0.0;
    for (size_t t = 0; t < win.size(); ++t) {
        double r = s.r_nodes[win[t]];
        for (int j = 0; j < nth; ++j) {
            double th = s.theta(j);
            double fit = std::real(out.A * std::polar(std::sqrt(r), 0.5 * th)) +
                         std::real(out.B * std::polar(std::pow(r, 1.5), 1.5 * th));
            res = std::max(res, std::fabs(s.value(win[t], j) - fit) / std::pow(r, 2.5));
        }
    }
    out.residual = res;
    return out;
}

} // namespace z2glue
