// Times the parallel kernels against their serial references and checks
// that both produce identical results.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <vector>

#include "z2glue/branched_field.hpp"
#include "z2glue/flat_solver.hpp"
#include "z2glue/models.hpp"
#include "z2glue/morse_forge.hpp"
#include "z2glue/preglue.hpp"
#include "z2glue/profiles.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace z2glue;

namespace {

double now_run(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, double serial_s, double parallel_s, bool match) {
    std::printf("%-28s serial %8.3f s   parallel %8.3f s   speedup %5.2fx   %s\n", name,
                serial_s, parallel_s, serial_s / parallel_s, match ? "match" : "MISMATCH");
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (no OpenMP)\n");
#endif
    bool all_match = true;

    {
        BranchedGrid s = make_branched_mesh(1.0, 384, 96);
        for (size_t i = 0; i < s.r_nodes.size(); ++i) {
            const double r = s.r_nodes[i];
            const double w = smooth_step((r - 0.2) / 0.1) * smooth_step((0.8 - r) / 0.1);
            for (int j = 0; j < s.n_theta; ++j)
                s.stored(i, j) = w * std::cos(1.5 * s.theta(j)) * std::sin(3.0 * r);
        }
        double a = 0.0, b = 0.0;
        const double ts = now_run([&] { a = holder_seminorm_serial(s, 0.4); });
        const double tp = now_run([&] { b = holder_seminorm(s, 0.4); });
        const bool match = a == b;
        all_match &= match;
        report("holder_seminorm", ts, tp, match);
    }

    {
        const ModelParams model{3, {1.0, 1.0}};
        Background bg;
        bg.quad = asymptotic_coeffs(model);
        GlueConfig cfg;
        cfg.eps = 0.01;
        const double ell = std::pow(cfg.eps, 1.0 - cfg.sigma);
        const Lattice lat = make_lattice(3, 0.1 * ell, 6.0 * ell, 220, 48);
        FieldGrid gs, gp;
        const double ts = now_run([&] { gs = build_pregluing_serial(bg, model, cfg, lat); });
        const double tp = now_run([&] { gp = build_pregluing(bg, model, cfg, lat); });
        const bool match = gs.values == gp.values;
        all_match &= match;
        report("build_pregluing", ts, tp, match);
    }

    {
        const BirthConfig cfg = make_birth_config(10.0, 3, 1);
        int a = 0, b = 0;
        const double ts = now_run([&] { a = escape_count_serial(cfg, 600, 17); });
        const double tp = now_run([&] { b = escape_count(cfg, 600, 17); });
        const bool match = a == b;
        all_match &= match;
        report("escape_count", ts, tp, match);
    }

    if (!all_match) {
        std::printf("parallel and serial kernels disagree\n");
        return 1;
    }
    return 0;
}
