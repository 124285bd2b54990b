// Timings of the serial reference kernels against the OpenMP variants, and of
// the field bracket's pointwise stage. Run: vortexdyn_bench [reps]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vortexdyn/detail/random_systems.hpp"
#include "vortexdyn/field2d.hpp"
#include "vortexdyn/kernels.hpp"

using namespace vortexdyn;

namespace {

double time_ms(int reps, const std::function<void()>& fn) {
    fn();  // warm up
    const auto t0 = std::chrono::high_resolution_clock::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto t1 = std::chrono::high_resolution_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

} // namespace

int main(int argc, char** argv) {
    const int reps = argc > 1 ? std::atoi(argv[1]) : 5;
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (no OpenMP)\n");
#endif
    std::printf("%-18s %8s %6s %12s %12s %9s\n", "kernel", "N", "m", "serial ms", "openmp ms",
                "speedup");

    for (int m : {1, 2}) {
        for (int N : {512, 2048, 8192}) {
            // jittered lattice in the first two coordinates: guaranteed
            // separation at any N, unlike rejection sampling
            std::uint64_t seed = 42;
            const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(N))));
            std::vector<double> strengths(N), positions(static_cast<std::size_t>(2) * m * N);
            for (int j = 0; j < N; ++j) {
                strengths[j] = detail::uniform(seed, 0.5, 2.0) * ((j & 1) ? -1.0 : 1.0);
                positions[j * 2 * m] = (j % side) + detail::uniform(seed, -0.3, 0.3);
                positions[j * 2 * m + 1] = (j / side) + detail::uniform(seed, -0.3, 0.3);
                for (int i = 2; i < 2 * m; ++i)
                    positions[j * 2 * m + i] = detail::uniform(seed, -0.3, 0.3);
            }
            const auto sys = VortexSystem::create(m, std::move(strengths), std::move(positions));
            std::vector<double> out(sys.state_size());
            std::vector<double> tangent(sys.state_size(), 1.0);

            const double gs = time_ms(reps, [&] { kernels::serial::gradient(sys, out, 1e-10); });
            const double gp = time_ms(reps, [&] { kernels::par::gradient(sys, out, 1e-10); });
            std::printf("%-18s %8d %6d %12.3f %12.3f %8.2fx\n", "gradient", N, m, gs, gp, gs / gp);

            const double vs = time_ms(reps, [&] { kernels::serial::velocities(sys, out, 1e-10); });
            const double vp = time_ms(reps, [&] { kernels::par::velocities(sys, out, 1e-10); });
            std::printf("%-18s %8d %6d %12.3f %12.3f %8.2fx\n", "velocities", N, m, vs, vp, vs / vp);

            const double js = time_ms(reps, [&] { kernels::serial::jacobian_apply(sys, tangent, out, 1e-10); });
            const double jp = time_ms(reps, [&] { kernels::par::jacobian_apply(sys, tangent, out, 1e-10); });
            std::printf("%-18s %8d %6d %12.3f %12.3f %8.2fx\n", "jacobian_apply", N, m, js, jp, js / jp);
        }
    }

    for (int n : {256, 512}) {
        auto grid = VorticityGrid::from_function(
            n, n, [](double x, double y) { return std::cos(x) * std::cos(2 * y) + std::sin(3 * x + y); });
        grid.project_zero_mean();
        const auto psi = solve_poisson(grid);
        const double bs = time_ms(reps, [&] { (void)bracket(psi, grid, ExecPolicy::Serial); });
        const double bp = time_ms(reps, [&] { (void)bracket(psi, grid, ExecPolicy::Parallel); });
        std::printf("%-18s %5dx%-3d %4s %12.3f %12.3f %8.2fx\n", "field bracket", n, n, "-", bs,
                    bp, bs / bp);
    }
    return 0;
}
