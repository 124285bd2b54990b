#include "vortexdyn/vortex_system.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace vortexdyn {

double VortexSystem::sep2(int j, int k) const {
    const int d = dim();
    const double* a = positions.data() + j * d;
    const double* b = positions.data() + k * d;
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

double VortexSystem::min_separation() const {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < N; ++j)
        for (int k = j + 1; k < N; ++k)
            best = std::min(best, sep2(j, k));
    return std::sqrt(best);
}

VortexSystem VortexSystem::create(int m, std::vector<double> strengths,
                                  std::vector<double> positions) {
    if (m < 1) throw std::invalid_argument("VortexSystem: m must be >= 1");
    if (m > 32) throw std::invalid_argument("VortexSystem: m > 32 not supported");
    const int N = static_cast<int>(strengths.size());
    if (N < 1) throw std::invalid_argument("VortexSystem: need at least one vortex");
    for (int j = 0; j < N; ++j) {
        if (strengths[j] == 0.0)
            throw std::invalid_argument("VortexSystem: strength " + std::to_string(j) +
                                        " is zero (the Poisson bracket divides by it)");
        if (!std::isfinite(strengths[j]))
            throw std::invalid_argument("VortexSystem: non-finite strength");
    }
    if (static_cast<int>(positions.size()) != 2 * m * N)
        throw std::invalid_argument("VortexSystem: positions must have exactly 2*m*N = " +
                                    std::to_string(2 * m * N) + " entries, got " +
                                    std::to_string(positions.size()));
    for (double p : positions)
        if (!std::isfinite(p)) throw std::invalid_argument("VortexSystem: non-finite position");

    VortexSystem sys;
    sys.m = m;
    sys.N = N;
    sys.strengths = std::move(strengths);
    sys.positions = std::move(positions);

    for (int j = 0; j < N; ++j)
        for (int k = j + 1; k < N; ++k)
            if (sys.sep2(j, k) == 0.0)
                throw std::invalid_argument("VortexSystem: vortices " + std::to_string(j) +
                                            " and " + std::to_string(k) + " coincide");
    return sys;
}

double unit_sphere_area(int m) {
    // sigma_{2m-1} = 2 pi^m / (m-1)!
    double fact = 1.0;
    for (int i = 2; i < m; ++i) fact *= i;
    return 2.0 * std::pow(std::numbers::pi, m) / fact;
}

KernelConstant kernel_constant(int m) {
    if (m < 2)
        throw std::invalid_argument("kernel_constant: m must be >= 2 "
                                    "(m=1 uses the logarithmic kernel)");
    return KernelConstant{m, -1.0 / ((2.0 * m - 2.0) * unit_sphere_area(m))};
}

void j_apply(std::span<const double> in, std::span<double> out) {
    for (std::size_t i = 0; i + 1 < in.size(); i += 2) {
        const double xa = in[i], ya = in[i + 1];
        out[i] = -ya;
        out[i + 1] = xa;
    }
}

void j_transpose_apply(std::span<const double> in, std::span<double> out) {
    for (std::size_t i = 0; i + 1 < in.size(); i += 2) {
        const double xa = in[i], ya = in[i + 1];
        out[i] = ya;
        out[i + 1] = -xa;
    }
}

void ComplexStructure::apply(std::span<const double> in, std::span<double> out) const {
    j_apply(in, out);
}

void ComplexStructure::apply_transpose(std::span<const double> in, std::span<double> out) const {
    j_transpose_apply(in, out);
}

void require_no_collision(const VortexSystem& sys, double eps) {
    const double eps2 = eps * eps;
    for (int j = 0; j < sys.N; ++j)
        for (int k = j + 1; k < sys.N; ++k) {
            const double s2 = sys.sep2(j, k);
            if (s2 < eps2) throw CollisionError(j, k, std::sqrt(s2));
        }
}

} // namespace vortexdyn
