#include "vortexdyn/kernels.hpp"

#include <cmath>
#include <cstring>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vortexdyn::kernels {

namespace {

constexpr double kInv4Pi = 1.0 / (4.0 * std::numbers::pi);
constexpr double kInv2Pi = 1.0 / (2.0 * std::numbers::pi);

// (1/d2)^p for small integer p
inline double inv_ipow(double d2, int p) {
    const double r = 1.0 / d2;
    double acc = 1.0;
    for (int i = 0; i < p; ++i) acc *= r;
    return acc;
}

inline void check_pair(int j, int k, double d2, double eps2) {
    if (d2 < eps2) throw CollisionError(j, k, std::sqrt(d2));
}

} // namespace

double PairKernel::phi(double d2) const {
    if (m == 1) return -kInv4Pi * std::log(d2);
    return 2.0 * c * inv_ipow(d2, m - 1);
}

double PairKernel::g(double d2) const {
    if (m == 1) return -kInv2Pi / d2;
    return 2.0 * c * (2.0 - 2.0 * m) * inv_ipow(d2, m);
}

double PairKernel::gp(double d2) const {
    if (m == 1) return kInv2Pi / (d2 * d2);
    return -2.0 * c * (2.0 - 2.0 * m) * m * inv_ipow(d2, m + 1);
}

// ---------------------------------------------------------------- serial ---

namespace serial {

double hamiltonian(const VortexSystem& sys, double eps) {
    const auto k = PairKernel::make(sys.m);
    const double eps2 = eps * eps;
    double h = 0.0;
    for (int j = 0; j < sys.N; ++j)
        for (int l = j + 1; l < sys.N; ++l) {
            const double d2 = sys.sep2(j, l);
            check_pair(j, l, d2, eps2);
            h += sys.strengths[j] * sys.strengths[l] * k.phi(d2);
        }
    return h;
}

void gradient(const VortexSystem& sys, std::span<double> out, double eps) {
    const auto ker = PairKernel::make(sys.m);
    const double eps2 = eps * eps;
    const int d = sys.dim();
    std::fill(out.begin(), out.end(), 0.0);
    // symmetric accumulation: each pair contributes +w*r to j and -w*r to l
    for (int j = 0; j < sys.N; ++j) {
        const double* zj = sys.positions.data() + j * d;
        for (int l = j + 1; l < sys.N; ++l) {
            const double* zl = sys.positions.data() + l * d;
            double d2 = 0.0;
            for (int i = 0; i < d; ++i) {
                const double diff = zj[i] - zl[i];
                d2 += diff * diff;
            }
            check_pair(j, l, d2, eps2);
            const double w = sys.strengths[j] * sys.strengths[l] * ker.g(d2);
            for (int i = 0; i < d; ++i) {
                const double ri = zj[i] - zl[i];
                out[j * d + i] += w * ri;
                out[l * d + i] -= w * ri;
            }
        }
    }
}

void velocities(const VortexSystem& sys, std::span<double> out, double eps) {
    const auto ker = PairKernel::make(sys.m);
    const double eps2 = eps * eps;
    const int d = sys.dim();
    std::fill(out.begin(), out.end(), 0.0);
    for (int j = 0; j < sys.N; ++j) {
        const double* zj = sys.positions.data() + j * d;
        double* vj = out.data() + j * d;
        for (int l = 0; l < sys.N; ++l) {
            if (l == j) continue;
            const double* zl = sys.positions.data() + l * d;
            double d2 = 0.0;
            for (int i = 0; i < d; ++i) {
                const double diff = zj[i] - zl[i];
                d2 += diff * diff;
            }
            if (l > j) check_pair(j, l, d2, eps2);
            const double w = sys.strengths[l] * ker.g(d2);
            // w * J^T r, blockwise (rx, ry) -> (ry, -rx)
            for (int a = 0; a < sys.m; ++a) {
                const double rx = zj[2 * a] - zl[2 * a];
                const double ry = zj[2 * a + 1] - zl[2 * a + 1];
                vj[2 * a] += w * ry;
                vj[2 * a + 1] -= w * rx;
            }
        }
    }
}

namespace {

// per-pair tangent contribution: M(r)(dj - dl) with M = J^T [g I + 2 gp r r^T]
inline void accumulate_pair_tangent(const PairKernel& ker, int m, double d2,
                                    const double* r, const double* ddiff,
                                    double strength, double* acc) {
    const double g = ker.g(d2);
    const double gp = ker.gp(d2);
    double rdotd = 0.0;
    for (int i = 0; i < 2 * m; ++i) rdotd += r[i] * ddiff[i];
    const double s = 2.0 * gp * rdotd;
    for (int a = 0; a < m; ++a) {
        const double bx = g * ddiff[2 * a] + s * r[2 * a];
        const double by = g * ddiff[2 * a + 1] + s * r[2 * a + 1];
        acc[2 * a] += strength * by;
        acc[2 * a + 1] -= strength * bx;
    }
}

} // namespace

void jacobian_apply(const VortexSystem& sys, std::span<const double> tangent,
                    std::span<double> out, double eps) {
    const auto ker = PairKernel::make(sys.m);
    const double eps2 = eps * eps;
    const int d = sys.dim();
    std::fill(out.begin(), out.end(), 0.0);
    double r[64], dd[64];  // dim <= 32 supported everywhere in this library
    for (int j = 0; j < sys.N; ++j) {
        const double* zj = sys.positions.data() + j * d;
        const double* tj = tangent.data() + j * d;
        for (int l = 0; l < sys.N; ++l) {
            if (l == j) continue;
            const double* zl = sys.positions.data() + l * d;
            const double* tl = tangent.data() + l * d;
            double d2 = 0.0;
            for (int i = 0; i < d; ++i) {
                r[i] = zj[i] - zl[i];
                dd[i] = tj[i] - tl[i];
                d2 += r[i] * r[i];
            }
            if (l > j) check_pair(j, l, d2, eps2);
            accumulate_pair_tangent(ker, sys.m, d2, r, dd, sys.strengths[l],
                                    out.data() + j * d);
        }
    }
}

void jacobian_dense(const VortexSystem& sys, std::vector<double>& out, double eps) {
    const int n = sys.state_size();
    out.assign(static_cast<std::size_t>(n) * n, 0.0);
    // column-by-column via jacobian_apply on basis tangents; n is small where
    // this is used (implicit Newton, tangent maps), so O(n * N^2) is fine.
    std::vector<double> e(n, 0.0), col(n, 0.0);
    for (int c = 0; c < n; ++c) {
        e[c] = 1.0;
        jacobian_apply(sys, e, col, eps);
        for (int rrow = 0; rrow < n; ++rrow) out[static_cast<std::size_t>(rrow) * n + c] = col[rrow];
        e[c] = 0.0;
    }
}

} // namespace serial

// ------------------------------------------------------------------- par ---

namespace par {

double hamiltonian(const VortexSystem& sys, double eps) {
    const auto k = PairKernel::make(sys.m);
    const double eps2 = eps * eps;
    const int N = sys.N;
    double h = 0.0;
    bool collided = false;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : h) reduction(|| : collided)
    for (int j = 0; j < N; ++j) {
        double hj = 0.0;
        for (int l = j + 1; l < N; ++l) {
            const double d2 = sys.sep2(j, l);
            if (d2 < eps2) { collided = true; continue; }
            hj += sys.strengths[j] * sys.strengths[l] * k.phi(d2);
        }
        h += hj;
    }
    if (collided) require_no_collision(sys, eps);  // re-scan to name the pair
    return h;
}

void gradient(const VortexSystem& sys, std::span<double> out, double eps) {
    const auto ker = PairKernel::make(sys.m);
    const double eps2 = eps * eps;
    const int d = sys.dim();
    const int N = sys.N;
    bool collided = false;
#pragma omp parallel for schedule(static) reduction(|| : collided)
    for (int j = 0; j < N; ++j) {
        const double* zj = sys.positions.data() + j * d;
        double* gj = out.data() + j * d;
        std::fill(gj, gj + d, 0.0);
        for (int l = 0; l < N; ++l) {
            if (l == j) continue;
            const double* zl = sys.positions.data() + l * d;
            double d2 = 0.0;
            for (int i = 0; i < d; ++i) {
                const double diff = zj[i] - zl[i];
                d2 += diff * diff;
            }
            if (d2 < eps2) { collided = true; continue; }
            const double w = sys.strengths[j] * sys.strengths[l] * ker.g(d2);
            for (int i = 0; i < d; ++i) gj[i] += w * (zj[i] - zl[i]);
        }
    }
    if (collided) require_no_collision(sys, eps);
}

void velocities(const VortexSystem& sys, std::span<double> out, double eps) {
    const auto ker = PairKernel::make(sys.m);
    const double eps2 = eps * eps;
    const int d = sys.dim();
    const int N = sys.N;
    bool collided = false;
#pragma omp parallel for schedule(static) reduction(|| : collided)
    for (int j = 0; j < N; ++j) {
        const double* zj = sys.positions.data() + j * d;
        double* vj = out.data() + j * d;
        std::fill(vj, vj + d, 0.0);
        for (int l = 0; l < N; ++l) {
            if (l == j) continue;
            const double* zl = sys.positions.data() + l * d;
            double d2 = 0.0;
            for (int i = 0; i < d; ++i) {
                const double diff = zj[i] - zl[i];
                d2 += diff * diff;
            }
            if (d2 < eps2) { collided = true; continue; }
            const double w = sys.strengths[l] * ker.g(d2);
            for (int a = 0; a < sys.m; ++a) {
                const double rx = zj[2 * a] - zl[2 * a];
                const double ry = zj[2 * a + 1] - zl[2 * a + 1];
                vj[2 * a] += w * ry;
                vj[2 * a + 1] -= w * rx;
            }
        }
    }
    if (collided) require_no_collision(sys, eps);
}

void jacobian_apply(const VortexSystem& sys, std::span<const double> tangent,
                    std::span<double> out, double eps) {
    const auto ker = PairKernel::make(sys.m);
    const double eps2 = eps * eps;
    const int d = sys.dim();
    const int N = sys.N;
    bool collided = false;
#pragma omp parallel for schedule(static) reduction(|| : collided)
    for (int j = 0; j < N; ++j) {
        const double* zj = sys.positions.data() + j * d;
        const double* tj = tangent.data() + j * d;
        double* oj = out.data() + j * d;
        std::fill(oj, oj + d, 0.0);
        double r[64], dd[64];
        for (int l = 0; l < N; ++l) {
            if (l == j) continue;
            const double* zl = sys.positions.data() + l * d;
            const double* tl = tangent.data() + l * d;
            double d2 = 0.0;
            for (int i = 0; i < d; ++i) {
                r[i] = zj[i] - zl[i];
                dd[i] = tj[i] - tl[i];
                d2 += r[i] * r[i];
            }
            if (d2 < eps2) { collided = true; continue; }
            const double g = ker.g(d2);
            const double gp = ker.gp(d2);
            double rdotd = 0.0;
            for (int i = 0; i < d; ++i) rdotd += r[i] * dd[i];
            const double s = 2.0 * gp * rdotd;
            const double w = sys.strengths[l];
            for (int a = 0; a < sys.m; ++a) {
                const double bx = g * dd[2 * a] + s * r[2 * a];
                const double by = g * dd[2 * a + 1] + s * r[2 * a + 1];
                oj[2 * a] += w * by;
                oj[2 * a + 1] -= w * bx;
            }
        }
    }
    if (collided) require_no_collision(sys, eps);
}

} // namespace par

} // namespace vortexdyn::kernels

// ------------------------------------------------------------- dispatch ---

namespace vortexdyn {

namespace {
inline bool use_parallel(const VortexSystem& sys, ExecPolicy policy) {
    switch (policy) {
        case ExecPolicy::Serial: return false;
        case ExecPolicy::Parallel: return true;
        case ExecPolicy::Auto: break;
    }
    return sys.N >= kParallelCutoff;
}
} // namespace

double hamiltonian(const VortexSystem& sys, double collision_eps, ExecPolicy policy) {
    return use_parallel(sys, policy) ? kernels::par::hamiltonian(sys, collision_eps)
                                     : kernels::serial::hamiltonian(sys, collision_eps);
}

std::vector<double> hamiltonian_gradient(const VortexSystem& sys, double collision_eps,
                                         ExecPolicy policy) {
    std::vector<double> out(sys.state_size());
    if (use_parallel(sys, policy))
        kernels::par::gradient(sys, out, collision_eps);
    else
        kernels::serial::gradient(sys, out, collision_eps);
    return out;
}

std::vector<double> velocities(const VortexSystem& sys, double collision_eps,
                               ExecPolicy policy) {
    std::vector<double> out(sys.state_size());
    if (use_parallel(sys, policy))
        kernels::par::velocities(sys, out, collision_eps);
    else
        kernels::serial::velocities(sys, out, collision_eps);
    return out;
}

std::vector<double> velocity_jacobian_apply(const VortexSystem& sys,
                                            std::span<const double> tangent,
                                            double collision_eps, ExecPolicy policy) {
    std::vector<double> out(sys.state_size());
    if (use_parallel(sys, policy))
        kernels::par::jacobian_apply(sys, tangent, out, collision_eps);
    else
        kernels::serial::jacobian_apply(sys, tangent, out, collision_eps);
    return out;
}

} // namespace vortexdyn
