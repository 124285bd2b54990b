#pragma once

// Pairwise interaction kernels: the Hamiltonian, its analytic gradient, the
// induced velocity field, and Jacobian-vector products for tangent dynamics.
//
// Every kernel ships in two functionally identical forms:
//   kernels::serial::*  -- plain reference loops, kept as the test oracle
//   kernels::par::*     -- OpenMP versions of the same O(N^2) loops
// The unqualified wrappers dispatch on problem size (see ExecPolicy).
//
// Pair math, shared by both variants:
//   m > 1:  H = 2 C(2m) sum_{j<k} G_j G_k |r_jk|^{2-2m}
//   m = 1:  H = -(1/4pi) sum_{j<k} G_j G_k ln |r_jk|^2
//   grad_j H = G_j sum_{k != j} G_k g(d2_jk) r_jk          (d2 = |r|^2)
//   xdot_{j,a} = (1/G_j) dH/dy_{j,a},  ydot_{j,a} = -(1/G_j) dH/dx_{j,a}
// so velocities_j = sum_{k != j} G_k g(d2_jk) J^T r_jk.

#include <span>
#include <vector>

#include "vortexdyn/vortex_system.hpp"

namespace vortexdyn {

enum class ExecPolicy { Auto, Serial, Parallel };

// Below this vortex count the parallel path is pure overhead.
inline constexpr int kParallelCutoff = 128;

namespace kernels {

// Radial factors of the pair interaction, as functions of the squared
// separation d2 (no square roots in the hot path).
struct PairKernel {
    int m;
    double c;  // C(2m) for m>1; unused for m=1

    static PairKernel make(int m) {
        return PairKernel{m, m > 1 ? kernel_constant(m).value : 0.0};
    }

    // phi(d2) with H = sum_{j<k} G_j G_k phi(d2_jk)
    double phi(double d2) const;
    // g(d2) with grad_{z_j} [G_j G_k phi] = G_j G_k g(d2) r
    double g(double d2) const;
    // dg/d(d2)
    double gp(double d2) const;
};

namespace serial {
double hamiltonian(const VortexSystem& sys, double collision_eps);
void gradient(const VortexSystem& sys, std::span<double> out, double collision_eps);
void velocities(const VortexSystem& sys, std::span<double> out, double collision_eps);
// out = (D velocities)(sys) . tangent
void jacobian_apply(const VortexSystem& sys, std::span<const double> tangent,
                    std::span<double> out, double collision_eps);
// Dense Jacobian of the velocity field, row-major (2mN x 2mN). Used by the
// implicit Newton fallback and the midpoint tangent map; O((2mN)^2) memory.
void jacobian_dense(const VortexSystem& sys, std::vector<double>& out, double collision_eps);
} // namespace serial

namespace par {
double hamiltonian(const VortexSystem& sys, double collision_eps);
void gradient(const VortexSystem& sys, std::span<double> out, double collision_eps);
void velocities(const VortexSystem& sys, std::span<double> out, double collision_eps);
void jacobian_apply(const VortexSystem& sys, std::span<const double> tangent,
                    std::span<double> out, double collision_eps);
} // namespace par

} // namespace kernels

// Public operations (policy-dispatching wrappers).
double hamiltonian(const VortexSystem& sys, double collision_eps = kDefaultCollisionEps,
                   ExecPolicy policy = ExecPolicy::Auto);

std::vector<double> hamiltonian_gradient(const VortexSystem& sys,
                                         double collision_eps = kDefaultCollisionEps,
                                         ExecPolicy policy = ExecPolicy::Auto);

// Row j holds dz_j/dt (2m entries); returned flat, matching the position layout.
std::vector<double> velocities(const VortexSystem& sys,
                               double collision_eps = kDefaultCollisionEps,
                               ExecPolicy policy = ExecPolicy::Auto);

std::vector<double> velocity_jacobian_apply(const VortexSystem& sys,
                                            std::span<const double> tangent,
                                            double collision_eps = kDefaultCollisionEps,
                                            ExecPolicy policy = ExecPolicy::Auto);

} // namespace vortexdyn
