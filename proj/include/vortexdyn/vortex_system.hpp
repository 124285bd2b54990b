#pragma once

// Phase-space representation of N point vortices in R^{2m}.
//
// Positions are stored flat and interleaved per vortex:
//   (x_{j,1}, y_{j,1}, x_{j,2}, y_{j,2}, ..., x_{j,m}, y_{j,m})
// so the complex structure J acts blockwise with stride 2.

#include <span>
#include <vector>

#include "vortexdyn/errors.hpp"

namespace vortexdyn {

inline constexpr double kDefaultCollisionEps = 1e-10;

struct VortexSystem {
    int m = 1;                       // half-dimension: phase space is (R^{2m})^N
    int N = 0;                       // vortex count
    std::vector<double> strengths;   // circulations Gamma_j, all nonzero
    std::vector<double> positions;   // 2*m*N entries, interleaved

    int dim() const { return 2 * m; }
    int state_size() const { return 2 * m * N; }

    double x(int j, int alpha) const { return positions[j * dim() + 2 * alpha]; }
    double y(int j, int alpha) const { return positions[j * dim() + 2 * alpha + 1]; }
    double& x(int j, int alpha) { return positions[j * dim() + 2 * alpha]; }
    double& y(int j, int alpha) { return positions[j * dim() + 2 * alpha + 1]; }

    std::span<const double> pos(int j) const {
        return std::span<const double>(positions).subspan(j * dim(), dim());
    }
    std::span<double> pos(int j) {
        return std::span<double>(positions).subspan(j * dim(), dim());
    }

    // Squared separation |z_j - z_k|^2.
    double sep2(int j, int k) const;

    // Smallest pairwise separation; +inf for N=1.
    double min_separation() const;

    // Validating factory. Throws std::invalid_argument on contract violations
    // (m < 1, zero strength, wrong position count, non-finite or coincident positions).
    static VortexSystem create(int m, std::vector<double> strengths,
                               std::vector<double> positions);
};

// Coefficient of the Laplace fundamental solution in R^{2m}, m >= 2:
//   value = -1 / ((2m-2) * sigma_{2m-1}),  sigma_{2m-1} = 2 pi^m / (m-1)!
// so that Lap(value * |z|^{2-2m}) = delta. The m=1 logarithmic kernel is handled
// separately and carries its -1/(4 pi) factor explicitly.
struct KernelConstant {
    int m;
    double value;
};

KernelConstant kernel_constant(int m);

// Unit-sphere area sigma_{n-1} = area of S^{n-1} in R^n, for even n = 2m.
double unit_sphere_area(int m);

// The standard complex structure on R^{2m}: (x_a, y_a) -> (-y_a, x_a) blockwise.
// J^2 = -I and J preserves the Euclidean norm.
struct ComplexStructure {
    int m;

    void apply(std::span<const double> in, std::span<double> out) const;
    // J^T = J^{-1} = -J: (x_a, y_a) -> (y_a, -x_a).
    void apply_transpose(std::span<const double> in, std::span<double> out) const;
};

// Free helpers for the blockwise action on any even-length span.
void j_apply(std::span<const double> in, std::span<double> out);
void j_transpose_apply(std::span<const double> in, std::span<double> out);

// Throws CollisionError if any pair is closer than eps.
void require_no_collision(const VortexSystem& sys, double eps = kDefaultCollisionEps);

} // namespace vortexdyn
