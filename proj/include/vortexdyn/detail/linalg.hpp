#pragma once

// Small dense routines for the fixed-size problems in this library
// (implicit Newton solves, tangent maps, plane fitting, random motions).
// Matrices are row-major std::vector<double>.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace vortexdyn::detail {

// Solve A x = b in place by LU with partial pivoting; A is n x n row-major
// and is destroyed. Returns false if A is numerically singular.
bool lu_solve(std::vector<double>& A, std::span<double> b, int n);

// Eigenvalues of a symmetric n x n matrix by cyclic Jacobi rotations,
// returned in descending order. A is destroyed.
std::vector<double> symmetric_eigenvalues(std::vector<double>& A, int n);

// y = M x for n x n row-major M.
void matvec(std::span<const double> M, std::span<const double> x, std::span<double> y, int n);

// max |M N - N M| entry, both n x n.
double commutator_max(std::span<const double> A, std::span<const double> B, int n);

// max |M^T M - I| entry.
double orthogonality_defect(std::span<const double> M, int n);

// Random n x n real orthogonal matrix (QR of a Gaussian matrix).
std::vector<double> random_orthogonal(int n, std::uint64_t& rng_state);

// Random element of U(m) embedded as a 2m x 2m real matrix acting blockwise on
// interleaved (x_a, y_a) coordinates; commutes with the complex structure J.
std::vector<double> random_unitary_real(int m, std::uint64_t& rng_state);

// splitmix64: tiny deterministic PRNG used for sub-seed derivation and the
// helpers above.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// uniform double in [0, 1)
inline double uniform01(std::uint64_t& state) {
    return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

// uniform double in [a, b)
inline double uniform(std::uint64_t& state, double a, double b) {
    return a + (b - a) * uniform01(state);
}

// standard normal via Box-Muller
double gaussian(std::uint64_t& state);

} // namespace vortexdyn::detail
