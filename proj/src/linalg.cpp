#include "vortexdyn/detail/linalg.hpp"

#include <cmath>
#include <numbers>

namespace vortexdyn::detail {

bool lu_solve(std::vector<double>& A, std::span<double> b, int n) {
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int col = 0; col < n; ++col) {
        int p = col;
        double best = std::fabs(A[static_cast<std::size_t>(col) * n + col]);
        for (int r = col + 1; r < n; ++r) {
            const double v = std::fabs(A[static_cast<std::size_t>(r) * n + col]);
            if (v > best) { best = v; p = r; }
        }
        if (best == 0.0) return false;
        if (p != col) {
            for (int c = 0; c < n; ++c)
                std::swap(A[static_cast<std::size_t>(p) * n + c],
                          A[static_cast<std::size_t>(col) * n + c]);
            std::swap(b[p], b[col]);
        }
        const double pivot = A[static_cast<std::size_t>(col) * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double f = A[static_cast<std::size_t>(r) * n + col] / pivot;
            if (f == 0.0) continue;
            A[static_cast<std::size_t>(r) * n + col] = 0.0;
            for (int c = col + 1; c < n; ++c)
                A[static_cast<std::size_t>(r) * n + c] -= f * A[static_cast<std::size_t>(col) * n + c];
            b[r] -= f * b[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= A[static_cast<std::size_t>(r) * n + c] * b[c];
        b[r] = s / A[static_cast<std::size_t>(r) * n + r];
    }
    return true;
}

std::vector<double> symmetric_eigenvalues(std::vector<double>& A, int n) {
    auto at = [&](int r, int c) -> double& { return A[static_cast<std::size_t>(r) * n + c]; };
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int r = 0; r < n; ++r)
            for (int c = r + 1; c < n; ++c) off += at(r, c) * at(r, c);
        if (off < 1e-30) break;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (apq == 0.0) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = at(i, i);
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

void matvec(std::span<const double> M, std::span<const double> x, std::span<double> y, int n) {
    for (int r = 0; r < n; ++r) {
        double s = 0.0;
        for (int c = 0; c < n; ++c) s += M[static_cast<std::size_t>(r) * n + c] * x[c];
        y[r] = s;
    }
}

double commutator_max(std::span<const double> A, std::span<const double> B, int n) {
    double worst = 0.0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            double ab = 0.0, ba = 0.0;
            for (int k = 0; k < n; ++k) {
                ab += A[static_cast<std::size_t>(r) * n + k] * B[static_cast<std::size_t>(k) * n + c];
                ba += B[static_cast<std::size_t>(r) * n + k] * A[static_cast<std::size_t>(k) * n + c];
            }
            worst = std::max(worst, std::fabs(ab - ba));
        }
    return worst;
}

double orthogonality_defect(std::span<const double> M, int n) {
    double worst = 0.0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            double s = 0.0;
            for (int k = 0; k < n; ++k)
                s += M[static_cast<std::size_t>(k) * n + r] * M[static_cast<std::size_t>(k) * n + c];
            worst = std::max(worst, std::fabs(s - (r == c ? 1.0 : 0.0)));
        }
    return worst;
}

double gaussian(std::uint64_t& state) {
    double u1 = uniform01(state);
    while (u1 <= 1e-300) u1 = uniform01(state);
    const double u2 = uniform01(state);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> random_orthogonal(int n, std::uint64_t& rng_state) {
    // Gram-Schmidt on Gaussian columns
    std::vector<double> Q(static_cast<std::size_t>(n) * n);
    for (auto& v : Q) v = gaussian(rng_state);
    for (int c = 0; c < n; ++c) {
        for (int prev = 0; prev < c; ++prev) {
            double dot = 0.0;
            for (int r = 0; r < n; ++r)
                dot += Q[static_cast<std::size_t>(r) * n + c] * Q[static_cast<std::size_t>(r) * n + prev];
            for (int r = 0; r < n; ++r)
                Q[static_cast<std::size_t>(r) * n + c] -= dot * Q[static_cast<std::size_t>(r) * n + prev];
        }
        double norm = 0.0;
        for (int r = 0; r < n; ++r) {
            const double v = Q[static_cast<std::size_t>(r) * n + c];
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (int r = 0; r < n; ++r) Q[static_cast<std::size_t>(r) * n + c] /= norm;
    }
    return Q;
}

std::vector<double> random_unitary_real(int m, std::uint64_t& rng_state) {
    using cd = std::complex<double>;
    // complex Gaussian matrix -> modified Gram-Schmidt QR -> unitary Q
    std::vector<cd> Q(static_cast<std::size_t>(m) * m);
    for (auto& v : Q) v = cd(gaussian(rng_state), gaussian(rng_state));
    for (int c = 0; c < m; ++c) {
        for (int prev = 0; prev < c; ++prev) {
            cd dot(0.0, 0.0);
            for (int r = 0; r < m; ++r)
                dot += std::conj(Q[static_cast<std::size_t>(r) * m + prev]) * Q[static_cast<std::size_t>(r) * m + c];
            for (int r = 0; r < m; ++r)
                Q[static_cast<std::size_t>(r) * m + c] -= dot * Q[static_cast<std::size_t>(r) * m + prev];
        }
        double norm = 0.0;
        for (int r = 0; r < m; ++r) norm += std::norm(Q[static_cast<std::size_t>(r) * m + c]);
        norm = std::sqrt(norm);
        for (int r = 0; r < m; ++r) Q[static_cast<std::size_t>(r) * m + c] /= norm;
    }
    // embed: complex entry q at block (r, c) becomes [[Re, -Im], [Im, Re]]
    const int n = 2 * m;
    std::vector<double> U(static_cast<std::size_t>(n) * n, 0.0);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) {
            const cd q = Q[static_cast<std::size_t>(r) * m + c];
            U[static_cast<std::size_t>(2 * r) * n + 2 * c] = q.real();
            U[static_cast<std::size_t>(2 * r) * n + 2 * c + 1] = -q.imag();
            U[static_cast<std::size_t>(2 * r + 1) * n + 2 * c] = q.imag();
            U[static_cast<std::size_t>(2 * r + 1) * n + 2 * c + 1] = q.real();
        }
    return U;
}

} // namespace vortexdyn::detail
