#include "vortexdyn/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vortexdyn/detail/linalg.hpp"
#include "vortexdyn/detail/random_systems.hpp"
#include "vortexdyn/kernels.hpp"

namespace vortexdyn {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

} // namespace

TwoVortexSolution TwoVortexSolution::from(const VortexSystem& sys) {
    if (sys.N != 2) throw std::invalid_argument("two-vortex solution requires N=2");
    require_no_collision(sys);

    const int d = sys.dim();
    TwoVortexSolution sol;
    sol.m = sys.m;
    sol.strengths_ = sys.strengths;
    sol.z10_.assign(sys.pos(0).begin(), sys.pos(0).end());
    sol.z20_.assign(sys.pos(1).begin(), sys.pos(1).end());

    sol.r0_.resize(d);
    for (int i = 0; i < d; ++i) sol.r0_[i] = sol.z10_[i] - sol.z20_[i];
    sol.jr0_.resize(d);
    j_apply(sol.r0_, sol.jr0_);

    const double d2 = dot(sol.r0_, sol.r0_);
    sol.separation = std::sqrt(d2);

    sol.invariant_plane.resize(2 * d);
    for (int i = 0; i < d; ++i) {
        sol.invariant_plane[i] = sol.r0_[i] / sol.separation;
        sol.invariant_plane[d + i] = sol.jr0_[i] / sol.separation;
    }

    const auto ker = kernels::PairKernel::make(sys.m);
    const double g1 = sys.strengths[0];
    const double g2 = sys.strengths[1];
    const double total = g1 + g2;

    if (total == 0.0) {
        sol.dipole = true;
        sol.angular_rate = 0.0;
        // translation velocity u = G_1 g(d2) J r0
        sol.center.resize(d);
        const double w = g1 * ker.g(d2);
        for (int i = 0; i < d; ++i) sol.center[i] = w * sol.jr0_[i];
    } else {
        sol.angular_rate = -total * ker.g(d2);
        sol.center.resize(d);
        for (int i = 0; i < d; ++i)
            sol.center[i] = (g1 * sol.z10_[i] + g2 * sol.z20_[i]) / total;
        sol.c1_ = g2 / total;
        sol.c2_ = g1 / total;
    }
    return sol;
}

VortexSystem TwoVortexSolution::state_at(double t) const {
    const int d = 2 * m;
    std::vector<double> positions(2 * d);
    if (dipole) {
        for (int i = 0; i < d; ++i) {
            positions[i] = z10_[i] + t * center[i];
            positions[d + i] = z20_[i] + t * center[i];
        }
    } else {
        const double c = std::cos(angular_rate * t);
        const double s = std::sin(angular_rate * t);
        for (int i = 0; i < d; ++i) {
            const double ri = c * r0_[i] + s * jr0_[i];
            positions[i] = center[i] + c1_ * ri;
            positions[d + i] = center[i] - c2_ * ri;
        }
    }
    return VortexSystem::create(m, strengths_, std::move(positions));
}

VortexSystem two_vortex_closed_form(const VortexSystem& sys, double t) {
    return TwoVortexSolution::from(sys).state_at(t);
}

double oracle_error(const VortexSystem& sys, const IntegratorConfig& cfg, double horizon) {
    const auto sol = TwoVortexSolution::from(sys);
    VortexSystem state = sys;
    const long long steps = std::llround(horizon / cfg.dt);
    double worst = 0.0;
    for (long long k = 1; k <= steps; ++k) {
        state = step(state, cfg);
        const auto exact = sol.state_at(static_cast<double>(k) * cfg.dt);
        double err2 = 0.0;
        for (int i = 0; i < state.state_size(); ++i) {
            const double diff = state.positions[i] - exact.positions[i];
            err2 += diff * diff;
        }
        worst = std::max(worst, std::sqrt(err2));
    }
    return worst;
}

VortexSystem apply_motion(const VortexSystem& sys, std::span<const double> unitary,
                          std::span<const double> shift) {
    const int d = sys.dim();
    if (static_cast<int>(unitary.size()) != d * d)
        throw std::invalid_argument("apply_motion: matrix must be 2m x 2m");
    if (static_cast<int>(shift.size()) != d)
        throw std::invalid_argument("apply_motion: shift must have 2m entries");

    if (detail::orthogonality_defect(unitary, d) > 1e-10)
        throw std::invalid_argument("apply_motion: matrix is not orthogonal to 1e-10");
    std::vector<double> J(static_cast<std::size_t>(d) * d, 0.0);
    for (int a = 0; a < sys.m; ++a) {
        J[static_cast<std::size_t>(2 * a) * d + 2 * a + 1] = -1.0;
        J[static_cast<std::size_t>(2 * a + 1) * d + 2 * a] = 1.0;
    }
    if (detail::commutator_max(unitary, J, d) > 1e-10)
        throw std::invalid_argument("apply_motion: matrix does not commute with J to 1e-10 "
                                    "(not unitary)");

    VortexSystem out = sys;
    std::vector<double> mapped(d);
    for (int j = 0; j < sys.N; ++j) {
        detail::matvec(unitary, sys.pos(j), mapped, d);
        for (int i = 0; i < d; ++i) out.positions[j * d + i] = mapped[i] + shift[i];
    }
    return out;
}

double coplanarity_defect(const VortexSystem& sys) {
    const int d = sys.dim();
    if (d <= 2) return 0.0;  // everything in R^2 is coplanar

    const auto vel = velocities(sys);
    const int rows = 2 * sys.N;
    std::vector<double> data(static_cast<std::size_t>(rows) * d);
    for (int j = 0; j < sys.N; ++j)
        for (int i = 0; i < d; ++i) {
            data[static_cast<std::size_t>(j) * d + i] = sys.positions[j * d + i];
            data[static_cast<std::size_t>(sys.N + j) * d + i] =
                sys.positions[j * d + i] + vel[j * d + i];
        }

    std::vector<double> mean(d, 0.0);
    for (int r = 0; r < rows; ++r)
        for (int i = 0; i < d; ++i) mean[i] += data[static_cast<std::size_t>(r) * d + i];
    for (int i = 0; i < d; ++i) mean[i] /= rows;

    // second-moment matrix of the centered data
    std::vector<double> cov(static_cast<std::size_t>(d) * d, 0.0);
    for (int r = 0; r < rows; ++r)
        for (int a = 0; a < d; ++a) {
            const double va = data[static_cast<std::size_t>(r) * d + a] - mean[a];
            for (int b = a; b < d; ++b) {
                const double vb = data[static_cast<std::size_t>(r) * d + b] - mean[b];
                cov[static_cast<std::size_t>(a) * d + b] += va * vb;
            }
        }
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < a; ++b)
            cov[static_cast<std::size_t>(a) * d + b] = cov[static_cast<std::size_t>(b) * d + a];

    const auto ev = detail::symmetric_eigenvalues(cov, d);
    double total = 0.0, tail = 0.0;
    for (int i = 0; i < d; ++i) {
        total += std::max(ev[i], 0.0);
        if (i >= 2) tail += std::max(ev[i], 0.0);
    }
    if (total <= 0.0) return 0.0;
    return tail / total;
}

CoplanarityWitness coplanarity_search(int m, int N, int samples, std::uint64_t seed) {
    CoplanarityWitness best;
    std::uint64_t state = seed;
    for (int s = 0; s < samples; ++s) {
        const auto sys = detail::random_system(m, N, state);
        const double defect = coplanarity_defect(sys);
        if (s == 0 || defect > best.defect) {
            best.defect = defect;
            best.system = sys;
        }
    }
    return best;
}

ChaosReport lyapunov_mle(const VortexSystem& sys, const IntegratorConfig& cfg,
                         double horizon, double renorm_interval,
                         std::uint64_t tangent_seed, double burn_in_fraction) {
    cfg.validate();
    if (renorm_interval <= 0.0)
        throw std::invalid_argument("lyapunov_mle: renorm_interval must be > 0");
    if (horizon < 2.0 * renorm_interval)
        throw std::invalid_argument("lyapunov_mle: horizon must exceed the renormalization "
                                    "interval by a wide margin");

    ChaosReport report;
    report.renorm_interval = renorm_interval;
    report.horizon = horizon;

    const int n = sys.state_size();
    std::vector<double> tangent(n);
    std::uint64_t state = tangent_seed;
    for (auto& v : tangent) v = detail::gaussian(state);
    const double tnorm = norm(tangent);
    for (auto& v : tangent) v /= tnorm;

    const auto suite = standard_invariants(sys.m);
    const auto tracked = suite.tracked();
    std::vector<double> initial_inv;
    for (const auto& o : tracked) initial_inv.push_back(o(sys));

    const long long steps_per_renorm = std::max<long long>(1, std::llround(renorm_interval / cfg.dt));
    const long long renorms = std::llround(horizon / (static_cast<double>(steps_per_renorm) * cfg.dt));
    const double burn_time = burn_in_fraction * horizon;

    VortexSystem current = sys;
    double log_sum = 0.0;       // accumulated log growth after burn-in
    double burn_log_sum = 0.0;  // discarded piece
    double t = 0.0;
    double accounted_from = 0.0;

    for (long long r = 0; r < renorms; ++r) {
        try {
            for (long long k = 0; k < steps_per_renorm; ++k) {
                auto [next, dnext] = step_with_tangent(current, tangent, cfg);
                current = std::move(next);
                tangent = std::move(dnext);
                t += cfg.dt;
            }
        } catch (const std::exception& e) {
            report.failed = true;
            report.failure_message = e.what();
            break;
        }
        const double growth = norm(tangent);
        for (auto& v : tangent) v /= growth;

        if (t <= burn_time) {
            burn_log_sum += std::log(growth);
            accounted_from = t;
        } else {
            log_sum += std::log(growth);
            report.series_times.push_back(t);
            report.convergence_series.push_back(log_sum / (t - accounted_from));
        }

        for (std::size_t i = 0; i < tracked.size(); ++i) {
            const double v = tracked[i](current);
            const double rel = initial_inv[i] != 0.0
                                   ? std::fabs(v - initial_inv[i]) / std::fabs(initial_inv[i])
                                   : std::fabs(v - initial_inv[i]);
            report.max_invariant_rel_drift = std::max(report.max_invariant_rel_drift, rel);
        }
    }
    (void)burn_log_sum;

    if (!report.convergence_series.empty()) report.mle = report.convergence_series.back();
    return report;
}

SectionReport poincare_section(const VortexSystem& sys, const IntegratorConfig& cfg,
                               const Observable& section, double section_value,
                               double horizon, const Observable& chart_u,
                               const Observable& chart_v) {
    cfg.validate();
    SectionReport report;

    const auto suite = standard_invariants(sys.m);
    const auto tracked = suite.tracked();
    std::vector<double> initial_inv;
    for (const auto& o : tracked) initial_inv.push_back(o(sys));

    const long long steps = std::llround(horizon / cfg.dt);
    VortexSystem prev = sys;
    double prev_val = section(prev) - section_value;

    auto interpolate = [&](const VortexSystem& a, const VortexSystem& b, double s) {
        VortexSystem mid = a;
        for (int i = 0; i < a.state_size(); ++i)
            mid.positions[i] = (1.0 - s) * a.positions[i] + s * b.positions[i];
        return mid;
    };

    for (long long k = 0; k < steps; ++k) {
        VortexSystem next;
        try {
            next = step(prev, cfg);
        } catch (const std::exception& e) {
            report.failed = true;
            report.failure_message = e.what();
            break;
        }
        const double next_val = section(next) - section_value;

        if (prev_val == 0.0 || (prev_val < 0.0) != (next_val < 0.0)) {
            // bisect the linear interpolant between the step endpoints
            double lo = 0.0, hi = 1.0;
            double flo = prev_val;
            VortexSystem cross = prev;
            double fmid = flo;
            for (int iter = 0; iter < 200; ++iter) {
                const double mid = 0.5 * (lo + hi);
                cross = interpolate(prev, next, mid);
                fmid = section(cross) - section_value;
                if (std::fabs(fmid) < 1e-10) break;
                if ((fmid < 0.0) == (flo < 0.0)) {
                    lo = mid;
                    flo = fmid;
                } else {
                    hi = mid;
                }
            }
            if (std::fabs(fmid) < 1e-10) {
                // transversality: the flow must actually move through the section
                const auto vel = velocities(cross, cfg.collision_eps);
                const auto grad = section.grad(cross);
                const double speed = dot(grad, vel);
                double gnorm = norm(grad), vnorm = norm(vel);
                if (gnorm > 0.0 && vnorm > 0.0 && std::fabs(speed) > 1e-8 * gnorm * vnorm) {
                    SectionCrossing c;
                    c.t = (static_cast<double>(k) + 0.5 * (lo + hi)) * cfg.dt;
                    c.u = chart_u(cross);
                    c.v = chart_v(cross);
                    c.direction = speed > 0.0 ? 1 : -1;
                    c.positions = cross.positions;
                    report.crossings.push_back(std::move(c));
                }
            }
        }

        prev = std::move(next);
        prev_val = next_val;

        if ((k + 1) % 256 == 0 || k + 1 == steps) {
            for (std::size_t i = 0; i < tracked.size(); ++i) {
                const double v = tracked[i](prev);
                const double rel = initial_inv[i] != 0.0
                                       ? std::fabs(v - initial_inv[i]) / std::fabs(initial_inv[i])
                                       : std::fabs(v - initial_inv[i]);
                report.max_invariant_rel_drift = std::max(report.max_invariant_rel_drift, rel);
            }
        }
    }

    // curve-likeness metric over the chart points
    const std::size_t npts = report.crossings.size();
    if (npts >= 8) {
        double ulo = report.crossings[0].u, uhi = ulo;
        double vlo = report.crossings[0].v, vhi = vlo;
        std::vector<double> nn(npts, std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < npts; ++i) {
            ulo = std::min(ulo, report.crossings[i].u);
            uhi = std::max(uhi, report.crossings[i].u);
            vlo = std::min(vlo, report.crossings[i].v);
            vhi = std::max(vhi, report.crossings[i].v);
            for (std::size_t j = 0; j < npts; ++j) {
                if (i == j) continue;
                const double du = report.crossings[i].u - report.crossings[j].u;
                const double dv = report.crossings[i].v - report.crossings[j].v;
                nn[i] = std::min(nn[i], std::hypot(du, dv));
            }
        }
        std::sort(nn.begin(), nn.end());
        const double diag = std::hypot(uhi - ulo, vhi - vlo);
        if (diag > 0.0) report.nn_residual = nn[npts / 2] / diag;
    }
    return report;
}

} // namespace vortexdyn
