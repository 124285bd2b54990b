#include "vortexdyn/integrators.hpp"

#include <cmath>
#include <limits>

#include "vortexdyn/detail/linalg.hpp"
#include "vortexdyn/kernels.hpp"

namespace vortexdyn {

namespace {

double max_abs(std::span<const double> v) {
    double worst = 0.0;
    for (double x : v) worst = std::max(worst, std::fabs(x));
    return worst;
}

VortexSystem with_positions(const VortexSystem& sys, std::vector<double> pos) {
    VortexSystem out = sys;
    out.positions = std::move(pos);
    return out;
}

// Solve the midpoint state u = z + (dt/2) V(u). Fixed-point first; if the
// residual stalls, one Newton phase on F(u) = u - z - (dt/2) V(u).
std::vector<double> solve_midpoint(const VortexSystem& sys, const IntegratorConfig& cfg,
                                   StepDiagnostics& diag) {
    const int n = sys.state_size();
    const double half = 0.5 * cfg.dt;

    VortexSystem work = sys;  // carries candidate midpoint positions
    std::vector<double> u = sys.positions;
    std::vector<double> v(n);

    const double scale = std::max(1.0, max_abs(sys.positions));
    const double floor = 32.0 * std::numeric_limits<double>::epsilon() * scale;

    double residual = std::numeric_limits<double>::infinity();
    double prev_residual = residual;
    int stalled = 0;
    bool try_newton = false;

    int iter = 0;
    for (; iter < cfg.implicit_max_iter; ++iter) {
        work.positions = u;
        kernels::serial::velocities(work, v, cfg.collision_eps);
        residual = 0.0;
        for (int i = 0; i < n; ++i) {
            const double next = sys.positions[i] + half * v[i];
            residual = std::max(residual, std::fabs(next - u[i]));
            u[i] = next;
        }
        if (residual < cfg.implicit_tol || residual <= floor) {
            diag.iterations = iter + 1;
            diag.residual = residual;
            return u;
        }
        if (residual > 0.9 * prev_residual) {
            if (++stalled >= 3) { try_newton = true; ++iter; break; }
        } else {
            stalled = 0;
        }
        prev_residual = residual;
    }

    if (try_newton || iter >= cfg.implicit_max_iter) {
        diag.newton_used = true;
        std::vector<double> jac, A, rhs(n);
        for (; iter < cfg.implicit_max_iter; ++iter) {
            work.positions = u;
            kernels::serial::velocities(work, v, cfg.collision_eps);
            residual = 0.0;
            for (int i = 0; i < n; ++i) {
                rhs[i] = sys.positions[i] + half * v[i] - u[i];  // -F(u)
                residual = std::max(residual, std::fabs(rhs[i]));
            }
            if (residual < cfg.implicit_tol || residual <= floor) {
                diag.iterations = iter + 1;
                diag.residual = residual;
                return u;
            }
            kernels::serial::jacobian_dense(work, jac, cfg.collision_eps);
            // A = I - (dt/2) DV
            A.assign(static_cast<std::size_t>(n) * n, 0.0);
            for (int r = 0; r < n; ++r) {
                for (int c = 0; c < n; ++c)
                    A[static_cast<std::size_t>(r) * n + c] = -half * jac[static_cast<std::size_t>(r) * n + c];
                A[static_cast<std::size_t>(r) * n + r] += 1.0;
            }
            if (!detail::lu_solve(A, rhs, n))
                throw StepFailure("implicit midpoint: singular Newton system");
            for (int i = 0; i < n; ++i) u[i] += rhs[i];
        }
    }
    throw StepFailure("implicit midpoint: no convergence after " +
                      std::to_string(cfg.implicit_max_iter) + " iterations (residual " +
                      std::to_string(residual) + "); consider halving dt");
}

std::vector<double> rk4_positions(const VortexSystem& sys, const IntegratorConfig& cfg) {
    const int n = sys.state_size();
    const double dt = cfg.dt;
    VortexSystem work = sys;
    std::vector<double> k1(n), k2(n), k3(n), k4(n);

    kernels::serial::velocities(sys, k1, cfg.collision_eps);
    for (int i = 0; i < n; ++i) work.positions[i] = sys.positions[i] + 0.5 * dt * k1[i];
    kernels::serial::velocities(work, k2, cfg.collision_eps);
    for (int i = 0; i < n; ++i) work.positions[i] = sys.positions[i] + 0.5 * dt * k2[i];
    kernels::serial::velocities(work, k3, cfg.collision_eps);
    for (int i = 0; i < n; ++i) work.positions[i] = sys.positions[i] + dt * k3[i];
    kernels::serial::velocities(work, k4, cfg.collision_eps);

    std::vector<double> out(n);
    for (int i = 0; i < n; ++i)
        out[i] = sys.positions[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

} // namespace

void IntegratorConfig::validate() const {
    if (!(dt != 0.0) || !std::isfinite(dt)) throw std::invalid_argument("IntegratorConfig: dt must be nonzero finite");
    if (implicit_tol <= 0.0) throw std::invalid_argument("IntegratorConfig: implicit_tol must be > 0");
    if (implicit_max_iter < 1) throw std::invalid_argument("IntegratorConfig: implicit_max_iter must be >= 1");
}

VortexSystem step(const VortexSystem& sys, const IntegratorConfig& cfg) {
    StepDiagnostics diag;
    return step(sys, cfg, diag);
}

VortexSystem step(const VortexSystem& sys, const IntegratorConfig& cfg, StepDiagnostics& diag) {
    cfg.validate();
    require_no_collision(sys, cfg.collision_eps);
    std::vector<double> next;
    if (cfg.scheme == Scheme::ImplicitMidpoint) {
        const auto u = solve_midpoint(sys, cfg, diag);
        next.resize(sys.state_size());
        for (int i = 0; i < sys.state_size(); ++i) next[i] = 2.0 * u[i] - sys.positions[i];
    } else {
        next = rk4_positions(sys, cfg);
        diag = StepDiagnostics{};
    }
    VortexSystem out = with_positions(sys, std::move(next));
    require_no_collision(out, cfg.collision_eps);  // collision detected post hoc
    return out;
}

std::pair<VortexSystem, std::vector<double>> step_with_tangent(
    const VortexSystem& sys, std::span<const double> tangent, const IntegratorConfig& cfg) {
    cfg.validate();
    const int n = sys.state_size();
    if (static_cast<int>(tangent.size()) != n)
        throw std::invalid_argument("step_with_tangent: tangent size mismatch");

    if (cfg.scheme == Scheme::ImplicitMidpoint) {
        StepDiagnostics diag;
        require_no_collision(sys, cfg.collision_eps);
        const auto u = solve_midpoint(sys, cfg, diag);
        VortexSystem mid = with_positions(sys, u);

        // d' solves (I - (dt/2) A(u)) d' = (I + (dt/2) A(u)) d
        std::vector<double> ad(n);
        kernels::serial::jacobian_apply(mid, tangent, ad, cfg.collision_eps);
        std::vector<double> rhs(n);
        const double half = 0.5 * cfg.dt;
        for (int i = 0; i < n; ++i) rhs[i] = tangent[i] + half * ad[i];

        std::vector<double> jac, A(static_cast<std::size_t>(n) * n, 0.0);
        kernels::serial::jacobian_dense(mid, jac, cfg.collision_eps);
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c)
                A[static_cast<std::size_t>(r) * n + c] = -half * jac[static_cast<std::size_t>(r) * n + c];
            A[static_cast<std::size_t>(r) * n + r] += 1.0;
        }
        if (!detail::lu_solve(A, rhs, n))
            throw StepFailure("tangent propagation: singular midpoint system");

        std::vector<double> next(n);
        for (int i = 0; i < n; ++i) next[i] = 2.0 * u[i] - sys.positions[i];
        VortexSystem out = with_positions(sys, std::move(next));
        require_no_collision(out, cfg.collision_eps);
        return {std::move(out), std::move(rhs)};
    }

    // rk4: differentiate each stage
    require_no_collision(sys, cfg.collision_eps);
    const double dt = cfg.dt;
    VortexSystem work = sys;
    std::vector<double> k1(n), k2(n), k3(n), k4(n);
    std::vector<double> d1(n), d2(n), d3(n), d4(n), tmp(n);

    kernels::serial::velocities(sys, k1, cfg.collision_eps);
    kernels::serial::jacobian_apply(sys, tangent, d1, cfg.collision_eps);

    for (int i = 0; i < n; ++i) work.positions[i] = sys.positions[i] + 0.5 * dt * k1[i];
    kernels::serial::velocities(work, k2, cfg.collision_eps);
    for (int i = 0; i < n; ++i) tmp[i] = tangent[i] + 0.5 * dt * d1[i];
    kernels::serial::jacobian_apply(work, tmp, d2, cfg.collision_eps);

    for (int i = 0; i < n; ++i) work.positions[i] = sys.positions[i] + 0.5 * dt * k2[i];
    kernels::serial::velocities(work, k3, cfg.collision_eps);
    for (int i = 0; i < n; ++i) tmp[i] = tangent[i] + 0.5 * dt * d2[i];
    kernels::serial::jacobian_apply(work, tmp, d3, cfg.collision_eps);

    for (int i = 0; i < n; ++i) work.positions[i] = sys.positions[i] + dt * k3[i];
    kernels::serial::velocities(work, k4, cfg.collision_eps);
    for (int i = 0; i < n; ++i) tmp[i] = tangent[i] + dt * d3[i];
    kernels::serial::jacobian_apply(work, tmp, d4, cfg.collision_eps);

    std::vector<double> next(n), dnext(n);
    for (int i = 0; i < n; ++i) {
        next[i] = sys.positions[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        dnext[i] = tangent[i] + dt / 6.0 * (d1[i] + 2.0 * d2[i] + 2.0 * d3[i] + d4[i]);
    }
    VortexSystem out = with_positions(sys, std::move(next));
    require_no_collision(out, cfg.collision_eps);
    return {std::move(out), std::move(dnext)};
}

std::vector<TrajectoryRecord::Drift> TrajectoryRecord::drift_summary() const {
    std::vector<Drift> out;
    if (invariant_series.empty()) return out;
    const std::size_t n = invariant_names.size();
    for (std::size_t i = 0; i < n; ++i) {
        Drift d;
        d.name = invariant_names[i];
        d.initial = invariant_series.front()[i];
        for (const auto& row : invariant_series)
            d.max_abs_drift = std::max(d.max_abs_drift, std::fabs(row[i] - d.initial));
        d.max_rel_drift = d.initial != 0.0
                              ? d.max_abs_drift / std::fabs(d.initial)
                              : (d.max_abs_drift == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        out.push_back(d);
    }
    return out;
}

TrajectoryRecord integrate(const VortexSystem& sys, const IntegratorConfig& cfg,
                           double horizon, const InvariantSuite& suite, int record_every) {
    cfg.validate();
    if (horizon < 0.0) throw std::invalid_argument("integrate: horizon must be >= 0");
    if (record_every < 1) throw std::invalid_argument("integrate: record_every must be >= 1");

    const auto tracked = suite.tracked();
    TrajectoryRecord rec;
    for (const auto& o : tracked) rec.invariant_names.push_back(o.name);

    auto sample = [&](double t, const VortexSystem& s) {
        rec.times.push_back(t);
        rec.states.push_back(s.positions);
        std::vector<double> vals;
        vals.reserve(tracked.size());
        for (const auto& o : tracked) vals.push_back(o(s));
        rec.invariant_series.push_back(std::move(vals));
    };

    VortexSystem state = sys;
    sample(0.0, state);

    const long long steps = std::llround(horizon / cfg.dt);
    rec.iteration_counts.reserve(steps > 0 ? static_cast<std::size_t>(steps) : 0);
    for (long long k = 0; k < steps; ++k) {
        StepDiagnostics diag;
        try {
            state = step(state, cfg, diag);
        } catch (const std::exception& e) {
            rec.failed = true;
            rec.failure_message = e.what();
            rec.failure_time = static_cast<double>(k) * cfg.dt;
            return rec;
        }
        rec.iteration_counts.push_back(diag.iterations);
        const double t = static_cast<double>(k + 1) * cfg.dt;
        if ((k + 1) % record_every == 0 || k + 1 == steps) sample(t, state);
    }
    return rec;
}

} // namespace vortexdyn
