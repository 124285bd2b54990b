#include <doctest.h>

#include <cmath>

#include "vortexdyn/detail/random_systems.hpp"
#include "vortexdyn/integrators.hpp"
#include "vortexdyn/kernels.hpp"

using namespace vortexdyn;

namespace {

double state_distance(const VortexSystem& a, const VortexSystem& b) {
    double worst = 0.0;
    for (int i = 0; i < a.state_size(); ++i)
        worst = std::max(worst, std::fabs(a.positions[i] - b.positions[i]));
    return worst;
}

VortexSystem integrate_positions_only(VortexSystem sys, const IntegratorConfig& cfg, double horizon) {
    const long long steps = std::llround(horizon / cfg.dt);
    for (long long k = 0; k < steps; ++k) sys = step(sys, cfg);
    return sys;
}

} // namespace

TEST_SUITE_BEGIN("integrators");

TEST_CASE("single vortex is a fixed point of both schemes") {
    const auto sys = VortexSystem::create(2, {1.5}, {0.25, -0.5, 1.0, 2.0});
    for (auto scheme : {Scheme::ImplicitMidpoint, Scheme::Rk4}) {
        IntegratorConfig cfg;
        cfg.scheme = scheme;
        cfg.dt = 0.1;
        const auto next = step(sys, cfg);
        CHECK(state_distance(sys, next) == 0.0);
    }
}

TEST_CASE("one midpoint step preserves the pair separation to solver tolerance") {
    const auto sys = VortexSystem::create(1, {1.0, 1.0}, {0, 0, 1, 0});
    IntegratorConfig cfg;
    cfg.dt = 1e-2;
    cfg.implicit_tol = 1e-13;
    const auto next = step(sys, cfg);
    const double d0 = sys.min_separation();
    const double d1 = next.min_separation();
    CHECK(std::fabs(d1 - d0) < 10.0 * cfg.implicit_tol);
}

TEST_CASE("rk4 shows order-4 Richardson ratio on a random m=2 N=3 config") {
    std::uint64_t rng = 8;
    const auto sys = detail::random_system(2, 3, rng);
    IntegratorConfig cfg;
    cfg.scheme = Scheme::Rk4;
    const double horizon = 2.0;

    cfg.dt = 2e-2;
    const auto a = integrate_positions_only(sys, cfg, horizon);
    cfg.dt = 1e-2;
    const auto b = integrate_positions_only(sys, cfg, horizon);
    cfg.dt = 5e-3;
    const auto c = integrate_positions_only(sys, cfg, horizon);

    const double e_coarse = state_distance(a, b);
    const double e_fine = state_distance(b, c);
    REQUIRE(e_fine > 1e-14);  // above roundoff so the ratio is meaningful
    CHECK(e_coarse / e_fine > 12.0);
    CHECK(e_coarse / e_fine < 20.0);
}

TEST_CASE("implicit midpoint shows order-2 Richardson ratio") {
    std::uint64_t rng = 9;
    const auto sys = detail::random_system(1, 3, rng);
    IntegratorConfig cfg;
    const double horizon = 2.0;

    cfg.dt = 2e-2;
    const auto a = integrate_positions_only(sys, cfg, horizon);
    cfg.dt = 1e-2;
    const auto b = integrate_positions_only(sys, cfg, horizon);
    cfg.dt = 5e-3;
    const auto c = integrate_positions_only(sys, cfg, horizon);

    const double ratio = state_distance(a, b) / state_distance(b, c);
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
}

TEST_CASE("linear invariants hold to roundoff; quadratic to solver tolerance") {
    std::uint64_t rng = 12;
    auto sys = detail::random_system(1, 3, rng);
    // keep Q, P well away from zero so relative drift is meaningful
    sys.positions[0] += 2.0;
    sys.positions[1] += 3.0;

    IntegratorConfig cfg;
    cfg.dt = 1e-3;
    cfg.implicit_tol = 1e-13;
    const auto suite = standard_invariants(1);
    const auto rec = integrate(sys, cfg, 10.0, suite, 100);  // 10^4 steps
    REQUIRE_FALSE(rec.failed);
    REQUIRE(rec.iteration_counts.size() == 10000);

    for (const auto& d : rec.drift_summary()) {
        if (d.name[0] == 'Q' || d.name[0] == 'P') {
            CHECK(d.max_rel_drift < 1e-12);
        } else if (d.name[0] == 'F') {
            CHECK(d.max_abs_drift < 10.0 * cfg.implicit_tol * 10000.0);
        }
    }
}

TEST_CASE("rk4 also conserves the linear invariants to roundoff") {
    std::uint64_t rng = 12;
    auto sys = detail::random_system(1, 3, rng);
    sys.positions[0] += 2.0;
    sys.positions[1] += 3.0;
    IntegratorConfig cfg;
    cfg.scheme = Scheme::Rk4;
    cfg.dt = 1e-3;
    const auto rec = integrate(sys, cfg, 10.0, standard_invariants(1), 100);
    REQUIRE_FALSE(rec.failed);
    for (const auto& d : rec.drift_summary())
        if (d.name[0] == 'Q' || d.name[0] == 'P') CHECK(d.max_rel_drift < 1e-12);
}

TEST_CASE("midpoint H drift over 1e5 steps stays within 100x the 1e3-step drift") {
    const auto sys = VortexSystem::create(1, {1.0, 1.3, 0.7},
                                          {0.0, 0.0, 1.0, 0.0, 0.3, 0.9});
    IntegratorConfig cfg;
    cfg.dt = 5e-2;
    const auto suite = standard_invariants(1);
    const auto rec = integrate(sys, cfg, 5000.0, suite, 50);  // 1e5 steps
    REQUIRE_FALSE(rec.failed);

    const std::size_t h_idx = rec.invariant_names.size() - 1;
    const double h0 = rec.invariant_series.front()[h_idx];
    double short_run = 0.0, long_run = 0.0;
    for (std::size_t i = 0; i < rec.invariant_series.size(); ++i) {
        const double drift = std::fabs(rec.invariant_series[i][h_idx] - h0);
        if (rec.times[i] <= 1e3 * cfg.dt) short_run = std::max(short_run, drift);
        long_run = std::max(long_run, drift);
    }
    REQUIRE(short_run > 0.0);
    CHECK(long_run < 100.0 * short_run);
}

TEST_CASE("midpoint energy error is bounded while rk4 drifts secularly") {
    const auto sys = VortexSystem::create(1, {1.0, 1.3, 0.7},
                                          {0.0, 0.0, 1.0, 0.0, 0.3, 0.9});
    const auto suite = standard_invariants(1);
    const double horizon = 10000.0;

    IntegratorConfig mid;
    mid.dt = 0.25;
    const auto rec_mid = integrate(sys, mid, horizon, suite, 10);
    REQUIRE_FALSE(rec_mid.failed);

    IntegratorConfig rk;
    rk.scheme = Scheme::Rk4;
    rk.dt = 0.25;
    const auto rec_rk = integrate(sys, rk, horizon, suite, 10);
    REQUIRE_FALSE(rec_rk.failed);

    const std::size_t h_idx = rec_mid.invariant_names.size() - 1;
    REQUIRE(rec_mid.invariant_names[h_idx] == "H");

    auto h_drift_through = [&](const TrajectoryRecord& rec, double fraction) {
        const double h0 = rec.invariant_series.front()[h_idx];
        double worst = 0.0;
        const std::size_t limit = static_cast<std::size_t>(fraction * rec.times.size());
        for (std::size_t i = 0; i < limit; ++i)
            worst = std::max(worst, std::fabs(rec.invariant_series[i][h_idx] - h0));
        return worst;
    };

    // midpoint: oscillatory, no secular growth (full-run max close to early max)
    const double mid_early = h_drift_through(rec_mid, 0.1);
    const double mid_full = h_drift_through(rec_mid, 1.0);
    CHECK(mid_full < 5.0 * mid_early);

    // rk4: secular growth dominates the midpoint drift by the end
    const double rk_full = h_drift_through(rec_rk, 1.0);
    CHECK(rk_full > 1.5 * mid_full);
    // and it actually grows along the run
    const double rk_early = h_drift_through(rec_rk, 0.25);
    CHECK(rk_full > 2.0 * rk_early);
}

TEST_CASE("implicit midpoint is time-reversible") {
    std::uint64_t rng = 21;
    const auto sys = detail::random_system(2, 3, rng);
    IntegratorConfig cfg;
    cfg.dt = 1e-2;
    cfg.implicit_tol = 1e-13;
    const auto forward = step(sys, cfg);
    auto back_cfg = cfg;
    back_cfg.dt = -cfg.dt;
    const auto back = step(forward, back_cfg);
    CHECK(state_distance(sys, back) < 10.0 * cfg.implicit_tol);
}

TEST_CASE("integrate with horizon 0 records a single snapshot") {
    const auto sys = VortexSystem::create(1, {1.0, 1.0}, {0, 0, 1, 0});
    const auto rec = integrate(sys, IntegratorConfig{}, 0.0, standard_invariants(1));
    REQUIRE(rec.times.size() == 1);
    CHECK(rec.times[0] == 0.0);
    CHECK_FALSE(rec.failed);
    CHECK(rec.invariant_series[0].size() == rec.invariant_names.size());
}

TEST_CASE("step failure aborts cleanly with a partial record") {
    // an iteration budget far below what the fixed-point solve needs
    const auto sys = VortexSystem::create(1, {1.0, 1.0}, {0, 0, 1, 0});
    IntegratorConfig cfg;
    cfg.dt = 1e-3;
    cfg.implicit_max_iter = 2;
    cfg.implicit_tol = 1e-14;
    CHECK_THROWS_AS(step(sys, cfg), StepFailure);
    const auto rec = integrate(sys, cfg, 1.0, standard_invariants(1));
    CHECK(rec.failed);
    CHECK_FALSE(rec.failure_message.empty());
    CHECK(rec.times.size() == 1);  // only the initial snapshot
    CHECK(rec.failure_time == 0.0);
}

TEST_CASE("times are strictly increasing and lengths agree") {
    std::uint64_t rng = 33;
    const auto sys = detail::random_system(1, 3, rng);
    IntegratorConfig cfg;
    cfg.dt = 1e-2;
    const auto rec = integrate(sys, cfg, 1.0, standard_invariants(1), 7);
    REQUIRE(rec.times.size() == rec.states.size());
    REQUIRE(rec.times.size() == rec.invariant_series.size());
    for (std::size_t i = 1; i < rec.times.size(); ++i) CHECK(rec.times[i] > rec.times[i - 1]);
}

TEST_CASE("zero tangent stays zero") {
    std::uint64_t rng = 44;
    const auto sys = detail::random_system(2, 3, rng);
    std::vector<double> tangent(sys.state_size(), 0.0);
    for (auto scheme : {Scheme::ImplicitMidpoint, Scheme::Rk4}) {
        IntegratorConfig cfg;
        cfg.scheme = scheme;
        cfg.dt = 1e-2;
        const auto [next, dnext] = step_with_tangent(sys, tangent, cfg);
        for (double v : dnext) CHECK(v == 0.0);
    }
}

TEST_CASE("velocity-direction tangent stays parallel to the flow") {
    const auto sys = VortexSystem::create(1, {1.0, 1.3, 0.7},
                                          {0.0, 0.0, 1.0, 0.0, 0.3, 0.9});
    IntegratorConfig cfg;
    cfg.dt = 1e-3;
    cfg.implicit_tol = 1e-14;

    auto state = sys;
    auto tangent = velocities(state);
    for (int k = 0; k < 100; ++k) {
        auto [next, dnext] = step_with_tangent(state, tangent, cfg);
        state = std::move(next);
        tangent = std::move(dnext);
    }
    const auto flow = velocities(state);
    double dot = 0.0, nt = 0.0, nf = 0.0;
    for (int i = 0; i < state.state_size(); ++i) {
        dot += tangent[i] * flow[i];
        nt += tangent[i] * tangent[i];
        nf += flow[i] * flow[i];
    }
    const double cosine = dot / std::sqrt(nt * nf);
    CHECK(std::fabs(cosine) > 1.0 - 1e-8);
}

TEST_CASE("tangent propagation matches finite differences of the step map") {
    std::uint64_t rng = 55;
    const double h = 1e-6;
    for (auto scheme : {Scheme::ImplicitMidpoint, Scheme::Rk4}) {
        const auto sys = detail::random_system(2, 3, rng);
        std::vector<double> tangent(sys.state_size());
        for (auto& t : tangent) t = detail::gaussian(rng);
        double tnorm = 0.0;
        for (double t : tangent) tnorm += t * t;
        tnorm = std::sqrt(tnorm);
        for (auto& t : tangent) t /= tnorm;

        IntegratorConfig cfg;
        cfg.scheme = scheme;
        cfg.dt = 1e-2;
        cfg.implicit_tol = 1e-14;

        const auto [next, dnext] = step_with_tangent(sys, tangent, cfg);

        auto shifted = sys;
        for (int i = 0; i < sys.state_size(); ++i) shifted.positions[i] += h * tangent[i];
        const auto next_shifted = step(shifted, cfg);

        for (int i = 0; i < sys.state_size(); ++i) {
            const double fd = (next_shifted.positions[i] - next.positions[i]) / h;
            CHECK(std::fabs(fd - dnext[i]) < 1e-5);
        }
    }
}

TEST_SUITE_END();
