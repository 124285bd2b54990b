#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "support/flux_oracle.hpp"
#include "vortexdyn/detail/linalg.hpp"
#include "vortexdyn/detail/random_systems.hpp"
#include "vortexdyn/kernels.hpp"
#include "vortexdyn/vortex_system.hpp"

using namespace vortexdyn;
using testsupport::flux_through_sphere;

namespace {

constexpr double kPi = std::numbers::pi;

VortexSystem pair_system(int m, double gamma1, double gamma2, double separation) {
    std::vector<double> pos(4 * m, 0.0);
    pos[2 * m] = separation;  // x_{2,1} = separation
    return VortexSystem::create(m, {gamma1, gamma2}, pos);
}

} // namespace

TEST_SUITE_BEGIN("vortex_core");

TEST_CASE("kernel constant closed forms") {
    // C(4) = -1/(4 pi^2), C(6) = -1/(4 pi^3)
    CHECK(kernel_constant(2).value == doctest::Approx(-0.02533029591058444).epsilon(1e-12));
    CHECK(kernel_constant(2).value == doctest::Approx(-1.0 / (4.0 * kPi * kPi)).epsilon(1e-15));
    CHECK(kernel_constant(3).value == doctest::Approx(-1.0 / (4.0 * kPi * kPi * kPi)).epsilon(1e-15));
    for (int m = 2; m <= 6; ++m) CHECK(kernel_constant(m).value < 0.0);
    CHECK_THROWS_AS(kernel_constant(1), std::invalid_argument);
    CHECK(unit_sphere_area(2) == doctest::Approx(2.0 * kPi * kPi).epsilon(1e-15));
    CHECK(unit_sphere_area(3) == doctest::Approx(kPi * kPi * kPi).epsilon(1e-15));
}

TEST_CASE("flux oracle confirms the kernel constant at two radii") {
    for (int m : {2, 3}) {
        const double c = kernel_constant(m).value;
        CHECK(flux_through_sphere(c, m, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(flux_through_sphere(c, m, 1.7) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("vortex system validation") {
    CHECK_THROWS_AS(VortexSystem::create(0, {1.0}, {0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(VortexSystem::create(1, {1.0, 0.0}, {0, 0, 1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(VortexSystem::create(1, {1.0, 1.0}, {0, 0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(VortexSystem::create(1, {1.0, 1.0}, {0, 0, 0, 0}), std::invalid_argument);
    const auto sys = VortexSystem::create(2, {1.0, -2.0}, {0, 0, 0, 0, 1, 0, 0, 0});
    CHECK(sys.N == 2);
    CHECK(sys.state_size() == 8);
    CHECK(sys.min_separation() == doctest::Approx(1.0));
}

TEST_CASE("complex structure squares to minus identity and preserves norm") {
    std::uint64_t rng = 5;
    for (int m : {1, 2, 3}) {
        ComplexStructure J{m};
        std::vector<double> v(2 * m), jv(2 * m), jjv(2 * m);
        for (auto& x : v) x = detail::gaussian(rng);
        J.apply(v, jv);
        J.apply(jv, jjv);
        double norm_v = 0.0, norm_jv = 0.0;
        for (int i = 0; i < 2 * m; ++i) {
            CHECK(jjv[i] == doctest::Approx(-v[i]).epsilon(1e-15));
            norm_v += v[i] * v[i];
            norm_jv += jv[i] * jv[i];
        }
        CHECK(norm_jv == doctest::Approx(norm_v).epsilon(1e-15));
        // J^T J = identity
        std::vector<double> jt(2 * m);
        J.apply_transpose(jv, jt);
        for (int i = 0; i < 2 * m; ++i) CHECK(jt[i] == doctest::Approx(v[i]).epsilon(1e-15));
    }
}

TEST_CASE("hamiltonian closed-form examples") {
    // m=1 pair at unit separation: ln 1 = 0
    CHECK(hamiltonian(pair_system(1, 1, 1, 1.0)) == doctest::Approx(0.0).epsilon(1e-15));
    // single vortex: empty pair sum
    CHECK(hamiltonian(VortexSystem::create(2, {3.0}, {0, 1, 2, 3})) == 0.0);
    // m=2 pair at unit separation: 2 C(4) = -1/(2 pi^2)
    CHECK(hamiltonian(pair_system(2, 1, 1, 1.0)) ==
          doctest::Approx(-1.0 / (2.0 * kPi * kPi)).epsilon(1e-14));
    CHECK(hamiltonian(pair_system(2, 1, 1, 1.0)) == doctest::Approx(-0.05066059182116889));
}

TEST_CASE("collision raises the singular-configuration error") {
    auto sys = pair_system(1, 1, 1, 1.0);
    sys.positions[2] = 1e-12;  // closer than the default eps
    CHECK_THROWS_AS(hamiltonian(sys), CollisionError);
    CHECK_THROWS_AS(hamiltonian_gradient(sys), CollisionError);
    CHECK_THROWS_AS(velocities(sys), CollisionError);
    // a tighter eps admits it
    CHECK(std::isfinite(hamiltonian(sys, 1e-14)));
}

TEST_CASE("gradient matches central finite differences on random configurations") {
    std::uint64_t rng = 2024;
    const double h = 1e-5;
    int checked = 0;
    for (int m : {1, 2, 3})
        for (int N : {2, 3, 5})
            for (int rep = 0; rep < 12; ++rep) {
                auto sys = detail::random_system(m, N, rng);
                const auto grad = hamiltonian_gradient(sys);
                double scale = 0.0;
                for (double g : grad) scale = std::max(scale, std::fabs(g));
                for (int i = 0; i < sys.state_size(); ++i) {
                    const double orig = sys.positions[i];
                    sys.positions[i] = orig + h;
                    const double hp = hamiltonian(sys);
                    sys.positions[i] = orig - h;
                    const double hm = hamiltonian(sys);
                    sys.positions[i] = orig;
                    const double fd = (hp - hm) / (2.0 * h);
                    CHECK(std::fabs(grad[i] - fd) < 1e-6 * scale);
                }
                ++checked;
            }
    CHECK(checked >= 100);
}

TEST_CASE("m=1 pair gradient magnitude is 1/(2 pi d)") {
    for (double d : {0.5, 1.0, 2.0}) {
        const auto sys = pair_system(1, 1, 1, d);
        const auto grad = hamiltonian_gradient(sys);
        const double mag = std::hypot(grad[0], grad[1]);
        CHECK(mag == doctest::Approx(1.0 / (2.0 * kPi * d)).epsilon(1e-12));
    }
}

TEST_CASE("velocity examples") {
    // single vortex is steady
    const auto single = VortexSystem::create(3, {2.0}, {1, 2, 3, 4, 5, 6});
    for (double v : velocities(single)) CHECK(v == 0.0);

    // m=1 co-rotating pair at separation 1: each speed 1/(2 pi), velocities
    // perpendicular to the separation, same rotational sense
    const auto pair = pair_system(1, 1, 1, 1.0);
    const auto vel = velocities(pair);
    const double speed0 = std::hypot(vel[0], vel[1]);
    const double speed1 = std::hypot(vel[2], vel[3]);
    CHECK(speed0 == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-13));
    CHECK(speed1 == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-13));
    // r = z1 - z2 = (-1, 0); both velocities along +-y
    CHECK(std::fabs(vel[0]) < 1e-15);
    CHECK(std::fabs(vel[2]) < 1e-15);
    // opposite y-velocities = same rotational sense about the midpoint
    CHECK(vel[1] * vel[3] < 0.0);

    // m=2 pair: speed follows from the contracted Hamiltonian 2 C(4) sum |r|^-2:
    // |v| = |2 C(4) (2-2m)| / d^3 = 1/(pi^2 d^3)
    for (double d : {1.0, 1.5}) {
        const auto p2 = pair_system(2, 1, 1, d);
        const auto v2 = velocities(p2);
        double speed = 0.0;
        for (int i = 0; i < 4; ++i) speed += v2[i] * v2[i];
        speed = std::sqrt(speed);
        CHECK(speed == doctest::Approx(1.0 / (kPi * kPi * d * d * d)).epsilon(1e-12));
    }
}

TEST_CASE("N=2 velocities are radial in J(r) for all m") {
    std::uint64_t rng = 99;
    for (int m : {1, 2, 3}) {
        for (int rep = 0; rep < 5; ++rep) {
            const auto sys = detail::random_system(m, 2, rng);
            const auto vel = velocities(sys);
            const int d = 2 * m;
            std::vector<double> r(d), jr(d);
            for (int i = 0; i < d; ++i) r[i] = sys.positions[i] - sys.positions[d + i];
            j_apply(r, jr);
            for (int j = 0; j < 2; ++j) {
                double dot = 0.0, nv = 0.0, nj = 0.0;
                for (int i = 0; i < d; ++i) {
                    dot += vel[j * d + i] * jr[i];
                    nv += vel[j * d + i] * vel[j * d + i];
                    nj += jr[i] * jr[i];
                }
                const double cosine = dot / std::sqrt(nv * nj);
                CHECK(std::fabs(std::fabs(cosine) - 1.0) < 1e-12);
            }
        }
    }
}

TEST_CASE("hamiltonian is translation invariant") {
    std::uint64_t rng = 31;
    for (int m : {1, 2, 3}) {
        auto sys = detail::random_system(m, 4, rng);
        const double h0 = hamiltonian(sys);
        std::vector<double> shift(2 * m);
        for (auto& s : shift) s = detail::uniform(rng, -3.0, 3.0);
        for (int j = 0; j < sys.N; ++j)
            for (int i = 0; i < 2 * m; ++i) sys.positions[j * 2 * m + i] += shift[i];
        CHECK(hamiltonian(sys) == doctest::Approx(h0).epsilon(1e-12));
    }
}

TEST_CASE("hamiltonian is invariant under random orthogonal maps") {
    std::uint64_t rng = 77;
    for (int m : {1, 2, 3}) {
        const auto sys = detail::random_system(m, 3, rng);
        const double h0 = hamiltonian(sys);
        const int d = 2 * m;
        for (int rep = 0; rep < 5; ++rep) {
            const auto O = detail::random_orthogonal(d, rng);
            auto rotated = sys;
            std::vector<double> out(d);
            for (int j = 0; j < sys.N; ++j) {
                detail::matvec(O, sys.pos(j), out, d);
                for (int i = 0; i < d; ++i) rotated.positions[j * d + i] = out[i];
            }
            CHECK(hamiltonian(rotated) == doctest::Approx(h0).epsilon(1e-12));
        }
    }
}

TEST_CASE("scaling law: H scales as lambda^{2-2m} for m>1") {
    std::uint64_t rng = 13;
    for (int m : {2, 3}) {
        const auto sys = detail::random_system(m, 3, rng);
        const double h0 = hamiltonian(sys);
        for (double lambda : {0.5, 2.0, 3.0}) {
            auto scaled = sys;
            for (auto& p : scaled.positions) p *= lambda;
            const double expected = h0 * std::pow(lambda, 2.0 - 2.0 * m);
            CHECK(hamiltonian(scaled) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("serial and parallel kernels agree") {
    std::uint64_t rng = 555;
    detail::RandomSystemOptions opt;
    opt.box = 10.0;
    opt.min_separation = 0.1;
    for (int m : {1, 3}) {
        const auto sys = detail::random_system(m, 200, rng, opt);
        const double hs = kernels::serial::hamiltonian(sys, 1e-10);
        const double hp = kernels::par::hamiltonian(sys, 1e-10);
        CHECK(hp == doctest::Approx(hs).epsilon(1e-12));

        std::vector<double> gs(sys.state_size()), gp(sys.state_size());
        kernels::serial::gradient(sys, gs, 1e-10);
        kernels::par::gradient(sys, gp, 1e-10);
        double scale = 0.0;
        for (double v : gs) scale = std::max(scale, std::fabs(v));
        for (int i = 0; i < sys.state_size(); ++i) CHECK(std::fabs(gs[i] - gp[i]) <= 1e-12 * scale);

        kernels::serial::velocities(sys, gs, 1e-10);
        kernels::par::velocities(sys, gp, 1e-10);
        scale = 0.0;
        for (double v : gs) scale = std::max(scale, std::fabs(v));
        for (int i = 0; i < sys.state_size(); ++i) CHECK(std::fabs(gs[i] - gp[i]) <= 1e-12 * scale);

        std::vector<double> tangent(sys.state_size());
        for (auto& t : tangent) t = detail::gaussian(rng);
        kernels::serial::jacobian_apply(sys, tangent, gs, 1e-10);
        kernels::par::jacobian_apply(sys, tangent, gp, 1e-10);
        scale = 0.0;
        for (double v : gs) scale = std::max(scale, std::fabs(v));
        for (int i = 0; i < sys.state_size(); ++i) CHECK(std::fabs(gs[i] - gp[i]) <= 1e-12 * scale);
    }
}

TEST_CASE("jacobian_apply matches finite differences of the velocity field") {
    std::uint64_t rng = 404;
    const double h = 1e-6;
    for (int m : {1, 2}) {
        auto sys = detail::random_system(m, 3, rng);
        std::vector<double> tangent(sys.state_size());
        for (auto& t : tangent) t = detail::gaussian(rng);

        const auto jt = velocity_jacobian_apply(sys, tangent);

        auto plus = sys, minus = sys;
        for (int i = 0; i < sys.state_size(); ++i) {
            plus.positions[i] = sys.positions[i] + h * tangent[i];
            minus.positions[i] = sys.positions[i] - h * tangent[i];
        }
        const auto vp = velocities(plus);
        const auto vm = velocities(minus);
        double scale = 0.0;
        for (double v : jt) scale = std::max(scale, std::fabs(v));
        for (int i = 0; i < sys.state_size(); ++i) {
            const double fd = (vp[i] - vm[i]) / (2.0 * h);
            CHECK(std::fabs(jt[i] - fd) < 1e-5 * std::max(scale, 1.0));
        }
    }
}

TEST_SUITE_END();
