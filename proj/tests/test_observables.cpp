#include <doctest.h>

#include <cmath>
#include <complex>

#include "vortexdyn/detail/random_systems.hpp"
#include "vortexdyn/observables.hpp"

using namespace vortexdyn;

namespace {

double strength_sum(const VortexSystem& sys) {
    double s = 0.0;
    for (double g : sys.strengths) s += g;
    return s;
}

// complex generator F_{ab} = -i sum_j G_j z_{j,a} conj(z_{j,b}) as a pair of
// real observables (re, im); used to probe the u(m) closure numerically
std::complex<double> complex_F(const VortexSystem& sys, int a, int b) {
    std::complex<double> f(0.0, 0.0);
    for (int j = 0; j < sys.N; ++j) {
        const std::complex<double> za(sys.x(j, a), sys.y(j, a));
        const std::complex<double> zb(sys.x(j, b), sys.y(j, b));
        f += sys.strengths[j] * za * std::conj(zb);
    }
    return std::complex<double>(0.0, -1.0) * f;
}

} // namespace

TEST_SUITE_BEGIN("observables");

TEST_CASE("standard invariants by direct substitution") {
    // m=1, single vortex of strength 2 at (3,4)
    const auto sys = VortexSystem::create(1, {2.0}, {3.0, 4.0});
    const auto suite = standard_invariants(1);
    REQUIRE(suite.standard.size() == 3);  // m^2 + 2m = 3
    CHECK(suite.standard[0].name == "Q1");
    CHECK(suite.standard[0](sys) == doctest::Approx(6.0));
    CHECK(suite.standard[1].name == "P1");
    CHECK(suite.standard[1](sys) == doctest::Approx(8.0));
    CHECK(suite.standard[2].name == "Fp11");
    CHECK(suite.standard[2](sys) == doctest::Approx(50.0));

    // m=2, z = (1,0,0,1): F-_{12} = x1 y2 - x2 y1 = 1
    const auto sys2 = VortexSystem::create(2, {1.0}, {1.0, 0.0, 0.0, 1.0});
    CHECK(obs_F_minus(0, 1, 2)(sys2) == doctest::Approx(1.0));
}

TEST_CASE("invariant counts are m^2 + 2m standard and 2m + 1 involutive") {
    for (int m : {1, 2, 3, 4}) {
        const auto suite = standard_invariants(m);
        CHECK(static_cast<int>(suite.standard.size()) == m * m + 2 * m);
        CHECK(static_cast<int>(suite.involutive.size()) == 2 * m + 1);
        CHECK(static_cast<int>(involutive_family(m).size()) == 2 * m + 1);
    }
}

TEST_CASE("all standard invariants vanish at the origin configuration") {
    // all positions zero is legal only with N=1 (no coincident pair)
    const auto sys = VortexSystem::create(2, {1.5}, {0, 0, 0, 0});
    for (const auto& o : standard_invariants(2).standard) CHECK(o(sys) == 0.0);
}

TEST_CASE("gradients of every standard invariant match finite differences") {
    std::uint64_t rng = 2025;
    const double h = 1e-5;
    for (int m : {1, 2, 3}) {
        auto sys = detail::random_system(m, 3, rng);
        for (const auto& o : standard_invariants(m).standard) {
            const auto grad = o.grad(sys);
            for (int i = 0; i < sys.state_size(); ++i) {
                const double orig = sys.positions[i];
                sys.positions[i] = orig + h;
                const double vp = o(sys);
                sys.positions[i] = orig - h;
                const double vm = o(sys);
                sys.positions[i] = orig;
                const double fd = (vp - vm) / (2.0 * h);
                CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("central extension relations") {
    std::uint64_t rng = 17;
    for (int m : {1, 2, 3}) {
        for (int rep = 0; rep < 5; ++rep) {
            const auto sys = detail::random_system(m, 4, rng);
            const double gsum = strength_sum(sys);
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) {
                    const double qp = poisson_bracket(obs_Q(a, m), obs_P(b, m), sys);
                    CHECK(std::fabs(qp - (a == b ? gsum : 0.0)) < 1e-12 * std::fabs(gsum));
                    CHECK(std::fabs(poisson_bracket(obs_Q(a, m), obs_Q(b, m), sys)) < 1e-12);
                    CHECK(std::fabs(poisson_bracket(obs_P(a, m), obs_P(b, m), sys)) < 1e-12);
                }
        }
    }
}

TEST_CASE("rotation generator relations {P,F+}=-2Q and {Q,F+}=2P") {
    std::uint64_t rng = 19;
    for (int m : {1, 2}) {
        const auto sys = detail::random_system(m, 3, rng);
        for (int a = 0; a < m; ++a) {
            const auto f = obs_F_plus(a, a, m);
            const double q = obs_Q(a, m)(sys);
            const double p = obs_P(a, m)(sys);
            CHECK(poisson_bracket(obs_P(a, m), f, sys) == doctest::Approx(-2.0 * q).epsilon(1e-12));
            CHECK(poisson_bracket(obs_Q(a, m), f, sys) == doctest::Approx(2.0 * p).epsilon(1e-12));
        }
    }
}

TEST_CASE("bracket is antisymmetric, bilinear, and obeys the Leibniz rule") {
    std::uint64_t rng = 23;
    const auto sys = detail::random_system(2, 3, rng);
    const auto f = obs_Q(0, 2);
    const auto g = obs_F_plus(0, 1, 2);
    const auto k = obs_P(1, 2);

    CHECK(poisson_bracket(f, f, sys) == 0.0);
    CHECK(poisson_bracket(f, g, sys) == doctest::Approx(-poisson_bracket(g, f, sys)).epsilon(1e-14));

    // bilinearity: {f + 2.5 g, k} = {f,k} + 2.5 {g,k}
    const double lhs = poisson_bracket(f + 2.5 * g, k, sys);
    const double rhs = poisson_bracket(f, k, sys) + 2.5 * poisson_bracket(g, k, sys);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

    // Leibniz: {fg, h} = f {g,h} + g {f,h}
    const double prod = poisson_bracket(f * g, k, sys);
    const double leib = f(sys) * poisson_bracket(g, k, sys) + g(sys) * poisson_bracket(f, k, sys);
    CHECK(prod == doctest::Approx(leib).epsilon(1e-10));
}

TEST_CASE("bracket table: H commutes with every standard invariant") {
    std::uint64_t rng = 29;
    for (int m : {1, 2, 3}) {
        const auto suite = standard_invariants(m);
        for (int rep = 0; rep < 3; ++rep) {
            const auto sys = detail::random_system(m, 3, rng);
            const auto table = bracket_table(suite, sys);
            const int n = static_cast<int>(table.names.size());
            REQUIRE(table.names.back() == "H");
            for (int c = 0; c < n; ++c) {
                CHECK(std::fabs(table.at(n - 1, c)) < 1e-10);
                CHECK(table.at(c, c) == 0.0);
            }
        }
    }
}

TEST_CASE("u(m) closure holds for the complex generators") {
    // under the strength-weighted bracket the closure carries a factor 2:
    // {F_ab, F_bc} = 2 F_ac (verified via the real and imaginary parts)
    std::uint64_t rng = 37;
    const int m = 3;
    const auto sys = detail::random_system(m, 3, rng);

    // F_pq = -i sum G z_p conj(z_q) decomposes as Re = -F-_{pq}, Im = -F+_{pq}
    auto re_part = [&](int p, int q) -> Observable {
        if (p < q) return -1.0 * obs_F_minus(p, q, m);
        if (p > q) return obs_F_minus(q, p, m);
        return 0.0 * obs_Q(0, m);
    };
    auto im_part = [&](int p, int q) -> Observable {
        return -1.0 * obs_F_plus(std::min(p, q), std::max(p, q), m);
    };

    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c) {
                if (a == b || b == c) continue;
                const auto re1 = re_part(a, b), im1 = im_part(a, b);
                const auto re2 = re_part(b, c), im2 = im_part(b, c);

                const std::complex<double> lhs(
                    poisson_bracket(re1, re2, sys) - poisson_bracket(im1, im2, sys),
                    poisson_bracket(re1, im2, sys) + poisson_bracket(im1, re2, sys));
                // full structure relation {F_ab, F_cd} = 2 d_bc F_ad - 2 d_ad F_cb,
                // here with c == b; the delta term matters when a == c
                std::complex<double> rhs = 2.0 * complex_F(sys, a, c);
                if (a == c) rhs -= 2.0 * complex_F(sys, b, b);
                CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(rhs)));

                // the decomposition itself matches the independent complex sum
                const std::complex<double> f_ab = complex_F(sys, a, b);
                CHECK(f_ab.real() == doctest::Approx(re1(sys)).epsilon(1e-12));
                CHECK(f_ab.imag() == doctest::Approx(im1(sys)).epsilon(1e-12));
            }
}

TEST_CASE("involutive family brackets vanish on random configurations") {
    std::uint64_t rng = 41;
    for (int m : {1, 2}) {
        const auto fam = involutive_family(m);
        REQUIRE(static_cast<int>(fam.size()) == 2 * m + 1);
        for (int rep = 0; rep < 25; ++rep) {
            const auto sys = detail::random_system(m, 3, rng);
            for (std::size_t i = 0; i < fam.size(); ++i)
                for (std::size_t j = i + 1; j < fam.size(); ++j)
                    CHECK(std::fabs(poisson_bracket(fam[i], fam[j], sys)) < 1e-9);
        }
    }
}

TEST_CASE("observable m mismatch is rejected") {
    const auto sys = VortexSystem::create(1, {1.0}, {0.5, 0.5});
    CHECK_THROWS_AS(obs_Q(0, 2)(sys), std::invalid_argument);
}

TEST_CASE("observable_by_name parses the documented catalog") {
    const auto sys = VortexSystem::create(2, {1.0, 2.0}, {1, 0, 0, 1, -1, 0, 0, -1});
    CHECK(observable_by_name("H", 2).name == "H");
    CHECK(observable_by_name("Q1", 2)(sys) == doctest::Approx(obs_Q(0, 2)(sys)));
    CHECK(observable_by_name("P2", 2)(sys) == doctest::Approx(obs_P(1, 2)(sys)));
    CHECK(observable_by_name("Fp12", 2)(sys) == doctest::Approx(obs_F_plus(0, 1, 2)(sys)));
    CHECK(observable_by_name("Fm12", 2)(sys) == doctest::Approx(obs_F_minus(0, 1, 2)(sys)));
    CHECK(observable_by_name("R1", 2)(sys) == doctest::Approx(obs_Q2P2(0, 2)(sys)));
    CHECK(observable_by_name("x2_1", 2)(sys) == doctest::Approx(sys.x(1, 0)));
    CHECK(observable_by_name("y1_2", 2)(sys) == doctest::Approx(sys.y(0, 1)));
    CHECK_THROWS_AS(observable_by_name("Z9", 2), std::invalid_argument);
    CHECK_THROWS_AS(observable_by_name("Q3", 2), std::invalid_argument);
}

TEST_SUITE_END();
