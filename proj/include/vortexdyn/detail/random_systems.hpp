#pragma once

// Seeded random vortex configurations for tests, ensembles and searches.

#include <cstdint>

#include "vortexdyn/detail/linalg.hpp"
#include "vortexdyn/vortex_system.hpp"

namespace vortexdyn::detail {

struct RandomSystemOptions {
    double box = 1.5;           // positions uniform in [-box, box]^{2m}
    double min_separation = 0.4;
    double gamma_min = 0.5;
    double gamma_max = 2.0;
    bool signed_strengths = false;  // if true, each strength gets a random sign
};

inline VortexSystem random_system(int m, int N, std::uint64_t& state,
                                  const RandomSystemOptions& opt = {}) {
    std::vector<double> strengths(N);
    for (int j = 0; j < N; ++j) {
        strengths[j] = uniform(state, opt.gamma_min, opt.gamma_max);
        if (opt.signed_strengths && (splitmix64(state) & 1u)) strengths[j] = -strengths[j];
    }
    std::vector<double> positions(static_cast<std::size_t>(2) * m * N);
    const double min2 = opt.min_separation * opt.min_separation;
    for (int attempt = 0; attempt < 10000; ++attempt) {
        for (auto& p : positions) p = uniform(state, -opt.box, opt.box);
        bool ok = true;
        for (int j = 0; j < N && ok; ++j)
            for (int k = j + 1; k < N && ok; ++k) {
                double d2 = 0.0;
                for (int i = 0; i < 2 * m; ++i) {
                    const double diff = positions[j * 2 * m + i] - positions[k * 2 * m + i];
                    d2 += diff * diff;
                }
                if (d2 < min2) ok = false;
            }
        if (ok) return VortexSystem::create(m, strengths, positions);
    }
    throw std::runtime_error("random_system: could not satisfy min_separation");
}

// Deterministic sub-seed for ensemble member `index` derived from `seed`.
inline std::uint64_t subseed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed ^ (0x632be59bd9b4e019ull * (index + 1));
    return splitmix64(s);
}

} // namespace vortexdyn::detail
