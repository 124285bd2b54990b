#pragma once

#include <stdexcept>
#include <string>

namespace vortexdyn {

// Two vortices closer than the collision threshold: the interaction kernel
// (and everything downstream of it) is singular there.
class CollisionError : public std::runtime_error {
public:
    CollisionError(int j, int k, double separation)
        : std::runtime_error("singular configuration: vortices " + std::to_string(j) +
                             " and " + std::to_string(k) + " at separation " +
                             std::to_string(separation)),
          vortex_a(j), vortex_b(k), sep(separation) {}
    int vortex_a, vortex_b;
    double sep;
};

// Implicit solver failed to reach the residual bound within the iteration budget.
class StepFailure : public std::runtime_error {
public:
    explicit StepFailure(const std::string& what) : std::runtime_error(what) {}
};

// Malformed experiment configuration (missing/ill-typed fields, unknown preset, ...).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace vortexdyn
