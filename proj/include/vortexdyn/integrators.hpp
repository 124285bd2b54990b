#pragma once

// Time integration of the vortex ODE.
//
// implicit_midpoint solves  z' = z + dt * V((z + z')/2)  by fixed-point
// iteration with a Newton fallback; the vortex symplectic form has constant
// coefficients, for which the midpoint rule is symplectic and preserves
// quadratic first integrals up to the solver residual. rk4 is the explicit
// reference scheme. Tangent vectors propagate by the exact Jacobian of the
// chosen step map (analytic second derivatives of the kernel).

#include <string>
#include <vector>

#include "vortexdyn/observables.hpp"
#include "vortexdyn/vortex_system.hpp"

namespace vortexdyn {

enum class Scheme { ImplicitMidpoint, Rk4 };

struct IntegratorConfig {
    Scheme scheme = Scheme::ImplicitMidpoint;
    double dt = 1e-3;
    double implicit_tol = 1e-12;
    int implicit_max_iter = 50;
    double collision_eps = kDefaultCollisionEps;

    void validate() const;
};

struct StepDiagnostics {
    int iterations = 0;      // implicit solver iterations (0 for rk4)
    bool newton_used = false;
    double residual = 0.0;
};

VortexSystem step(const VortexSystem& sys, const IntegratorConfig& cfg);
VortexSystem step(const VortexSystem& sys, const IntegratorConfig& cfg, StepDiagnostics& diag);

// Propagate state and a variational (tangent) vector through one step.
std::pair<VortexSystem, std::vector<double>> step_with_tangent(
    const VortexSystem& sys, std::span<const double> tangent, const IntegratorConfig& cfg);

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<std::vector<double>> states;           // position snapshots
    std::vector<std::string> invariant_names;
    std::vector<std::vector<double>> invariant_series; // per snapshot, one value per name
    std::vector<int> iteration_counts;                 // per step
    bool failed = false;
    std::string failure_message;
    double failure_time = 0.0;

    struct Drift {
        std::string name;
        double initial = 0.0;
        double max_abs_drift = 0.0;
        double max_rel_drift = 0.0;  // abs drift / |initial|; inf when initial == 0
    };
    std::vector<Drift> drift_summary() const;
};

// Repeated stepping with invariant sampling every record_every steps (the
// initial and final states are always recorded). On step failure the partial
// record is returned with `failed` set.
TrajectoryRecord integrate(const VortexSystem& sys, const IntegratorConfig& cfg,
                           double horizon, const InvariantSuite& suite,
                           int record_every = 1);

} // namespace vortexdyn
