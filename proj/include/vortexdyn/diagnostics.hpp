#pragma once

// Integrability instruments: the exact two-vortex solution, unitary-motion
// equivariance, coplanarity tests, Benettin Lyapunov estimates and Poincare
// sections.

#include <cstdint>
#include <vector>

#include "vortexdyn/integrators.hpp"
#include "vortexdyn/observables.hpp"
#include "vortexdyn/vortex_system.hpp"

namespace vortexdyn {

// Exact N=2 motion. The relative vector r = z_1 - z_2 rotates rigidly in
// span{r_0, J r_0} at rate Omega = -(G_1 + G_2) g(|r_0|^2) about the fixed
// center of vorticity; for G_1 + G_2 = 0 the pair translates uniformly.
struct TwoVortexSolution {
    int m = 1;
    double separation = 0.0;
    double angular_rate = 0.0;            // Omega; 0 in the dipole case
    bool dipole = false;                  // true iff G_1 + G_2 == 0
    std::vector<double> invariant_plane;  // 2 orthonormal 2m-vectors, concatenated
    std::vector<double> center;           // center of vorticity, or translation velocity if dipole

    VortexSystem state_at(double t) const;

    static TwoVortexSolution from(const VortexSystem& sys);

private:
    std::vector<double> r0_;      // initial relative vector
    std::vector<double> jr0_;     // J r0
    std::vector<double> base1_;   // z_1 decomposition data
    double c1_ = 0.0, c2_ = 0.0;  // z_1 = B + c1 r, z_2 = B - c2 r
    std::vector<double> z10_, z20_;
    std::vector<double> strengths_;
};

// State of the exact two-vortex motion at time t (rejects N != 2).
VortexSystem two_vortex_closed_form(const VortexSystem& sys, double t);

// Max over sampled step times of the full-state distance between the
// integrated and closed-form motions.
double oracle_error(const VortexSystem& sys, const IntegratorConfig& cfg, double horizon);

// Positions mapped z -> U z + shift. U must be orthogonal and commute with J
// (both validated to 1e-10); strengths unchanged.
VortexSystem apply_motion(const VortexSystem& sys, std::span<const double> unitary,
                          std::span<const double> shift);

// Normalized residual of the best-fit affine 2-plane through the positions
// and the velocity endpoints {z_j} u {z_j + v_j}: the eigenvalue energy of
// the centered second-moment matrix beyond its top two modes, divided by the
// total. Zero iff the configuration and its velocities are coplanar.
double coplanarity_defect(const VortexSystem& sys);

struct CoplanarityWitness {
    double defect = 0.0;
    VortexSystem system;
};

// Randomized search over `samples` configurations; returns the worst case.
CoplanarityWitness coplanarity_search(int m, int N, int samples, std::uint64_t seed);

struct ChaosReport {
    double mle = 0.0;                       // final running estimate
    std::vector<double> convergence_series; // running estimates at renormalizations
    std::vector<double> series_times;
    double renorm_interval = 1.0;
    double horizon = 0.0;
    bool failed = false;                    // integration aborted; report is partial
    std::string failure_message;
    double max_invariant_rel_drift = 0.0;   // worst tracked-invariant drift during the run
};

// Benettin estimate of the maximal Lyapunov exponent: propagate a random unit
// tangent, renormalize every renorm_interval, average the log growth. The
// first burn_in_fraction of the horizon is discarded from the estimate.
ChaosReport lyapunov_mle(const VortexSystem& sys, const IntegratorConfig& cfg,
                         double horizon, double renorm_interval,
                         std::uint64_t tangent_seed = 1, double burn_in_fraction = 0.1);

struct SectionCrossing {
    double t = 0.0;
    double u = 0.0, v = 0.0;  // chart observables at the crossing
    int direction = 0;        // sign of d(section)/dt at the crossing
    std::vector<double> positions;
};

struct SectionReport {
    std::vector<SectionCrossing> crossings;
    bool failed = false;
    std::string failure_message;
    double max_invariant_rel_drift = 0.0;
    // median nearest-neighbor chart distance / chart bounding-box diagonal;
    // small values indicate points organized on curves
    double nn_residual = 0.0;
};

// States where `section` crosses `section_value`, refined by bisection on the
// linear interpolant between steps to |obs - value| < 1e-10. Crossings where
// the flow is not transversal to the section are skipped.
SectionReport poincare_section(const VortexSystem& sys, const IntegratorConfig& cfg,
                               const Observable& section, double section_value,
                               double horizon, const Observable& chart_u,
                               const Observable& chart_v);

} // namespace vortexdyn
