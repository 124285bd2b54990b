#pragma once

// First-class phase-space observables with analytic gradients, the standard
// conserved quantities Q_a, P_a, F+-_{ab}, and the weighted Poisson bracket
//   {f,g} = sum_j (1/G_j) sum_a (df/dx_{j,a} dg/dy_{j,a} - df/dy_{j,a} dg/dx_{j,a}).
//
// Observables are immutable values; sums/products assemble gradients by the
// product rule so composites like Q_a^2 + P_a^2 never need hand derivatives.

#include <functional>
#include <string>
#include <vector>

#include "vortexdyn/vortex_system.hpp"

namespace vortexdyn {

struct Observable {
    std::string name;
    int required_m = 0;  // 0 = any half-dimension
    std::function<double(const VortexSystem&)> value;
    std::function<std::vector<double>(const VortexSystem&)> gradient;

    double operator()(const VortexSystem& sys) const;
    std::vector<double> grad(const VortexSystem& sys) const;
};

Observable operator+(const Observable& f, const Observable& g);
Observable operator*(const Observable& f, const Observable& g);
Observable operator*(double c, const Observable& f);

// Coordinate observables and the named generators.
Observable obs_coordinate_x(int j, int alpha);  // x_{j,alpha}, zero-based indices
Observable obs_coordinate_y(int j, int alpha);
Observable obs_Q(int alpha, int m);
Observable obs_P(int alpha, int m);
Observable obs_F_plus(int alpha, int beta, int m);   // alpha <= beta
Observable obs_F_minus(int alpha, int beta, int m);  // alpha < beta
Observable obs_hamiltonian();                        // H with its analytic gradient
Observable obs_Q2P2(int alpha, int m);               // Q_a^2 + P_a^2

// The m^2 + 2m standard integrals plus H and the 2m+1 involutive family.
struct InvariantSuite {
    int m = 1;
    std::vector<Observable> standard;    // Q_1..Q_m, P_1..P_m, F+_{ab} (a<=b), F-_{ab} (a<b)
    std::vector<Observable> involutive;  // H, F+_{aa}, Q_a^2+P_a^2
    Observable hamiltonian;

    // standard plus H; the set sampled along trajectories.
    std::vector<Observable> tracked() const;
};

InvariantSuite standard_invariants(int m);

std::vector<Observable> involutive_family(int m);

// Weighted Poisson bracket evaluated from analytic gradients.
double poisson_bracket(const Observable& f, const Observable& g, const VortexSystem& sys);

// All pairwise brackets among {standard..., H}; row-major square matrix.
struct BracketTable {
    std::vector<std::string> names;
    std::vector<double> values;  // names.size()^2
    double at(int r, int c) const { return values[r * names.size() + c]; }
};

BracketTable bracket_table(const InvariantSuite& suite, const VortexSystem& sys);

// Parse an observable name: "H", "Q1", "P2", "Fp12", "Fm12", "R1" (= Q1^2+P1^2),
// "x2_1" / "y2_1" (vortex 2, axis 1; one-based). Throws std::invalid_argument.
Observable observable_by_name(const std::string& name, int m);

} // namespace vortexdyn
