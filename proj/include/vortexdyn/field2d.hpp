#pragma once

// Pseudospectral vorticity transport on the flat 2-torus [0,2pi)^2:
//   nu_t = {psi, nu},  Lap(psi) = nu,  {a,b} = a_x b_y - a_y b_x.
// Fourier-space Poisson inversion, 2/3-rule dealiasing of the quadratic
// product, classical explicit 4th-order time stepping. All fields are kept
// zero-mean (solvability of the Poisson problem on the torus).
//
// Integrals use plain Riemann sums scaled by (2pi)^2/(nx*ny).

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vortexdyn/kernels.hpp"  // ExecPolicy

namespace vortexdyn {

struct VorticityGrid {
    int nx = 0, ny = 0;                 // even resolutions; x is the slow index
    double dealias_fraction = 2.0 / 3.0;
    std::vector<double> values;         // row-major: values[ix*ny + iy]
    bool cfl_warning = false;           // set by step_vorticity when the heuristic trips

    double mean() const;
    void project_zero_mean();

    static VorticityGrid from_function(int nx, int ny,
                                       const std::function<double(double, double)>& f,
                                       double dealias_fraction = 2.0 / 3.0);
    static VorticityGrid zeros(int nx, int ny, double dealias_fraction = 2.0 / 3.0);
};

struct StreamField {
    int nx = 0, ny = 0;
    std::vector<double> values;  // mean zero
};

// Spectral inversion psi_k = -nu_k/|k|^2, psi_0 = 0. Rejects |mean| > 1e-12
// unless auto_project.
StreamField solve_poisson(const VorticityGrid& grid, bool auto_project = false);

// Spectral Laplacian of a stream field (round-trip companion of solve_poisson).
std::vector<double> laplacian(const StreamField& psi);

// {psi, nu} = psi_x nu_y - psi_y nu_x, derivatives spectral, product dealiased
// by the grid's 2/3-rule mask.
std::vector<double> bracket(const StreamField& psi, const VorticityGrid& nu,
                            ExecPolicy policy = ExecPolicy::Auto);

// One classical RK4 step of nu_t = {solve_poisson(nu), nu}; output re-projected
// to zero mean. Sets cfl_warning when max|u| * dt * max(nx,ny) / (2pi) > 0.5.
VorticityGrid step_vorticity(const VorticityGrid& grid, double dt,
                             ExecPolicy policy = ExecPolicy::Auto);

// I_k = integral of nu^k over the torus for k = 1..k_max.
std::vector<double> casimirs(const VorticityGrid& grid, int k_max);

// max-norm of {solve_poisson(nu), nu}: the steadiness defect.
double steady_residual(const VorticityGrid& grid);

// D = integral of |grad psi|^2 with psi = solve_poisson(nu) (spectral quadrature).
double dirichlet_energy(const VorticityGrid& grid);

// Maximum flow speed max |(psi_y, -psi_x)| on the grid.
double max_speed(const VorticityGrid& grid);

struct FieldRecord {
    std::vector<double> times;
    std::vector<double> energy;                 // Dirichlet energy series
    std::vector<std::vector<double>> casimir_series;
    int casimir_kmax = 4;
    bool any_cfl_warning = false;
};

// Repeated step_vorticity with energy/Casimir sampling every record_every steps.
FieldRecord evolve(VorticityGrid& grid, double dt, long long steps, int record_every,
                   int casimir_kmax = 4, ExecPolicy policy = ExecPolicy::Auto);

// Snapshot serialization: row-major with an (nx, ny, time) header.
// Binary layout: magic "VDYNGRD1", uint32 nx, uint32 ny, float64 time, values.
// CSV layout: "# nx=<nx> ny=<ny> time=<t>" then one row per x index.
void write_grid_binary(const std::string& path, const VorticityGrid& grid, double time);
void write_grid_csv(const std::string& path, const VorticityGrid& grid, double time);

struct GridSnapshot {
    VorticityGrid grid;
    double time = 0.0;
};
GridSnapshot read_grid_snapshot(const std::string& path);  // auto-detects format

} // namespace vortexdyn
