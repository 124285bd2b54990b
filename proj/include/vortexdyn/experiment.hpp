#pragma once

// Experiment configuration, execution and serialization: the library behind
// the CLI. Configs are JSON (schema in docs/config_format.md, shipped examples
// under configs/). Every run writes a manifest echoing the fully resolved
// config, the data files, and a human-readable summary.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "vortexdyn/field2d.hpp"
#include "vortexdyn/integrators.hpp"
#include "vortexdyn/vortex_system.hpp"

namespace vortexdyn {

enum class ExperimentKind {
    Simulate,
    Invariants,
    TwoVortexOracle,
    Lyapunov,
    Section,
    Equivariance,
    CoplanaritySearch,
    Field,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& s);

// Vortex system literal, or a seeded random template for ensembles/searches.
struct SystemSpec {
    bool random = false;
    int m = 1;
    int N = 0;
    std::vector<double> strengths;  // literal; also fixes strengths of random systems
    std::vector<double> positions;  // literal only, flat 2mN
    double box = 1.5;
    double min_separation = 0.4;
    double gamma_min = 0.5, gamma_max = 2.0;
    bool signed_strengths = false;

    VortexSystem realize(std::uint64_t& rng_state) const;
};

struct FieldSpec {
    std::string ic = "taylor-green";  // taylor-green | cosx | random-band |
                                      // gaussian-dipole | file:<path>
    int nx = 128, ny = 128;
    double dt = 1e-3;
    long long steps = 100;
    int record_every = 1;
    int snapshot_every = 0;  // 0 = initial and final only
    int casimir_kmax = 4;
    double dealias_fraction = 2.0 / 3.0;
    bool track_centroid = false;  // centroid of the positive vorticity part
    // random-band parameters
    double amplitude = 1.0;
    int band_kmax = 4;
    // gaussian-dipole parameters
    double gamma = 1.0;
    double separation = 0.6;
    double sigma = 0.03;

    VorticityGrid build_initial(std::uint64_t seed) const;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Simulate;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    std::string output_format = "csv";  // grid snapshots: csv | binary

    SystemSpec system;
    IntegratorConfig integrator;
    double horizon = 10.0;
    int record_every = 1;

    double renorm_interval = 1.0;  // lyapunov
    int ensemble = 0;              // lyapunov: 0 = single run

    std::string section_observable = "y1_1";  // section
    double section_value = 0.0;
    std::string chart_u = "x1_1";
    std::string chart_v = "x2_1";

    int motions = 20;   // equivariance
    int samples = 100;  // coplanarity_search

    FieldSpec field;

    nlohmann::json resolved() const;  // full config with defaults filled in
};

ExperimentConfig parse_config(const nlohmann::json& j);          // throws ConfigError
ExperimentConfig parse_config_file(const std::string& path);     // throws ConfigError

// Named presets (throws ConfigError listing the catalog on unknown names).
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

// Output directory after applying the VORTEXDYN_OUT_ROOT override.
std::string resolve_output_dir(const ExperimentConfig& cfg);

// Exit codes: 0 success, 2 config error, 3 runtime failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeFailure = 3;

int run_experiment(const ExperimentConfig& cfg, std::ostream& log);
int run_experiment_file(const std::string& path, std::ostream& log);
int validate_config_file(const std::string& path, std::ostream& log);

// Reader for the trajectory CSV (documented round-trip interface).
struct TrajectoryTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};
TrajectoryTable read_trajectory_csv(const std::string& path);

} // namespace vortexdyn
