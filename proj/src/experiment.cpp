#include "vortexdyn/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vortexdyn/detail/linalg.hpp"
#include "vortexdyn/detail/random_systems.hpp"
#include "vortexdyn/diagnostics.hpp"
#include "vortexdyn/version.hpp"

namespace vortexdyn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ------------------------------------------------------------- parsing ---

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

const json* find(const json& j, const std::string& key) {
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double get_num(const json& j, const std::string& parent, const std::string& key,
               double fallback, bool required = false) {
    const json* v = find(j, key);
    if (!v) {
        if (required) fail(parent + "." + key, "required field missing");
        return fallback;
    }
    if (!v->is_number()) fail(parent + "." + key, "expected a number");
    return v->get<double>();
}

long long get_int(const json& j, const std::string& parent, const std::string& key,
                  long long fallback, bool required = false) {
    const json* v = find(j, key);
    if (!v) {
        if (required) fail(parent + "." + key, "required field missing");
        return fallback;
    }
    if (!v->is_number_integer()) fail(parent + "." + key, "expected an integer");
    return v->get<long long>();
}

std::string get_str(const json& j, const std::string& parent, const std::string& key,
                    const std::string& fallback, bool required = false) {
    const json* v = find(j, key);
    if (!v) {
        if (required) fail(parent + "." + key, "required field missing");
        return fallback;
    }
    if (!v->is_string()) fail(parent + "." + key, "expected a string");
    return v->get<std::string>();
}

bool get_bool(const json& j, const std::string& parent, const std::string& key, bool fallback) {
    const json* v = find(j, key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(parent + "." + key, "expected a boolean");
    return v->get<bool>();
}

SystemSpec parse_system(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    SystemSpec spec;
    spec.m = static_cast<int>(get_int(j, path, "m", 1, true));
    if (spec.m < 1) fail(path + ".m", "must be >= 1");
    spec.random = get_bool(j, path, "random", false);

    if (const json* s = find(j, "strengths")) {
        if (!s->is_array() || s->empty()) fail(path + ".strengths", "expected a non-empty array");
        for (const auto& v : *s) {
            if (!v.is_number()) fail(path + ".strengths", "expected numbers");
            spec.strengths.push_back(v.get<double>());
        }
    }

    if (spec.random) {
        spec.N = static_cast<int>(get_int(j, path, "N",
                                          static_cast<long long>(spec.strengths.size()),
                                          spec.strengths.empty()));
        if (spec.N < 1) fail(path + ".N", "must be >= 1");
        if (!spec.strengths.empty() && static_cast<int>(spec.strengths.size()) != spec.N)
            fail(path + ".strengths", "length must equal N");
        spec.box = get_num(j, path, "box", spec.box);
        spec.min_separation = get_num(j, path, "min_separation", spec.min_separation);
        spec.gamma_min = get_num(j, path, "gamma_min", spec.gamma_min);
        spec.gamma_max = get_num(j, path, "gamma_max", spec.gamma_max);
        spec.signed_strengths = get_bool(j, path, "signed_strengths", false);
        return spec;
    }

    if (spec.strengths.empty()) fail(path + ".strengths", "required field missing");
    spec.N = static_cast<int>(spec.strengths.size());
    const json* pos = find(j, "positions");
    if (!pos) fail(path + ".positions", "required field missing");
    if (!pos->is_array() || static_cast<int>(pos->size()) != spec.N)
        fail(path + ".positions", "expected one row per vortex");
    for (int r = 0; r < spec.N; ++r) {
        const auto& row = (*pos)[r];
        if (!row.is_array() || static_cast<int>(row.size()) != 2 * spec.m)
            fail(path + ".positions[" + std::to_string(r) + "]",
                 "expected " + std::to_string(2 * spec.m) + " coordinates");
        for (const auto& v : row) {
            if (!v.is_number()) fail(path + ".positions", "expected numbers");
            spec.positions.push_back(v.get<double>());
        }
    }
    return spec;
}

IntegratorConfig parse_integrator(const json* j, const std::string& path) {
    IntegratorConfig cfg;
    if (!j) return cfg;
    if (!j->is_object()) fail(path, "expected an object");
    const std::string scheme = get_str(*j, path, "scheme", "implicit_midpoint");
    if (scheme == "implicit_midpoint")
        cfg.scheme = Scheme::ImplicitMidpoint;
    else if (scheme == "rk4")
        cfg.scheme = Scheme::Rk4;
    else
        fail(path + ".scheme", "expected 'implicit_midpoint' or 'rk4'");
    cfg.dt = get_num(*j, path, "dt", cfg.dt);
    if (cfg.dt <= 0.0) fail(path + ".dt", "must be > 0");
    cfg.implicit_tol = get_num(*j, path, "implicit_tol", cfg.implicit_tol);
    if (cfg.implicit_tol <= 0.0) fail(path + ".implicit_tol", "must be > 0");
    cfg.implicit_max_iter = static_cast<int>(get_int(*j, path, "implicit_max_iter", cfg.implicit_max_iter));
    if (cfg.implicit_max_iter < 1) fail(path + ".implicit_max_iter", "must be >= 1");
    cfg.collision_eps = get_num(*j, path, "collision_eps", cfg.collision_eps);
    return cfg;
}

FieldSpec parse_field(const json* j, const std::string& path) {
    FieldSpec f;
    if (!j) return f;
    if (!j->is_object()) fail(path, "expected an object");
    f.ic = get_str(*j, path, "ic", f.ic);
    f.nx = static_cast<int>(get_int(*j, path, "nx", f.nx));
    f.ny = static_cast<int>(get_int(*j, path, "ny", f.ny));
    if (f.nx < 4 || f.nx % 2 || f.ny < 4 || f.ny % 2)
        fail(path + ".nx/ny", "must be even and >= 4");
    f.dt = get_num(*j, path, "dt", f.dt);
    if (f.dt <= 0.0) fail(path + ".dt", "must be > 0");
    f.steps = get_int(*j, path, "steps", f.steps);
    if (f.steps < 0) fail(path + ".steps", "must be >= 0");
    f.record_every = static_cast<int>(get_int(*j, path, "record_every", f.record_every));
    if (f.record_every < 1) fail(path + ".record_every", "must be >= 1");
    f.snapshot_every = static_cast<int>(get_int(*j, path, "snapshot_every", f.snapshot_every));
    f.casimir_kmax = static_cast<int>(get_int(*j, path, "casimir_kmax", f.casimir_kmax));
    if (f.casimir_kmax < 1) fail(path + ".casimir_kmax", "must be >= 1");
    f.dealias_fraction = get_num(*j, path, "dealias_fraction", f.dealias_fraction);
    if (!(f.dealias_fraction > 0.0 && f.dealias_fraction <= 1.0))
        fail(path + ".dealias_fraction", "must be in (0, 1]");
    f.track_centroid = get_bool(*j, path, "track_centroid", f.track_centroid);
    f.amplitude = get_num(*j, path, "amplitude", f.amplitude);
    f.band_kmax = static_cast<int>(get_int(*j, path, "band_kmax", f.band_kmax));
    f.gamma = get_num(*j, path, "gamma", f.gamma);
    f.separation = get_num(*j, path, "separation", f.separation);
    f.sigma = get_num(*j, path, "sigma", f.sigma);
    return f;
}

} // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Simulate: return "simulate";
        case ExperimentKind::Invariants: return "invariants";
        case ExperimentKind::TwoVortexOracle: return "two_vortex_oracle";
        case ExperimentKind::Lyapunov: return "lyapunov";
        case ExperimentKind::Section: return "section";
        case ExperimentKind::Equivariance: return "equivariance";
        case ExperimentKind::CoplanaritySearch: return "coplanarity_search";
        case ExperimentKind::Field: return "field";
    }
    return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    for (auto k : {ExperimentKind::Simulate, ExperimentKind::Invariants,
                   ExperimentKind::TwoVortexOracle, ExperimentKind::Lyapunov,
                   ExperimentKind::Section, ExperimentKind::Equivariance,
                   ExperimentKind::CoplanaritySearch, ExperimentKind::Field})
        if (to_string(k) == s) return k;
    throw ConfigError("kind: unknown experiment kind '" + s +
                      "' (expected simulate, invariants, two_vortex_oracle, lyapunov, "
                      "section, equivariance, coplanarity_search or field)");
}

VortexSystem SystemSpec::realize(std::uint64_t& rng_state) const {
    if (!random) return VortexSystem::create(m, strengths, positions);
    detail::RandomSystemOptions opt;
    opt.box = box;
    opt.min_separation = min_separation;
    opt.gamma_min = gamma_min;
    opt.gamma_max = gamma_max;
    opt.signed_strengths = signed_strengths;
    auto sys = detail::random_system(m, N, rng_state, opt);
    if (!strengths.empty()) sys.strengths = strengths;
    return sys;
}

VorticityGrid FieldSpec::build_initial(std::uint64_t seed) const {
    VorticityGrid g;
    if (ic == "taylor-green") {
        g = VorticityGrid::from_function(nx, ny,
                                         [a = amplitude](double x, double y) { return a * std::cos(x) * std::cos(y); },
                                         dealias_fraction);
    } else if (ic == "cosx") {
        g = VorticityGrid::from_function(nx, ny,
                                         [a = amplitude](double x, double) { return a * std::cos(x); },
                                         dealias_fraction);
    } else if (ic == "random-band") {
        // seeded band-limited random field: sum of low modes with random phases
        struct Mode { int kx, ky; double amp, phase_x, phase_y; };
        std::vector<Mode> modes;
        std::uint64_t state = seed;
        for (int kx = 0; kx <= band_kmax; ++kx)
            for (int ky = (kx == 0 ? 1 : 0); ky <= band_kmax; ++ky) {
                Mode mo;
                mo.kx = kx;
                mo.ky = ky;
                mo.amp = detail::uniform(state, -1.0, 1.0);
                mo.phase_x = detail::uniform(state, 0.0, 2.0 * std::numbers::pi);
                mo.phase_y = detail::uniform(state, 0.0, 2.0 * std::numbers::pi);
                modes.push_back(mo);
            }
        g = VorticityGrid::from_function(nx, ny,
                                         [&](double x, double y) {
                                             double v = 0.0;
                                             for (const auto& mo : modes)
                                                 v += mo.amp * std::cos(mo.kx * x + mo.phase_x) *
                                                      std::cos(mo.ky * y + mo.phase_y);
                                             return v;
                                         },
                                         dealias_fraction);
        // normalize to the requested peak flow speed
        g.project_zero_mean();
        const double speed = max_speed(g);
        if (speed > 0.0)
            for (auto& v : g.values) v *= amplitude / speed;
    } else if (ic == "gaussian-dipole") {
        const double cx = std::numbers::pi, cy = std::numbers::pi;
        const double half = 0.5 * separation;
        const double s2 = 2.0 * sigma * sigma;
        const double peak = gamma / (2.0 * std::numbers::pi * sigma * sigma);
        g = VorticityGrid::from_function(nx, ny,
                                         [&](double x, double y) {
                                             const double dxp = x - (cx + half), dyp = y - cy;
                                             const double dxm = x - (cx - half), dym = y - cy;
                                             return peak * (std::exp(-(dxp * dxp + dyp * dyp) / s2) -
                                                            std::exp(-(dxm * dxm + dym * dym) / s2));
                                         },
                                         dealias_fraction);
    } else if (ic.rfind("file:", 0) == 0) {
        auto snap = read_grid_snapshot(ic.substr(5));
        g = std::move(snap.grid);
        g.dealias_fraction = dealias_fraction;
    } else {
        throw ConfigError("field.ic: unknown initial condition '" + ic +
                          "' (expected taylor-green, cosx, random-band, gaussian-dipole "
                          "or file:<path>)");
    }
    g.project_zero_mean();
    return g;
}

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    ExperimentConfig cfg;
    cfg.kind = experiment_kind_from_string(get_str(j, "config", "kind", "", true));
    cfg.seed = static_cast<std::uint64_t>(get_int(j, "config", "seed", 1));

    if (const json* out = find(j, "output")) {
        if (!out->is_object()) fail("output", "expected an object");
        cfg.output_dir = get_str(*out, "output", "dir", cfg.output_dir);
        cfg.output_format = get_str(*out, "output", "format", cfg.output_format);
        if (cfg.output_format != "csv" && cfg.output_format != "binary")
            fail("output.format", "expected 'csv' or 'binary'");
    }

    cfg.integrator = parse_integrator(find(j, "integrator"), "integrator");
    cfg.horizon = get_num(j, "config", "horizon", cfg.horizon);
    if (cfg.horizon < 0.0) fail("horizon", "must be >= 0");
    cfg.record_every = static_cast<int>(get_int(j, "config", "record_every", cfg.record_every));
    if (cfg.record_every < 1) fail("record_every", "must be >= 1");

    const bool needs_system = cfg.kind != ExperimentKind::Field &&
                              cfg.kind != ExperimentKind::CoplanaritySearch;
    if (const json* sys = find(j, "system")) {
        cfg.system = parse_system(*sys, "system");
    } else if (needs_system) {
        fail("system", "required field missing");
    }

    switch (cfg.kind) {
        case ExperimentKind::TwoVortexOracle:
            if (cfg.system.N != 2) fail("system", "two_vortex_oracle requires exactly N=2");
            break;
        case ExperimentKind::Lyapunov: {
            const json* ly = find(j, "lyapunov");
            if (ly) {
                if (!ly->is_object()) fail("lyapunov", "expected an object");
                cfg.renorm_interval = get_num(*ly, "lyapunov", "renorm_interval", cfg.renorm_interval);
                if (cfg.renorm_interval <= 0.0) fail("lyapunov.renorm_interval", "must be > 0");
                cfg.ensemble = static_cast<int>(get_int(*ly, "lyapunov", "ensemble", 0));
                if (cfg.ensemble < 0) fail("lyapunov.ensemble", "must be >= 0");
            }
            if (cfg.ensemble > 0 && !cfg.system.random)
                fail("lyapunov.ensemble", "ensembles need a random system template "
                                          "(system.random = true)");
            if (cfg.horizon < 2.0 * cfg.renorm_interval)
                fail("horizon", "lyapunov needs horizon >= 2 * renorm_interval");
            break;
        }
        case ExperimentKind::Section: {
            const json* sec = find(j, "section");
            if (!sec) fail("section", "required field missing");
            if (!sec->is_object()) fail("section", "expected an object");
            cfg.section_observable = get_str(*sec, "section", "observable", "", true);
            cfg.section_value = get_num(*sec, "section", "value", 0.0);
            const json* chart = find(*sec, "chart");
            if (!chart || !chart->is_array() || chart->size() != 2 ||
                !(*chart)[0].is_string() || !(*chart)[1].is_string())
                fail("section.chart", "expected an array of two observable names");
            cfg.chart_u = (*chart)[0].get<std::string>();
            cfg.chart_v = (*chart)[1].get<std::string>();
            // validate the names now, against the configured m
            observable_by_name(cfg.section_observable, cfg.system.m);
            observable_by_name(cfg.chart_u, cfg.system.m);
            observable_by_name(cfg.chart_v, cfg.system.m);
            break;
        }
        case ExperimentKind::Equivariance: {
            cfg.motions = static_cast<int>(get_int(j, "config", "motions", cfg.motions));
            if (cfg.motions < 1) fail("motions", "must be >= 1");
            break;
        }
        case ExperimentKind::CoplanaritySearch: {
            const json* cop = find(j, "coplanarity");
            if (!cop) fail("coplanarity", "required field missing");
            if (!cop->is_object()) fail("coplanarity", "expected an object");
            cfg.system.random = true;
            cfg.system.m = static_cast<int>(get_int(*cop, "coplanarity", "m", 2, true));
            cfg.system.N = static_cast<int>(get_int(*cop, "coplanarity", "N", 3, true));
            cfg.samples = static_cast<int>(get_int(*cop, "coplanarity", "samples", cfg.samples));
            if (cfg.samples < 1) fail("coplanarity.samples", "must be >= 1");
            break;
        }
        case ExperimentKind::Field:
            cfg.field = parse_field(find(j, "field"), "field");
            break;
        default:
            break;
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return parse_config(j);
}

json ExperimentConfig::resolved() const {
    json j;
    j["kind"] = to_string(kind);
    j["seed"] = seed;
    j["output"] = {{"dir", output_dir}, {"format", output_format}};
    j["horizon"] = horizon;
    j["record_every"] = record_every;
    j["integrator"] = {
        {"scheme", integrator.scheme == Scheme::ImplicitMidpoint ? "implicit_midpoint" : "rk4"},
        {"dt", integrator.dt},
        {"implicit_tol", integrator.implicit_tol},
        {"implicit_max_iter", integrator.implicit_max_iter},
        {"collision_eps", integrator.collision_eps},
    };
    if (kind != ExperimentKind::Field) {
        json sys;
        sys["m"] = system.m;
        sys["random"] = system.random;
        if (system.random) {
            sys["N"] = system.N;
            sys["box"] = system.box;
            sys["min_separation"] = system.min_separation;
            sys["gamma_min"] = system.gamma_min;
            sys["gamma_max"] = system.gamma_max;
            sys["signed_strengths"] = system.signed_strengths;
            if (!system.strengths.empty()) sys["strengths"] = system.strengths;
        } else {
            sys["strengths"] = system.strengths;
            json rows = json::array();
            for (int r = 0; r < system.N; ++r) {
                json row = json::array();
                for (int c = 0; c < 2 * system.m; ++c)
                    row.push_back(system.positions[r * 2 * system.m + c]);
                rows.push_back(row);
            }
            sys["positions"] = rows;
        }
        j["system"] = sys;
    }
    switch (kind) {
        case ExperimentKind::Lyapunov:
            j["lyapunov"] = {{"renorm_interval", renorm_interval}, {"ensemble", ensemble}};
            break;
        case ExperimentKind::Section:
            j["section"] = {{"observable", section_observable},
                            {"value", section_value},
                            {"chart", {chart_u, chart_v}}};
            break;
        case ExperimentKind::Equivariance:
            j["motions"] = motions;
            break;
        case ExperimentKind::CoplanaritySearch:
            j["coplanarity"] = {{"m", system.m}, {"N", system.N}, {"samples", samples}};
            break;
        case ExperimentKind::Field:
            j["field"] = {{"ic", field.ic},
                          {"nx", field.nx},
                          {"ny", field.ny},
                          {"dt", field.dt},
                          {"steps", field.steps},
                          {"record_every", field.record_every},
                          {"snapshot_every", field.snapshot_every},
                          {"casimir_kmax", field.casimir_kmax},
                          {"dealias_fraction", field.dealias_fraction},
                          {"track_centroid", field.track_centroid},
                          {"amplitude", field.amplitude},
                          {"band_kmax", field.band_kmax},
                          {"gamma", field.gamma},
                          {"separation", field.separation},
                          {"sigma", field.sigma}};
            break;
        default:
            break;
    }
    return j;
}

std::string resolve_output_dir(const ExperimentConfig& cfg) {
    if (const char* root = std::getenv("VORTEXDYN_OUT_ROOT"))
        return (fs::path(root) / cfg.output_dir).string();
    return cfg.output_dir;
}

// ------------------------------------------------------------- presets ---

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig cfg;
    cfg.output_dir = "out/" + name;
    if (name == "kirchhoff-pair") {
        cfg.kind = ExperimentKind::Simulate;
        cfg.system.m = 1;
        cfg.system.strengths = {1.0, 1.0};
        cfg.system.positions = {0.0, 0.0, 1.0, 0.0};
        cfg.system.N = 2;
        cfg.horizon = 10.0;
        cfg.record_every = 10;
    } else if (name == "kirchhoff-dipole") {
        cfg.kind = ExperimentKind::Simulate;
        cfg.system.m = 1;
        cfg.system.strengths = {1.0, -1.0};
        cfg.system.positions = {0.0, 0.0, 1.0, 0.0};
        cfg.system.N = 2;
        cfg.horizon = 10.0;
        cfg.record_every = 10;
    } else if (name == "planar-triple") {
        cfg.kind = ExperimentKind::Simulate;
        cfg.system.m = 1;
        cfg.system.strengths = {1.0, 1.3, 0.7};
        cfg.system.positions = {0.0, 0.0, 1.0, 0.0, 0.3, 0.9};
        cfg.system.N = 3;
        cfg.horizon = 50.0;
        cfg.record_every = 100;
        cfg.integrator.dt = 5e-3;
    } else if (name == "m2-pair-oracle") {
        cfg.kind = ExperimentKind::TwoVortexOracle;
        cfg.system.m = 2;
        cfg.system.strengths = {1.0, 2.0};
        cfg.system.positions = {0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0};
        cfg.system.N = 2;
        cfg.horizon = 10.0;
    } else if (name == "planar-quad-lyapunov") {
        cfg.kind = ExperimentKind::Lyapunov;
        cfg.system.random = true;
        cfg.system.m = 1;
        cfg.system.N = 4;
        cfg.system.strengths = {1.0, 1.0, 1.0, 1.0};
        cfg.system.box = 1.2;
        cfg.system.min_separation = 0.6;
        cfg.ensemble = 12;
        cfg.horizon = 1000.0;
        cfg.integrator.dt = 5e-3;
        cfg.renorm_interval = 1.0;
    } else if (name == "conjecture-m2-n3") {
        cfg.kind = ExperimentKind::Lyapunov;
        cfg.system.random = true;
        cfg.system.m = 2;
        cfg.system.N = 3;
        cfg.system.box = 1.2;
        cfg.system.min_separation = 0.6;
        cfg.ensemble = 12;
        cfg.horizon = 1000.0;
        cfg.integrator.dt = 5e-3;
        cfg.renorm_interval = 1.0;
    } else if (name == "invariants-m2-n3") {
        cfg.kind = ExperimentKind::Invariants;
        cfg.system.random = true;
        cfg.system.m = 2;
        cfg.system.N = 3;
    } else if (name == "section-planar-triple") {
        cfg.kind = ExperimentKind::Section;
        cfg.system.m = 1;
        cfg.system.strengths = {1.0, 1.3, 0.7};
        cfg.system.positions = {0.0, 0.0, 1.0, 0.0, 0.3, 0.9};
        cfg.system.N = 3;
        cfg.horizon = 2000.0;
        cfg.integrator.dt = 5e-3;
        cfg.section_observable = "y1_1";
        cfg.section_value = 0.0;
        cfg.chart_u = "x1_1";
        cfg.chart_v = "x2_1";
    } else if (name == "equivariance-m2") {
        cfg.kind = ExperimentKind::Equivariance;
        cfg.system.random = true;
        cfg.system.m = 2;
        cfg.system.N = 3;
        cfg.horizon = 1.0;
        cfg.motions = 20;
    } else if (name == "coplanarity-m2-n3") {
        cfg.kind = ExperimentKind::CoplanaritySearch;
        cfg.system.random = true;
        cfg.system.m = 2;
        cfg.system.N = 3;
        cfg.samples = 100;
    } else if (name == "taylor-green") {
        cfg.kind = ExperimentKind::Field;
        cfg.field.ic = "taylor-green";
        cfg.field.nx = cfg.field.ny = 128;
        cfg.field.dt = 1e-3;
        cfg.field.steps = 100;
        cfg.field.record_every = 10;
    } else if (name == "field-dipole") {
        cfg.kind = ExperimentKind::Field;
        cfg.field.ic = "gaussian-dipole";
        cfg.field.nx = cfg.field.ny = 512;
        cfg.field.dt = 1e-3;
        cfg.field.steps = 250;
        cfg.field.record_every = 25;
        cfg.field.track_centroid = true;
        cfg.field.gamma = 1.0;
        cfg.field.separation = 0.6;
        cfg.field.sigma = 0.03;
    } else {
        std::string catalog;
        for (const auto& n : preset_names()) catalog += (catalog.empty() ? "" : ", ") + n;
        throw ConfigError("unknown preset '" + name + "'; catalog: " + catalog);
    }
    return cfg;
}

std::vector<std::string> preset_names() {
    return {"kirchhoff-pair", "kirchhoff-dipole", "planar-triple", "m2-pair-oracle",
            "planar-quad-lyapunov", "conjecture-m2-n3", "invariants-m2-n3",
            "section-planar-triple", "equivariance-m2", "coplanarity-m2-n3",
            "taylor-green", "field-dipole"};
}

// -------------------------------------------------------------- runners ---

namespace {

struct RunContext {
    fs::path dir;
    std::vector<std::string> outputs;
    json extra;  // run-specific manifest entries

    std::ofstream open(const std::string& name) {
        outputs.push_back(name);
        std::ofstream out(dir / name);
        if (!out) throw std::runtime_error("cannot open output file " + (dir / name).string());
        return out;
    }
};

void write_manifest(RunContext& ctx, const ExperimentConfig& cfg, const std::string& status,
                    const std::string& failure = "") {
    json m;
    m["tool"] = "vortexdyn";
    m["version"] = kVersion;
    m["kind"] = to_string(cfg.kind);
    m["seed"] = cfg.seed;
    m["config"] = cfg.resolved();
    m["status"] = status;
    if (!failure.empty()) m["failure"] = failure;
    m["outputs"] = ctx.outputs;
#ifdef _OPENMP
    m["omp_max_threads"] = omp_get_max_threads();
#else
    m["omp_max_threads"] = 1;
#endif
    for (auto& [k, v] : ctx.extra.items()) m[k] = v;
    const auto now = std::chrono::system_clock::now();
    m["generated_at"] = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    std::ofstream out(ctx.dir / "manifest.json");
    out << m.dump(2) << "\n";
}

void write_trajectory_csv(std::ofstream& out, const VortexSystem& proto,
                          const TrajectoryRecord& rec) {
    out << "t";
    for (int j = 0; j < proto.N; ++j)
        for (int a = 0; a < proto.m; ++a)
            out << ",x" << j + 1 << "_" << a + 1 << ",y" << j + 1 << "_" << a + 1;
    for (const auto& n : rec.invariant_names) out << "," << n;
    out << "\n";
    for (std::size_t r = 0; r < rec.times.size(); ++r) {
        out << fmt(rec.times[r]);
        for (double v : rec.states[r]) out << "," << fmt(v);
        for (double v : rec.invariant_series[r]) out << "," << fmt(v);
        out << "\n";
    }
}

json drift_json(const TrajectoryRecord& rec) {
    json out = json::object();
    for (const auto& d : rec.drift_summary()) {
        out[d.name] = {{"initial", d.initial},
                       {"max_abs_drift", d.max_abs_drift},
                       {"max_rel_drift", std::isfinite(d.max_rel_drift) ? json(d.max_rel_drift)
                                                                        : json("inf")}};
    }
    return out;
}

int run_simulate(const ExperimentConfig& cfg, RunContext& ctx, std::ostream& log) {
    std::uint64_t rng = cfg.seed;
    const auto sys = cfg.system.realize(rng);
    const auto suite = standard_invariants(sys.m);
    const auto rec = integrate(sys, cfg.integrator, cfg.horizon, suite, cfg.record_every);

    auto traj = ctx.open("trajectory.csv");
    write_trajectory_csv(traj, sys, rec);
    ctx.extra["drift"] = drift_json(rec);
    ctx.extra["samples"] = rec.times.size();

    auto summary = ctx.open("summary.txt");
    summary << "simulate: m=" << sys.m << " N=" << sys.N << " horizon=" << fmt(cfg.horizon)
            << " dt=" << fmt(cfg.integrator.dt) << "\n";
    for (const auto& d : rec.drift_summary())
        summary << "  " << d.name << ": initial " << fmt(d.initial) << ", max abs drift "
                << fmt(d.max_abs_drift) << "\n";
    if (rec.failed) {
        summary << "FAILED at t=" << fmt(rec.failure_time) << ": " << rec.failure_message << "\n";
        write_manifest(ctx, cfg, "partial", rec.failure_message);
        log << "simulate failed: " << rec.failure_message << "\n";
        return kExitRuntimeFailure;
    }
    write_manifest(ctx, cfg, "ok");
    log << "simulate: wrote " << rec.times.size() << " samples\n";
    return kExitOk;
}

int run_invariants(const ExperimentConfig& cfg, RunContext& ctx, std::ostream& log) {
    std::uint64_t rng = cfg.seed;
    const auto sys = cfg.system.realize(rng);
    const auto suite = standard_invariants(sys.m);
    const auto table = bracket_table(suite, sys);

    auto out = ctx.open("bracket_table.csv");
    out << "name";
    for (const auto& n : table.names) out << "," << n;
    out << "\n";
    const int n = static_cast<int>(table.names.size());
    for (int r = 0; r < n; ++r) {
        out << table.names[r];
        for (int c = 0; c < n; ++c) out << "," << fmt(table.at(r, c));
        out << "\n";
    }

    double worst_h = 0.0;  // max |{H, X}|
    for (int c = 0; c < n - 1; ++c) worst_h = std::max(worst_h, std::fabs(table.at(n - 1, c)));
    double gamma_sum = 0.0;
    for (double g : sys.strengths) gamma_sum += g;

    ctx.extra["max_abs_bracket_with_H"] = worst_h;
    ctx.extra["strength_sum"] = gamma_sum;

    auto summary = ctx.open("summary.txt");
    summary << "invariants: m=" << sys.m << " N=" << sys.N << "\n";
    summary << "  max |{H, X}| over standard invariants: " << fmt(worst_h) << "\n";
    write_manifest(ctx, cfg, "ok");
    log << "invariants: max |{H, X}| = " << fmt(worst_h) << "\n";
    return kExitOk;
}

int run_two_vortex_oracle(const ExperimentConfig& cfg, RunContext& ctx, std::ostream& log) {
    std::uint64_t rng = cfg.seed;
    const auto sys = cfg.system.realize(rng);

    auto cfg_half = cfg.integrator;
    cfg_half.dt *= 0.5;
    const double err = oracle_error(sys, cfg.integrator, cfg.horizon);
    const double err_half = oracle_error(sys, cfg_half, cfg.horizon);
    const double ratio = err_half > 0.0 ? err / err_half : 0.0;

    auto out = ctx.open("oracle.csv");
    out << "dt,max_error\n";
    out << fmt(cfg.integrator.dt) << "," << fmt(err) << "\n";
    out << fmt(cfg_half.dt) << "," << fmt(err_half) << "\n";

    ctx.extra["max_error"] = err;
    ctx.extra["halving_ratio"] = ratio;

    auto summary = ctx.open("summary.txt");
    summary << "two_vortex_oracle: m=" << sys.m << " horizon=" << fmt(cfg.horizon) << "\n";
    summary << "  max error at dt=" << fmt(cfg.integrator.dt) << ": " << fmt(err) << "\n";
    summary << "  dt-halving error ratio: " << fmt(ratio) << "\n";
    write_manifest(ctx, cfg, "ok");
    log << "two_vortex_oracle: max error " << fmt(err) << ", halving ratio " << fmt(ratio) << "\n";
    return kExitOk;
}

int run_lyapunov(const ExperimentConfig& cfg, RunContext& ctx, std::ostream& log) {
    const int members = std::max(1, cfg.ensemble);
    std::vector<ChaosReport> reports(members);
    std::vector<VortexSystem> systems;
    systems.reserve(members);
    for (int i = 0; i < members; ++i) {
        std::uint64_t rng = cfg.ensemble > 0 ? detail::subseed(cfg.seed, i) : cfg.seed;
        systems.push_back(cfg.system.realize(rng));
    }

#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < members; ++i) {
        try {
            reports[i] = lyapunov_mle(systems[i], cfg.integrator, cfg.horizon,
                                      cfg.renorm_interval, detail::subseed(cfg.seed, 1000 + i));
        } catch (const std::exception& e) {
            reports[i].failed = true;
            reports[i].failure_message = e.what();
        }
    }

    auto out = ctx.open("mle.jsonl");
    for (int i = 0; i < members; ++i) {
        const auto& r = reports[i];
        for (std::size_t k = 0; k < r.convergence_series.size(); ++k) {
            json line = {{"kind", "mle_series"},
                         {"member", i},
                         {"t", r.series_times[k]},
                         {"estimate", r.convergence_series[k]}};
            out << line.dump() << "\n";
        }
        json res = {{"kind", "mle_result"},
                    {"member", i},
                    {"mle", r.mle},
                    {"failed", r.failed},
                    {"max_invariant_rel_drift", r.max_invariant_rel_drift}};
        out << res.dump() << "\n";
    }

    std::vector<double> values;
    for (const auto& r : reports)
        if (!r.failed) values.push_back(r.mle);
    std::sort(values.begin(), values.end());

    json dist;
    dist["completed"] = values.size();
    dist["failed"] = members - static_cast<int>(values.size());
    if (!values.empty()) {
        dist["min"] = values.front();
        dist["max"] = values.back();
        dist["median"] = values[values.size() / 2];
    }
    ctx.extra["mle_distribution"] = dist;

    auto summary = ctx.open("summary.txt");
    summary << "lyapunov: members=" << members << " horizon=" << fmt(cfg.horizon)
            << " renorm_interval=" << fmt(cfg.renorm_interval) << "\n";
    for (int i = 0; i < members; ++i)
        summary << "  member " << i << ": mle=" << fmt(reports[i].mle)
                << (reports[i].failed ? " (partial: " + reports[i].failure_message + ")" : "")
                << "\n";
    write_manifest(ctx, cfg, "ok");
    log << "lyapunov: " << values.size() << "/" << members << " members completed\n";
    return kExitOk;
}

int run_section(const ExperimentConfig& cfg, RunContext& ctx, std::ostream& log) {
    std::uint64_t rng = cfg.seed;
    const auto sys = cfg.system.realize(rng);
    const auto section_obs = observable_by_name(cfg.section_observable, sys.m);
    const auto chart_u = observable_by_name(cfg.chart_u, sys.m);
    const auto chart_v = observable_by_name(cfg.chart_v, sys.m);

    const auto report = poincare_section(sys, cfg.integrator, section_obs, cfg.section_value,
                                         cfg.horizon, chart_u, chart_v);

    auto out = ctx.open("section.jsonl");
    for (const auto& c : report.crossings) {
        json line = {{"kind", "section_point"}, {"t", c.t}, {"u", c.u}, {"v", c.v},
                     {"direction", c.direction}};
        out << line.dump() << "\n";
    }

    ctx.extra["crossings"] = report.crossings.size();
    ctx.extra["nn_residual"] = report.nn_residual;
    ctx.extra["max_invariant_rel_drift"] = report.max_invariant_rel_drift;

    auto summary = ctx.open("summary.txt");
    summary << "section: observable " << cfg.section_observable << " = " << fmt(cfg.section_value)
            << ", chart (" << cfg.chart_u << ", " << cfg.chart_v << ")\n";
    summary << "  crossings: " << report.crossings.size() << "\n";
    summary << "  nearest-neighbor residual: " << fmt(report.nn_residual) << "\n";
    if (report.failed) {
        summary << "PARTIAL: " << report.failure_message << "\n";
        write_manifest(ctx, cfg, "partial", report.failure_message);
        return kExitRuntimeFailure;
    }
    write_manifest(ctx, cfg, "ok");
    log << "section: " << report.crossings.size() << " crossings\n";
    return kExitOk;
}

int run_equivariance(const ExperimentConfig& cfg, RunContext& ctx, std::ostream& log) {
    std::uint64_t rng = cfg.seed;
    const auto sys = cfg.system.realize(rng);
    const auto suite = standard_invariants(sys.m);
    const int d = sys.dim();

    const auto base = integrate(sys, cfg.integrator, cfg.horizon, suite, cfg.record_every);
    if (base.failed) {
        write_manifest(ctx, cfg, "partial", base.failure_message);
        return kExitRuntimeFailure;
    }

    auto out = ctx.open("equivariance.csv");
    out << "motion,max_pointwise_error\n";
    double worst = 0.0;
    for (int i = 0; i < cfg.motions; ++i) {
        std::uint64_t mrng = detail::subseed(cfg.seed, 500 + i);
        const auto U = detail::random_unitary_real(sys.m, mrng);
        std::vector<double> shift(d);
        for (auto& v : shift) v = detail::uniform(mrng, -1.0, 1.0);

        const auto transformed = apply_motion(sys, U, shift);
        const auto moved = integrate(transformed, cfg.integrator, cfg.horizon, suite,
                                     cfg.record_every);
        if (moved.failed) {
            write_manifest(ctx, cfg, "partial", moved.failure_message);
            return kExitRuntimeFailure;
        }

        double err = 0.0;
        std::vector<double> mapped(d);
        for (std::size_t s = 0; s < base.states.size(); ++s) {
            for (int j = 0; j < sys.N; ++j) {
                detail::matvec(U, std::span<const double>(base.states[s]).subspan(j * d, d),
                               mapped, d);
                for (int ii = 0; ii < d; ++ii)
                    err = std::max(err, std::fabs(mapped[ii] + shift[ii] -
                                                  moved.states[s][j * d + ii]));
            }
        }
        out << i << "," << fmt(err) << "\n";
        worst = std::max(worst, err);
    }

    ctx.extra["max_pointwise_error"] = worst;
    auto summary = ctx.open("summary.txt");
    summary << "equivariance: " << cfg.motions << " random unitary motions, horizon "
            << fmt(cfg.horizon) << "\n";
    summary << "  max pointwise commutation error: " << fmt(worst) << "\n";
    write_manifest(ctx, cfg, "ok");
    log << "equivariance: max error " << fmt(worst) << "\n";
    return kExitOk;
}

int run_coplanarity(const ExperimentConfig& cfg, RunContext& ctx, std::ostream& log) {
    auto out = ctx.open("coplanarity.jsonl");
    std::uint64_t state = cfg.seed;
    CoplanarityWitness best;
    for (int s = 0; s < cfg.samples; ++s) {
        const auto sys = detail::random_system(cfg.system.m, cfg.system.N, state);
        const double defect = coplanarity_defect(sys);
        json line = {{"kind", "coplanarity_sample"}, {"index", s}, {"defect", defect}};
        out << line.dump() << "\n";
        if (s == 0 || defect > best.defect) best = CoplanarityWitness{defect, sys};
    }

    json witness;
    witness["defect"] = best.defect;
    witness["strengths"] = best.system.strengths;
    witness["positions"] = best.system.positions;
    ctx.extra["witness"] = witness;

    auto summary = ctx.open("summary.txt");
    summary << "coplanarity_search: m=" << cfg.system.m << " N=" << cfg.system.N << " samples="
            << cfg.samples << "\n";
    summary << "  max defect: " << fmt(best.defect) << "\n";
    write_manifest(ctx, cfg, "ok");
    log << "coplanarity_search: max defect " << fmt(best.defect) << "\n";
    return kExitOk;
}

int run_field(const ExperimentConfig& cfg, RunContext& ctx, std::ostream& log) {
    auto grid = cfg.field.build_initial(cfg.seed);

    auto write_snapshot = [&](const VorticityGrid& g, double t, int index) {
        char name[64];
        const bool binary = cfg.output_format == "binary";
        std::snprintf(name, sizeof name, "field_%06d.%s", index, binary ? "grid" : "csv");
        ctx.outputs.push_back(name);
        if (binary)
            write_grid_binary((ctx.dir / name).string(), g, t);
        else
            write_grid_csv((ctx.dir / name).string(), g, t);
    };

    auto series = ctx.open("field_series.csv");
    series << "t,energy";
    for (int k = 1; k <= cfg.field.casimir_kmax; ++k) series << ",I" << k;
    series << ",cfl_warning\n";

    std::ofstream centroid;
    if (cfg.field.track_centroid) {
        centroid = ctx.open("centroid.csv");
        centroid << "t,cx,cy\n";
    }

    auto emit_series = [&](double t, const VorticityGrid& g) {
        series << fmt(t) << "," << fmt(dirichlet_energy(g));
        for (double v : casimirs(g, cfg.field.casimir_kmax)) series << "," << fmt(v);
        series << "," << (g.cfl_warning ? 1 : 0) << "\n";
        if (cfg.field.track_centroid) {
            double sum = 0.0, cx = 0.0, cy = 0.0;
            for (int ix = 0; ix < g.nx; ++ix)
                for (int iy = 0; iy < g.ny; ++iy) {
                    const double v = g.values[static_cast<std::size_t>(ix) * g.ny + iy];
                    if (v > 0.0) {
                        sum += v;
                        cx += v * (2.0 * std::numbers::pi * ix / g.nx);
                        cy += v * (2.0 * std::numbers::pi * iy / g.ny);
                    }
                }
            if (sum > 0.0) centroid << fmt(t) << "," << fmt(cx / sum) << "," << fmt(cy / sum) << "\n";
        }
    };

    emit_series(0.0, grid);
    write_snapshot(grid, 0.0, 0);

    const double e0 = dirichlet_energy(grid);
    const auto c0 = casimirs(grid, cfg.field.casimir_kmax);
    bool any_cfl = false;
    int snapshot_index = 1;
    for (long long k = 0; k < cfg.field.steps; ++k) {
        grid = step_vorticity(grid, cfg.field.dt);
        any_cfl = any_cfl || grid.cfl_warning;
        const double t = static_cast<double>(k + 1) * cfg.field.dt;
        if ((k + 1) % cfg.field.record_every == 0 || k + 1 == cfg.field.steps)
            emit_series(t, grid);
        if (cfg.field.snapshot_every > 0 && (k + 1) % cfg.field.snapshot_every == 0)
            write_snapshot(grid, t, snapshot_index++);
    }
    if (cfg.field.steps > 0)
        write_snapshot(grid, static_cast<double>(cfg.field.steps) * cfg.field.dt, snapshot_index);

    const double e1 = dirichlet_energy(grid);
    const auto c1 = casimirs(grid, cfg.field.casimir_kmax);
    ctx.extra["energy_rel_drift"] = e0 != 0.0 ? std::fabs(e1 - e0) / std::fabs(e0) : 0.0;
    if (cfg.field.casimir_kmax >= 2 && c0[1] != 0.0)
        ctx.extra["enstrophy_rel_drift"] = std::fabs(c1[1] - c0[1]) / std::fabs(c0[1]);
    ctx.extra["cfl_warning"] = any_cfl;

    auto summary = ctx.open("summary.txt");
    summary << "field: ic=" << cfg.field.ic << " " << cfg.field.nx << "x" << cfg.field.ny
            << " dt=" << fmt(cfg.field.dt) << " steps=" << cfg.field.steps << "\n";
    summary << "  energy drift: " << fmt(e0 != 0.0 ? std::fabs(e1 - e0) / std::fabs(e0) : 0.0)
            << (any_cfl ? "  [CFL WARNING]" : "") << "\n";
    write_manifest(ctx, cfg, "ok");
    log << "field: " << cfg.field.steps << " steps done\n";
    return kExitOk;
}

} // namespace

int run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
    RunContext ctx;
    ctx.dir = resolve_output_dir(cfg);
    fs::create_directories(ctx.dir);
    try {
        switch (cfg.kind) {
            case ExperimentKind::Simulate: return run_simulate(cfg, ctx, log);
            case ExperimentKind::Invariants: return run_invariants(cfg, ctx, log);
            case ExperimentKind::TwoVortexOracle: return run_two_vortex_oracle(cfg, ctx, log);
            case ExperimentKind::Lyapunov: return run_lyapunov(cfg, ctx, log);
            case ExperimentKind::Section: return run_section(cfg, ctx, log);
            case ExperimentKind::Equivariance: return run_equivariance(cfg, ctx, log);
            case ExperimentKind::CoplanaritySearch: return run_coplanarity(cfg, ctx, log);
            case ExperimentKind::Field: return run_field(cfg, ctx, log);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        write_manifest(ctx, cfg, "failed", e.what());
        log << "runtime failure: " << e.what() << "\n";
        return kExitRuntimeFailure;
    }
    return kExitRuntimeFailure;
}

int run_experiment_file(const std::string& path, std::ostream& log) {
    try {
        const auto cfg = parse_config_file(path);
        return run_experiment(cfg, log);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
}

int validate_config_file(const std::string& path, std::ostream& log) {
    try {
        const auto cfg = parse_config_file(path);
        log << cfg.resolved().dump(2) << "\n";
        return kExitOk;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
}

TrajectoryTable read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    TrajectoryTable table;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty trajectory file: " + path);
    std::size_t from = 0;
    while (from <= line.size()) {
        std::size_t to = line.find(',', from);
        if (to == std::string::npos) to = line.size();
        table.columns.push_back(line.substr(from, to - from));
        from = to + 1;
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        from = 0;
        while (from <= line.size()) {
            std::size_t to = line.find(',', from);
            if (to == std::string::npos) to = line.size();
            row.push_back(std::stod(line.substr(from, to - from)));
            from = to + 1;
        }
        if (row.size() != table.columns.size())
            throw std::runtime_error("ragged trajectory row in " + path);
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace vortexdyn
