#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsmrc/simulation.hpp"
#include "tsmrc/synthesis.hpp"

namespace tsmrc {

// INI-style sections of key=value pairs; '#' and ';' start comments.
struct ConfigFile {
    std::map<std::string, std::map<std::string, std::string>> sections;

    static ConfigFile parse(std::istream& is);
    static ConfigFile parse_file(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    double number(const std::string& section, const std::string& key, double fallback) const;
    int integer(const std::string& section, const std::string& key, int fallback) const;
    std::string text(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
};

// Scenario request parsed from the config's [scenarios] section.
struct ScenarioRequest {
    Scenario scenario = Scenario::Constant;
    double wind_value = 16.0;   // turbulence average / gust base / constant speed
    std::string label;
};

// Everything the pipeline needs; all Table I/II values are defaults so an
// empty config reproduces the reference pipeline.
struct RunConfig {
    TurbineParams params;
    double grid_lo = 12.0, grid_hi = 24.0;
    int grid_n = 13;
    SynthesisSpec speed_spec;
    SynthesisSpec torque_spec;
    bool refine = true;
    SimConfig sim;
    std::vector<ScenarioRequest> scenarios;
    std::uint64_t seed = 1;

    static RunConfig defaults();
    static RunConfig from_config(const ConfigFile& cfg);
};

// Table II-style parameter file (bare key=value or a [turbine] section).
TurbineParams load_turbine_params(std::istream& is, TurbineParams base = {});
void apply_turbine_overrides(const ConfigFile& cfg, TurbineParams& params);

// Gains file: grid nodes, steady-state pitch schedule, reference time
// constants, and one row-major gain matrix per node.
struct GainsFile {
    GainSchedule schedule;
    std::vector<double> beta0;
    double tau_ref_speed = 10.0;
    double tau_ref_torque = 0.30;
};

void save_gains(const GainsFile& gains, std::ostream& os);
GainsFile load_gains(std::istream& is);
void save_gains_file(const GainsFile& gains, const std::string& path);
GainsFile load_gains_file(const std::string& path);

// Submodel family file: dimension header plus row-major matrices per node.
void save_submodels(const std::vector<TsSubmodel>& subs, std::ostream& os);
std::vector<TsSubmodel> load_submodels(std::istream& is);

// CSV with the exact column contract and one metadata comment line.
void write_trace_csv(const SimTrace& trace, std::ostream& os);
void write_trace_csv_file(const SimTrace& trace, const std::string& path);

// Locale-independent shortest-round-trip formatting used by all writers.
std::string format_double(double x);

}  // namespace tsmrc
