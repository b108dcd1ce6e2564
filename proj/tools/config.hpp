#pragma once

// Config loading for the CLI: a small TOML subset (tables, scalars, arrays
// of scalars, comments) parsed into JSON, plus schema-checked builders for
// kernels, grids, initial guesses, decision problems, and scenarios.  Error
// messages name the offending field.

#include <cstdint>
#include <string>

#include <json.hpp>

#include "predrec/decision.hpp"
#include "predrec/kernels.hpp"
#include "predrec/mixing.hpp"
#include "predrec/risk_sim.hpp"

namespace predrec::cli {

nlohmann::json toml_to_json(const std::string& text);

// Dispatches on extension: .toml through the subset parser, .json directly.
nlohmann::json load_config_file(const std::string& path);

// --- schema-checked accessors (throw ConfigError naming `path.key`) ----------

double require_double(const nlohmann::json& obj, const std::string& key, const std::string& path);
long require_long(const nlohmann::json& obj, const std::string& key, const std::string& path);
std::string require_string(const nlohmann::json& obj, const std::string& key,
                           const std::string& path);
double get_double(const nlohmann::json& obj, const std::string& key, double fallback);
long get_long(const nlohmann::json& obj, const std::string& key, long fallback);
std::string get_string(const nlohmann::json& obj, const std::string& key,
                       const std::string& fallback);

// --- builders -----------------------------------------------------------------

struct KernelConfig {
    KernelModel model;
    double default_obs_param = 1.0;  // binomial m / normal variance
    nlohmann::json raw;
};

// {"family": "normal"|"binomial"|"poisson", "params": {...}}; the theta
// support comes from the grid bounds.
KernelConfig kernel_from_json(const nlohmann::json& kernel, const Interval& theta_bounds);

GridSpec grid_from_json(const nlohmann::json& grid, const std::string& family);

// {"type": "uniform"|"beta"|"gaussian"|"point"|"spike_and_slab", ...}
MixingMeasure measure_from_json(const nlohmann::json& spec, const GridSpec& grid,
                                const std::string& path);

DecisionProblem problem_from_json(const nlohmann::json& problem);

SimScenario scenario_from_json(const nlohmann::json& scenario);

// Enforces the square-summability interval (1/2, 1] for fit/simulate runs.
void require_a3_gamma(double gamma);

}  // namespace predrec::cli
