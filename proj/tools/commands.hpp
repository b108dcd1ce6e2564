#pragma once

// Subcommand bodies, callable in-process by the CLI and the test suites.
// Each writes its outputs atomically into an output directory together with
// a run manifest; on failure every file written by the run is removed.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace predrec::cli {

inline constexpr const char* kToolVersion = "0.1.0";

struct CommonOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;  // overrides config
    int threads = 1;
};

struct FitOptions {
    CommonOptions common;
    std::string data_path;
    std::optional<double> gamma;       // overrides config
    std::optional<long> permutations;  // overrides config
};

struct DecideOptions {
    CommonOptions common;
    std::string fit_dir;  // directory produced by fit
    std::string data_path;
};

struct SimulateOptions {
    CommonOptions common;
    std::string scenario_path;  // falls back to common.config_path
};

struct BaseballOptions {
    CommonOptions common;
    std::string data_path;
    std::optional<long> permutations;
    std::optional<double> gamma_pitchers;
    std::optional<double> gamma_nonpitchers;
    std::optional<long> min_train_at_bats;
    std::optional<long> min_test_at_bats;
    std::optional<double> f0_pitchers_a;
    std::optional<double> f0_pitchers_b;
    std::optional<double> f0_nonpitchers_a;
    std::optional<double> f0_nonpitchers_b;
    std::optional<long> grid_nodes;
    // Synthetic-data mode: write a generated CSV and exit.
    std::optional<std::string> write_synthetic;
    long synthetic_pitchers = 100;
    long synthetic_hitters = 500;
};

struct TuneOptions {
    BaseballOptions baseball;
    double gamma_min = 0.05;
    double gamma_max = 1.0;
    double gamma_step = 0.05;
};

void run_fit(const FitOptions& options);
void run_decide(const DecideOptions& options);
void run_simulate(const SimulateOptions& options);
void run_baseball(const BaseballOptions& options);
void run_tune(const TuneOptions& options);

}  // namespace predrec::cli
