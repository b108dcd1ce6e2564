// predrec: nonparametric empirical Bayes via the predictive recursion.
// Subcommands: fit, decide, simulate, baseball, tune.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "predrec/errors.hpp"

namespace {

using predrec::cli::CommonOptions;

void add_common(CLI::App* cmd, CommonOptions& common, bool with_config = true) {
    if (with_config) cmd->add_option("--config", common.config_path, "TOML or JSON config file");
    cmd->add_option("--out", common.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--seed", common.seed, "root seed (overrides config)");
    cmd->add_option("--threads", common.threads, "worker threads")
        ->envname("PREDREC_THREADS")
        ->capture_default_str();
}

void print_error(const char* kind, const std::string& message) {
    const nlohmann::json diag{{"error", kind}, {"message", message}};
    std::fprintf(stderr, "%s\n", diag.dump().c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"predictive-recursion empirical Bayes toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", predrec::cli::kToolVersion);

    predrec::cli::FitOptions fit;
    auto* fit_cmd = app.add_subcommand("fit", "estimate a mixing distribution from observations");
    add_common(fit_cmd, fit.common);
    fit_cmd->add_option("--data", fit.data_path, "observation CSV (id,y[,param])")->required();
    fit_cmd->add_option("--gamma", fit.gamma, "PR weight exponent (overrides config)");
    fit_cmd->add_option("--permutations", fit.permutations, "data permutations to average");

    predrec::cli::DecideOptions decide;
    auto* decide_cmd = app.add_subcommand("decide", "apply a fitted prior to new observations");
    add_common(decide_cmd, decide.common);
    decide_cmd->add_option("--fit-dir", decide.fit_dir, "directory written by fit")->required();
    decide_cmd->add_option("--data", decide.data_path, "observation CSV")->required();

    predrec::cli::SimulateOptions simulate;
    auto* simulate_cmd =
        app.add_subcommand("simulate", "trace excess risk and KL over growing samples");
    add_common(simulate_cmd, simulate.common);
    simulate_cmd->add_option("--scenario", simulate.scenario_path,
                             "scenario JSON/TOML (alias for --config)");

    predrec::cli::BaseballOptions baseball;
    auto* baseball_cmd = app.add_subcommand("baseball", "run the batting-average study");
    add_common(baseball_cmd, baseball.common);
    baseball_cmd->add_option("--data", baseball.data_path, "batting records CSV");
    baseball_cmd->add_option("--permutations", baseball.permutations, "PR permutations");
    baseball_cmd->add_option("--gamma-pitchers", baseball.gamma_pitchers, "pitcher gamma");
    baseball_cmd->add_option("--gamma-nonpitchers", baseball.gamma_nonpitchers,
                             "non-pitcher gamma");
    baseball_cmd->add_option("--min-train-ab", baseball.min_train_at_bats,
                             "first-half eligibility threshold");
    baseball_cmd->add_option("--min-test-ab", baseball.min_test_at_bats,
                             "second-half eligibility threshold");
    baseball_cmd->add_option("--f0-pitchers-a", baseball.f0_pitchers_a, "pitcher beta start a");
    baseball_cmd->add_option("--f0-pitchers-b", baseball.f0_pitchers_b, "pitcher beta start b");
    baseball_cmd->add_option("--f0-nonpitchers-a", baseball.f0_nonpitchers_a,
                             "non-pitcher beta start a");
    baseball_cmd->add_option("--f0-nonpitchers-b", baseball.f0_nonpitchers_b,
                             "non-pitcher beta start b");
    baseball_cmd->add_option("--grid-nodes", baseball.grid_nodes, "theta grid resolution");
    baseball_cmd->add_option("--write-synthetic", baseball.write_synthetic,
                             "write a synthetic batting CSV to this path and exit");
    baseball_cmd->add_option("--synthetic-pitchers", baseball.synthetic_pitchers,
                             "players in the synthetic pitcher group");
    baseball_cmd->add_option("--synthetic-hitters", baseball.synthetic_hitters,
                             "players in the synthetic non-pitcher group");

    predrec::cli::TuneOptions tune;
    auto* tune_cmd = app.add_subcommand("tune", "sweep gamma and report the prediction-error curve");
    add_common(tune_cmd, tune.baseball.common);
    tune_cmd->add_option("--data", tune.baseball.data_path, "batting records CSV")->required();
    tune_cmd->add_option("--permutations", tune.baseball.permutations, "PR permutations");
    tune_cmd->add_option("--gamma-min", tune.gamma_min, "grid start")->capture_default_str();
    tune_cmd->add_option("--gamma-max", tune.gamma_max, "grid end")->capture_default_str();
    tune_cmd->add_option("--gamma-step", tune.gamma_step, "grid step")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit_cmd->parsed()) {
            predrec::cli::run_fit(fit);
        } else if (decide_cmd->parsed()) {
            predrec::cli::run_decide(decide);
        } else if (simulate_cmd->parsed()) {
            predrec::cli::run_simulate(simulate);
        } else if (baseball_cmd->parsed()) {
            if (!baseball.write_synthetic && baseball.data_path.empty())
                throw predrec::ConfigError("baseball requires --data (or --write-synthetic)");
            predrec::cli::run_baseball(baseball);
        } else if (tune_cmd->parsed()) {
            predrec::cli::run_tune(tune);
        }
    } catch (const predrec::ConfigError& e) {
        print_error("config", e.what());
        return 2;
    } catch (const predrec::IllPosedTest& e) {
        print_error("ill_posed_test", e.what());
        return 2;
    } catch (const predrec::DegenerateObservation& e) {
        print_error("degenerate_observation", e.what());
        return 3;
    } catch (const std::exception& e) {
        print_error("runtime", e.what());
        return 1;
    }
    return 0;
}
