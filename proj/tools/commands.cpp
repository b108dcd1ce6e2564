#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "config.hpp"
#include "predrec/baseball.hpp"
#include "predrec/csv.hpp"
#include "predrec/errors.hpp"
#include "predrec/io.hpp"

namespace predrec::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Collects output files for one run; everything is staged through a .tmp
// rename so a crashing run never leaves a partial file, and rollback()
// removes whatever was already placed.
class OutputWriter {
public:
    explicit OutputWriter(const std::string& out_dir) : dir_(out_dir) {
        fs::create_directories(dir_);
        start_ = std::chrono::steady_clock::now();
    }

    void write(const std::string& name, const std::string& bytes) {
        const fs::path target = dir_ / name;
        const fs::path staging = dir_ / (name + ".tmp");
        {
            std::ofstream out(staging, std::ios::binary | std::ios::trunc);
            if (!out) throw std::runtime_error("cannot write output file " + target.string());
            out << bytes;
        }
        fs::rename(staging, target);
        written_.push_back(name);
    }

    void add_input(const std::string& label, const std::string& bytes) {
        inputs_[label] = "fnv1a64:" + to_hex(fnv1a64(bytes));
    }

    void finish(const std::string& subcommand, std::uint64_t seed, const json& config_snapshot) {
        for (const std::string& name : written_) {
            std::error_code ec;
            if (!fs::exists(dir_ / name, ec) || fs::file_size(dir_ / name, ec) == 0)
                throw std::runtime_error("output validation failed for " + name);
        }
        json manifest;
        manifest["subcommand"] = subcommand;
        manifest["tool_version"] = kToolVersion;
        manifest["seed"] = seed;
        manifest["config"] = config_snapshot;
        manifest["inputs"] = inputs_;
        manifest["outputs"] = written_;
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
        manifest["duration_seconds"] = elapsed.count();
        write("manifest.json", manifest.dump(2) + "\n");
    }

    void rollback() noexcept {
        for (const std::string& name : written_) {
            std::error_code ec;
            fs::remove(dir_ / name, ec);
        }
    }

    const fs::path& dir() const noexcept { return dir_; }

private:
    fs::path dir_;
    std::vector<std::string> written_;
    json inputs_ = json::object();
    std::chrono::steady_clock::time_point start_;
};

json load_or_empty(const std::string& path) {
    if (path.empty()) return json::object();
    return load_config_file(path);
}

// Merge an optional CLI override into a (possibly absent) config field.
template <typename T>
void override_field(json& obj, const std::string& key, const std::optional<T>& value) {
    if (value) obj[key] = *value;
}

}  // namespace

void run_fit(const FitOptions& options) {
    json config = load_or_empty(options.common.config_path);
    if (!config.contains("kernel")) throw ConfigError("missing required field 'kernel'");
    override_field(config, "seed", options.common.seed);
    if (options.gamma) config["pr"]["gamma"] = *options.gamma;
    if (options.permutations) config["pr"]["permutations"] = *options.permutations;

    const std::string family = require_string(config.at("kernel"), "family", "kernel");
    const json params = config.at("kernel").contains("params") ? config.at("kernel").at("params")
                                                               : json::object();
    const double default_param = family == "normal"     ? get_double(params, "variance", 1.0)
                                 : family == "binomial" ? get_double(params, "m", 1.0)
                                                        : 0.0;

    const std::string data_bytes = read_file(options.data_path);
    const auto rows = observations_from_csv(data_bytes, default_param);
    if (rows.empty()) throw ConfigError("observation CSV has no data rows");
    std::vector<Observation> data;
    data.reserve(rows.size());
    for (const auto& row : rows) data.push_back(row.obs);

    // Normal-location fits without explicit bounds get data-driven ones.
    json grid_json = config.contains("grid") ? config.at("grid") : json::object();
    if (family == "normal" && (!grid_json.contains("lo") || !grid_json.contains("hi"))) {
        const Interval bounds = default_normal_bounds(data);
        grid_json["lo"] = bounds.lo;
        grid_json["hi"] = bounds.hi;
        config["grid"] = grid_json;  // the manifest snapshot shows the resolved bounds
    }
    const GridSpec grid = grid_from_json(grid_json, family);
    const KernelConfig kernel = kernel_from_json(config.at("kernel"), grid.bounds);

    const json init = config.contains("init") ? config.at("init") : json{{"type", "uniform"}};
    const MixingMeasure f0 = measure_from_json(init, grid, "init");

    const json pr = config.contains("pr") ? config.at("pr") : json::object();
    PrConfig pr_config;
    pr_config.gamma = get_double(pr, "gamma", 0.9);
    require_a3_gamma(pr_config.gamma);
    pr_config.n_permutations = static_cast<int>(get_long(pr, "permutations", 1));
    pr_config.seed = static_cast<std::uint64_t>(get_long(config, "seed", 0));
    pr_config.grid = grid;
    pr_config.validate();

    const PrFit result = fit(data, kernel.model, f0, pr_config, options.common.threads);

    OutputWriter out(options.common.out_dir);
    try {
        out.add_input(options.data_path, data_bytes);
        out.write("f_n.csv", measure_to_csv(result.f_n));
        out.write("f_n_atoms.json", atoms_to_json(result.f_n).dump(2) + "\n");
        // Per-observation predictive densities under the averaged estimate.
        std::ostringstream predictive;
        predictive << "id,y,param,predictive_density\n";
        for (const auto& row : rows)
            predictive << row.id << ',' << format_double(row.obs.y) << ','
                       << format_double(row.obs.param) << ','
                       << format_double(marginal_density(result.f_n, kernel.model, row.obs))
                       << '\n';
        out.write("predictive.csv", predictive.str());
        out.finish("fit", pr_config.seed, config);
    } catch (...) {
        out.rollback();
        throw;
    }
}

void run_decide(const DecideOptions& options) {
    json config = load_or_empty(options.common.config_path);
    if (!config.contains("problem")) throw ConfigError("missing required field 'problem'");

    // The fitted measure and its manifest come from a previous fit run.
    const fs::path fit_dir(options.fit_dir);
    const std::string fit_csv = read_file((fit_dir / "f_n.csv").string());
    const json fit_atoms = json::parse(read_file((fit_dir / "f_n_atoms.json").string()));
    const json fit_manifest = json::parse(read_file((fit_dir / "manifest.json").string()));
    const MixingMeasure f_n = measure_from_csv(fit_csv, fit_atoms);

    const json& fit_kernel = fit_manifest.at("config").at("kernel");
    if (config.contains("kernel") && config.at("kernel").at("family") != fit_kernel.at("family"))
        throw ConfigError("problem kernel family '" +
                          config.at("kernel").at("family").get<std::string>() +
                          "' does not match fit kernel family '" +
                          fit_kernel.at("family").get<std::string>() + "'");
    const json kernel_json = config.contains("kernel") ? config.at("kernel") : fit_kernel;

    // Theta support hull of the fitted measure, clamped into the binomial
    // safety band when needed.
    bool have_bounds = false;
    Interval bounds{0.0, 1.0};
    auto extend = [&](double x) {
        if (!have_bounds) {
            bounds = Interval{x, x};
            have_bounds = true;
        } else {
            bounds.lo = std::min(bounds.lo, x);
            bounds.hi = std::max(bounds.hi, x);
        }
    };
    if (!f_n.nodes().empty()) {
        extend(f_n.nodes().front());
        extend(f_n.nodes().back());
    }
    for (const Atom& atom : f_n.atoms()) extend(atom.location);
    if (!have_bounds) throw ConfigError("fitted measure has no support points");
    if (kernel_json.at("family") == "binomial") {
        bounds.lo = std::max(bounds.lo, kBinomialEps);
        bounds.hi = std::min(bounds.hi, 1.0 - kBinomialEps);
    }
    const KernelConfig kernel = kernel_from_json(kernel_json, bounds);

    const DecisionProblem problem = problem_from_json(config.at("problem"));
    const std::string data_bytes = read_file(options.data_path);
    const auto rows = observations_from_csv(data_bytes, kernel.default_obs_param);

    OutputWriter out(options.common.out_dir);
    try {
        out.add_input(options.data_path, data_bytes);
        out.add_input((fit_dir / "f_n.csv").string(), fit_csv);
        if (problem.kind == ProblemKind::Estimate) {
            std::vector<double> estimates;
            estimates.reserve(rows.size());
            for (const auto& row : rows)
                estimates.push_back(posterior_mean_rule(f_n, kernel.model, row.obs));
            out.write("decisions.csv", decisions_to_csv(rows, estimates));
        } else {
            std::vector<TestOutcome> outcomes;
            outcomes.reserve(rows.size());
            for (const auto& row : rows)
                outcomes.push_back(test_rule(f_n, kernel.model, problem, row.obs));
            out.write("decisions.csv", decisions_to_csv(rows, outcomes));
        }
        out.finish("decide", static_cast<std::uint64_t>(get_long(config, "seed", 0)), config);
    } catch (...) {
        out.rollback();
        throw;
    }
}

void run_simulate(const SimulateOptions& options) {
    const std::string scenario_path =
        options.scenario_path.empty() ? options.common.config_path : options.scenario_path;
    if (scenario_path.empty())
        throw ConfigError("simulate requires a scenario file (--config or --scenario)");
    json scenario_json = load_config_file(scenario_path);
    override_field(scenario_json, "seed", options.common.seed);
    const SimScenario scenario = scenario_from_json(scenario_json);

    const std::vector<TraceRow> rows = optimality_trace(scenario, options.common.threads);
    const TraceSummary summary = summarize_trace(scenario, rows);
    const AssumptionReport assumptions =
        check_assumptions(scenario.model, scenario.obs_param, scenario.pr_config);

    OutputWriter out(options.common.out_dir);
    try {
        out.add_input(scenario_path, read_file(scenario_path));
        out.write("trace.csv", trace_to_csv(rows));
        json summary_json = trace_summary_to_json(summary);
        summary_json["scenario"] = scenario.name;
        summary_json["bayes_risk"] =
            bayes_risk(scenario.true_f, scenario.model, scenario.problem, scenario.y_quad);
        summary_json["assumptions"] = assumption_report_to_json(assumptions);
        out.write("summary.json", summary_json.dump(2) + "\n");
        out.finish("simulate", scenario.seed, scenario_json);
    } catch (...) {
        out.rollback();
        throw;
    }
}

namespace {

StudyConfig study_config_from_json(json config, const BaseballOptions& options) {
    override_field(config, "seed", options.common.seed);
    override_field(config, "permutations", options.permutations);
    override_field(config, "gamma_pitchers", options.gamma_pitchers);
    override_field(config, "gamma_nonpitchers", options.gamma_nonpitchers);
    override_field(config, "min_train_at_bats", options.min_train_at_bats);
    override_field(config, "min_test_at_bats", options.min_test_at_bats);
    override_field(config, "f0_pitchers_a", options.f0_pitchers_a);
    override_field(config, "f0_pitchers_b", options.f0_pitchers_b);
    override_field(config, "f0_nonpitchers_a", options.f0_nonpitchers_a);
    override_field(config, "f0_nonpitchers_b", options.f0_nonpitchers_b);
    if (options.grid_nodes) config["grid"]["nodes"] = *options.grid_nodes;

    StudyConfig study;
    study.min_train_at_bats = get_long(config, "min_train_at_bats", study.min_train_at_bats);
    study.min_test_at_bats = get_long(config, "min_test_at_bats", study.min_test_at_bats);
    study.gamma_pitchers = get_double(config, "gamma_pitchers", study.gamma_pitchers);
    study.gamma_nonpitchers = get_double(config, "gamma_nonpitchers", study.gamma_nonpitchers);
    study.f0_pitchers = {get_double(config, "f0_pitchers_a", study.f0_pitchers.first),
                         get_double(config, "f0_pitchers_b", study.f0_pitchers.second)};
    study.f0_nonpitchers = {get_double(config, "f0_nonpitchers_a", study.f0_nonpitchers.first),
                            get_double(config, "f0_nonpitchers_b", study.f0_nonpitchers.second)};
    study.n_permutations = static_cast<int>(get_long(config, "permutations", 100));
    study.seed = static_cast<std::uint64_t>(get_long(config, "seed", 0));
    if (config.contains("grid")) study.grid = grid_from_json(config.at("grid"), "binomial");
    study.threads = options.common.threads;
    study.validate();
    return study;
}

std::string records_to_csv(const std::vector<BattingRecord>& records) {
    std::ostringstream out;
    out << "player_id,is_pitcher,half,at_bats,hits\n";
    for (const BattingRecord& r : records)
        out << r.player_id << ',' << (r.is_pitcher ? 1 : 0) << ','
            << (r.half == SeasonHalf::First ? "first" : "second") << ',' << r.at_bats << ','
            << r.hits << '\n';
    return out.str();
}

json study_snapshot(const StudyConfig& study) {
    return json{{"min_train_at_bats", study.min_train_at_bats},
                {"min_test_at_bats", study.min_test_at_bats},
                {"gamma_pitchers", study.gamma_pitchers},
                {"gamma_nonpitchers", study.gamma_nonpitchers},
                {"f0_pitchers", {study.f0_pitchers.first, study.f0_pitchers.second}},
                {"f0_nonpitchers", {study.f0_nonpitchers.first, study.f0_nonpitchers.second}},
                {"permutations", study.n_permutations},
                {"seed", study.seed},
                {"grid",
                 {{"nodes", study.grid.node_count},
                  {"lo", study.grid.bounds.lo},
                  {"hi", study.grid.bounds.hi}}}};
}

}  // namespace

void run_baseball(const BaseballOptions& options) {
    if (options.write_synthetic) {
        const std::uint64_t seed = options.common.seed.value_or(20050401);
        const auto records =
            synthesize_records(options.synthetic_pitchers, options.synthetic_hitters, seed);
        std::ofstream out(*options.write_synthetic, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write synthetic CSV to " + *options.write_synthetic);
        out << records_to_csv(records);
        return;
    }

    const StudyConfig study =
        study_config_from_json(load_or_empty(options.common.config_path), options);
    const std::string data_bytes = read_file(options.data_path);
    const IngestResult ingested = ingest_text(data_bytes);
    const StudyReport report = run_study(ingested.records, study);

    OutputWriter out(options.common.out_dir);
    try {
        out.add_input(options.data_path, data_bytes);
        json report_json = study_report_to_json(report);
        json issues = json::array();
        for (const IngestIssue& issue : ingested.issues)
            issues.push_back({{"line", issue.line}, {"message", issue.message}});
        report_json["ingest_issues"] = issues;
        out.write("study.json", report_json.dump(2) + "\n");
        auto export_prior = [&](const std::optional<GroupReport>& group) {
            if (!group) return;
            out.write("prior_" + group->group + ".csv", measure_to_csv(group->pr_prior));
            out.write("prior_" + group->group + "_atoms.json",
                      atoms_to_json(group->pr_prior).dump(2) + "\n");
        };
        export_prior(report.pitchers);
        export_prior(report.non_pitchers);
        out.finish("baseball", study.seed, study_snapshot(study));
    } catch (...) {
        out.rollback();
        throw;
    }
}

void run_tune(const TuneOptions& options) {
    const StudyConfig study =
        study_config_from_json(load_or_empty(options.baseball.common.config_path), options.baseball);
    if (!(options.gamma_step > 0.0)) throw ConfigError("gamma step must be positive");
    std::vector<double> gammas;
    for (double g = options.gamma_min; g <= options.gamma_max + 1e-12; g += options.gamma_step)
        gammas.push_back(std::min(g, 1.0));

    const std::string data_bytes = read_file(options.baseball.data_path);
    const IngestResult ingested = ingest_text(data_bytes);
    const TuneResult result = tune_gamma(ingested.records, gammas, study);

    OutputWriter out(options.baseball.common.out_dir);
    try {
        out.add_input(options.baseball.data_path, data_bytes);
        std::ostringstream curve;
        curve << "gamma,pitchers_pr_error,non_pitchers_pr_error\n";
        for (std::size_t i = 0; i < result.gammas.size(); ++i)
            curve << format_double(result.gammas[i]) << ','
                  << format_double(result.pitcher_errors[i]) << ','
                  << format_double(result.non_pitcher_errors[i]) << '\n';
        out.write("tune_curve.csv", curve.str());
        json tune_json;
        if (result.gamma_star_pitchers) tune_json["gamma_star_pitchers"] = *result.gamma_star_pitchers;
        if (result.gamma_star_non_pitchers)
            tune_json["gamma_star_non_pitchers"] = *result.gamma_star_non_pitchers;
        out.write("tune.json", tune_json.dump(2) + "\n");
        out.finish("tune", study.seed, study_snapshot(study));
    } catch (...) {
        out.rollback();
        throw;
    }
}

}  // namespace predrec::cli
