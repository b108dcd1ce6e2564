#include "predrec/baseball.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "predrec/baselines.hpp"
#include "predrec/csv.hpp"
#include "predrec/decision.hpp"
#include "predrec/errors.hpp"
#include "predrec/risk_sim.hpp"
#include "predrec/rng.hpp"

namespace predrec {

namespace {

constexpr const char* kRequiredColumns[] = {"player_id", "is_pitcher", "half", "at_bats", "hits"};

std::optional<SeasonHalf> parse_half(const std::string& token) {
    if (token == "first") return SeasonHalf::First;
    if (token == "second") return SeasonHalf::Second;
    return std::nullopt;
}

}  // namespace

IngestResult ingest_text(const std::string& csv_text) {
    const CsvTable table = parse_csv(csv_text);
    for (const char* column : kRequiredColumns)
        if (table.column(column) < 0)
            throw ConfigError(std::string("batting CSV is missing required column '") + column + "'");
    const int id_col = table.column("player_id");
    const int pitcher_col = table.column("is_pitcher");
    const int half_col = table.column("half");
    const int ab_col = table.column("at_bats");
    const int hits_col = table.column("hits");
    const int max_col = std::max({id_col, pitcher_col, half_col, ab_col, hits_col});

    IngestResult result;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const long line = static_cast<long>(r) + 2;  // header is line 1
        const auto& row = table.rows[r];
        auto reject = [&](const std::string& why) { result.issues.push_back({line, why}); };
        if (static_cast<int>(row.size()) <= max_col) {
            reject("too few fields");
            continue;
        }
        BattingRecord record;
        record.player_id = row[static_cast<std::size_t>(id_col)];
        if (record.player_id.empty()) {
            reject("empty player_id");
            continue;
        }
        const std::string& pitcher_token = row[static_cast<std::size_t>(pitcher_col)];
        if (pitcher_token == "0")
            record.is_pitcher = false;
        else if (pitcher_token == "1")
            record.is_pitcher = true;
        else {
            reject("is_pitcher must be 0 or 1, got '" + pitcher_token + "'");
            continue;
        }
        const auto half = parse_half(row[static_cast<std::size_t>(half_col)]);
        if (!half) {
            reject("half must be 'first' or 'second', got '" +
                   row[static_cast<std::size_t>(half_col)] + "'");
            continue;
        }
        record.half = *half;
        try {
            record.at_bats = parse_long(row[static_cast<std::size_t>(ab_col)], "at_bats");
            record.hits = parse_long(row[static_cast<std::size_t>(hits_col)], "hits");
        } catch (const ConfigError& e) {
            reject(e.what());
            continue;
        }
        if (record.at_bats < 0) {
            reject("at_bats must be nonnegative");
            continue;
        }
        if (record.hits < 0 || record.hits > record.at_bats) {
            reject("hits must satisfy 0 <= hits <= at_bats (hits=" + std::to_string(record.hits) +
                   ", at_bats=" + std::to_string(record.at_bats) + ")");
            continue;
        }
        result.records.push_back(std::move(record));
    }
    return result;
}

IngestResult ingest(const std::string& path) { return ingest_text(read_file(path)); }

TransformedValue transform(const BattingRecord& record) {
    if (record.at_bats < 1)
        throw std::domain_error("variance-stabilizing transform requires at_bats >= 1");
    const double n = static_cast<double>(record.at_bats);
    const double y = static_cast<double>(record.hits);
    return TransformedValue{std::asin(std::sqrt((y + 0.25) / (n + 0.5))), 1.0 / (4.0 * n)};
}

void StudyConfig::validate() const {
    if (min_train_at_bats < 1 || min_test_at_bats < 1)
        throw ConfigError("eligibility thresholds must be >= 1 at-bat");
    for (double g : {gamma_pitchers, gamma_nonpitchers})
        if (!(g > 0.0) || g > 1.0)
            throw ConfigError("study gamma must lie in (0, 1]; got " + std::to_string(g));
    for (const auto& ab : {f0_pitchers, f0_nonpitchers})
        if (!(ab.first > 0.0) || !(ab.second > 0.0))
            throw ConfigError("beta initial-guess parameters must be positive");
    if (n_permutations < 1) throw ConfigError("n_permutations must be >= 1");
    grid.validate();
    if (grid.bounds.lo < kBinomialEps || grid.bounds.hi > 1.0 - kBinomialEps)
        throw ConfigError("study grid must lie within the binomial theta support");
}

std::vector<MethodResult> published_reference_rows(bool pitchers) {
    if (pitchers)
        return {{"parametric_eb_ml", 0.117, false},
                {"nonparametric_eb", 0.212, false},
                {"hierarchical_bayes", 0.128, false},
                {"mixfdr_eb", 0.156, false}};
    return {{"parametric_eb_ml", 0.398, false},
            {"nonparametric_eb", 0.372, false},
            {"hierarchical_bayes", 0.391, false},
            {"mixfdr_eb", 0.314, false}};
}

namespace {

struct PlayerPair {
    std::string id;
    BattingRecord first;
    std::optional<BattingRecord> second;
};

// Collects one training record (and optional test record) per player id, in
// sorted-id order so the result is independent of input row order.
std::vector<PlayerPair> pair_players(const std::vector<BattingRecord>& records, bool pitchers,
                                     std::vector<std::string>& warnings) {
    std::map<std::string, PlayerPair> by_id;
    for (const BattingRecord& record : records) {
        if (record.is_pitcher != pitchers) continue;
        auto [it, inserted] = by_id.try_emplace(record.player_id);
        PlayerPair& pair = it->second;
        if (inserted) pair.id = record.player_id;
        if (record.half == SeasonHalf::First) {
            if (inserted || pair.first.player_id.empty()) {
                pair.first = record;
            } else {
                warnings.push_back("duplicate first-half record for player " + record.player_id +
                                   "; keeping the first one seen");
            }
        } else {
            if (!pair.second) {
                pair.second = record;
            } else {
                warnings.push_back("duplicate second-half record for player " + record.player_id +
                                   "; keeping the first one seen");
            }
        }
    }
    std::vector<PlayerPair> out;
    out.reserve(by_id.size());
    for (auto& [id, pair] : by_id) {
        if (pair.first.player_id.empty()) continue;  // no first-half data: nothing to train on
        out.push_back(std::move(pair));
    }
    return out;
}

std::uint64_t training_data_hash(const std::vector<PlayerPair>& players) {
    std::ostringstream canon;
    for (const PlayerPair& p : players)
        canon << p.id << ',' << p.first.at_bats << ',' << p.first.hits << ';';
    return fnv1a64(canon.str());
}

// Brown-style total squared prediction error with the per-player noise
// correction subtracted.
double prediction_error(const std::vector<double>& predictions,
                        const std::vector<double>& test_x, const std::vector<double>& test_var) {
    double total = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double diff = test_x[i] - predictions[i];
        total += diff * diff - test_var[i];
    }
    return total;
}

std::optional<GroupReport> run_group(const std::vector<BattingRecord>& records, bool pitchers,
                                     const StudyConfig& config,
                                     std::vector<std::string>& warnings) {
    const std::string group_name = pitchers ? "pitchers" : "non_pitchers";
    std::vector<PlayerPair> players = pair_players(records, pitchers, warnings);

    // Eligibility: train on everyone with enough first-half at-bats; score
    // only those who also have enough second-half at-bats.
    std::vector<PlayerPair> train;
    for (PlayerPair& p : players)
        if (p.first.at_bats >= config.min_train_at_bats) train.push_back(std::move(p));
    if (train.empty()) {
        warnings.push_back("group " + group_name + " has no eligible training players; skipped");
        return std::nullopt;
    }

    std::vector<std::size_t> test_index;
    for (std::size_t i = 0; i < train.size(); ++i)
        if (train[i].second && train[i].second->at_bats >= config.min_test_at_bats)
            test_index.push_back(i);
    if (test_index.empty()) {
        warnings.push_back("group " + group_name + " has no eligible test players; skipped");
        return std::nullopt;
    }

    // PR fit on the raw binomial counts.
    std::vector<Observation> observations;
    observations.reserve(train.size());
    for (const PlayerPair& p : train)
        observations.push_back(Observation{static_cast<double>(p.first.hits),
                                           static_cast<double>(p.first.at_bats)});
    const KernelModel model = KernelModel::binomial(config.grid.bounds);
    const auto [f0_a, f0_b] = pitchers ? config.f0_pitchers : config.f0_nonpitchers;
    const MixingMeasure f0 = init_beta(config.grid, f0_a, f0_b);
    PrConfig pr_config;
    pr_config.gamma = pitchers ? config.gamma_pitchers : config.gamma_nonpitchers;
    pr_config.n_permutations = config.n_permutations;
    pr_config.grid = config.grid;
    pr_config.seed = derive_seed(config.seed, training_data_hash(train));
    const PrFit pr_fit = fit(observations, model, f0, pr_config, config.threads);

    // Transformed training data for the normal-means baselines.
    NormalMeansData train_data;
    for (const PlayerPair& p : train) {
        const TransformedValue t = transform(p.first);
        train_data.values.push_back(t.x);
        train_data.variances.push_back(t.variance);
    }

    std::vector<double> test_x;
    std::vector<double> test_var;
    for (std::size_t i : test_index) {
        const TransformedValue t = transform(*train[i].second);
        test_x.push_back(t.x);
        test_var.push_back(t.variance);
    }

    auto restrict_to_test = [&](const std::vector<double>& all) {
        std::vector<double> out;
        out.reserve(test_index.size());
        for (std::size_t i : test_index) out.push_back(all[i]);
        return out;
    };

    // PR predictions: posterior mean of arcsin(sqrt(theta)) given the
    // first-half counts, under the fitted prior.
    std::vector<double> pr_all(train.size());
    for (std::size_t i = 0; i < train.size(); ++i)
        pr_all[i] = posterior_expectation(pr_fit.f_n, model, observations[i],
                                          [](double theta) { return std::asin(std::sqrt(theta)); });

    const std::vector<std::pair<std::string, std::vector<double>>> method_predictions = {
        {"naive", naive(train_data)},
        {"group_mean", group_mean(train_data)},
        {"parametric_eb_mm", parametric_eb_mm(train_data)},
        {"james_stein", james_stein(train_data)},
        {"pr_eb", pr_all},
    };

    const double naive_error =
        prediction_error(restrict_to_test(method_predictions[0].second), test_x, test_var);
    if (naive_error == 0.0)
        throw std::runtime_error("naive prediction error is zero; relative errors undefined");

    GroupReport report;
    report.group = group_name;
    report.n_train = static_cast<long>(train.size());
    report.n_test = static_cast<long>(test_index.size());
    report.gamma = pr_config.gamma;
    for (const auto& [name, all_predictions] : method_predictions) {
        const double error = prediction_error(restrict_to_test(all_predictions), test_x, test_var);
        report.methods.push_back({name, error / naive_error, true});
    }
    for (MethodResult row : published_reference_rows(pitchers)) report.methods.push_back(row);
    report.pr_prior = pr_fit.f_n;
    return report;
}

}  // namespace

StudyReport run_study(const std::vector<BattingRecord>& records, const StudyConfig& config) {
    config.validate();
    StudyReport report;
    report.pitchers = run_group(records, true, config, report.warnings);
    report.non_pitchers = run_group(records, false, config, report.warnings);
    return report;
}

TuneResult tune_gamma(const std::vector<BattingRecord>& records, std::vector<double> gamma_grid,
                      const StudyConfig& config) {
    if (gamma_grid.empty()) throw ConfigError("gamma grid must be nonempty");
    for (double g : gamma_grid)
        if (!(g > 0.0) || g > 1.0) throw ConfigError("gamma grid values must lie in (0, 1]");

    TuneResult result;
    result.gammas = std::move(gamma_grid);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (double gamma : result.gammas) {
        StudyConfig candidate = config;
        candidate.gamma_pitchers = gamma;
        candidate.gamma_nonpitchers = gamma;
        const StudyReport report = run_study(records, candidate);
        auto pr_error = [](const std::optional<GroupReport>& group) {
            if (!group) return std::numeric_limits<double>::quiet_NaN();
            for (const MethodResult& m : group->methods)
                if (m.method == "pr_eb") return m.relative_error;
            return std::numeric_limits<double>::quiet_NaN();
        };
        result.pitcher_errors.push_back(pr_error(report.pitchers));
        result.non_pitcher_errors.push_back(pr_error(report.non_pitchers));
    }

    auto argmin_late_ties = [&](const std::vector<double>& errors) -> std::optional<double> {
        std::optional<double> best_gamma;
        double best = nan;
        for (std::size_t i = 0; i < errors.size(); ++i) {
            if (std::isnan(errors[i])) continue;
            if (!best_gamma || errors[i] <= best) {  // <= breaks ties toward larger gamma
                best = errors[i];
                best_gamma = result.gammas[i];
            }
        }
        return best_gamma;
    };
    result.gamma_star_pitchers = argmin_late_ties(result.pitcher_errors);
    result.gamma_star_non_pitchers = argmin_late_ties(result.non_pitcher_errors);
    return result;
}

std::vector<BattingRecord> synthesize_records(long n_pitchers, long n_non_pitchers,
                                              std::uint64_t seed) {
    const GridSpec grid{2000, Interval{kBinomialEps, 1.0 - kBinomialEps}, GridRule::Midpoint};
    const ThetaSampler pitcher_theta(init_beta(grid, 30.0, 120.0));
    const ThetaSampler hitter_theta(init_beta(grid, 30.0, 90.0));

    std::vector<BattingRecord> records;
    Rng rng(derive_seed(seed, 0xBA5EBA11ull));
    auto make_player = [&](long index, bool pitcher) {
        char id[32];
        std::snprintf(id, sizeof id, "%s%05ld", pitcher ? "p" : "h", index);
        const double theta = pitcher ? pitcher_theta.draw(rng) : hitter_theta.draw(rng);
        const long ab_first = pitcher ? 15 + static_cast<long>(rng.below(76))
                                      : 80 + static_cast<long>(rng.below(421));
        const long ab_second = pitcher ? 5 + static_cast<long>(rng.below(71))
                                       : 60 + static_cast<long>(rng.below(401));
        records.push_back({id, pitcher, SeasonHalf::First, ab_first, rng.binomial(ab_first, theta)});
        records.push_back(
            {id, pitcher, SeasonHalf::Second, ab_second, rng.binomial(ab_second, theta)});
    };
    for (long i = 0; i < n_pitchers; ++i) make_player(i, true);
    for (long i = 0; i < n_non_pitchers; ++i) make_player(i, false);
    return records;
}

}  // namespace predrec
