#pragma once

// The batting-average prediction study: ingest half-season records, fit PR
// priors per group on the raw binomial counts, predict second-half
// performance on the arcsine scale, and score every method relative to the
// naive predictor.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "predrec/mixing.hpp"
#include "predrec/pr.hpp"

namespace predrec {

enum class SeasonHalf { First, Second };

struct BattingRecord {
    std::string player_id;
    bool is_pitcher = false;
    SeasonHalf half = SeasonHalf::First;
    long at_bats = 0;
    long hits = 0;
};

struct IngestIssue {
    long line = 0;  // 1-based line number in the source file
    std::string message;
};

struct IngestResult {
    std::vector<BattingRecord> records;
    std::vector<IngestIssue> issues;  // rejected rows; the pipeline continues
};

// CSV schema: player_id,is_pitcher,half,at_bats,hits.  Missing columns are a
// format error; malformed rows are collected per line and skipped.
IngestResult ingest(const std::string& path);
IngestResult ingest_text(const std::string& csv_text);

// Variance-stabilizing transform X = arcsin sqrt((hits + 1/4)/(at_bats + 1/2)),
// variance 1/(4 at_bats).  Requires at_bats >= 1.
struct TransformedValue {
    double x = 0.0;
    double variance = 0.0;
};

TransformedValue transform(const BattingRecord& record);

struct StudyConfig {
    long min_train_at_bats = 11;
    long min_test_at_bats = 11;
    // gamma may sit at the 0.5 boundary of the square-summable interval;
    // the study runs it anyway because that is what tuning selects for
    // pitchers.
    double gamma_pitchers = 0.5;
    double gamma_nonpitchers = 0.9;
    std::pair<double, double> f0_pitchers = {30.0, 120.0};
    std::pair<double, double> f0_nonpitchers = {30.0, 90.0};
    int n_permutations = 100;
    std::uint64_t seed = 0;
    GridSpec grid{2000, Interval{kBinomialEps, 1.0 - kBinomialEps}, GridRule::Midpoint};
    int threads = 1;

    void validate() const;  // throws ConfigError
};

struct MethodResult {
    std::string method;
    double relative_error = 0.0;
    bool computed = true;  // false rows carry published reference values
};

struct GroupReport {
    std::string group;
    long n_train = 0;
    long n_test = 0;
    double gamma = 0.0;
    std::vector<MethodResult> methods;
    MixingMeasure pr_prior;  // fitted prior, the figure export
};

struct StudyReport {
    std::optional<GroupReport> pitchers;
    std::optional<GroupReport> non_pitchers;
    std::vector<std::string> warnings;
};

// Published relative errors for the out-of-scope methods, reported as
// comparison constants and never recomputed.
std::vector<MethodResult> published_reference_rows(bool pitchers);

// Splits groups, filters eligibility, fits PR on first-half counts, predicts
// the second half on the arcsine scale, and scores every method normalized
// by the naive predictor.  Row order of `records` does not affect the
// result: players are processed in sorted-id order and permutation seeds are
// anchored to a hash of the canonical training data.
StudyReport run_study(const std::vector<BattingRecord>& records, const StudyConfig& config);

struct TuneResult {
    std::vector<double> gammas;
    std::vector<double> pitcher_errors;      // PR relative error per gamma
    std::vector<double> non_pitcher_errors;
    std::optional<double> gamma_star_pitchers;
    std::optional<double> gamma_star_non_pitchers;
};

// Reruns the study for every gamma in the grid; ties break toward the larger
// gamma.  The grid must lie in (0, 1].
TuneResult tune_gamma(const std::vector<BattingRecord>& records, std::vector<double> gamma_grid,
                      const StudyConfig& config);

// Deterministic synthetic dataset for tests and dry runs: latent abilities
// drawn from the per-group beta priors, binomial hit counts in both halves.
std::vector<BattingRecord> synthesize_records(long n_pitchers, long n_non_pitchers,
                                              std::uint64_t seed);

}  // namespace predrec
