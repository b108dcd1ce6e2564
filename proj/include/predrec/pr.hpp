#pragma once

// The predictive recursion: one pass over the data, each observation pulling
// the mixing density toward its own posterior with a decaying weight,
// averaged over random data permutations.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "predrec/kernels.hpp"
#include "predrec/mixing.hpp"

namespace predrec {

struct PrConfig {
    // Weight exponent for w_i = (i+1)^(-gamma).  Square-summability needs
    // gamma in (1/2, 1]; validate() accepts the full mechanical range (0, 1]
    // because the batting study deliberately runs at the 0.5 boundary, and
    // a3_satisfied() reports whether the safe interval holds.
    double gamma = 0.9;
    int n_permutations = 1;
    std::uint64_t seed = 0;
    GridSpec grid;
    std::optional<std::vector<double>> weight_override;
    bool retain_permutation_fits = false;

    void validate() const;             // throws ConfigError
    bool a3_satisfied() const noexcept { return gamma > 0.5 && gamma <= 1.0; }
};

// Step weight w_i for i >= 1; (i+1)^(-gamma) unless an override is set.
double weight(const PrConfig& config, long i);

// One recursion update:
//   f_new = (1 - w) f + w f p_theta(y) / p_F(y),
// same formula for atom masses.  w in [0, 1]; the endpoints reduce to the
// identity and to Bayes' formula and are allowed for tests.
MixingMeasure pr_step(const MixingMeasure& f, const KernelModel& model, const Observation& obs,
                      double w);

struct PrFit {
    MixingMeasure f_n;                           // permutation-averaged estimate
    std::vector<MixingMeasure> per_permutation;  // retained only on request
    PrConfig config;
    KernelModel model;
    std::size_t n_observations = 0;
    // log p_{i-1}(Y_i) per step, one trace per permutation; their sums are
    // the PR marginal log-likelihoods.
    std::vector<std::vector<double>> log_marginals;
};

// Runs the recursion once per permutation and averages the final measures.
// Permutation 0 processes the data in the order given; permutations >= 1 are
// seeded Fisher-Yates shuffles with per-index derived seeds, so the result
// is independent of thread count and reproducible from (data, seed).
PrFit fit(std::span<const Observation> data, const KernelModel& model, const MixingMeasure& f0,
          const PrConfig& config, int threads = 1);

}  // namespace predrec
