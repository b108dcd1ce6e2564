#pragma once

// Comparison estimators on the transformed normal-means scale: naive,
// group mean, positive-part James-Stein, and method-of-moments parametric
// empirical Bayes.

#include <vector>

namespace predrec {

struct NormalMeansData {
    std::vector<double> values;     // X_i
    std::vector<double> variances;  // v_i = 1/(4 n_i)

    void validate() const;  // throws std::invalid_argument
};

// Identity estimator; its prediction error is the reference everything else
// is normalized by.
std::vector<double> naive(const NormalMeansData& data);

// Every estimate equals the unweighted sample mean.  Requires nonempty data.
std::vector<double> group_mean(const NormalMeansData& data);

// Positive-part James-Stein toward the grand mean with the mean variance in
// the shrinkage factor:
//   est_i = Xbar + max(0, 1 - (n-3) vbar / S) (X_i - Xbar),  S = sum (X_i-Xbar)^2.
// Requires n >= 4.
std::vector<double> james_stein(const NormalMeansData& data);

// Gaussian prior fit by moments (mu = Xbar, tau2 = max(0, var(X) - vbar)),
// then per-observation posterior means.  Requires n >= 2.
std::vector<double> parametric_eb_mm(const NormalMeansData& data);

}  // namespace predrec
