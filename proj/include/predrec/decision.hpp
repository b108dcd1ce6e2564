#pragma once

// Bayes and plug-in empirical Bayes decision rules: posterior-mean point
// estimation under squared-error loss, and the two-point-loss test that
// accepts the null when its posterior probability exceeds
// r = kappa2 / (kappa1 + kappa2).

#include <variant>
#include <vector>

#include "predrec/kernels.hpp"
#include "predrec/mixing.hpp"

namespace predrec {

// Null region: an interval of grid support or a finite set of atom locations.
using ThetaSet = std::variant<Interval, std::vector<double>>;

enum class ProblemKind { Estimate, Test };

enum class Action { AcceptNull, RejectNull };  // a0, a1

struct DecisionProblem {
    ProblemKind kind = ProblemKind::Estimate;
    // Test-only fields.
    double kappa1 = 1.0;  // cost of a Type I error
    double kappa2 = 1.0;  // cost of a Type II error
    ThetaSet theta0 = Interval{0.0, 0.0};

    // r = kappa2 / (kappa1 + kappa2), the relative cost of a Type II error.
    double threshold_r() const;

    void validate() const;  // throws ConfigError

    static DecisionProblem estimate();
    static DecisionProblem test(double kappa1, double kappa2, ThetaSet theta0);
};

struct TestOutcome {
    Action action = Action::RejectNull;
    double posterior_prob = 0.0;  // F(Theta0 | y); the local fdr for point nulls
};

// Posterior mean of theta given y: the Bayes rule under squared-error loss.
double posterior_mean_rule(const MixingMeasure& f, const KernelModel& model, const Observation& obs);

// Two-point-loss test: accept the null iff F(Theta0 | y) > r; ties go to
// rejection.  Throws IllPosedTest when Theta0 has zero prior mass under f.
TestOutcome test_rule(const MixingMeasure& f, const KernelModel& model,
                      const DecisionProblem& problem, const Observation& obs);

// Prior mass of the null set (used for well-posedness checks and risk sums).
double null_prior_mass(const MixingMeasure& f, const ThetaSet& theta0);

bool in_theta0(const ThetaSet& theta0, double theta);

}  // namespace predrec
