#include "predrec/decision.hpp"

#include <cmath>
#include <string>

#include "predrec/errors.hpp"

namespace predrec {

DecisionProblem DecisionProblem::estimate() { return DecisionProblem{}; }

DecisionProblem DecisionProblem::test(double kappa1, double kappa2, ThetaSet theta0) {
    DecisionProblem p;
    p.kind = ProblemKind::Test;
    p.kappa1 = kappa1;
    p.kappa2 = kappa2;
    p.theta0 = std::move(theta0);
    p.validate();
    return p;
}

double DecisionProblem::threshold_r() const { return kappa2 / (kappa1 + kappa2); }

void DecisionProblem::validate() const {
    if (kind == ProblemKind::Estimate) return;
    if (!(kappa1 > 0.0) || !(kappa2 > 0.0))
        throw ConfigError("test losses kappa1, kappa2 must be positive");
    if (const auto* interval = std::get_if<Interval>(&theta0)) {
        if (!(interval->lo <= interval->hi))
            throw ConfigError("test null interval must satisfy lo <= hi");
    } else {
        if (std::get<std::vector<double>>(theta0).empty())
            throw ConfigError("test null atom set must be nonempty");
    }
}

bool in_theta0(const ThetaSet& theta0, double theta) {
    if (const auto* interval = std::get_if<Interval>(&theta0))
        return interval->contains(theta);
    for (double loc : std::get<std::vector<double>>(theta0))
        if (std::abs(theta - loc) <= 1e-12 * std::max(1.0, std::abs(loc))) return true;
    return false;
}

double null_prior_mass(const MixingMeasure& f, const ThetaSet& theta0) {
    double mass = 0.0;
    // Interval nulls collect grid nodes (boundary included) and any atoms
    // inside; atom-set nulls match atoms only.
    if (std::holds_alternative<Interval>(theta0)) {
        for (std::size_t j = 0; j < f.size(); ++j)
            if (in_theta0(theta0, f.nodes()[j])) mass += f.weights()[j] * f.density()[j];
    }
    for (const Atom& atom : f.atoms())
        if (in_theta0(theta0, atom.location)) mass += atom.mass;
    return mass;
}

double posterior_mean_rule(const MixingMeasure& f, const KernelModel& model,
                           const Observation& obs) {
    return posterior_expectation(f, model, obs, [](double theta) { return theta; });
}

TestOutcome test_rule(const MixingMeasure& f, const KernelModel& model,
                      const DecisionProblem& problem, const Observation& obs) {
    if (problem.kind != ProblemKind::Test)
        throw ConfigError("test_rule requires a Test decision problem");
    problem.validate();
    if (!(null_prior_mass(f, problem.theta0) > 0.0))
        throw IllPosedTest("null set has zero prior mass under the working mixing measure");

    const double p_f = marginal_density(f, model, obs);
    double null_joint = 0.0;
    if (std::holds_alternative<Interval>(problem.theta0)) {
        for (std::size_t j = 0; j < f.size(); ++j) {
            if (f.density()[j] == 0.0 || !in_theta0(problem.theta0, f.nodes()[j])) continue;
            null_joint += f.weights()[j] * f.density()[j] * model.density_unchecked(f.nodes()[j], obs);
        }
    }
    for (const Atom& atom : f.atoms()) {
        if (atom.mass == 0.0 || !in_theta0(problem.theta0, atom.location)) continue;
        null_joint += atom.mass * model.density_unchecked(atom.location, obs);
    }

    TestOutcome out;
    out.posterior_prob = null_joint / p_f;
    out.action = out.posterior_prob > problem.threshold_r() ? Action::AcceptNull : Action::RejectNull;
    return out;
}

}  // namespace predrec
