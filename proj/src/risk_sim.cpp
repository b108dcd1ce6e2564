#include "predrec/risk_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "predrec/errors.hpp"

namespace predrec {

YQuadrature make_y_quadrature(const KernelModel& model, double obs_param, int points,
                              double span_sd) {
    YQuadrature quad;
    quad.obs_param = obs_param;
    if (model.discrete()) {
        quad.y = model.discrete_support(obs_param);
        quad.w.assign(quad.y.size(), 1.0);
        quad.discrete = true;
        return quad;
    }
    if (points < 3) throw ConfigError("normal y-quadrature needs at least 3 points");
    const double sigma = std::sqrt(obs_param);
    const double lo = model.theta_support().lo - span_sd * sigma;
    const double hi = model.theta_support().hi + span_sd * sigma;
    const double h = (hi - lo) / (points - 1);
    quad.y.resize(static_cast<std::size_t>(points));
    quad.w.assign(static_cast<std::size_t>(points), h);
    for (int i = 0; i < points; ++i) quad.y[static_cast<std::size_t>(i)] = lo + i * h;
    quad.w.front() = 0.5 * h;
    quad.w.back() = 0.5 * h;
    return quad;
}

void SimScenario::validate() const {
    if (sample_sizes.empty()) throw ConfigError("scenario needs at least one sample size");
    for (std::size_t i = 1; i < sample_sizes.size(); ++i)
        if (sample_sizes[i] <= sample_sizes[i - 1])
            throw ConfigError("scenario sample sizes must be strictly increasing");
    for (long n : sample_sizes)
        if (n < 1) throw ConfigError("scenario sample sizes must be positive");
    if (replications < 1) throw ConfigError("scenario replications must be >= 1");
    if (y_quad.y.empty()) throw ConfigError("scenario y-quadrature is empty");
    pr_config.validate();
    problem.validate();
    true_f.validate();
    f0.validate();
}

MarginalEvaluator::MarginalEvaluator(const KernelModel& model, const YQuadrature& quad,
                                     const MixingMeasure& support_layout)
    : layout_(support_layout), quad_(quad) {
    const std::size_t n_nodes = layout_.size();
    const std::size_t n_atoms = layout_.atoms().size();
    n_support_ = n_nodes + n_atoms;
    kernel_.resize(quad_.y.size() * n_support_);
    row_max_.assign(quad_.y.size(), 0.0);
    for (std::size_t i = 0; i < quad_.y.size(); ++i) {
        const Observation obs{quad_.y[i], quad_.obs_param};
        model.validate_observation(obs);
        double row_max = 0.0;
        double* row = kernel_.data() + i * n_support_;
        for (std::size_t j = 0; j < n_nodes; ++j) {
            row[j] = model.density_unchecked(layout_.nodes()[j], obs);
            row_max = std::max(row_max, row[j]);
        }
        for (std::size_t k = 0; k < n_atoms; ++k) {
            row[n_nodes + k] = model.density_unchecked(layout_.atoms()[k].location, obs);
            row_max = std::max(row_max, row[n_nodes + k]);
        }
        row_max_[i] = row_max;
    }
}

std::vector<double> MarginalEvaluator::marginal(const MixingMeasure& f) const {
    if (!f.same_support(layout_))
        throw std::invalid_argument("measure does not match evaluator support layout");
    std::vector<double> out(quad_.y.size());
    const std::size_t n_nodes = f.size();
    for (std::size_t i = 0; i < quad_.y.size(); ++i) {
        const double* row = kernel_.data() + i * n_support_;
        double value = 0.0;
        for (std::size_t j = 0; j < n_nodes; ++j) value += f.weights()[j] * f.density()[j] * row[j];
        for (std::size_t k = 0; k < f.atoms().size(); ++k)
            value += f.atoms()[k].mass * row[n_nodes + k];
        out[i] = value;
    }
    return out;
}

double MarginalEvaluator::posterior_mean(const MixingMeasure& f, std::size_t y_index) const {
    const double* row = kernel_.data() + y_index * n_support_;
    const double scale = row_max_[y_index];
    if (scale <= 0.0) return f.mean();  // no information at this y
    double numer = 0.0;
    double denom = 0.0;
    const std::size_t n_nodes = f.size();
    for (std::size_t j = 0; j < n_nodes; ++j) {
        const double term = f.weights()[j] * f.density()[j] * (row[j] / scale);
        numer += term * f.nodes()[j];
        denom += term;
    }
    for (std::size_t k = 0; k < f.atoms().size(); ++k) {
        const double term = f.atoms()[k].mass * (row[n_nodes + k] / scale);
        numer += term * f.atoms()[k].location;
        denom += term;
    }
    if (denom <= 0.0) return f.mean();
    return numer / denom;
}

double MarginalEvaluator::posterior_null_prob(const MixingMeasure& f, const ThetaSet& theta0,
                                              std::size_t y_index) const {
    const double* row = kernel_.data() + y_index * n_support_;
    const double scale = row_max_[y_index];
    if (scale <= 0.0) return null_prior_mass(f, theta0);
    double null_part = 0.0;
    double total = 0.0;
    const std::size_t n_nodes = f.size();
    const bool interval_null = std::holds_alternative<Interval>(theta0);
    for (std::size_t j = 0; j < n_nodes; ++j) {
        const double term = f.weights()[j] * f.density()[j] * (row[j] / scale);
        total += term;
        if (interval_null && in_theta0(theta0, f.nodes()[j])) null_part += term;
    }
    for (std::size_t k = 0; k < f.atoms().size(); ++k) {
        const double term = f.atoms()[k].mass * (row[n_nodes + k] / scale);
        total += term;
        if (in_theta0(theta0, f.atoms()[k].location)) null_part += term;
    }
    if (total <= 0.0) return null_prior_mass(f, theta0);
    return null_part / total;
}

double MarginalEvaluator::joint_expectation(const MixingMeasure& f, std::size_t y_index,
                                            const std::function<double(double)>& loss) const {
    const double* row = kernel_.data() + y_index * n_support_;
    double value = 0.0;
    const std::size_t n_nodes = f.size();
    for (std::size_t j = 0; j < n_nodes; ++j) {
        if (f.density()[j] == 0.0) continue;
        value += f.weights()[j] * f.density()[j] * row[j] * loss(f.nodes()[j]);
    }
    for (std::size_t k = 0; k < f.atoms().size(); ++k) {
        if (f.atoms()[k].mass == 0.0) continue;
        value += f.atoms()[k].mass * row[n_nodes + k] * loss(f.atoms()[k].location);
    }
    return value;
}

namespace {

double rule_risk_impl(const MixingMeasure& rule_f, const MarginalEvaluator& rule_eval,
                      const MixingMeasure& true_f, const MarginalEvaluator& true_eval,
                      const DecisionProblem& problem, const YQuadrature& quad) {
    double risk = 0.0;
    if (problem.kind == ProblemKind::Estimate) {
        for (std::size_t i = 0; i < quad.y.size(); ++i) {
            const double delta = rule_eval.posterior_mean(rule_f, i);
            const double inner = true_eval.joint_expectation(
                true_f, i, [delta](double theta) { return (delta - theta) * (delta - theta); });
            risk += quad.w[i] * inner;
        }
        return risk;
    }
    // Two-point loss: accepting the null costs kappa2 on the alternative,
    // rejecting costs kappa1 on the null.
    if (!(null_prior_mass(rule_f, problem.theta0) > 0.0))
        throw IllPosedTest("plug-in rule has zero prior mass on the null set");
    const double r = problem.threshold_r();
    for (std::size_t i = 0; i < quad.y.size(); ++i) {
        const double prob = rule_eval.posterior_null_prob(rule_f, problem.theta0, i);
        const bool accept_null = prob > r;
        const double inner =
            accept_null
                ? problem.kappa2 * true_eval.joint_expectation(
                                       true_f, i,
                                       [&](double theta) {
                                           return in_theta0(problem.theta0, theta) ? 0.0 : 1.0;
                                       })
                : problem.kappa1 * true_eval.joint_expectation(true_f, i, [&](double theta) {
                      return in_theta0(problem.theta0, theta) ? 1.0 : 0.0;
                  });
        risk += quad.w[i] * inner;
    }
    return risk;
}

}  // namespace

double rule_risk(const MixingMeasure& rule_f, const MixingMeasure& true_f,
                 const KernelModel& model, const DecisionProblem& problem,
                 const YQuadrature& quad) {
    const MarginalEvaluator rule_eval(model, quad, rule_f);
    if (rule_f.same_support(true_f))
        return rule_risk_impl(rule_f, rule_eval, true_f, rule_eval, problem, quad);
    const MarginalEvaluator true_eval(model, quad, true_f);
    return rule_risk_impl(rule_f, rule_eval, true_f, true_eval, problem, quad);
}

double bayes_risk(const MixingMeasure& f, const KernelModel& model, const DecisionProblem& problem,
                  const YQuadrature& quad) {
    const MarginalEvaluator eval(model, quad, f);
    return rule_risk_impl(f, eval, f, eval, problem, quad);
}

double eb_risk(const MixingMeasure& fitted, const SimScenario& scenario) {
    return rule_risk(fitted, scenario.true_f, scenario.model, scenario.problem, scenario.y_quad);
}

double eb_risk(const PrFit& fit, const SimScenario& scenario) {
    if (fit.model.family() != scenario.model.family())
        throw ConfigError("fit kernel family does not match the scenario kernel");
    return eb_risk(fit.f_n, scenario);
}

double kl_divergence(std::span<const double> p, std::span<const double> q,
                     const YQuadrature& quad) {
    if (p.size() != q.size() || p.size() != quad.y.size())
        throw std::invalid_argument("kl_divergence inputs must match the quadrature length");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0)
            throw std::domain_error("kl_divergence: second marginal vanishes at y=" +
                                    std::to_string(quad.y[i]) + " where the first does not");
        kl += quad.w[i] * p[i] * std::log(p[i] / q[i]);
    }
    return kl;
}

double kl_divergence(const MixingMeasure& f, const MixingMeasure& g, const KernelModel& model,
                     const YQuadrature& quad) {
    const MarginalEvaluator f_eval(model, quad, f);
    const std::vector<double> p = f_eval.marginal(f);
    if (f.same_support(g)) return kl_divergence(p, f_eval.marginal(g), quad);
    return kl_divergence(p, MarginalEvaluator(model, quad, g).marginal(g), quad);
}

ThetaSampler::ThetaSampler(const MixingMeasure& f) {
    double cum = 0.0;
    for (const Atom& atom : f.atoms()) {
        if (atom.mass <= 0.0) continue;
        cum += atom.mass;
        segments_.push_back({cum, atom.location, 0.0});
    }
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double mass = f.weights()[j] * f.density()[j];
        if (mass <= 0.0) continue;
        cum += mass;
        segments_.push_back({cum, f.nodes()[j], 0.5 * f.weights()[j]});
    }
    if (segments_.empty()) throw std::invalid_argument("cannot sample from a zero measure");
    total_ = cum;
}

double ThetaSampler::draw(Rng& rng) const {
    const double u = rng.uniform() * total_;
    std::size_t lo = 0;
    std::size_t hi = segments_.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (segments_[mid].cumulative < u)
            lo = mid + 1;
        else
            hi = mid;
    }
    const Segment& seg = segments_[lo];
    if (seg.half_width == 0.0) return seg.location;
    return seg.location + seg.half_width * (2.0 * rng.uniform() - 1.0);
}

std::vector<Observation> simulate_observations(const MixingMeasure& true_f,
                                               const KernelModel& model, double obs_param, long n,
                                               Rng& rng) {
    const ThetaSampler sampler(true_f);
    std::vector<Observation> data;
    data.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        const double theta = sampler.draw(rng);
        double y = 0.0;
        switch (model.family()) {
            case KernelFamily::NormalLocation:
                y = rng.normal(theta, std::sqrt(obs_param));
                break;
            case KernelFamily::Binomial:
                y = static_cast<double>(rng.binomial(static_cast<long>(std::llround(obs_param)), theta));
                break;
            case KernelFamily::Poisson:
                y = static_cast<double>(rng.poisson(theta));
                break;
        }
        data.push_back(Observation{y, obs_param});
    }
    return data;
}

std::vector<TraceRow> optimality_trace(const SimScenario& scenario, int threads) {
    scenario.validate();
    if (threads < 1) threads = 1;

    const MarginalEvaluator true_eval(scenario.model, scenario.y_quad, scenario.true_f);
    const MarginalEvaluator rule_eval(scenario.model, scenario.y_quad, scenario.f0);
    const double rho = rule_risk_impl(scenario.true_f, true_eval, scenario.true_f, true_eval,
                                      scenario.problem, scenario.y_quad);
    const std::vector<double> p_true = true_eval.marginal(scenario.true_f);

    struct Task {
        std::size_t n_index;
        int rep;
    };
    std::vector<Task> tasks;
    for (std::size_t ni = 0; ni < scenario.sample_sizes.size(); ++ni)
        for (int rep = 0; rep < scenario.replications; ++rep) tasks.push_back({ni, rep});

    std::vector<TraceRow> rows(tasks.size());

    auto run_task = [&](std::size_t t) {
        const Task& task = tasks[t];
        const long n = scenario.sample_sizes[task.n_index];
        Rng data_rng(derive_seed(scenario.seed, 1 + task.n_index, static_cast<std::uint64_t>(task.rep)));
        const auto data = simulate_observations(scenario.true_f, scenario.model,
                                                scenario.obs_param, n, data_rng);
        PrConfig config = scenario.pr_config;
        config.seed = derive_seed(scenario.seed, 1000 + task.n_index,
                                  static_cast<std::uint64_t>(task.rep));
        const PrFit pr_fit = fit(data, scenario.model, scenario.f0, config);
        const double rho_n = rule_risk_impl(pr_fit.f_n, rule_eval, scenario.true_f, true_eval,
                                            scenario.problem, scenario.y_quad);
        const double kl = kl_divergence(p_true, rule_eval.marginal(pr_fit.f_n), scenario.y_quad);
        rows[t] = TraceRow{n, task.rep, rho_n - rho, kl};
    };

    if (threads == 1 || tasks.size() == 1) {
        for (std::size_t t = 0; t < tasks.size(); ++t) run_task(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            while (true) {
                const std::size_t t = next.fetch_add(1);
                if (t >= tasks.size()) return;
                try {
                    run_task(t);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(threads), tasks.size());
        for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }
    return rows;
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

TraceSummary summarize_trace(const SimScenario& scenario, std::span<const TraceRow> rows) {
    TraceSummary summary;
    summary.sample_sizes = scenario.sample_sizes;
    for (long n : scenario.sample_sizes) {
        std::vector<double> excess;
        std::vector<double> kl;
        for (const TraceRow& row : rows) {
            if (row.n != n) continue;
            excess.push_back(row.excess_risk);
            kl.push_back(row.kl);
        }
        summary.median_excess_risk.push_back(median(std::move(excess)));
        summary.median_kl.push_back(median(std::move(kl)));
    }
    return summary;
}

AssumptionReport check_assumptions(const KernelModel& model, double obs_param,
                                   const PrConfig& config) {
    AssumptionReport report;

    // A2: bounded density probe over a theta lattice and representative y's.
    std::vector<double> probe_y;
    if (model.discrete()) {
        probe_y = model.discrete_support(obs_param);
    } else {
        const YQuadrature quad = make_y_quadrature(model, obs_param, 201);
        probe_y = quad.y;
    }
    const Interval support = model.theta_support();
    double max_density = 0.0;
    bool bounded = true;
    const int lattice = 41;
    for (int i = 0; i < lattice; ++i) {
        const double theta =
            support.width() == 0.0
                ? support.lo
                : support.lo + support.width() * i / (lattice - 1);
        for (double y : probe_y) {
            const double value = model.density_unchecked(theta, Observation{y, obs_param});
            if (!std::isfinite(value)) bounded = false;
            max_density = std::max(max_density, value);
        }
    }
    report.a2_bounded = bounded && std::isfinite(max_density);
    report.a2_max_density = max_density;

    // A3: analytic verdict for power weights; prefix sums as evidence.
    report.a3_from_override = config.weight_override.has_value();
    if (report.a3_from_override) {
        report.a3_satisfied = false;  // finite overrides cannot certify an infinite series
        for (double w : *config.weight_override) {
            report.a3_sum_w_prefix += w;
            report.a3_sum_w2_prefix += w * w;
        }
    } else {
        report.a3_satisfied = config.a3_satisfied();
        for (long i = 1; i <= 1000000; ++i) {
            const double w = std::pow(static_cast<double>(i) + 1.0, -config.gamma);
            report.a3_sum_w_prefix += w;
            report.a3_sum_w2_prefix += w * w;
        }
    }

    report.a4 = check_a4_bound(model, obs_param);
    return report;
}

}  // namespace predrec
