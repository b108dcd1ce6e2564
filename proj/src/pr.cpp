#include "predrec/pr.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

#include "predrec/errors.hpp"
#include "predrec/rng.hpp"

namespace predrec {

void PrConfig::validate() const {
    if (!(gamma > 0.0) || gamma > 1.0)
        throw ConfigError("PR weight exponent gamma must lie in (0, 1]; got " + std::to_string(gamma));
    if (n_permutations < 1) throw ConfigError("n_permutations must be >= 1");
    if (weight_override) {
        if (weight_override->empty()) throw ConfigError("weight override must be nonempty");
        for (double w : *weight_override)
            if (!(w > 0.0) || !(w < 1.0))
                throw ConfigError("weight override values must lie in (0, 1); got " +
                                  std::to_string(w));
    }
}

double weight(const PrConfig& config, long i) {
    if (i < 1) throw std::invalid_argument("PR step index starts at 1");
    if (config.weight_override) {
        const auto& ws = *config.weight_override;
        if (static_cast<std::size_t>(i) > ws.size())
            throw ConfigError("weight override too short for step " + std::to_string(i));
        return ws[static_cast<std::size_t>(i - 1)];
    }
    return std::pow(static_cast<double>(i) + 1.0, -config.gamma);
}

MixingMeasure pr_step(const MixingMeasure& f, const KernelModel& model, const Observation& obs,
                      double w) {
    if (!(w >= 0.0) || !(w <= 1.0))
        throw std::invalid_argument("pr_step weight must lie in [0, 1]");
    const double p_f = marginal_density(f, model, obs);
    const double keep = 1.0 - w;
    const double pull = w / p_f;
    std::vector<double> density(f.size());
    const auto& nodes = f.nodes();
    const auto& prior = f.density();
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        if (prior[j] == 0.0) {
            density[j] = 0.0;
            continue;
        }
        density[j] = prior[j] * (keep + pull * model.density_unchecked(nodes[j], obs));
    }
    std::vector<Atom> atoms = f.atoms();
    for (Atom& atom : atoms) {
        if (atom.mass == 0.0) continue;
        atom.mass = atom.mass * (keep + pull * model.density_unchecked(atom.location, obs));
    }
    return MixingMeasure(f.nodes(), f.weights(), std::move(density), std::move(atoms));
}

namespace {

// Single-permutation sweep with preallocated buffers; algebraically the same
// update as pr_step (the unit tests pin the two paths against each other).
struct SweepResult {
    MixingMeasure final;
    std::vector<double> log_marginals;
};

SweepResult run_sweep(std::span<const Observation> data, std::span<const std::size_t> order,
                      const KernelModel& model, const MixingMeasure& f0, const PrConfig& config,
                      long permutation_index) {
    std::vector<double> density = f0.density();
    std::vector<Atom> atoms = f0.atoms();
    const auto& nodes = f0.nodes();
    const auto& weights = f0.weights();
    std::vector<double> kernel_at_nodes(nodes.size());
    std::vector<double> log_marginals;
    log_marginals.reserve(order.size());

    for (std::size_t step = 0; step < order.size(); ++step) {
        const Observation& obs = data[order[step]];
        model.validate_observation(obs);

        double p_f = 0.0;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            if (density[j] == 0.0) {
                kernel_at_nodes[j] = 0.0;
                continue;
            }
            kernel_at_nodes[j] = model.density_unchecked(nodes[j], obs);
            p_f += weights[j] * density[j] * kernel_at_nodes[j];
        }
        for (const Atom& atom : atoms)
            if (atom.mass > 0.0) p_f += atom.mass * model.density_unchecked(atom.location, obs);

        if (!(p_f > kDegenerateFloor))
            throw DegenerateObservation(
                "PR update hit a vanishing marginal at permutation " +
                    std::to_string(permutation_index) + ", step " + std::to_string(step + 1) +
                    " (y=" + std::to_string(obs.y) + ")",
                obs.y, static_cast<long>(order[step]), permutation_index);

        const double w = weight(config, static_cast<long>(step) + 1);
        const double keep = 1.0 - w;
        const double pull = w / p_f;
        for (std::size_t j = 0; j < nodes.size(); ++j)
            if (density[j] != 0.0) density[j] = density[j] * (keep + pull * kernel_at_nodes[j]);
        for (Atom& atom : atoms)
            if (atom.mass != 0.0)
                atom.mass = atom.mass * (keep + pull * model.density_unchecked(atom.location, obs));

        log_marginals.push_back(std::log(p_f));
    }

    return SweepResult{MixingMeasure(f0.nodes(), f0.weights(), std::move(density), std::move(atoms)),
                       std::move(log_marginals)};
}

}  // namespace

PrFit fit(std::span<const Observation> data, const KernelModel& model, const MixingMeasure& f0,
          const PrConfig& config, int threads) {
    if (data.empty()) throw std::invalid_argument("fit requires at least one observation");
    config.validate();
    f0.validate();
    if (threads < 1) threads = 1;

    const int n_perm = config.n_permutations;
    std::vector<SweepResult> results(static_cast<std::size_t>(n_perm));

    auto run_permutation = [&](int p) {
        std::vector<std::size_t> order(data.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        if (p > 0) {
            Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(p)));
            rng.shuffle(order);
        }
        results[static_cast<std::size_t>(p)] = run_sweep(data, order, model, f0, config, p);
    };

    if (threads == 1 || n_perm == 1) {
        for (int p = 0; p < n_perm; ++p) run_permutation(p);
    } else {
        std::atomic<int> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            while (true) {
                const int p = next.fetch_add(1);
                if (p >= n_perm) return;
                try {
                    run_permutation(p);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        const int n_workers = std::min(threads, n_perm);
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    // Deterministic reduction in permutation-index order.
    std::vector<MixingMeasure> finals;
    finals.reserve(results.size());
    for (auto& r : results) finals.push_back(std::move(r.final));
    MixingMeasure averaged = average(finals);

    PrFit out{std::move(averaged), {}, config, model, data.size(), {}};
    out.log_marginals.reserve(results.size());
    for (auto& r : results) out.log_marginals.push_back(std::move(r.log_marginals));
    if (config.retain_permutation_fits) out.per_permutation = std::move(finals);
    return out;
}

}  // namespace predrec
