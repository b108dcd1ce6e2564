#include "predrec/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "predrec/errors.hpp"

namespace predrec {

void GridSpec::validate() const {
    if (node_count < 2) throw ConfigError("grid node_count must be >= 2");
    if (!(bounds.lo < bounds.hi)) throw ConfigError("grid bounds must satisfy lo < hi");
    if (!std::isfinite(bounds.lo) || !std::isfinite(bounds.hi))
        throw ConfigError("grid bounds must be finite");
}

MixingMeasure::MixingMeasure(std::vector<double> nodes, std::vector<double> weights,
                             std::vector<double> density, std::vector<Atom> atoms)
    : nodes_(std::move(nodes)),
      weights_(std::move(weights)),
      density_(std::move(density)),
      atoms_(std::move(atoms)) {
    if (nodes_.size() != weights_.size() || nodes_.size() != density_.size())
        throw std::invalid_argument("mixing measure: nodes, weights, density must have equal length");
}

double MixingMeasure::total_mass() const {
    double mass = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j) mass += weights_[j] * density_[j];
    for (const Atom& atom : atoms_) mass += atom.mass;
    return mass;
}

double MixingMeasure::moment(int k) const {
    double value = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j)
        value += weights_[j] * density_[j] * std::pow(nodes_[j], k);
    for (const Atom& atom : atoms_) value += atom.mass * std::pow(atom.location, k);
    return value;
}

MixingMeasure MixingMeasure::normalized() const {
    const double mass = total_mass();
    if (!(mass > 0.0)) throw std::runtime_error("mixing measure has nonpositive total mass");
    MixingMeasure out = *this;
    for (double& f : out.density_) f /= mass;
    for (Atom& atom : out.atoms_) atom.mass /= mass;
    return out;
}

void MixingMeasure::validate(double tolerance) const {
    for (std::size_t j = 1; j < nodes_.size(); ++j)
        if (!(nodes_[j] > nodes_[j - 1]))
            throw std::runtime_error("mixing measure nodes must be strictly increasing");
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
        if (!(weights_[j] > 0.0)) throw std::runtime_error("quadrature weights must be positive");
        if (density_[j] < 0.0) throw std::runtime_error("mixing density must be nonnegative");
    }
    for (const Atom& atom : atoms_)
        if (atom.mass < 0.0) throw std::runtime_error("atom masses must be nonnegative");
    const double mass = total_mass();
    if (std::abs(mass - 1.0) > tolerance)
        throw std::runtime_error("mixing measure mass " + std::to_string(mass) +
                                 " deviates from 1 beyond tolerance");
}

bool MixingMeasure::same_support(const MixingMeasure& other) const {
    if (nodes_.size() != other.nodes_.size() || atoms_.size() != other.atoms_.size()) return false;
    for (std::size_t j = 0; j < nodes_.size(); ++j)
        if (nodes_[j] != other.nodes_[j] || weights_[j] != other.weights_[j]) return false;
    for (std::size_t k = 0; k < atoms_.size(); ++k)
        if (atoms_[k].location != other.atoms_[k].location) return false;
    return true;
}

double marginal_density(const MixingMeasure& f, const KernelModel& model, const Observation& obs) {
    model.validate_observation(obs);
    double value = 0.0;
    const auto& nodes = f.nodes();
    const auto& weights = f.weights();
    const auto& density = f.density();
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        if (density[j] == 0.0) continue;
        value += weights[j] * density[j] * model.density_unchecked(nodes[j], obs);
    }
    for (const Atom& atom : f.atoms()) {
        if (atom.mass == 0.0) continue;
        value += atom.mass * model.density_unchecked(atom.location, obs);
    }
    if (!(value > kDegenerateFloor))
        throw DegenerateObservation(
            "observation y=" + std::to_string(obs.y) +
                " has vanishing marginal density under the current mixing measure",
            obs.y);
    return value;
}

MixingMeasure posterior(const MixingMeasure& f, const KernelModel& model, const Observation& obs) {
    const double p_f = marginal_density(f, model, obs);
    std::vector<double> density(f.size());
    const auto& nodes = f.nodes();
    const auto& prior_density = f.density();
    for (std::size_t j = 0; j < nodes.size(); ++j)
        density[j] = prior_density[j] == 0.0
                         ? 0.0
                         : prior_density[j] * model.density_unchecked(nodes[j], obs) / p_f;
    std::vector<Atom> atoms = f.atoms();
    for (Atom& atom : atoms)
        atom.mass = atom.mass == 0.0 ? 0.0 : atom.mass * model.density_unchecked(atom.location, obs) / p_f;
    return MixingMeasure(f.nodes(), f.weights(), std::move(density), std::move(atoms));
}

double posterior_expectation(const MixingMeasure& f, const KernelModel& model,
                             const Observation& obs, const std::function<double(double)>& g) {
    const double p_f = marginal_density(f, model, obs);
    double value = 0.0;
    const auto& nodes = f.nodes();
    const auto& weights = f.weights();
    const auto& density = f.density();
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        if (density[j] == 0.0) continue;
        value += weights[j] * density[j] * model.density_unchecked(nodes[j], obs) * g(nodes[j]);
    }
    for (const Atom& atom : f.atoms()) {
        if (atom.mass == 0.0) continue;
        value += atom.mass * model.density_unchecked(atom.location, obs) * g(atom.location);
    }
    return value / p_f;
}

std::vector<double> make_grid_nodes(const GridSpec& spec) {
    spec.validate();
    std::vector<double> nodes(static_cast<std::size_t>(spec.node_count));
    const int n = spec.node_count;
    if (spec.rule == GridRule::Midpoint) {
        const double h = spec.bounds.width() / n;
        for (int i = 0; i < n; ++i) nodes[i] = spec.bounds.lo + (i + 0.5) * h;
    } else {
        const double h = spec.bounds.width() / (n - 1);
        for (int i = 0; i < n; ++i) nodes[i] = spec.bounds.lo + i * h;
    }
    return nodes;
}

std::vector<double> make_grid_weights(const GridSpec& spec) {
    spec.validate();
    const int n = spec.node_count;
    std::vector<double> weights(static_cast<std::size_t>(n));
    if (spec.rule == GridRule::Midpoint) {
        std::fill(weights.begin(), weights.end(), spec.bounds.width() / n);
    } else {
        const double h = spec.bounds.width() / (n - 1);
        std::fill(weights.begin(), weights.end(), h);
        weights.front() = 0.5 * h;
        weights.back() = 0.5 * h;
    }
    return weights;
}

MixingMeasure init_from_density(const GridSpec& spec, const std::function<double(double)>& density_fn) {
    auto nodes = make_grid_nodes(spec);
    auto weights = make_grid_weights(spec);
    std::vector<double> density(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        density[j] = density_fn(nodes[j]);
        if (density[j] < 0.0 || !std::isfinite(density[j]))
            throw std::domain_error("initial density must be finite and nonnegative");
    }
    return MixingMeasure(std::move(nodes), std::move(weights), std::move(density)).normalized();
}

MixingMeasure init_beta(const GridSpec& spec, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::domain_error("beta initial guess requires a > 0 and b > 0");
    if (spec.bounds.lo <= 0.0 || spec.bounds.hi >= 1.0)
        throw std::domain_error("beta initial guess requires grid bounds inside (0,1)");
    return init_from_density(spec, [a, b](double theta) {
        return std::exp((a - 1.0) * std::log(theta) + (b - 1.0) * std::log1p(-theta));
    });
}

MixingMeasure init_uniform(const GridSpec& spec) {
    return init_from_density(spec, [](double) { return 1.0; });
}

MixingMeasure init_gaussian(const GridSpec& spec, double mean, double variance) {
    if (!(variance > 0.0)) throw std::domain_error("gaussian initial guess requires variance > 0");
    return init_from_density(spec, [mean, variance](double theta) {
        const double z = theta - mean;
        return std::exp(-0.5 * z * z / variance);
    });
}

MixingMeasure with_atom(const MixingMeasure& grid_part, double location, double pi0) {
    if (!(pi0 >= 0.0) || !(pi0 < 1.0))
        throw std::domain_error("atom mass must lie in [0,1)");
    const MixingMeasure normal = grid_part.normalized();
    std::vector<double> density = normal.density();
    for (double& f : density) f *= (1.0 - pi0);
    std::vector<Atom> atoms = normal.atoms();
    for (Atom& atom : atoms) atom.mass *= (1.0 - pi0);
    atoms.push_back(Atom{location, pi0});
    return MixingMeasure(normal.nodes(), normal.weights(), std::move(density), std::move(atoms));
}

MixingMeasure point_mass(double location) {
    return MixingMeasure({}, {}, {}, {Atom{location, 1.0}});
}

Interval default_normal_bounds(std::span<const Observation> data) {
    if (data.empty()) throw std::invalid_argument("cannot derive theta bounds from no data");
    double lo = data[0].y;
    double hi = data[0].y;
    double max_var = data[0].param;
    for (const Observation& obs : data) {
        lo = std::min(lo, obs.y);
        hi = std::max(hi, obs.y);
        max_var = std::max(max_var, obs.param);
    }
    const double pad = 3.0 * std::sqrt(max_var);
    return Interval{lo - pad, hi + pad};
}

MixingMeasure average(std::span<const MixingMeasure> measures) {
    if (measures.empty()) throw std::invalid_argument("cannot average zero measures");
    for (std::size_t i = 1; i < measures.size(); ++i)
        if (!measures[0].same_support(measures[i]))
            throw std::invalid_argument("cannot average measures on different supports");
    std::vector<double> density(measures[0].size(), 0.0);
    std::vector<Atom> atoms = measures[0].atoms();
    for (Atom& atom : atoms) atom.mass = 0.0;
    for (const MixingMeasure& m : measures) {
        for (std::size_t j = 0; j < density.size(); ++j) density[j] += m.density()[j];
        for (std::size_t k = 0; k < atoms.size(); ++k) atoms[k].mass += m.atoms()[k].mass;
    }
    const double inv = 1.0 / static_cast<double>(measures.size());
    for (double& f : density) f *= inv;
    for (Atom& atom : atoms) atom.mass *= inv;
    return MixingMeasure(measures[0].nodes(), measures[0].weights(), std::move(density),
                         std::move(atoms))
        .normalized();
}

double l1_distance(const MixingMeasure& a, const MixingMeasure& b) {
    if (!a.same_support(b))
        throw std::invalid_argument("l1_distance requires measures on the same support");
    double dist = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j)
        dist += a.weights()[j] * std::abs(a.density()[j] - b.density()[j]);
    for (std::size_t k = 0; k < a.atoms().size(); ++k)
        dist += std::abs(a.atoms()[k].mass - b.atoms()[k].mass);
    return dist;
}

}  // namespace predrec
