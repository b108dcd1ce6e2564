#pragma once

// Mixing (prior) measures over theta: a density on a quadrature grid plus
// optional point-mass atoms, so the dominating measure is Lebesgue-on-grid
// plus counting-on-atoms.  Measures are immutable values; every operation
// returns a new measure, which keeps concurrent permutation runs trivially
// safe.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "predrec/kernels.hpp"

namespace predrec {

enum class GridRule { Midpoint, Trapezoid };

struct GridSpec {
    int node_count = 2000;
    Interval bounds;
    GridRule rule = GridRule::Midpoint;

    void validate() const;  // throws ConfigError
};

struct Atom {
    double location = 0.0;
    double mass = 0.0;
};

class MixingMeasure {
public:
    MixingMeasure() = default;

    // Takes the components as given; call validate() to assert the mass-1
    // invariant, or normalized() to enforce it.
    MixingMeasure(std::vector<double> nodes, std::vector<double> weights,
                  std::vector<double> density, std::vector<Atom> atoms = {});

    const std::vector<double>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::vector<double>& density() const noexcept { return density_; }
    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    std::size_t size() const noexcept { return nodes_.size(); }

    double total_mass() const;

    // k-th raw moment: sum_j w_j f_j theta_j^k + sum_k m_k loc_k^k.
    double moment(int k) const;

    double mean() const { return moment(1); }

    MixingMeasure normalized() const;

    // Structural checks plus |mass - 1| <= tol; throws std::runtime_error.
    void validate(double tolerance = 1e-10) const;

    bool same_support(const MixingMeasure& other) const;

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<double> density_;
    std::vector<Atom> atoms_;
};

// p_F(y) = sum_j w_j f_j p_{theta_j}(y) + sum_k m_k p_{loc_k}(y).
// Throws DegenerateObservation when the value falls below kDegenerateFloor.
double marginal_density(const MixingMeasure& f, const KernelModel& model, const Observation& obs);

// Bayes' formula: reweights density and atom masses by p_theta(y)/p_F(y).
MixingMeasure posterior(const MixingMeasure& f, const KernelModel& model, const Observation& obs);

// Posterior expectation of g(theta) given y; g = identity gives the
// posterior-mean rule.
double posterior_expectation(const MixingMeasure& f, const KernelModel& model,
                             const Observation& obs, const std::function<double(double)>& g);

// --- constructors -----------------------------------------------------------

std::vector<double> make_grid_nodes(const GridSpec& spec);
std::vector<double> make_grid_weights(const GridSpec& spec);

// Grid density proportional to an arbitrary nonnegative function,
// renormalized to total mass 1 on the truncated grid.
MixingMeasure init_from_density(const GridSpec& spec, const std::function<double(double)>& density_fn);

// Beta(a,b) initial guess; bounds must lie inside (0,1), a,b > 0.
MixingMeasure init_beta(const GridSpec& spec, double a, double b);

MixingMeasure init_uniform(const GridSpec& spec);

MixingMeasure init_gaussian(const GridSpec& spec, double mean, double variance);

// Atom of mass pi0 at `location` plus (1 - pi0) times a grid density.
MixingMeasure with_atom(const MixingMeasure& grid_part, double location, double pi0);

// Data-driven theta bounds for normal-location fits when none are given:
// [min y - 3 max sigma, max y + 3 max sigma].
Interval default_normal_bounds(std::span<const Observation> data);

MixingMeasure point_mass(double location);

// --- combinators ------------------------------------------------------------

// Pointwise average of densities and atom masses (same support required),
// renormalized; the Rao-Blackwellized reduction of permutation fits.
MixingMeasure average(std::span<const MixingMeasure> measures);

// L1 distance between densities on a shared grid plus atom mass differences.
double l1_distance(const MixingMeasure& a, const MixingMeasure& b);

}  // namespace predrec
