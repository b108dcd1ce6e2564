#include <doctest.h>

#include <cmath>

#include "predrec/errors.hpp"
#include "predrec/mixing.hpp"
#include "predrec/rng.hpp"

using namespace predrec;

namespace {

const GridSpec kBetaGrid{2000, Interval{kBinomialEps, 1.0 - kBinomialEps}, GridRule::Midpoint};

// Independent high-resolution Riemann-sum oracle for the marginal of a
// Beta(a,b) prior under a binomial kernel, using the exact beta density.
double beta_binomial_marginal_oracle(double a, double b, double m, double y, long n_nodes) {
    const double lo = kBinomialEps;
    const double hi = 1.0 - kBinomialEps;
    const double h = (hi - lo) / static_cast<double>(n_nodes);
    const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    const double log_choose =
        std::lgamma(m + 1.0) - std::lgamma(y + 1.0) - std::lgamma(m - y + 1.0);
    double total = 0.0;
    for (long i = 0; i < n_nodes; ++i) {
        const double theta = lo + (static_cast<double>(i) + 0.5) * h;
        total += h * std::exp(log_norm + (a - 1.0) * std::log(theta) +
                              (b - 1.0) * std::log1p(-theta) + log_choose + y * std::log(theta) +
                              (m - y) * std::log1p(-theta));
    }
    return total;
}

MixingMeasure random_measure(Rng& rng, int nodes = 80) {
    const GridSpec spec{nodes, Interval{0.05, 0.95}, GridRule::Midpoint};
    return init_from_density(spec, [&](double) { return 0.05 + rng.uniform(); });
}

}  // namespace

TEST_CASE("marginal of a point mass is the kernel itself") {
    const MixingMeasure f = point_mass(0.37);
    const KernelModel binom = KernelModel::binomial({0.1, 0.9});
    const Observation obs{3.0, 12.0};
    CHECK(marginal_density(f, binom, obs) == binom.density(0.37, obs));
}

TEST_CASE("grid marginal matches the brute-force Riemann oracle") {
    const MixingMeasure f = init_beta(kBetaGrid, 30.0, 120.0);
    const KernelModel binom = KernelModel::binomial(kBetaGrid.bounds);
    const Observation obs{25.0, 100.0};
    const double expected = beta_binomial_marginal_oracle(30.0, 120.0, 100.0, 25.0, 1000000);
    CHECK(marginal_density(f, binom, obs) ==
          doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("uniform prior, unit normal kernel: closed-form marginal at zero") {
    const GridSpec spec{4000, Interval{-1.0, 1.0}, GridRule::Midpoint};
    const MixingMeasure f = init_uniform(spec);
    const KernelModel normal = KernelModel::normal_location(spec.bounds);
    // (Phi(1) - Phi(-1)) / 2 = erf(1/sqrt 2) / 2
    const double expected = 0.5 * std::erf(1.0 / std::sqrt(2.0));
    CHECK(marginal_density(f, normal, {0.0, 1.0}) == doctest::Approx(expected).epsilon(1e-6));
    CHECK(expected == doctest::Approx(0.3413448).epsilon(1e-6));
}

TEST_CASE("posterior with a theta-constant likelihood is the identity") {
    const MixingMeasure f = init_beta(kBetaGrid, 5.0, 3.0);
    const KernelModel binom = KernelModel::binomial(kBetaGrid.bounds);
    const MixingMeasure post = posterior(f, binom, {0.0, 0.0});  // m = 0: only y = 0
    for (std::size_t j = 0; j < f.size(); ++j)
        CHECK(post.density()[j] == doctest::Approx(f.density()[j]).epsilon(1e-12));
}

TEST_CASE("posterior mean matches beta-binomial conjugacy") {
    const MixingMeasure f = init_beta(kBetaGrid, 30.0, 120.0);
    const KernelModel binom = KernelModel::binomial(kBetaGrid.bounds);
    const MixingMeasure post = posterior(f, binom, {10.0, 50.0});
    CHECK(post.total_mass() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(post.mean() == doctest::Approx(0.200).epsilon(1e-6));
}

TEST_CASE("posterior reweights atoms by their likelihood") {
    const MixingMeasure f({}, {}, {}, {Atom{0.2, 0.5}, Atom{0.8, 0.5}});
    const KernelModel binom = KernelModel::binomial({0.1, 0.9});
    const MixingMeasure post = posterior(f, binom, {1.0, 1.0});
    CHECK(post.atoms()[0].mass == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(post.atoms()[1].mass == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("moments: point mass, uniform grid, beta mean") {
    CHECK(point_mass(0.3).moment(1) == doctest::Approx(0.3).epsilon(1e-15));

    const GridSpec unit{2000, Interval{1e-9, 1.0 - 1e-9}, GridRule::Midpoint};
    CHECK(init_uniform(unit).moment(1) == doctest::Approx(0.5).epsilon(1e-6));

    CHECK(init_beta(kBetaGrid, 30.0, 90.0).moment(1) == doctest::Approx(0.250).epsilon(1e-6));
}

TEST_CASE("beta initial guesses hit their analytic means") {
    CHECK(init_beta(kBetaGrid, 30.0, 120.0).mean() == doctest::Approx(0.200).epsilon(1e-5));
    CHECK(init_beta(kBetaGrid, 30.0, 90.0).mean() == doctest::Approx(0.250).epsilon(1e-5));

    const MixingMeasure flat = init_beta(kBetaGrid, 1.0, 1.0);
    for (double f : flat.density()) CHECK(f == doctest::Approx(flat.density()[0]).epsilon(1e-12));

    CHECK_THROWS_AS(init_beta(kBetaGrid, 0.0, 3.0), std::domain_error);
    CHECK_THROWS_AS(init_beta(kBetaGrid, 3.0, -1.0), std::domain_error);
}

TEST_CASE("posterior preserves normalization on random measures") {
    Rng rng(20240811);
    const KernelModel binom = KernelModel::binomial({0.05, 0.95});
    for (int trial = 0; trial < 200; ++trial) {
        const MixingMeasure f = random_measure(rng);
        const double m = 1.0 + static_cast<double>(rng.below(40));
        const double y = static_cast<double>(rng.below(static_cast<std::uint64_t>(m) + 1));
        const MixingMeasure post = posterior(f, binom, {y, m});
        CHECK(post.total_mass() == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("marginal density is linear in the mixing measure") {
    Rng rng(7);
    const KernelModel binom = KernelModel::binomial({0.05, 0.95});
    const MixingMeasure f1 = random_measure(rng);
    const MixingMeasure f2 = random_measure(rng);
    const double lambda = 0.3;
    std::vector<double> mixed(f1.size());
    for (std::size_t j = 0; j < f1.size(); ++j)
        mixed[j] = lambda * f1.density()[j] + (1.0 - lambda) * f2.density()[j];
    const MixingMeasure blend(f1.nodes(), f1.weights(), mixed);
    const Observation obs{4.0, 9.0};
    const double expected = lambda * marginal_density(f1, binom, obs) +
                            (1.0 - lambda) * marginal_density(f2, binom, obs);
    CHECK(marginal_density(blend, binom, obs) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("posterior keeps zero-density nodes at zero") {
    const GridSpec spec{50, Interval{0.05, 0.95}, GridRule::Midpoint};
    MixingMeasure f = init_from_density(spec, [](double theta) { return theta < 0.5 ? 1.0 : 0.0; });
    const KernelModel binom = KernelModel::binomial(spec.bounds);
    for (double y : {0.0, 1.0, 3.0}) f = posterior(f, binom, {y, 3.0});
    for (std::size_t j = 0; j < f.size(); ++j)
        if (f.nodes()[j] >= 0.5) CHECK(f.density()[j] == 0.0);
}

TEST_CASE("degenerate observations are reported, not renormalized") {
    const GridSpec spec{50, Interval{0.05, 0.95}, GridRule::Midpoint};
    const MixingMeasure f = init_uniform(spec);
    const KernelModel binom = KernelModel::binomial(spec.bounds);
    // All mass on theta < 0.5 cannot produce 4000 hits in 4000 at-bats
    // without underflowing the marginal.
    const MixingMeasure left =
        init_from_density(spec, [](double theta) { return theta < 0.2 ? 1.0 : 0.0; });
    CHECK_THROWS_AS(marginal_density(left, binom, {4000.0, 4000.0}), DegenerateObservation);
    CHECK(marginal_density(f, binom, {3.0, 4.0}) > 0.0);
}
