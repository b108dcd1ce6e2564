#include "predrec/kernels.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "predrec/errors.hpp"

namespace predrec {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool is_integer(double x) { return std::abs(x - std::round(x)) < 1e-9; }

[[noreturn]] void domain_fail(const std::string& what, double value) {
    throw std::domain_error(what + " (got " + std::to_string(value) + ")");
}

double normal_density(double theta, double y, double variance) {
    const double z = y - theta;
    return std::exp(-0.5 * z * z / variance) / std::sqrt(kTwoPi * variance);
}

double binomial_density(double theta, double y, double m) {
    const double log_choose = std::lgamma(m + 1.0) - std::lgamma(y + 1.0) - std::lgamma(m - y + 1.0);
    const double log_theta_part = (y > 0.0) ? y * std::log(theta) : 0.0;
    const double log_comp_part = (m - y > 0.0) ? (m - y) * std::log1p(-theta) : 0.0;
    return std::exp(log_choose + log_theta_part + log_comp_part);
}

double poisson_density(double theta, double y) {
    return std::exp(y * std::log(theta) - theta - std::lgamma(y + 1.0));
}

}  // namespace

std::string family_name(KernelFamily family) {
    switch (family) {
        case KernelFamily::NormalLocation: return "normal";
        case KernelFamily::Binomial: return "binomial";
        case KernelFamily::Poisson: return "poisson";
    }
    return "unknown";
}

KernelModel::KernelModel(KernelFamily family, Interval support)
    : family_(family), support_(support) {
    if (!(support.lo <= support.hi) || !std::isfinite(support.lo) || !std::isfinite(support.hi))
        throw ConfigError("kernel theta support must be a finite interval");
}

KernelModel KernelModel::normal_location(Interval theta_support) {
    return KernelModel(KernelFamily::NormalLocation, theta_support);
}

KernelModel KernelModel::binomial(Interval theta_support) {
    if (theta_support.lo < kBinomialEps || theta_support.hi > 1.0 - kBinomialEps)
        throw ConfigError("binomial theta support must lie within [" +
                          std::to_string(kBinomialEps) + ", 1 - " + std::to_string(kBinomialEps) + "]");
    return KernelModel(KernelFamily::Binomial, theta_support);
}

KernelModel KernelModel::poisson(Interval theta_support) {
    if (theta_support.lo <= 0.0)
        throw ConfigError("poisson theta support must have a positive lower bound");
    return KernelModel(KernelFamily::Poisson, theta_support);
}

void KernelModel::validate_observation(const Observation& obs) const {
    switch (family_) {
        case KernelFamily::NormalLocation:
            if (!std::isfinite(obs.y)) domain_fail("normal observation must be finite", obs.y);
            if (!(obs.param > 0.0)) domain_fail("normal observation variance must be positive", obs.param);
            break;
        case KernelFamily::Binomial:
            if (!is_integer(obs.param) || obs.param < 0.0)
                domain_fail("binomial trial count must be a nonnegative integer", obs.param);
            if (!is_integer(obs.y) || obs.y < 0.0 || obs.y > obs.param)
                domain_fail("binomial observation must be an integer in 0..m", obs.y);
            break;
        case KernelFamily::Poisson:
            if (!is_integer(obs.y) || obs.y < 0.0)
                domain_fail("poisson observation must be a nonnegative integer", obs.y);
            break;
    }
}

double KernelModel::density_unchecked(double theta, const Observation& obs) const noexcept {
    switch (family_) {
        case KernelFamily::NormalLocation: return normal_density(theta, obs.y, obs.param);
        case KernelFamily::Binomial: return binomial_density(theta, obs.y, obs.param);
        case KernelFamily::Poisson: return poisson_density(theta, obs.y);
    }
    return 0.0;
}

double KernelModel::density(double theta, const Observation& obs) const {
    if (!support_.contains(theta)) domain_fail("theta outside kernel support", theta);
    validate_observation(obs);
    return density_unchecked(theta, obs);
}

std::vector<double> KernelModel::discrete_support(double obs_param) const {
    std::vector<double> support;
    if (family_ == KernelFamily::Binomial) {
        const long m = static_cast<long>(std::llround(obs_param));
        support.reserve(static_cast<std::size_t>(m) + 1);
        for (long y = 0; y <= m; ++y) support.push_back(static_cast<double>(y));
        return support;
    }
    if (family_ == KernelFamily::Poisson) {
        // The right tail is heaviest at theta_hi, so truncating there covers
        // every theta in the support.
        const double rate = support_.hi;
        double term = std::exp(-rate);  // P(Y=0)
        double cum = term;
        long y = 0;
        support.push_back(0.0);
        while (cum < 1.0 - 1e-15 && y < 100000) {
            ++y;
            term *= rate / static_cast<double>(y);
            cum += term;
            support.push_back(static_cast<double>(y));
        }
        return support;
    }
    throw std::logic_error("discrete_support is undefined for the normal kernel");
}

A4Report check_a4_bound(const KernelModel& model, double obs_param, int lattice_points) {
    A4Report report;
    report.lattice_points = lattice_points;
    if (lattice_points < 1) lattice_points = 1;

    const Interval support = model.theta_support();
    std::vector<double> lattice;
    if (lattice_points == 1 || support.width() == 0.0) {
        lattice.push_back(0.5 * (support.lo + support.hi));
    } else {
        for (int i = 0; i < lattice_points; ++i)
            lattice.push_back(support.lo + support.width() * i / (lattice_points - 1));
    }

    // Integration nodes over y: exhaustive for discrete kernels, wide
    // trapezoid grid for the normal kernel (window is a module decision; the
    // ratio integrand decays like a Gaussian with half the usual rate).
    std::vector<double> ys;
    std::vector<double> yw;
    if (model.discrete()) {
        ys = model.discrete_support(obs_param);
        yw.assign(ys.size(), 1.0);
    } else {
        const double sigma = std::sqrt(obs_param);
        const double lo = support.lo - 10.0 * sigma;
        const double hi = support.hi + 10.0 * sigma;
        const int n = 2001;
        const double h = (hi - lo) / (n - 1);
        for (int i = 0; i < n; ++i) {
            ys.push_back(lo + i * h);
            yw.push_back((i == 0 || i == n - 1) ? 0.5 * h : h);
        }
    }

    double worst = 0.0;
    bool all_finite = true;
    for (double t1 : lattice) {
        for (double t2 : lattice) {
            for (double t3 : lattice) {
                double integral = 0.0;
                for (std::size_t i = 0; i < ys.size(); ++i) {
                    const Observation obs{ys[i], obs_param};
                    const double p1 = model.density_unchecked(t1, obs);
                    const double p2 = model.density_unchecked(t2, obs);
                    const double p3 = model.density_unchecked(t3, obs);
                    if (p3 == 0.0) continue;
                    if (p2 == 0.0) {
                        integral = std::numeric_limits<double>::infinity();
                        break;
                    }
                    const double ratio = p1 / p2;
                    integral += yw[i] * ratio * ratio * p3;
                }
                if (!std::isfinite(integral)) all_finite = false;
                if (integral > worst) worst = integral;
            }
        }
    }
    report.bound = worst;
    report.finite = all_finite && std::isfinite(worst);
    return report;
}

}  // namespace predrec
