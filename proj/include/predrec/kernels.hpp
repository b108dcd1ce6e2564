#pragma once

// Parametric sampling kernels p_theta(y) used inside every mixture: normal
// location (Lebesgue dominating measure), binomial and Poisson (counting
// measure).  A KernelModel carries only the family and the compact theta
// support; per-observation nuisance parameters (trial count, variance)
// travel with each observation, since the batting data has heterogeneous
// at-bat counts and the transformed normal model has per-player variances.

#include <string>
#include <vector>

namespace predrec {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    bool contains(double x) const noexcept { return x >= lo && x <= hi; }
    double width() const noexcept { return hi - lo; }
};

enum class KernelFamily { NormalLocation, Binomial, Poisson };

std::string family_name(KernelFamily family);

// One observation plus its family-specific nuisance parameter:
//   NormalLocation: param = variance of the observation (sigma^2 > 0)
//   Binomial:       param = trial count m (integer >= 0)
//   Poisson:        param ignored
struct Observation {
    double y = 0.0;
    double param = 1.0;
};

// Binomial theta supports must stay inside [kBinomialEps, 1 - kBinomialEps]
// so likelihood ratios stay bounded; batting averages live in 0.1-0.4 and
// never notice.
inline constexpr double kBinomialEps = 1e-4;

class KernelModel {
public:
    static KernelModel normal_location(Interval theta_support);
    static KernelModel binomial(Interval theta_support);
    static KernelModel poisson(Interval theta_support);

    KernelFamily family() const noexcept { return family_; }
    const Interval& theta_support() const noexcept { return support_; }

    // p_theta(y) w.r.t. the family's dominating measure.  Throws
    // std::domain_error naming the offending value when theta or y is
    // outside the support.
    double density(double theta, const Observation& obs) const;

    // Validated but unchecked-theta variant for hot loops where theta is a
    // grid node known to lie in the support.  y/param are still validated
    // once per observation by validate_observation().
    double density_unchecked(double theta, const Observation& obs) const noexcept;

    // Checks y and the nuisance parameter; throws std::domain_error.
    void validate_observation(const Observation& obs) const;

    bool discrete() const noexcept { return family_ != KernelFamily::NormalLocation; }

    // Exhaustive y-support for discrete kernels.  Binomial: 0..m.  Poisson:
    // 0..K with K the smallest count putting cumulative mass above
    // 1 - 1e-15 for every theta in the support.
    std::vector<double> discrete_support(double obs_param) const;

private:
    KernelModel(KernelFamily family, Interval support);

    KernelFamily family_;
    Interval support_;
};

// Numerical probe of assumption A4: sup over (theta1,theta2,theta3) of
// integral (p_t1/p_t2)^2 p_t3 dmu, evaluated on a coarse lattice.  Advisory
// only; a non-finite estimate is reported, never thrown.
struct A4Report {
    double bound = 0.0;
    bool finite = false;
    int lattice_points = 0;
};

A4Report check_a4_bound(const KernelModel& model, double obs_param, int lattice_points = 5);

}  // namespace predrec
