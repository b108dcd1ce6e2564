#include "predrec/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace predrec {

namespace {

double mean_of(const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

void NormalMeansData::validate() const {
    if (values.size() != variances.size())
        throw std::invalid_argument("normal-means data: values and variances differ in length");
    for (double v : variances)
        if (!(v > 0.0)) throw std::invalid_argument("normal-means data: variances must be positive");
}

std::vector<double> naive(const NormalMeansData& data) {
    data.validate();
    return data.values;
}

std::vector<double> group_mean(const NormalMeansData& data) {
    data.validate();
    if (data.values.empty()) throw std::invalid_argument("group_mean requires nonempty data");
    return std::vector<double>(data.values.size(), mean_of(data.values));
}

std::vector<double> james_stein(const NormalMeansData& data) {
    data.validate();
    const std::size_t n = data.values.size();
    if (n < 4) throw std::invalid_argument("james_stein requires at least 4 observations");
    const double xbar = mean_of(data.values);
    double s = 0.0;
    for (double x : data.values) s += (x - xbar) * (x - xbar);
    const double vbar = mean_of(data.variances);
    const double factor =
        s > 0.0 ? std::max(0.0, 1.0 - (static_cast<double>(n) - 3.0) * vbar / s) : 0.0;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = xbar + factor * (data.values[i] - xbar);
    return out;
}

std::vector<double> parametric_eb_mm(const NormalMeansData& data) {
    data.validate();
    const std::size_t n = data.values.size();
    if (n < 2) throw std::invalid_argument("parametric_eb_mm requires at least 2 observations");
    const double mu = mean_of(data.values);
    double sample_var = 0.0;
    for (double x : data.values) sample_var += (x - mu) * (x - mu);
    sample_var /= static_cast<double>(n - 1);
    const double vbar = mean_of(data.variances);
    const double tau2 = std::max(0.0, sample_var - vbar);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = data.variances[i];
        out[i] = (tau2 * data.values[i] + v * mu) / (tau2 + v);
    }
    return out;
}

}  // namespace predrec
