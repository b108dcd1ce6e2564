#pragma once

#include <stdexcept>
#include <string>

namespace predrec {

// Raised when a marginal density underflows (below kDegenerateFloor), i.e.
// the observation has essentially zero probability under the current mixing
// measure.  Carries enough context to locate the offending step inside a
// permutation-averaged fit.
class DegenerateObservation : public std::runtime_error {
public:
    DegenerateObservation(std::string what, double y, long observation_index = -1,
                          long permutation_index = -1)
        : std::runtime_error(std::move(what)),
          y_(y),
          observation_index_(observation_index),
          permutation_index_(permutation_index) {}

    double y() const noexcept { return y_; }
    long observation_index() const noexcept { return observation_index_; }
    long permutation_index() const noexcept { return permutation_index_; }

private:
    double y_;
    long observation_index_;
    long permutation_index_;
};

// Invalid configuration (bad weights, malformed grid, kernel mismatch, ...).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Test problem whose null set has zero prior mass.
class IllPosedTest : public std::runtime_error {
public:
    explicit IllPosedTest(const std::string& what) : std::runtime_error(what) {}
};

// Marginal values below this floor are treated as degenerate rather than
// silently renormalized.
inline constexpr double kDegenerateFloor = 1e-300;

}  // namespace predrec
