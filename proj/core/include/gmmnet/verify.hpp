#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gmmnet/gaussian.hpp"

namespace gmmnet {

struct CheckResult {
    std::string name;
    double value = 0.0;      // observed extreme (max error, or min change)
    double tolerance = 0.0;
    bool pass_if_greater = false;  // some checks require the value to exceed the bound
    bool passed = false;
};

struct VerifyOptions {
    std::vector<std::size_t> dims = {2, 4, 8};
    std::size_t trials = 100;
    std::uint64_t seed = 0;
};

/// Seeded random PD Gaussian: rotated diagonal covariance with eigenvalues
/// in [0.3, 3] and mean entries in [-2, 2].
Gaussian random_gaussian(std::size_t dim, std::uint64_t seed);
GaussianMixture random_mixture(std::size_t dim, std::size_t k, std::uint64_t seed);

bool known_suite(const std::string& suite);

/// Runs one invariant suite (mahalanobis, rotation, abs-relu, roundtrip,
/// gradcheck) or "all". Throws InvalidDimension on unknown names.
std::vector<CheckResult> run_suite(const std::string& suite, const VerifyOptions& opts);

}  // namespace gmmnet
