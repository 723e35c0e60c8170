#pragma once

#include <vector>

#include "gmmnet/layer.hpp"

namespace gmmnet {

/// Outcome of a network -> mixture recovery, with per-group diagnostics.
struct RecoveredMixture {
    GaussianMixture mixture;
    // True when group rows were orthogonal and Sigma was rebuilt as
    // sum lambda_i v_i v_i^T; false when the precision-matrix inverse ran.
    std::vector<bool> orthogonal_path;
    // True when a group had fewer rows than dimensions and the missing
    // variance directions were filled isotropically.
    std::vector<bool> partial;
};

struct PrototypeEstimate {
    Vector mean;
    bool underdetermined = false;
};

/// Round-trip quality against a reference mixture.
struct TranslationReport {
    GaussianMixture recovered;
    Vector mean_errors;        // max-abs per component
    Vector covariance_errors;  // relative Frobenius per component
};

/// Stacks layer_from_gaussian rows for every component; provenance rows
/// are tagged (component, eigen index). Activation is Abs.
DistanceLayer gmm_to_network(const GaussianMixture& m,
                             const std::vector<std::vector<std::size_t>>& subsets);

/// Inverts the construction per row group: lambda_i = 1/||w_i||^2,
/// v_i = w_i/||w_i||, mu = least squares of W mu = -b. Weights come back
/// uniform; occupancy is not recoverable from a layer.
RecoveredMixture network_to_gmm(const DistanceLayer& l,
                                const std::vector<std::vector<std::size_t>>& grouping);

/// Minimum-norm solution of W_group mu = -b_group; the prototype (ideal
/// input) for the rows in the group.
PrototypeEstimate recover_prototype(const DistanceLayer& l,
                                    const std::vector<std::size_t>& group);

TranslationReport compare_mixtures(const GaussianMixture& reference,
                                   const GaussianMixture& recovered);

}  // namespace gmmnet
