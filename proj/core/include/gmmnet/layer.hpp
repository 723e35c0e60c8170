#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "gmmnet/gaussian.hpp"

namespace gmmnet {

enum class Activation { Abs, ReLU, Identity };

/// Links a layer row back to the mixture component and eigen index it was
/// built from.
struct Provenance {
    int component = 0;
    int eigen_index = 0;
};

/// Linear layer read as a stack of per-principal-component distance nodes:
/// row j outputs |w_j . x + b_j| under Abs, the number of standard
/// deviations of x along the source component's j-th direction.
struct DistanceLayer {
    Matrix weights;  // k x d
    Vector bias;     // length k
    Activation activation = Activation::Abs;
    std::optional<std::vector<Provenance>> provenance;

    std::size_t out_dim() const { return weights.rows(); }
    std::size_t in_dim() const { return weights.cols(); }
};

using Node = std::pair<Vector, double>;  // (weight row, bias)

/// Node for principal component i of g: w = lambda_i^{-1/2} v_i^T,
/// b = -w . mu, so the hyperplane w.x + b = 0 passes through the mean.
Node node_from_component(const Gaussian& g, std::size_t i);

/// Abs layer whose rows are node_from_component over the given distinct
/// component indices; provenance records (0, subset[j]) per row.
DistanceLayer layer_from_gaussian(const Gaussian& g, const std::vector<std::size_t>& subset);

Vector forward(const DistanceLayer& l, const Vector& x);

/// Abs node -> ReLU node with the boundary shifted delta standard
/// deviations outside the cluster: w' = -w, b' = -b + delta. For points
/// with |w.x + b| <= delta the ReLU output is delta - (w.x + b).
Node abs_to_relu(const Node& node, double delta);

enum class IntensityKind { GaussianExp, Laplace, ReluAbsComposite };

/// Distance -> intensity transforms: e^{-x^2}, e^{-|x|}, or the piecewise
/// linear max(0, bound - |x|) bridge.
Vector to_intensity(const Vector& distances, IntensityKind kind, double bound = 0.0);

void validate_layer(const DistanceLayer& l);

}  // namespace gmmnet
