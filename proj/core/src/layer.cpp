#include "gmmnet/layer.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace gmmnet {

void validate_layer(const DistanceLayer& l) {
    if (l.weights.rows() == 0 || l.weights.cols() == 0)
        throw ShapeError("DistanceLayer: empty weight matrix");
    if (l.bias.size() != l.weights.rows())
        throw ShapeError("DistanceLayer: bias length must equal row count");
    if (!l.weights.all_finite())
        throw InvalidMatrix("DistanceLayer: non-finite weights");
    for (std::size_t i = 0; i < l.weights.rows(); ++i)
        if (norm2(l.weights.row(i)) == 0.0)
            throw ZeroRowError("DistanceLayer: zero weight row");
    if (l.provenance && l.provenance->size() != l.weights.rows())
        throw ShapeError("DistanceLayer: provenance length must equal row count");
}

Node node_from_component(const Gaussian& g, std::size_t i) {
    validate_gaussian(g);
    if (i >= g.dim()) throw IndexError("node_from_component: index out of range");
    const EigenDecomposition eig = eigh_symmetric(regularized_covariance(g));
    if (eig.eigenvalues[i] <= 0.0)
        throw NumericalFailure("node_from_component: non-positive eigenvalue");
    const double scale = 1.0 / std::sqrt(eig.eigenvalues[i]);
    Vector w(g.dim());
    for (std::size_t j = 0; j < g.dim(); ++j) w[j] = scale * eig.eigenvectors(j, i);
    const double b = -dot(w, g.mean);
    return {w, b};
}

DistanceLayer layer_from_gaussian(const Gaussian& g, const std::vector<std::size_t>& subset) {
    if (subset.empty()) throw InvalidSubset("layer_from_gaussian: empty subset");
    std::set<std::size_t> seen(subset.begin(), subset.end());
    if (seen.size() != subset.size())
        throw InvalidSubset("layer_from_gaussian: duplicate indices");
    for (std::size_t i : subset)
        if (i >= g.dim()) throw InvalidSubset("layer_from_gaussian: index out of range");

    DistanceLayer layer;
    layer.weights = Matrix(subset.size(), g.dim());
    layer.bias.resize(subset.size());
    layer.activation = Activation::Abs;
    layer.provenance = std::vector<Provenance>(subset.size());
    for (std::size_t j = 0; j < subset.size(); ++j) {
        const auto [w, b] = node_from_component(g, subset[j]);
        layer.weights.set_row(j, w);
        layer.bias[j] = b;
        (*layer.provenance)[j] = {0, static_cast<int>(subset[j])};
    }
    return layer;
}

Vector forward(const DistanceLayer& l, const Vector& x) {
    if (x.size() != l.in_dim()) throw ShapeError("forward: input dimension mismatch");
    Vector y = matvec(l.weights, x);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += l.bias[i];
    switch (l.activation) {
        case Activation::Identity:
            break;
        case Activation::Abs:
            for (double& v : y) v = std::abs(v);
            break;
        case Activation::ReLU:
            for (double& v : y) v = std::max(0.0, v);
            break;
    }
    return y;
}

Node abs_to_relu(const Node& node, double delta) {
    if (delta <= 0.0) throw InvalidConfidence("abs_to_relu: delta must be positive");
    Vector w(node.first.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = -node.first[i];
    return {w, -node.second + delta};
}

Vector to_intensity(const Vector& distances, IntensityKind kind, double bound) {
    if (kind == IntensityKind::ReluAbsComposite && bound <= 0.0)
        throw InvalidConfidence("to_intensity: bound must be positive");
    for (double d : distances)
        if (d < 0.0) throw InvalidDistance("to_intensity: distances must be non-negative");

    Vector out(distances.size());
    for (std::size_t i = 0; i < distances.size(); ++i) {
        const double x = distances[i];
        switch (kind) {
            case IntensityKind::GaussianExp:
                out[i] = std::exp(-x * x);
                break;
            case IntensityKind::Laplace:
                out[i] = std::exp(-std::abs(x));
                break;
            case IntensityKind::ReluAbsComposite:
                out[i] = std::max(0.0, bound - std::abs(x));
                break;
        }
    }
    return out;
}

}  // namespace gmmnet
