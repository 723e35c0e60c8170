#pragma once

#include <cstdint>
#include <vector>

#include "gmmnet/linalg.hpp"

namespace gmmnet {

/// One mixture component: mean and symmetric PSD covariance.
struct Gaussian {
    Vector mean;
    Matrix covariance;

    std::size_t dim() const { return mean.size(); }
};

struct GaussianMixture {
    Vector weights;
    std::vector<Gaussian> components;

    std::size_t size() const { return components.size(); }
    std::size_t dim() const { return components.empty() ? 0 : components[0].dim(); }
};

/// Whitening rows: row i = lambda_i^{-1/2} v_i^T (possibly rotated),
/// origin = the source mean. Applying rows*(x - origin) to samples of the
/// source Gaussian yields data with covariance ~ I.
struct WhiteningBasis {
    Matrix rows;
    Vector origin;
};

/// Row-per-sample data with the generating component per row.
struct Dataset {
    Matrix points;
    std::vector<int> labels;

    std::size_t size() const { return points.rows(); }
    std::size_t dim() const { return points.cols(); }
};

/// Covariance with eps_var = 1e-9 * trace / d added to the diagonal, so
/// near-singular covariances stay invertible.
Matrix regularized_covariance(const Gaussian& g);

void validate_gaussian(const Gaussian& g);
void validate_mixture(const GaussianMixture& m, bool allow_zero_weights = false);

/// sqrt((x - mu)^T Sigma^{-1} (x - mu)), computed via Cholesky solve.
double mahalanobis(const Gaussian& g, const Vector& x);

/// Same distance via the eigendecomposition route: l2 norm over
/// lambda_i^{-1/2} v_i^T (x - mu).
double mahalanobis_pca(const Gaussian& g, const Vector& x);

/// |lambda_i^{-1/2} v_i^T (x - mu)|: standard deviations along principal
/// component i (descending-eigenvalue order).
double component_distance(const Gaussian& g, std::size_t i, const Vector& x);

WhiteningBasis whitening_basis(const Gaussian& g);

/// Left-multiplies the rows by an orthogonal r. The aggregate distance
/// ||rows*(x - origin)||_2 is unchanged; individual row projections are not.
WhiteningBasis rotate_whitening(const WhiteningBasis& b, const Matrix& r);

/// Draws n points: component by weight, then mu + L*z with L the lower
/// Cholesky factor of the regularized covariance. Deterministic per seed.
Dataset sample_gmm(const GaussianMixture& m, std::size_t n, std::uint64_t seed);

}  // namespace gmmnet
