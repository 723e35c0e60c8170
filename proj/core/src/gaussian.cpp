#include "gmmnet/gaussian.hpp"

#include <cmath>

#include "gmmnet/rng.hpp"

namespace gmmnet {

Matrix regularized_covariance(const Gaussian& g) {
    // Leave a covariance that already factors untouched; the eps term is
    // only for singular or indefinite inputs. Touching every covariance
    // would perturb eigenvalues enough to break the 1e-8 round-trip
    // identities between the distance forms.
    try {
        (void)cholesky(g.covariance);
        return g.covariance;
    } catch (const NumericalFailure&) {
    }
    const std::size_t d = g.dim();
    double trace = 0.0;
    for (std::size_t i = 0; i < d; ++i) trace += g.covariance(i, i);
    const double eps_var = 1e-9 * trace / static_cast<double>(d);
    Matrix cov = g.covariance;
    for (std::size_t i = 0; i < d; ++i) cov(i, i) += eps_var;
    return cov;
}

void validate_gaussian(const Gaussian& g) {
    const std::size_t d = g.dim();
    if (d == 0) throw ShapeError("Gaussian: empty mean");
    if (g.covariance.rows() != d || g.covariance.cols() != d)
        throw ShapeError("Gaussian: covariance shape does not match mean");
    if (!g.covariance.all_finite())
        throw InvalidMatrix("Gaussian: non-finite covariance entries");
    if (!is_symmetric(g.covariance, 1e-10))
        throw InvalidMatrix("Gaussian: covariance not symmetric within 1e-10");
}

void validate_mixture(const GaussianMixture& m, bool allow_zero_weights) {
    if (m.weights.size() != m.components.size())
        throw ShapeError("GaussianMixture: weight/component count mismatch");
    if (m.components.empty()) throw ShapeError("GaussianMixture: empty mixture");
    double total = 0.0;
    for (double w : m.weights) {
        if (w < 0.0 || (!allow_zero_weights && w == 0.0))
            throw InvalidMatrix("GaussianMixture: weights must be positive");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw InvalidMatrix("GaussianMixture: weights must sum to 1");
    const std::size_t d = m.dim();
    for (const Gaussian& g : m.components) {
        validate_gaussian(g);
        if (g.dim() != d)
            throw ShapeError("GaussianMixture: components have mixed dimensions");
    }
}

double mahalanobis(const Gaussian& g, const Vector& x) {
    validate_gaussian(g);
    if (x.size() != g.dim()) throw ShapeError("mahalanobis: dimension mismatch");
    const Vector diff = sub(x, g.mean);
    const Matrix cov = regularized_covariance(g);
    Vector z;
    try {
        z = solve_spd(cov, diff);
    } catch (const NumericalFailure&) {
        throw NumericalFailure("mahalanobis: covariance singular beyond regularization");
    }
    return std::sqrt(std::max(0.0, dot(diff, z)));
}

double mahalanobis_pca(const Gaussian& g, const Vector& x) {
    validate_gaussian(g);
    if (x.size() != g.dim()) throw ShapeError("mahalanobis_pca: dimension mismatch");
    const EigenDecomposition eig = eigh_symmetric(regularized_covariance(g));
    const Vector diff = sub(x, g.mean);
    double sum = 0.0;
    for (std::size_t i = 0; i < g.dim(); ++i) {
        if (eig.eigenvalues[i] <= 0.0)
            throw NumericalFailure("mahalanobis_pca: non-positive eigenvalue");
        const double proj = dot(eig.eigenvectors.col(i), diff);
        sum += proj * proj / eig.eigenvalues[i];
    }
    return std::sqrt(sum);
}

double component_distance(const Gaussian& g, std::size_t i, const Vector& x) {
    validate_gaussian(g);
    if (i >= g.dim()) throw IndexError("component_distance: index out of range");
    if (x.size() != g.dim()) throw ShapeError("component_distance: dimension mismatch");
    const EigenDecomposition eig = eigh_symmetric(regularized_covariance(g));
    if (eig.eigenvalues[i] <= 0.0)
        throw NumericalFailure("component_distance: non-positive eigenvalue");
    const double proj = dot(eig.eigenvectors.col(i), sub(x, g.mean));
    return std::abs(proj) / std::sqrt(eig.eigenvalues[i]);
}

WhiteningBasis whitening_basis(const Gaussian& g) {
    validate_gaussian(g);
    const std::size_t d = g.dim();
    const EigenDecomposition eig = eigh_symmetric(regularized_covariance(g));
    WhiteningBasis basis;
    basis.rows = Matrix(d, d);
    basis.origin = g.mean;
    for (std::size_t i = 0; i < d; ++i) {
        if (eig.eigenvalues[i] <= 0.0)
            throw NumericalFailure("whitening_basis: non-positive eigenvalue");
        const double scale = 1.0 / std::sqrt(eig.eigenvalues[i]);
        for (std::size_t j = 0; j < d; ++j)
            basis.rows(i, j) = scale * eig.eigenvectors(j, i);
    }
    return basis;
}

WhiteningBasis rotate_whitening(const WhiteningBasis& b, const Matrix& r) {
    if (r.rows() != b.rows.rows() || r.cols() != b.rows.rows())
        throw ShapeError("rotate_whitening: rotation shape mismatch");
    if (!is_orthogonal(r, 1e-8))
        throw InvalidRotation("rotate_whitening: matrix not orthogonal within 1e-8");
    WhiteningBasis rotated;
    rotated.rows = matmul(r, b.rows);
    rotated.origin = b.origin;
    return rotated;
}

Dataset sample_gmm(const GaussianMixture& m, std::size_t n, std::uint64_t seed) {
    // Degenerate (zero) weights are allowed here so callers can pin all
    // mass on one component.
    validate_mixture(m, /*allow_zero_weights=*/true);
    if (n == 0) throw InvalidDimension("sample_gmm: n must be >= 1");
    const std::size_t d = m.dim();
    const std::size_t k = m.size();

    std::vector<Matrix> factors;
    factors.reserve(k);
    for (const Gaussian& g : m.components) {
        try {
            factors.push_back(cholesky(regularized_covariance(g)));
        } catch (const NumericalFailure&) {
            throw NumericalFailure("sample_gmm: component covariance has no Cholesky factor");
        }
    }

    Vector cumulative(k);
    double acc = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        acc += m.weights[c];
        cumulative[c] = acc;
    }
    cumulative[k - 1] = 1.0;

    Rng rng(seed);
    Dataset ds;
    ds.points = Matrix(n, d);
    ds.labels.resize(n);
    Vector z(d);
    for (std::size_t s = 0; s < n; ++s) {
        const double u = rng.uniform();
        std::size_t c = 0;
        while (c + 1 < k && u >= cumulative[c]) ++c;
        for (std::size_t j = 0; j < d; ++j) z[j] = rng.normal();
        const Matrix& l = factors[c];
        const Gaussian& g = m.components[c];
        for (std::size_t i = 0; i < d; ++i) {
            double v = g.mean[i];
            for (std::size_t j = 0; j <= i; ++j) v += l(i, j) * z[j];
            ds.points(s, i) = v;
        }
        ds.labels[s] = static_cast<int>(c);
    }
    return ds;
}

}  // namespace gmmnet
