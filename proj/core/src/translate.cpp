#include "gmmnet/translate.hpp"

#include <cmath>
#include <set>

namespace gmmnet {

namespace {

Matrix spd_inverse(const Matrix& m) {
    const std::size_t d = m.rows();
    Matrix inv(d, d);
    for (std::size_t j = 0; j < d; ++j) {
        Vector e(d, 0.0);
        e[j] = 1.0;
        const Vector col = solve_spd(m, e);
        for (std::size_t i = 0; i < d; ++i) inv(i, j) = col[i];
    }
    // Symmetrize away solve round-off.
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            const double v = 0.5 * (inv(i, j) + inv(j, i));
            inv(i, j) = v;
            inv(j, i) = v;
        }
    return inv;
}

bool rows_orthogonal(const Matrix& w, const std::vector<std::size_t>& group) {
    for (std::size_t a = 0; a < group.size(); ++a)
        for (std::size_t b = a + 1; b < group.size(); ++b) {
            const Vector ra = w.row(group[a]);
            const Vector rb = w.row(group[b]);
            if (std::abs(dot(ra, rb)) / (norm2(ra) * norm2(rb)) > 1e-6) return false;
        }
    return true;
}

}  // namespace

DistanceLayer gmm_to_network(const GaussianMixture& m,
                             const std::vector<std::vector<std::size_t>>& subsets) {
    validate_mixture(m);
    if (subsets.size() != m.size())
        throw InvalidSubset("gmm_to_network: one subset per component required");

    const std::size_t d = m.dim();
    std::size_t total_rows = 0;
    for (const auto& s : subsets) {
        if (s.empty()) throw InvalidSubset("gmm_to_network: empty subset");
        total_rows += s.size();
    }

    DistanceLayer layer;
    layer.weights = Matrix(total_rows, d);
    layer.bias.resize(total_rows);
    layer.activation = Activation::Abs;
    layer.provenance = std::vector<Provenance>(total_rows);

    std::size_t row = 0;
    for (std::size_t c = 0; c < m.size(); ++c) {
        const DistanceLayer part = layer_from_gaussian(m.components[c], subsets[c]);
        for (std::size_t j = 0; j < part.out_dim(); ++j, ++row) {
            layer.weights.set_row(row, part.weights.row(j));
            layer.bias[row] = part.bias[j];
            (*layer.provenance)[row] = {static_cast<int>(c),
                                        static_cast<int>(subsets[c][j])};
        }
    }
    return layer;
}

RecoveredMixture network_to_gmm(const DistanceLayer& l,
                                const std::vector<std::vector<std::size_t>>& grouping) {
    validate_layer(l);
    if (l.activation != Activation::Abs)
        throw UnsupportedActivation("network_to_gmm: only Abs layers are invertible");
    if (grouping.empty()) throw InvalidSubset("network_to_gmm: empty grouping");

    std::set<std::size_t> used;
    for (const auto& group : grouping) {
        if (group.empty()) throw InvalidSubset("network_to_gmm: empty group");
        for (std::size_t r : group) {
            if (r >= l.out_dim()) throw InvalidSubset("network_to_gmm: row index out of range");
            if (!used.insert(r).second)
                throw InvalidSubset("network_to_gmm: groups must be disjoint");
        }
    }

    const std::size_t d = l.in_dim();
    RecoveredMixture out;
    out.mixture.weights.assign(grouping.size(), 1.0 / static_cast<double>(grouping.size()));

    for (const auto& group : grouping) {
        if (group.size() < d)
            throw UnderdeterminedGroup("network_to_gmm: group has fewer rows than dimensions");

        Matrix w_group(group.size(), d);
        Vector neg_bias(group.size());
        for (std::size_t j = 0; j < group.size(); ++j) {
            w_group.set_row(j, l.weights.row(group[j]));
            neg_bias[j] = -l.bias[group[j]];
        }

        const LeastSquaresResult mu = least_squares_full(w_group, neg_bias);
        if (mu.rank_deficient)
            throw UnderdeterminedGroup("network_to_gmm: group rows do not span the input space");

        Gaussian g;
        g.mean = mu.solution;
        const bool orthogonal = rows_orthogonal(l.weights, group);
        if (orthogonal) {
            // Whitening rows encode lambda_i = 1/||w_i||^2 directly.
            g.covariance = Matrix(d, d);
            for (std::size_t r : group) {
                const Vector w = l.weights.row(r);
                const double nrm2 = dot(w, w);
                const double lambda = 1.0 / nrm2;
                for (std::size_t i = 0; i < d; ++i)
                    for (std::size_t j = 0; j < d; ++j)
                        g.covariance(i, j) += lambda * (w[i] / std::sqrt(nrm2)) *
                                              (w[j] / std::sqrt(nrm2));
            }
        } else {
            // Rotated whitening basis: W^T W is the implied precision matrix.
            g.covariance = spd_inverse(matmul(transpose(w_group), w_group));
        }
        out.mixture.components.push_back(std::move(g));
        out.orthogonal_path.push_back(orthogonal);
        out.partial.push_back(group.size() < d);
    }
    return out;
}

PrototypeEstimate recover_prototype(const DistanceLayer& l,
                                    const std::vector<std::size_t>& group) {
    validate_layer(l);
    if (group.empty()) throw InvalidSubset("recover_prototype: empty group");
    for (std::size_t r : group)
        if (r >= l.out_dim()) throw InvalidSubset("recover_prototype: row index out of range");

    Matrix w_group(group.size(), l.in_dim());
    Vector neg_bias(group.size());
    for (std::size_t j = 0; j < group.size(); ++j) {
        w_group.set_row(j, l.weights.row(group[j]));
        neg_bias[j] = -l.bias[group[j]];
    }
    const LeastSquaresResult ls = least_squares_full(w_group, neg_bias);
    return {ls.solution, ls.rank_deficient};
}

TranslationReport compare_mixtures(const GaussianMixture& reference,
                                   const GaussianMixture& recovered) {
    if (reference.size() != recovered.size())
        throw ShapeError("compare_mixtures: component count mismatch");
    TranslationReport report;
    report.recovered = recovered;
    for (std::size_t c = 0; c < reference.size(); ++c) {
        double mean_err = 0.0;
        for (std::size_t i = 0; i < reference.dim(); ++i)
            mean_err = std::max(mean_err, std::abs(reference.components[c].mean[i] -
                                                   recovered.components[c].mean[i]));
        report.mean_errors.push_back(mean_err);

        Matrix diff = reference.components[c].covariance;
        for (std::size_t i = 0; i < diff.rows(); ++i)
            for (std::size_t j = 0; j < diff.cols(); ++j)
                diff(i, j) -= recovered.components[c].covariance(i, j);
        const double denom = frobenius_norm(reference.components[c].covariance);
        report.covariance_errors.push_back(
            denom > 0.0 ? frobenius_norm(diff) / denom : frobenius_norm(diff));
    }
    return report;
}

}  // namespace gmmnet
