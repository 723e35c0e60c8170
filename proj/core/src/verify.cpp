#include "gmmnet/verify.hpp"

#include <algorithm>
#include <cmath>

#include "gmmnet/io.hpp"
#include "gmmnet/layer.hpp"
#include "gmmnet/rng.hpp"
#include "gmmnet/train.hpp"
#include "gmmnet/translate.hpp"

namespace gmmnet {

namespace {

CheckResult make_check(std::string name, double value, double tolerance,
                       bool pass_if_greater = false) {
    CheckResult c;
    c.name = std::move(name);
    c.value = value;
    c.tolerance = tolerance;
    c.pass_if_greater = pass_if_greater;
    c.passed = pass_if_greater ? (value > tolerance) : (value < tolerance);
    return c;
}

Vector random_point(std::size_t dim, Rng& rng, double spread = 3.0) {
    Vector x(dim);
    for (double& v : x) v = spread * (2.0 * rng.uniform() - 1.0);
    return x;
}

}  // namespace

Gaussian random_gaussian(std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    Gaussian g;
    g.mean.resize(dim);
    for (double& v : g.mean) v = 4.0 * rng.uniform() - 2.0;

    const Matrix q = random_rotation(dim, seed ^ 0xA5A5A5A5ULL);
    Vector lambdas(dim);
    for (double& l : lambdas) l = 0.3 + 2.7 * rng.uniform();

    g.covariance = Matrix(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < dim; ++k) s += q(i, k) * lambdas[k] * q(j, k);
            g.covariance(i, j) = s;
        }
    // Symmetrize to kill accumulation round-off.
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = i + 1; j < dim; ++j) {
            const double v = 0.5 * (g.covariance(i, j) + g.covariance(j, i));
            g.covariance(i, j) = v;
            g.covariance(j, i) = v;
        }
    return g;
}

GaussianMixture random_mixture(std::size_t dim, std::size_t k, std::uint64_t seed) {
    GaussianMixture m;
    Rng rng(seed);
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        m.components.push_back(random_gaussian(dim, seed * 1000 + c));
        const double w = 0.5 + rng.uniform();
        m.weights.push_back(w);
        total += w;
    }
    for (double& w : m.weights) w /= total;
    return m;
}

namespace {

std::vector<CheckResult> suite_mahalanobis(const VerifyOptions& opts) {
    double eq1_vs_eq4 = 0.0;
    double aggregation = 0.0;
    double node_equiv = 0.0;
    double mean_boundary = 0.0;
    double reflection = 0.0;
    double eig_recon = 0.0;
    double eig_ortho = 0.0;

    for (std::size_t dim : opts.dims) {
        for (std::size_t t = 0; t < opts.trials; ++t) {
            const std::uint64_t gseed = opts.seed * 7919 + dim * 104729 + t;
            const Gaussian g = random_gaussian(dim, gseed);
            Rng rng(gseed ^ 0x5DEECE66DULL);
            const Vector x = random_point(dim, rng);

            const double d1 = mahalanobis(g, x);
            const double d4 = mahalanobis_pca(g, x);
            eq1_vs_eq4 = std::max(eq1_vs_eq4, std::abs(d1 - d4));

            double sum_sq = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                const double di = component_distance(g, i, x);
                sum_sq += di * di;

                const DistanceLayer single = layer_from_gaussian(g, {i});
                node_equiv = std::max(node_equiv, std::abs(forward(single, x)[0] - di));

                const auto [w, b] = node_from_component(g, i);
                mean_boundary = std::max(mean_boundary, std::abs(dot(w, g.mean) + b));
            }
            aggregation = std::max(aggregation, std::abs(std::sqrt(sum_sq) - d1));

            Vector mirrored(dim);
            for (std::size_t i = 0; i < dim; ++i) mirrored[i] = 2.0 * g.mean[i] - x[i];
            reflection = std::max(reflection, std::abs(mahalanobis(g, mirrored) - d1));

            const EigenDecomposition eig = eigh_symmetric(g.covariance);
            Matrix recon(dim, dim);
            for (std::size_t i = 0; i < dim; ++i)
                for (std::size_t j = 0; j < dim; ++j) {
                    double s = 0.0;
                    for (std::size_t k = 0; k < dim; ++k)
                        s += eig.eigenvectors(i, k) * eig.eigenvalues[k] *
                             eig.eigenvectors(j, k);
                    recon(i, j) = s - g.covariance(i, j);
                }
            eig_recon = std::max(
                eig_recon, frobenius_norm(recon) / frobenius_norm(g.covariance));

            Matrix gram = matmul(transpose(eig.eigenvectors), eig.eigenvectors);
            for (std::size_t i = 0; i < dim; ++i) gram(i, i) -= 1.0;
            eig_ortho = std::max(eig_ortho, max_abs(gram));
        }
    }

    return {
        make_check("covariance-form vs pca-form distance", eq1_vs_eq4, 1e-8),
        make_check("component aggregation identity", aggregation, 1e-8),
        make_check("abs node vs component distance", node_equiv, 1e-10),
        make_check("mean on decision boundary", mean_boundary, 1e-10),
        make_check("reflection symmetry through mean", reflection, 1e-8),
        make_check("eigendecomposition reconstruction", eig_recon, 1e-8),
        make_check("eigenvector orthonormality", eig_ortho, 1e-10),
    };
}

std::vector<CheckResult> suite_rotation(const VerifyOptions& opts) {
    double rot_ortho = 0.0;
    double rot_det = 0.0;
    double norm_preserve = 0.0;
    double aggregate_invariance = 0.0;
    double min_row_change = std::numeric_limits<double>::infinity();

    for (std::size_t dim : opts.dims) {
        for (std::size_t t = 0; t < opts.trials; ++t) {
            const std::uint64_t gseed = opts.seed * 6151 + dim * 3571 + t;
            const Matrix r = random_rotation(dim, gseed);

            Matrix gram = matmul(transpose(r), r);
            for (std::size_t i = 0; i < dim; ++i) gram(i, i) -= 1.0;
            rot_ortho = std::max(rot_ortho, max_abs(gram));
            rot_det = std::max(rot_det, std::abs(determinant(r) - 1.0));

            Rng rng(gseed ^ 0x1234ULL);
            const Vector x = random_point(dim, rng);
            norm_preserve =
                std::max(norm_preserve, std::abs(norm2(matvec(r, x)) - norm2(x)));

            const Gaussian g = random_gaussian(dim, gseed + 17);
            const WhiteningBasis basis = whitening_basis(g);
            const WhiteningBasis rotated = rotate_whitening(basis, r);
            const Vector centered = sub(x, g.mean);
            const double reference = mahalanobis(g, x);
            aggregate_invariance = std::max(
                aggregate_invariance,
                std::abs(norm2(matvec(rotated.rows, centered)) - reference));

            if (dim >= 2) {
                const Vector before = matvec(basis.rows, centered);
                const Vector after = matvec(rotated.rows, centered);
                double max_change = 0.0;
                for (std::size_t i = 0; i < dim; ++i)
                    max_change = std::max(max_change, std::abs(after[i] - before[i]));
                min_row_change = std::min(min_row_change, max_change);
            }
        }
    }

    // Whitened-sample covariance at a fixed large n for the first dim.
    const std::size_t d = opts.dims.front();
    const Gaussian g = random_gaussian(d, opts.seed + 42);
    const GaussianMixture single{{1.0}, {g}};
    const Dataset ds = sample_gmm(single, 100000, opts.seed + 7);
    const WhiteningBasis basis = whitening_basis(g);
    Matrix cov(d, d);
    Vector mean(d, 0.0);
    std::vector<Vector> whitened(ds.size());
    for (std::size_t s = 0; s < ds.size(); ++s) {
        whitened[s] = matvec(basis.rows, sub(ds.points.row(s), basis.origin));
        for (std::size_t i = 0; i < d; ++i) mean[i] += whitened[s][i];
    }
    for (double& v : mean) v /= static_cast<double>(ds.size());
    for (std::size_t s = 0; s < ds.size(); ++s)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                cov(i, j) += (whitened[s][i] - mean[i]) * (whitened[s][j] - mean[j]);
    for (double& v : cov.data()) v /= static_cast<double>(ds.size() - 1);
    for (std::size_t i = 0; i < d; ++i) cov(i, i) -= 1.0;

    std::vector<CheckResult> checks = {
        make_check("rotation orthogonality", rot_ortho, 1e-10),
        make_check("rotation determinant +1", rot_det, 1e-8),
        make_check("rotation preserves norms", norm_preserve, 1e-10),
        make_check("rotated whitening aggregate invariance", aggregate_invariance, 1e-8),
        make_check("whitened sample covariance vs identity", max_abs(cov), 0.05),
    };
    if (std::isfinite(min_row_change))
        checks.push_back(make_check("per-row projection changes under rotation",
                                    min_row_change, 1e-3, /*pass_if_greater=*/true));
    return checks;
}

std::vector<CheckResult> suite_abs_relu(const VerifyOptions& opts) {
    double affine = 0.0;
    double range_violation = 0.0;
    double composite_bound = 0.0;
    double composite_tail = 0.0;

    const double delta = 3.0;  // default confidence bound
    for (std::size_t dim : opts.dims) {
        for (std::size_t t = 0; t < opts.trials; ++t) {
            const std::uint64_t gseed = opts.seed * 2741 + dim * 911 + t;
            const Gaussian g = random_gaussian(dim, gseed);
            Rng rng(gseed ^ 0xBEEFULL);
            const std::size_t i = rng.uniform_index(dim);
            const Node node = node_from_component(g, i);
            const auto [rw, rb] = abs_to_relu(node, delta);

            // Points spread across the in-cluster band |w.x + b| <= delta.
            for (int p = 0; p < 8; ++p) {
                Vector x = random_point(dim, rng, 1.0);
                const double pre = dot(node.first, x) + node.second;
                if (std::abs(pre) > delta) {
                    // Pull the point back inside the band along w.
                    const double shrink = (delta * (2.0 * rng.uniform() - 1.0) - pre) /
                                          dot(node.first, node.first);
                    for (std::size_t c = 0; c < dim; ++c) x[c] += shrink * node.first[c];
                }
                const double pre2 = dot(node.first, x) + node.second;
                const double relu_out = std::max(0.0, dot(rw, x) + rb);
                affine = std::max(affine, std::abs(relu_out + pre2 - delta));
                range_violation = std::max(
                    {range_violation, -relu_out, relu_out - 2.0 * delta});
            }

            // Distance -> intensity composite bridge.
            const Vector dists = {0.0, 0.5 * delta, delta, 2.0 * delta};
            const Vector out = to_intensity(dists, IntensityKind::ReluAbsComposite, delta);
            for (std::size_t q = 0; q < out.size(); ++q) {
                composite_bound = std::max(composite_bound, out[q] - delta);
                if (dists[q] >= delta) composite_tail = std::max(composite_tail, out[q]);
            }
        }
    }

    return {
        make_check("relu affine relation within band", affine, 1e-12),
        make_check("relu output range [0, 2 delta]", range_violation, 1e-12),
        make_check("composite intensity below bound", composite_bound, 1e-12),
        make_check("composite intensity zero beyond bound", composite_tail, 1e-12),
    };
}

std::vector<CheckResult> suite_roundtrip(const VerifyOptions& opts) {
    double mean_err = 0.0;
    double cov_err = 0.0;
    double forward_equiv = 0.0;
    double prototype_err = 0.0;
    double ls_residual = 0.0;
    double scale_consistency = 0.0;

    for (std::size_t dim : opts.dims) {
        if (dim > 8) continue;
        for (std::size_t t = 0; t < opts.trials; ++t) {
            const std::uint64_t gseed = opts.seed * 4289 + dim * 227 + t;
            Rng rng(gseed ^ 0xF00DULL);
            const std::size_t k = 1 + rng.uniform_index(4);
            const GaussianMixture m = random_mixture(dim, k, gseed);

            std::vector<std::size_t> full(dim);
            for (std::size_t i = 0; i < dim; ++i) full[i] = i;
            const std::vector<std::vector<std::size_t>> subsets(k, full);
            const DistanceLayer layer = gmm_to_network(m, subsets);

            std::vector<std::vector<std::size_t>> grouping(k);
            for (std::size_t c = 0; c < k; ++c)
                for (std::size_t i = 0; i < dim; ++i) grouping[c].push_back(c * dim + i);
            const RecoveredMixture rec = network_to_gmm(layer, grouping);

            const Vector x = random_point(dim, rng);
            const Vector layer_out = forward(layer, x);
            for (std::size_t c = 0; c < k; ++c) {
                for (std::size_t i = 0; i < dim; ++i) {
                    mean_err = std::max(mean_err,
                                        std::abs(rec.mixture.components[c].mean[i] -
                                                 m.components[c].mean[i]));
                    forward_equiv = std::max(
                        forward_equiv,
                        std::abs(layer_out[c * dim + i] -
                                 component_distance(rec.mixture.components[c], i, x)));
                }
                Matrix diff = m.components[c].covariance;
                for (std::size_t i = 0; i < dim; ++i)
                    for (std::size_t j = 0; j < dim; ++j)
                        diff(i, j) -= rec.mixture.components[c].covariance(i, j);
                cov_err = std::max(cov_err, frobenius_norm(diff) /
                                                frobenius_norm(m.components[c].covariance));

                const PrototypeEstimate proto = recover_prototype(layer, grouping[c]);
                for (std::size_t i = 0; i < dim; ++i)
                    prototype_err = std::max(
                        prototype_err,
                        std::abs(proto.mean[i] - m.components[c].mean[i]));
            }

            // Least-squares residual orthogonal to the column space.
            {
                Matrix a(dim + 1, dim);
                Vector y(dim + 1);
                for (std::size_t i = 0; i < dim + 1; ++i) {
                    y[i] = 2.0 * rng.uniform() - 1.0;
                    for (std::size_t j = 0; j < dim; ++j)
                        a(i, j) = 2.0 * rng.uniform() - 1.0;
                }
                const Vector sol = least_squares(a, y);
                Vector resid = matvec(a, sol);
                for (std::size_t i = 0; i < resid.size(); ++i) resid[i] -= y[i];
                const Vector proj = matvec(transpose(a), resid);
                for (double v : proj) ls_residual = std::max(ls_residual, std::abs(v));
            }

            // Doubling the covariance scales every Abs output by 1/sqrt(2).
            {
                const Gaussian& g = m.components[0];
                Gaussian doubled = g;
                for (double& v : doubled.covariance.data()) v *= 2.0;
                for (std::size_t i = 0; i < dim; ++i) {
                    const double base = component_distance(g, i, x);
                    const double scaled = component_distance(doubled, i, x);
                    scale_consistency = std::max(
                        scale_consistency, std::abs(scaled - base / std::sqrt(2.0)));
                }
            }
        }
    }

    return {
        make_check("round-trip mean recovery", mean_err, 1e-8),
        make_check("round-trip covariance recovery", cov_err, 1e-8),
        make_check("row-matched forward equivalence", forward_equiv, 1e-8),
        make_check("prototype recovery", prototype_err, 1e-8),
        make_check("least-squares residual orthogonality", ls_residual, 1e-8),
        make_check("abs output scales with covariance", scale_consistency, 1e-8),
    };
}

MLPModel random_model(std::size_t in_dim, std::size_t hidden, std::size_t classes,
                      Activation hidden_act, std::uint64_t seed) {
    Rng rng(seed);
    MLPModel m;
    DistanceLayer h;
    h.weights = Matrix(hidden, in_dim);
    for (double& v : h.weights.data()) v = rng.normal();
    h.bias.resize(hidden);
    for (double& v : h.bias) v = 0.5 * rng.normal();
    h.activation = hidden_act;
    m.layers.push_back(std::move(h));

    DistanceLayer head;
    head.weights = Matrix(classes, hidden);
    for (double& v : head.weights.data()) v = rng.normal();
    head.bias.assign(classes, 0.0);
    head.activation = Activation::Identity;
    m.layers.push_back(std::move(head));
    return m;
}

std::vector<CheckResult> suite_gradcheck(const VerifyOptions& opts) {
    double max_rel = 0.0;
    const std::size_t models_per_combo = std::max<std::size_t>(1, opts.trials / 5);
    const std::size_t dim = std::min<std::size_t>(opts.dims.front(), 8);

    for (Activation act : {Activation::Abs, Activation::ReLU, Activation::Identity}) {
        for (Loss loss : {Loss::SoftmaxCrossEntropy, Loss::MeanSquaredError}) {
            for (std::size_t t = 0; t < models_per_combo; ++t) {
                const std::uint64_t seed =
                    opts.seed * 31 + static_cast<std::uint64_t>(act) * 7 +
                    static_cast<std::uint64_t>(loss) * 3 + t;
                const MLPModel m = random_model(dim, 5, 3, act, seed);

                Rng rng(seed ^ 0xABCDULL);
                Dataset batch;
                batch.points = Matrix(4, dim);
                for (double& v : batch.points.data()) v = 2.0 * rng.uniform() - 1.0;
                batch.labels = {0, 1, 2, 0};

                const GradCheckResult r = gradient_check(m, batch, loss, 1e-5);
                if (!r.no_testable_parameters)
                    max_rel = std::max(max_rel, r.max_rel_error);
            }
        }
    }

    // Orthogonality penalty: zero iff normalized rows orthogonal.
    DistanceLayer ortho;
    ortho.weights = Matrix(2, 3);
    ortho.weights.set_row(0, {2.0, 0.0, 0.0});
    ortho.weights.set_row(1, {0.0, 0.0, 5.0});
    ortho.bias = {0.0, 0.0};
    const double ortho_penalty = orthogonality_penalty(ortho).penalty;

    DistanceLayer skew = ortho;
    skew.weights.set_row(1, {1.0, 1.0, 0.0});
    const double skew_penalty = orthogonality_penalty(skew).penalty;

    // Row rescaling leaves the penalty unchanged.
    DistanceLayer scaled = skew;
    for (std::size_t j = 0; j < 3; ++j) scaled.weights(0, j) *= 7.5;
    const double rescale_drift =
        std::abs(orthogonality_penalty(scaled).penalty - skew_penalty);

    // SGD determinism: identical configs give identical histories.
    const GaussianMixture blobs = random_mixture(2, 2, opts.seed + 99);
    const Dataset data = sample_gmm(blobs, 64, opts.seed + 5);
    MLPModel m = random_model(2, 4, 2, Activation::Abs, opts.seed + 3);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 16;
    cfg.learning_rate = 0.05;
    cfg.seed = opts.seed;
    const TrainResult r1 = train(m, data, cfg);
    const TrainResult r2 = train(m, data, cfg);
    double determinism_drift = 0.0;
    for (std::size_t i = 0; i < r1.history.size(); ++i)
        determinism_drift = std::max(
            determinism_drift, std::abs(r1.history[i].total - r2.history[i].total));

    return {
        make_check("gradient check max relative error", max_rel, 1e-5),
        make_check("penalty zero for orthogonal rows", ortho_penalty, 1e-10),
        make_check("penalty positive for skew rows", skew_penalty, 0.1,
                   /*pass_if_greater=*/true),
        make_check("penalty invariant under row rescaling", rescale_drift, 1e-10),
        make_check("sgd loss history determinism", determinism_drift, 1e-15),
    };
}

}  // namespace

bool known_suite(const std::string& suite) {
    return suite == "mahalanobis" || suite == "rotation" || suite == "abs-relu" ||
           suite == "roundtrip" || suite == "gradcheck" || suite == "all";
}

std::vector<CheckResult> run_suite(const std::string& suite, const VerifyOptions& opts) {
    if (!known_suite(suite)) throw InvalidDimension("unknown verify suite: " + suite);
    std::vector<CheckResult> results;
    auto append = [&](std::vector<CheckResult> more) {
        for (auto& c : more) results.push_back(std::move(c));
    };
    if (suite == "mahalanobis" || suite == "all") append(suite_mahalanobis(opts));
    if (suite == "rotation" || suite == "all") append(suite_rotation(opts));
    if (suite == "abs-relu" || suite == "all") append(suite_abs_relu(opts));
    if (suite == "roundtrip" || suite == "all") append(suite_roundtrip(opts));
    if (suite == "gradcheck" || suite == "all") append(suite_gradcheck(opts));
    return results;
}

}  // namespace gmmnet
