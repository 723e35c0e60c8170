#include "gmmnet/init.hpp"

#include <cmath>
#include <limits>

#include "gmmnet/rng.hpp"

namespace gmmnet {

namespace {

double sq_dist(const Dataset& data, std::size_t sample, const Matrix& centers,
               std::size_t center) {
    double s = 0.0;
    for (std::size_t j = 0; j < data.dim(); ++j) {
        const double diff = data.points(sample, j) - centers(center, j);
        s += diff * diff;
    }
    return s;
}

// k-means++: first center uniform, then D^2-weighted draws.
Matrix seed_centers(const Dataset& data, std::size_t k, Rng& rng) {
    const std::size_t n = data.size();
    const std::size_t d = data.dim();
    Matrix centers(k, d);

    const std::size_t first = rng.uniform_index(n);
    for (std::size_t j = 0; j < d; ++j) centers(0, j) = data.points(first, j);

    Vector best_sq(n);
    for (std::size_t s = 0; s < n; ++s) best_sq[s] = sq_dist(data, s, centers, 0);

    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (double v : best_sq) total += v;
        std::size_t chosen;
        if (total <= 0.0) {
            chosen = rng.uniform_index(n);
        } else {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            chosen = n - 1;
            for (std::size_t s = 0; s < n; ++s) {
                acc += best_sq[s];
                if (acc >= target) {
                    chosen = s;
                    break;
                }
            }
        }
        for (std::size_t j = 0; j < d; ++j) centers(c, j) = data.points(chosen, j);
        for (std::size_t s = 0; s < n; ++s)
            best_sq[s] = std::min(best_sq[s], sq_dist(data, s, centers, c));
    }
    return centers;
}

}  // namespace

ClusterModel kmeans(const Dataset& data, std::size_t k, std::uint64_t seed,
                    std::size_t max_iters) {
    const std::size_t n = data.size();
    const std::size_t d = data.dim();
    if (k == 0 || k > n) throw InvalidK("kmeans: require 1 <= k <= n");
    if (!data.points.all_finite()) throw InvalidMatrix("kmeans: non-finite data");

    Rng rng(seed);
    ClusterModel model;
    model.centers = seed_centers(data, k, rng);
    model.assignments.assign(n, -1);

    std::vector<std::size_t> counts(k);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (std::size_t s = 0; s < n; ++s) {
            std::size_t best = 0;
            double best_sq = sq_dist(data, s, model.centers, 0);
            for (std::size_t c = 1; c < k; ++c) {
                const double sq = sq_dist(data, s, model.centers, c);
                if (sq < best_sq) {
                    best_sq = sq;
                    best = c;
                }
            }
            if (model.assignments[s] != static_cast<int>(best)) {
                model.assignments[s] = static_cast<int>(best);
                changed = true;
            }
        }
        if (!changed && iter > 0) break;

        counts.assign(k, 0);
        Matrix sums(k, d);
        for (std::size_t s = 0; s < n; ++s) {
            const auto c = static_cast<std::size_t>(model.assignments[s]);
            ++counts[c];
            for (std::size_t j = 0; j < d; ++j) sums(c, j) += data.points(s, j);
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                for (std::size_t j = 0; j < d; ++j)
                    model.centers(c, j) = sums(c, j) / static_cast<double>(counts[c]);
            } else {
                // Re-seed an empty cluster to the point farthest from its
                // current center; lowest index wins ties.
                std::size_t farthest = 0;
                double far_sq = -1.0;
                for (std::size_t s = 0; s < n; ++s) {
                    const double sq = sq_dist(
                        data, s, model.centers,
                        static_cast<std::size_t>(model.assignments[s]));
                    if (sq > far_sq) {
                        far_sq = sq;
                        farthest = s;
                    }
                }
                for (std::size_t j = 0; j < d; ++j)
                    model.centers(c, j) = data.points(farthest, j);
                changed = true;
            }
        }
    }

    model.inertia = 0.0;
    for (std::size_t s = 0; s < n; ++s)
        model.inertia += sq_dist(data, s, model.centers,
                                 static_cast<std::size_t>(model.assignments[s]));
    return model;
}

ClusterGaussians estimate_cluster_gaussians(const Dataset& data, const ClusterModel& c) {
    const std::size_t n = data.size();
    const std::size_t d = data.dim();
    const std::size_t k = c.centers.rows();
    if (c.assignments.size() != n)
        throw ShapeError("estimate_cluster_gaussians: assignment count mismatch");

    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t s = 0; s < n; ++s) {
        const int a = c.assignments[s];
        if (a < 0 || static_cast<std::size_t>(a) >= k)
            throw IndexError("estimate_cluster_gaussians: assignment out of range");
        members[static_cast<std::size_t>(a)].push_back(s);
    }

    ClusterGaussians out;
    for (std::size_t cl = 0; cl < k; ++cl) {
        if (members[cl].empty())
            throw InvalidK("estimate_cluster_gaussians: empty cluster");
        const std::size_t nc = members[cl].size();

        Gaussian g;
        g.mean.assign(d, 0.0);
        for (std::size_t s : members[cl])
            for (std::size_t j = 0; j < d; ++j) g.mean[j] += data.points(s, j);
        for (double& v : g.mean) v /= static_cast<double>(nc);

        g.covariance = Matrix(d, d);
        bool degenerate = nc < 2;
        if (!degenerate) {
            for (std::size_t s : members[cl])
                for (std::size_t i = 0; i < d; ++i)
                    for (std::size_t j = 0; j < d; ++j)
                        g.covariance(i, j) += (data.points(s, i) - g.mean[i]) *
                                              (data.points(s, j) - g.mean[j]);
            for (double& v : g.covariance.data()) v /= static_cast<double>(nc - 1);

            double trace = 0.0;
            for (std::size_t i = 0; i < d; ++i) trace += g.covariance(i, i);
            if (trace <= 0.0) degenerate = true;
        }
        if (degenerate) {
            g.covariance = Matrix(d, d);
            for (std::size_t i = 0; i < d; ++i) g.covariance(i, i) = 1e-9;
        }
        out.mixture.components.push_back(std::move(g));
        out.mixture.weights.push_back(static_cast<double>(nc) / static_cast<double>(n));
        out.degenerate.push_back(degenerate);
    }
    return out;
}

DistanceLayer initialize_layer(const Dataset& data, std::size_t k, std::size_t rows,
                               InitStrategy strategy, std::uint64_t seed) {
    const std::size_t d = data.dim();
    if (rows == 0) throw InvalidDimension("initialize_layer: rows must be >= 1");

    DistanceLayer layer;
    layer.activation = Activation::Abs;
    layer.weights = Matrix(rows, d);
    layer.bias.assign(rows, 0.0);

    if (strategy == InitStrategy::RandomNormal) {
        Rng rng(seed);
        const double scale = 1.0 / std::sqrt(static_cast<double>(d));
        for (double& v : layer.weights.data()) v = scale * rng.normal();
        return layer;
    }

    if (rows > k * d)
        throw InsufficientComponents("initialize_layer: rows exceeds k * dim components");

    const ClusterModel clusters = kmeans(data, k, seed);
    const ClusterGaussians est = estimate_cluster_gaussians(data, clusters);

    layer.provenance = std::vector<Provenance>(rows);
    // Round-robin over clusters, each contributing its next-largest
    // eigenvalue component.
    std::size_t row = 0;
    for (std::size_t comp = 0; comp < d && row < rows; ++comp) {
        for (std::size_t cl = 0; cl < k && row < rows; ++cl) {
            const auto [w, b] = node_from_component(est.mixture.components[cl], comp);
            layer.weights.set_row(row, w);
            layer.bias[row] = b;
            (*layer.provenance)[row] = {static_cast<int>(cl), static_cast<int>(comp)};
            ++row;
        }
    }
    return layer;
}

}  // namespace gmmnet
