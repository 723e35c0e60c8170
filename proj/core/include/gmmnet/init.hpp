#pragma once

#include <cstdint>
#include <vector>

#include "gmmnet/layer.hpp"

namespace gmmnet {

struct ClusterModel {
    Matrix centers;  // k x d
    std::vector<int> assignments;
    double inertia = 0.0;
};

struct ClusterGaussians {
    GaussianMixture mixture;
    std::vector<bool> degenerate;  // singleton or collapsed clusters
};

enum class InitStrategy { ClusterPCA, RandomNormal };

/// Lloyd's algorithm with k-means++ seeding. Deterministic per seed; empty
/// clusters are re-seeded to the point farthest from its assigned center.
ClusterModel kmeans(const Dataset& data, std::size_t k, std::uint64_t seed,
                    std::size_t max_iters = 100);

/// Per-cluster sample mean and covariance (denominator n_c - 1), weighted
/// by occupancy. Singleton clusters get eps_var * I and a degenerate flag.
ClusterGaussians estimate_cluster_gaussians(const Dataset& data, const ClusterModel& c);

/// ClusterPCA: kmeans + per-cluster PCA rows, allocated round-robin over
/// clusters in descending-eigenvalue order. RandomNormal: N(0, 1/d)
/// entries with zero bias. Both produce an Abs layer.
DistanceLayer initialize_layer(const Dataset& data, std::size_t k, std::size_t rows,
                               InitStrategy strategy, std::uint64_t seed);

}  // namespace gmmnet
