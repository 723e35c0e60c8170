#include <doctest.h>

#include <cmath>

#include "gmmnet/init.hpp"
#include "gmmnet/verify.hpp"

using namespace gmmnet;

namespace {

// Two tight blobs at (0,0) and (10,10), sigma = 0.1.
Dataset two_blobs(std::size_t n_per_blob, std::uint64_t seed) {
    GaussianMixture m;
    m.weights = {0.5, 0.5};
    for (double center : {0.0, 10.0}) {
        Gaussian g;
        g.mean = {center, center};
        g.covariance = Matrix(2, 2);
        g.covariance(0, 0) = 0.01;
        g.covariance(1, 1) = 0.01;
        m.components.push_back(g);
    }
    return sample_gmm(m, 2 * n_per_blob, seed);
}

}  // namespace

TEST_CASE("kmeans separates two tight blobs") {
    const Dataset data = two_blobs(100, 3);
    const ClusterModel c = kmeans(data, 2, 0);

    // One center near each blob mean.
    bool near_origin = false, near_ten = false;
    for (std::size_t k = 0; k < 2; ++k) {
        const double d0 = std::hypot(c.centers(k, 0), c.centers(k, 1));
        const double d1 = std::hypot(c.centers(k, 0) - 10.0, c.centers(k, 1) - 10.0);
        if (d0 < 0.5) near_origin = true;
        if (d1 < 0.5) near_ten = true;
    }
    CHECK(near_origin);
    CHECK(near_ten);

    // Assignments split exactly along the generating labels.
    for (std::size_t s = 1; s < data.size(); ++s)
        CHECK((c.assignments[s] == c.assignments[0]) ==
              (data.labels[s] == data.labels[0]));
}

TEST_CASE("kmeans with k = n has zero inertia") {
    Dataset data;
    data.points = Matrix(4, 2);
    data.points(0, 0) = 1.0;
    data.points(1, 0) = 2.0;
    data.points(2, 1) = 3.0;
    data.points(3, 1) = 4.0;
    data.labels.assign(4, 0);
    const ClusterModel c = kmeans(data, 4, 0);
    CHECK(c.inertia == doctest::Approx(0.0));
}

TEST_CASE("kmeans is deterministic per seed") {
    const Dataset data = two_blobs(50, 1);
    const ClusterModel a = kmeans(data, 3, 42);
    const ClusterModel b = kmeans(data, 3, 42);
    CHECK(a.centers.data() == b.centers.data());
    CHECK(a.assignments == b.assignments);
    CHECK(a.inertia == b.inertia);
}

TEST_CASE("kmeans rejects k > n") {
    Dataset data;
    data.points = Matrix(3, 2);
    data.labels.assign(3, 0);
    CHECK_THROWS_AS(kmeans(data, 4, 0), InvalidK);
    CHECK_THROWS_AS(kmeans(data, 0, 0), InvalidK);
}

TEST_CASE("kmeans inertia matches the recomputed sum") {
    const Dataset data = two_blobs(60, 9);
    const ClusterModel c = kmeans(data, 2, 7);
    double sum = 0.0;
    for (std::size_t s = 0; s < data.size(); ++s) {
        const auto a = static_cast<std::size_t>(c.assignments[s]);
        for (std::size_t j = 0; j < 2; ++j) {
            const double diff = data.points(s, j) - c.centers(a, j);
            sum += diff * diff;
        }
    }
    CHECK(c.inertia == doctest::Approx(sum).epsilon(1e-8));
}

TEST_CASE("estimate_cluster_gaussians matches the hand-computed covariance") {
    Dataset data;
    data.points = Matrix(4, 2);
    data.points(1, 0) = 2.0;
    data.points(2, 1) = 2.0;
    data.points(3, 0) = 2.0;
    data.points(3, 1) = 2.0;
    data.labels.assign(4, 0);

    ClusterModel c;
    c.centers = Matrix(1, 2);
    c.assignments = {0, 0, 0, 0};
    const ClusterGaussians est = estimate_cluster_gaussians(data, c);
    const Gaussian& g = est.mixture.components[0];
    CHECK(g.mean[0] == doctest::Approx(1.0));
    CHECK(g.mean[1] == doctest::Approx(1.0));
    CHECK(g.covariance(0, 0) == doctest::Approx(4.0 / 3.0));
    CHECK(g.covariance(1, 1) == doctest::Approx(4.0 / 3.0));
    CHECK(g.covariance(0, 1) == doctest::Approx(0.0));
    CHECK_FALSE(est.degenerate[0]);
    CHECK(est.mixture.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("identical points give a degenerate epsilon covariance") {
    Dataset data;
    data.points = Matrix(3, 2, 5.0);
    data.labels.assign(3, 0);
    ClusterModel c;
    c.centers = Matrix(1, 2);
    c.assignments = {0, 0, 0};
    const ClusterGaussians est = estimate_cluster_gaussians(data, c);
    CHECK(est.degenerate[0]);
    CHECK(est.mixture.components[0].mean[0] == doctest::Approx(5.0));
    CHECK(est.mixture.components[0].covariance(0, 0) == doctest::Approx(1e-9));
    CHECK(est.mixture.components[0].covariance(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("cluster weights sum to one") {
    const Dataset data = two_blobs(40, 5);
    const ClusterModel c = kmeans(data, 2, 1);
    const ClusterGaussians est = estimate_cluster_gaussians(data, c);
    double total = 0.0;
    for (double w : est.mixture.weights) total += w;
    CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("ClusterPCA rows pass through the estimated cluster means") {
    const Dataset data = two_blobs(200, 2);
    const DistanceLayer l = initialize_layer(data, 2, 4, InitStrategy::ClusterPCA, 0);
    CHECK(l.out_dim() == 4);
    REQUIRE(l.provenance.has_value());

    const ClusterModel c = kmeans(data, 2, 0);
    const ClusterGaussians est = estimate_cluster_gaussians(data, c);
    for (std::size_t r = 0; r < 4; ++r) {
        const auto cl = static_cast<std::size_t>((*l.provenance)[r].component);
        const Vector& mu = est.mixture.components[cl].mean;
        CHECK(std::abs(dot(l.weights.row(r), mu) + l.bias[r]) < 1e-10);
    }
    // Hyperplanes sit near the true blob means too.
    for (std::size_t r = 0; r < 4; ++r) {
        const auto cl = static_cast<std::size_t>((*l.provenance)[r].component);
        Vector truth = {0.0, 0.0};
        if (c.centers(cl, 0) > 5.0) truth = {10.0, 10.0};
        CHECK(std::abs(dot(l.weights.row(r), truth) + l.bias[r]) < 0.1);
    }
}

TEST_CASE("RandomNormal initialization is reproducible") {
    const Dataset data = two_blobs(30, 8);
    const DistanceLayer a = initialize_layer(data, 2, 5, InitStrategy::RandomNormal, 11);
    const DistanceLayer b = initialize_layer(data, 2, 5, InitStrategy::RandomNormal, 11);
    CHECK(a.weights.data() == b.weights.data());
    for (double v : a.bias) CHECK(v == 0.0);
}

TEST_CASE("ClusterPCA rejects more rows than available components") {
    const Dataset data = two_blobs(30, 4);
    CHECK_THROWS_AS(initialize_layer(data, 2, 2 * 2 * 2 + 1, InitStrategy::ClusterPCA, 0),
                    InsufficientComponents);
}

TEST_CASE("ClusterPCA recovers the generating mixture on separated data") {
    // Well separated: centers >= 10 sigma apart.
    GaussianMixture truth;
    truth.weights = {0.5, 0.5};
    for (double center : {-10.0, 10.0}) {
        Gaussian g;
        g.mean = {center, 0.5 * center};
        g.covariance = Matrix(2, 2);
        g.covariance(0, 0) = 2.0;
        g.covariance(1, 1) = 0.5;
        truth.components.push_back(g);
    }
    const Dataset data = sample_gmm(truth, 10000, 13);
    const ClusterModel c = kmeans(data, 2, 13);
    const ClusterGaussians est = estimate_cluster_gaussians(data, c);

    for (std::size_t cl = 0; cl < 2; ++cl) {
        // Match recovered cluster to the truth component by mean sign.
        const Gaussian& r = est.mixture.components[cl];
        const Gaussian& t = truth.components[r.mean[0] < 0.0 ? 0 : 1];
        double rel = 0.0;
        for (std::size_t i = 0; i < 2; ++i)
            rel = std::max(rel, std::abs(r.mean[i] - t.mean[i]) / norm2(t.mean));
        CHECK(rel < 0.05);

        const auto eig_r = eigh_symmetric(r.covariance);
        const auto eig_t = eigh_symmetric(t.covariance);
        CHECK(std::abs(eig_r.eigenvalues[0] - eig_t.eigenvalues[0]) /
                  eig_t.eigenvalues[0] <
              0.1);
    }
}
