#include <doctest.h>

#include <cmath>

#include "gmmnet/rng.hpp"
#include "gmmnet/train.hpp"
#include "gmmnet/verify.hpp"

using namespace gmmnet;

namespace {

DistanceLayer make_layer(std::size_t rows, std::size_t cols, Activation act,
                         std::uint64_t seed) {
    Rng rng(seed);
    DistanceLayer l;
    l.weights = Matrix(rows, cols);
    for (double& v : l.weights.data()) v = rng.normal();
    l.bias.resize(rows);
    for (double& v : l.bias) v = 0.5 * rng.normal();
    l.activation = act;
    return l;
}

MLPModel two_layer_model(std::size_t in, std::size_t hidden, std::size_t classes,
                         Activation act, std::uint64_t seed) {
    MLPModel m;
    m.layers.push_back(make_layer(hidden, in, act, seed));
    m.layers.push_back(make_layer(classes, hidden, Activation::Identity, seed + 1));
    return m;
}

Dataset blob_dataset(double separation, std::size_t n, std::uint64_t seed) {
    GaussianMixture m;
    m.weights = {0.5, 0.5};
    for (double s : {-separation, separation}) {
        Gaussian g;
        g.mean = {s, s};
        g.covariance = Matrix::identity(2);
        m.components.push_back(g);
    }
    return sample_gmm(m, n, seed);
}

}  // namespace

TEST_CASE("mlp_forward through a single identity layer") {
    MLPModel m;
    DistanceLayer l;
    l.weights = Matrix::identity(3);
    l.bias.assign(3, 0.0);
    l.activation = Activation::Identity;
    m.layers.push_back(l);

    const auto [logits, cache] = mlp_forward(m, {1.0, -2.0, 3.0});
    CHECK(logits == Vector{1.0, -2.0, 3.0});
    CHECK(cache.pre.size() == 1);
}

TEST_CASE("abs layer on its decision boundaries leaves only the head bias") {
    const Gaussian g = random_gaussian(2, 77);
    MLPModel m;
    DistanceLayer abs_layer;
    abs_layer.weights = Matrix(2, 2);
    abs_layer.weights(0, 0) = 1.0;
    abs_layer.weights(1, 1) = 2.0;
    abs_layer.bias = {-1.0, -2.0};
    abs_layer.activation = Activation::Abs;
    m.layers.push_back(abs_layer);

    DistanceLayer head;
    head.weights = Matrix(2, 2);
    head.weights(0, 0) = 3.0;
    head.weights(1, 1) = -4.0;
    head.bias = {0.25, -0.75};
    head.activation = Activation::Identity;
    m.layers.push_back(head);

    // x with W x + b = 0 in the first layer.
    const auto [logits, cache] = mlp_forward(m, {1.0, 1.0});
    CHECK(logits[0] == doctest::Approx(0.25));
    CHECK(logits[1] == doctest::Approx(-0.75));
}

TEST_CASE("mlp_forward is deterministic") {
    const MLPModel m = two_layer_model(3, 4, 2, Activation::Abs, 5);
    const auto a = mlp_forward(m, {0.1, 0.2, 0.3}).first;
    const auto b = mlp_forward(m, {0.1, 0.2, 0.3}).first;
    CHECK(a == b);
}

TEST_CASE("backward of a single identity layer matches the closed form") {
    MLPModel m;
    DistanceLayer l;
    l.weights = Matrix(2, 3);
    l.weights(0, 0) = 1.0;
    l.weights(1, 2) = -1.0;
    l.bias = {0.5, -0.5};
    l.activation = Activation::Identity;
    m.layers.push_back(l);

    const Vector x = {1.0, 2.0, 3.0};
    const auto [logits, cache] = mlp_forward(m, x);
    const LossGrad lg = loss_and_grad(logits, 0, 2, Loss::MeanSquaredError);
    const Gradients g = mlp_backward(m, cache, lg.grad);

    // grad = (yhat - y) x^T for 0.5 ||yhat - y||^2.
    const Vector residual = {logits[0] - 1.0, logits[1] - 0.0};
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(g.weights[0](i, j) == doctest::Approx(residual[i] * x[j]));
        CHECK(g.bias[0][i] == doctest::Approx(residual[i]));
    }
}

TEST_CASE("abs node exactly on its boundary contributes zero gradient") {
    MLPModel m;
    DistanceLayer l;
    l.weights = Matrix(1, 1);
    l.weights(0, 0) = 1.0;
    l.bias = {-1.0};
    l.activation = Activation::Abs;
    m.layers.push_back(l);

    const auto [logits, cache] = mlp_forward(m, {1.0});  // pre-activation = 0
    const Gradients g = mlp_backward(m, cache, {1.0});
    CHECK(g.weights[0](0, 0) == 0.0);
    CHECK(g.bias[0][0] == 0.0);
}

TEST_CASE("gradient check on an identity-only model is near exact") {
    MLPModel m;
    DistanceLayer l;
    l.weights = Matrix::identity(2);
    l.weights(0, 1) = 0.3;
    l.bias = {0.1, -0.2};
    l.activation = Activation::Identity;
    m.layers.push_back(l);

    Dataset batch;
    batch.points = Matrix(2, 2);
    batch.points(0, 0) = 0.5;
    batch.points(1, 1) = -0.7;
    batch.labels = {0, 1};

    const GradCheckResult r = gradient_check(m, batch, Loss::MeanSquaredError, 1e-5);
    CHECK_FALSE(r.no_testable_parameters);
    CHECK(r.max_rel_error < 1e-9);
}

TEST_CASE("gradient check on random two-layer models") {
    for (Activation act : {Activation::Abs, Activation::ReLU}) {
        for (Loss loss : {Loss::SoftmaxCrossEntropy, Loss::MeanSquaredError}) {
            for (std::uint64_t t = 0; t < 5; ++t) {
                const MLPModel m = two_layer_model(3, 5, 3, act, t * 17 + 1);
                Rng rng(t + 900);
                Dataset batch;
                batch.points = Matrix(4, 3);
                for (double& v : batch.points.data()) v = 2.0 * rng.uniform() - 1.0;
                batch.labels = {0, 1, 2, 1};
                const GradCheckResult r = gradient_check(m, batch, loss, 1e-5);
                if (!r.no_testable_parameters) CHECK(r.max_rel_error < 1e-5);
            }
        }
    }
}

TEST_CASE("gradient check reports NoTestableParameters at an all-kink model") {
    MLPModel m;
    DistanceLayer l;
    l.weights = Matrix(2, 2);
    l.weights(0, 0) = 1.0;
    l.weights(1, 1) = 1.0;
    l.bias = {0.0, 0.0};
    l.activation = Activation::Abs;
    m.layers.push_back(l);

    Dataset batch;
    batch.points = Matrix(1, 2);  // the origin: every pre-activation is 0
    batch.labels = {0};

    const GradCheckResult r = gradient_check(m, batch, Loss::MeanSquaredError, 1e-5);
    CHECK(r.no_testable_parameters);
}

TEST_CASE("orthogonality penalty basics") {
    DistanceLayer l;
    l.weights = Matrix(2, 2);
    l.weights(0, 0) = 3.0;   // orthogonal rows with arbitrary norms
    l.weights(1, 1) = 0.25;
    l.bias = {0.0, 0.0};
    CHECK(orthogonality_penalty(l).penalty == doctest::Approx(0.0));

    // Two identical unit rows: Gram is all ones, penalty ||offdiag||_F^2 = 2.
    DistanceLayer dup;
    dup.weights = Matrix(2, 2);
    dup.weights(0, 0) = 1.0;
    dup.weights(1, 0) = 1.0;
    dup.bias = {0.0, 0.0};
    CHECK(orthogonality_penalty(dup).penalty == doctest::Approx(2.0));

    DistanceLayer single;
    single.weights = Matrix(1, 4);
    single.weights(0, 2) = 9.0;
    single.bias = {0.0};
    CHECK(orthogonality_penalty(single).penalty == doctest::Approx(0.0));
}

TEST_CASE("orthogonality penalty rejects zero rows") {
    DistanceLayer l;
    l.weights = Matrix(2, 2);
    l.weights(0, 0) = 1.0;
    l.bias = {0.0, 0.0};
    CHECK_THROWS_AS(orthogonality_penalty(l), ZeroRowError);
}

TEST_CASE("orthogonality penalty gradient matches finite differences") {
    DistanceLayer l = make_layer(4, 3, Activation::Abs, 31);
    const PenaltyResult p = orthogonality_penalty(l);
    const double eps = 1e-6;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            const double saved = l.weights(i, j);
            l.weights(i, j) = saved + eps;
            const double fp = orthogonality_penalty(l).penalty;
            l.weights(i, j) = saved - eps;
            const double fm = orthogonality_penalty(l).penalty;
            l.weights(i, j) = saved;
            CHECK(p.grad(i, j) == doctest::Approx((fp - fm) / (2.0 * eps)).epsilon(1e-5));
        }
}

TEST_CASE("orthogonality penalty is invariant under row rescaling") {
    const DistanceLayer l = make_layer(3, 4, Activation::Abs, 8);
    DistanceLayer scaled = l;
    const Vector factors = {2.0, 0.5, 11.0};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 4; ++j) scaled.weights(i, j) *= factors[i];
    CHECK(orthogonality_penalty(scaled).penalty ==
          doctest::Approx(orthogonality_penalty(l).penalty));
}

TEST_CASE("training fits linearly separable blobs") {
    const Dataset data = blob_dataset(3.0, 256, 4);
    MLPModel m;
    DistanceLayer head = make_layer(2, 2, Activation::Identity, 10);
    m.layers.push_back(head);

    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.learning_rate = 0.1;
    cfg.batch_size = 32;
    cfg.seed = 0;
    cfg.loss = Loss::SoftmaxCrossEntropy;

    const TrainResult r = train(m, data, cfg);
    CHECK(r.history.back().loss < 0.1);
    CHECK(r.history.size() == 51);  // initial evaluation plus one per epoch
}

TEST_CASE("learning rate zero keeps the loss history constant") {
    const Dataset data = blob_dataset(2.0, 64, 6);
    const MLPModel m = two_layer_model(2, 3, 2, Activation::Abs, 2);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.learning_rate = 0.0;
    cfg.seed = 0;
    const TrainResult r = train(m, data, cfg);
    for (const HistoryRow& h : r.history)
        CHECK(h.total == doctest::Approx(r.history.front().total));
}

TEST_CASE("training is deterministic per config") {
    const Dataset data = blob_dataset(2.0, 128, 3);
    const MLPModel m = two_layer_model(2, 4, 2, Activation::Abs, 9);
    TrainConfig cfg;
    cfg.epochs = 8;
    cfg.learning_rate = 0.05;
    cfg.batch_size = 16;
    cfg.seed = 21;
    const TrainResult a = train(m, data, cfg);
    const TrainResult b = train(m, data, cfg);
    for (std::size_t i = 0; i < a.history.size(); ++i)
        CHECK(a.history[i].total == b.history[i].total);
}

TEST_CASE("divergence raises DivergenceError with the epoch") {
    const Dataset data = blob_dataset(3.0, 64, 12);
    const MLPModel m = two_layer_model(2, 4, 2, Activation::Abs, 1);
    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.learning_rate = 1e4;  // guaranteed blow-up
    cfg.batch_size = 8;
    cfg.loss = Loss::MeanSquaredError;
    CHECK_THROWS_AS(train(m, data, cfg), DivergenceError);
}

TEST_CASE("strong orthogonality regularization drives rows orthogonal") {
    // Single anisotropic Gaussian, labels split by the first coordinate.
    const Gaussian g = random_gaussian(4, 50);
    Dataset data = sample_gmm({{1.0}, {g}}, 512, 3);
    for (std::size_t s = 0; s < data.size(); ++s)
        data.labels[s] = data.points(s, 0) > g.mean[0] ? 1 : 0;

    MLPModel m = two_layer_model(4, 3, 2, Activation::Abs, 14);
    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.learning_rate = 0.02;
    cfg.batch_size = 32;
    cfg.ortho_coeff = 10.0;
    cfg.seed = 4;

    const TrainResult r = train(m, data, cfg);
    const DistanceLayer& first = r.model.layers[0];
    double max_offdiag = 0.0;
    for (std::size_t i = 0; i < first.weights.rows(); ++i)
        for (std::size_t j = i + 1; j < first.weights.rows(); ++j) {
            const Vector a = first.weights.row(i);
            const Vector b = first.weights.row(j);
            max_offdiag =
                std::max(max_offdiag, std::abs(dot(a, b)) / (norm2(a) * norm2(b)));
        }
    CHECK(max_offdiag < 0.1);
}
