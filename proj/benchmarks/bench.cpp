#include <benchmark/benchmark.h>

#include "gmmnet/init.hpp"
#include "gmmnet/train.hpp"
#include "gmmnet/translate.hpp"
#include "gmmnet/verify.hpp"

using namespace gmmnet;

namespace {

void BM_eigh(benchmark::State& state) {
    const std::size_t d = static_cast<std::size_t>(state.range(0));
    const Gaussian g = random_gaussian(d, 1);
    for (auto _ : state) benchmark::DoNotOptimize(eigh_symmetric(g.covariance));
}
BENCHMARK(BM_eigh)->Arg(2)->Arg(8)->Arg(16)->Arg(32);

void BM_mahalanobis(benchmark::State& state) {
    const std::size_t d = static_cast<std::size_t>(state.range(0));
    const Gaussian g = random_gaussian(d, 2);
    Vector x = g.mean;
    x[0] += 1.5;
    for (auto _ : state) benchmark::DoNotOptimize(mahalanobis(g, x));
}
BENCHMARK(BM_mahalanobis)->Arg(2)->Arg(8)->Arg(32);

void BM_layer_forward(benchmark::State& state) {
    const std::size_t d = static_cast<std::size_t>(state.range(0));
    const Gaussian g = random_gaussian(d, 3);
    std::vector<std::size_t> full(d);
    for (std::size_t i = 0; i < d; ++i) full[i] = i;
    const DistanceLayer l = layer_from_gaussian(g, full);
    Vector x = g.mean;
    x[0] += 1.0;
    for (auto _ : state) benchmark::DoNotOptimize(forward(l, x));
}
BENCHMARK(BM_layer_forward)->Arg(2)->Arg(8)->Arg(32);

void BM_gmm_round_trip(benchmark::State& state) {
    const std::size_t d = static_cast<std::size_t>(state.range(0));
    const GaussianMixture m = random_mixture(d, 3, 4);
    std::vector<std::size_t> full(d);
    for (std::size_t i = 0; i < d; ++i) full[i] = i;
    const std::vector<std::vector<std::size_t>> subsets(3, full);
    std::vector<std::vector<std::size_t>> grouping(3);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < d; ++i) grouping[c].push_back(c * d + i);
    for (auto _ : state) {
        const DistanceLayer l = gmm_to_network(m, subsets);
        benchmark::DoNotOptimize(network_to_gmm(l, grouping));
    }
}
BENCHMARK(BM_gmm_round_trip)->Arg(2)->Arg(8);

void BM_kmeans(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const GaussianMixture m = random_mixture(4, 3, 5);
    const Dataset data = sample_gmm(m, n, 6);
    for (auto _ : state) benchmark::DoNotOptimize(kmeans(data, 3, 7));
}
BENCHMARK(BM_kmeans)->Arg(500)->Arg(2000);

void BM_train_epoch(benchmark::State& state) {
    const GaussianMixture m = random_mixture(4, 2, 8);
    const Dataset data = sample_gmm(m, 512, 9);
    MLPModel model;
    model.layers.push_back(initialize_layer(data, 2, 8, InitStrategy::ClusterPCA, 1));
    DistanceLayer head;
    head.weights = Matrix(2, 8, 0.1);
    head.bias.assign(2, 0.0);
    head.activation = Activation::Identity;
    model.layers.push_back(std::move(head));
    TrainConfig cfg;
    cfg.epochs = 1;
    for (auto _ : state) benchmark::DoNotOptimize(train(model, data, cfg));
}
BENCHMARK(BM_train_epoch);

}  // namespace

BENCHMARK_MAIN();
