#pragma once

#include <cstdint>
#include <vector>

#include "gmmnet/init.hpp"
#include "gmmnet/layer.hpp"

namespace gmmnet {

/// Stack of DistanceLayers; by convention the last layer is the
/// Identity-activation output head.
struct MLPModel {
    std::vector<DistanceLayer> layers;

    std::size_t in_dim() const { return layers.front().in_dim(); }
    std::size_t out_dim() const { return layers.back().out_dim(); }
};

enum class Loss { SoftmaxCrossEntropy, MeanSquaredError };

struct TrainConfig {
    double learning_rate = 0.1;
    std::size_t epochs = 10;
    std::size_t batch_size = 32;
    double ortho_coeff = 0.0;
    std::uint64_t seed = 0;
    Loss loss = Loss::SoftmaxCrossEntropy;
};

struct ForwardCache {
    Vector input;
    std::vector<Vector> pre;   // per layer, before the activation
    std::vector<Vector> post;  // per layer, after the activation
};

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Vector> bias;
};

struct LossGrad {
    double loss = 0.0;
    Vector grad;  // d loss / d logits
};

struct HistoryRow {
    std::size_t epoch = 0;
    double loss = 0.0;
    double penalty = 0.0;
    double total = 0.0;
};

struct TrainResult {
    MLPModel model;
    std::vector<HistoryRow> history;  // row 0 is the pre-training evaluation
};

struct GradCheckResult {
    double max_rel_error = 0.0;
    bool no_testable_parameters = false;
    std::size_t tested = 0;
};

struct PenaltyResult {
    double penalty = 0.0;
    Matrix grad;  // same shape as the layer weights
};

void validate_model(const MLPModel& m);

std::pair<Vector, ForwardCache> mlp_forward(const MLPModel& m, const Vector& x);

/// Exact reverse-mode gradients. Abs derivative is sign(z) with
/// sign(0) = 0; ReLU derivative is 1 for z > 0 else 0.
Gradients mlp_backward(const MLPModel& m, const ForwardCache& cache,
                       const Vector& loss_grad_at_logits);

LossGrad loss_and_grad(const Vector& logits, int label, std::size_t num_classes, Loss loss);

/// ||G - I||_F^2 on the row-normalized Gram matrix, so row scales are free
/// and only directions are pushed orthogonal. Gradient is analytic.
PenaltyResult orthogonality_penalty(const DistanceLayer& l);

/// Central-difference check of mlp_backward on a labeled batch.
/// Parameters that can move an Abs/ReLU pre-activation lying within
/// 10*epsilon of its kink are excluded.
GradCheckResult gradient_check(const MLPModel& m, const Dataset& batch, Loss loss,
                               double epsilon);

TrainResult train(const MLPModel& m, const Dataset& data, const TrainConfig& cfg);

}  // namespace gmmnet
