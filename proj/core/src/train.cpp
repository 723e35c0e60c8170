#include "gmmnet/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gmmnet/rng.hpp"

namespace gmmnet {

namespace {

double activation_derivative(Activation act, double pre) {
    switch (act) {
        case Activation::Identity:
            return 1.0;
        case Activation::Abs:
            // sign(0) := 0 keeps boundary-sitting nodes stationary.
            return pre > 0.0 ? 1.0 : (pre < 0.0 ? -1.0 : 0.0);
        case Activation::ReLU:
            return pre > 0.0 ? 1.0 : 0.0;
    }
    return 0.0;
}

Gradients zero_gradients(const MLPModel& m) {
    Gradients g;
    for (const DistanceLayer& l : m.layers) {
        g.weights.emplace_back(l.weights.rows(), l.weights.cols());
        g.bias.emplace_back(l.bias.size(), 0.0);
    }
    return g;
}

void accumulate(Gradients& into, const Gradients& from, double scale) {
    for (std::size_t l = 0; l < into.weights.size(); ++l) {
        for (std::size_t i = 0; i < into.weights[l].data().size(); ++i)
            into.weights[l].data()[i] += scale * from.weights[l].data()[i];
        for (std::size_t i = 0; i < into.bias[l].size(); ++i)
            into.bias[l][i] += scale * from.bias[l][i];
    }
}

}  // namespace

void validate_model(const MLPModel& m) {
    if (m.layers.empty()) throw ShapeError("MLPModel: no layers");
    for (const DistanceLayer& l : m.layers) validate_layer(l);
    for (std::size_t i = 0; i + 1 < m.layers.size(); ++i)
        if (m.layers[i].out_dim() != m.layers[i + 1].in_dim())
            throw ShapeError("MLPModel: layer dimensions do not chain");
}

std::pair<Vector, ForwardCache> mlp_forward(const MLPModel& m, const Vector& x) {
    validate_model(m);
    if (x.size() != m.in_dim()) throw ShapeError("mlp_forward: input dimension mismatch");

    ForwardCache cache;
    cache.input = x;
    Vector current = x;
    for (const DistanceLayer& l : m.layers) {
        Vector pre = matvec(l.weights, current);
        for (std::size_t i = 0; i < pre.size(); ++i) pre[i] += l.bias[i];
        Vector post = pre;
        for (std::size_t i = 0; i < post.size(); ++i) {
            switch (l.activation) {
                case Activation::Identity:
                    break;
                case Activation::Abs:
                    post[i] = std::abs(post[i]);
                    break;
                case Activation::ReLU:
                    post[i] = std::max(0.0, post[i]);
                    break;
            }
        }
        cache.pre.push_back(pre);
        cache.post.push_back(post);
        current = post;
    }
    return {current, cache};
}

Gradients mlp_backward(const MLPModel& m, const ForwardCache& cache,
                       const Vector& loss_grad_at_logits) {
    if (cache.pre.size() != m.layers.size() || cache.post.size() != m.layers.size())
        throw CacheError("mlp_backward: cache does not match model depth");
    if (loss_grad_at_logits.size() != m.out_dim())
        throw CacheError("mlp_backward: logits gradient dimension mismatch");

    Gradients grads = zero_gradients(m);
    Vector delta = loss_grad_at_logits;
    for (std::size_t li = m.layers.size(); li-- > 0;) {
        const DistanceLayer& l = m.layers[li];
        if (cache.pre[li].size() != l.out_dim())
            throw CacheError("mlp_backward: stale cache shape");

        Vector delta_pre(l.out_dim());
        for (std::size_t i = 0; i < l.out_dim(); ++i)
            delta_pre[i] = delta[i] * activation_derivative(l.activation, cache.pre[li][i]);

        const Vector& layer_input = (li == 0) ? cache.input : cache.post[li - 1];
        for (std::size_t i = 0; i < l.out_dim(); ++i) {
            for (std::size_t j = 0; j < l.in_dim(); ++j)
                grads.weights[li](i, j) = delta_pre[i] * layer_input[j];
            grads.bias[li][i] = delta_pre[i];
        }

        if (li > 0) {
            Vector next(l.in_dim(), 0.0);
            for (std::size_t i = 0; i < l.out_dim(); ++i)
                for (std::size_t j = 0; j < l.in_dim(); ++j)
                    next[j] += l.weights(i, j) * delta_pre[i];
            delta = std::move(next);
        }
    }
    return grads;
}

LossGrad loss_and_grad(const Vector& logits, int label, std::size_t num_classes, Loss loss) {
    if (logits.size() != num_classes)
        throw ShapeError("loss_and_grad: logits length must equal class count");
    if (label < 0 || static_cast<std::size_t>(label) >= num_classes)
        throw IndexError("loss_and_grad: label out of range");

    LossGrad out;
    out.grad.assign(num_classes, 0.0);
    if (loss == Loss::MeanSquaredError) {
        // 0.5 * ||logits - onehot||^2
        for (std::size_t i = 0; i < num_classes; ++i) {
            const double target = (static_cast<int>(i) == label) ? 1.0 : 0.0;
            const double diff = logits[i] - target;
            out.loss += 0.5 * diff * diff;
            out.grad[i] = diff;
        }
    } else {
        const double max_logit = *std::max_element(logits.begin(), logits.end());
        double denom = 0.0;
        for (double z : logits) denom += std::exp(z - max_logit);
        for (std::size_t i = 0; i < num_classes; ++i) {
            const double p = std::exp(logits[i] - max_logit) / denom;
            out.grad[i] = p - ((static_cast<int>(i) == label) ? 1.0 : 0.0);
            if (static_cast<int>(i) == label)
                out.loss = -(logits[i] - max_logit - std::log(denom));
        }
    }
    return out;
}

PenaltyResult orthogonality_penalty(const DistanceLayer& l) {
    validate_layer(l);  // rejects zero rows
    const std::size_t k = l.weights.rows();
    const std::size_t d = l.weights.cols();

    Matrix normalized(k, d);
    Vector norms(k);
    for (std::size_t i = 0; i < k; ++i) {
        const Vector w = l.weights.row(i);
        norms[i] = norm2(w);
        for (std::size_t j = 0; j < d; ++j) normalized(i, j) = w[j] / norms[i];
    }

    PenaltyResult result;
    result.grad = Matrix(k, d);
    // P = sum_{i != j} (w_hat_i . w_hat_j)^2; diagonal of the Gram is 1.
    Matrix grad_hat(k, d);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            const double g = dot(normalized.row(i), normalized.row(j));
            result.penalty += 2.0 * g * g;
            for (std::size_t c = 0; c < d; ++c) {
                grad_hat(i, c) += 4.0 * g * normalized(j, c);
                grad_hat(j, c) += 4.0 * g * normalized(i, c);
            }
        }
    }
    // Chain through the normalization: d w_hat / d w = (I - w_hat w_hat^T) / ||w||.
    for (std::size_t i = 0; i < k; ++i) {
        const double radial = dot(grad_hat.row(i), normalized.row(i));
        for (std::size_t c = 0; c < d; ++c)
            result.grad(i, c) = (grad_hat(i, c) - radial * normalized(i, c)) / norms[i];
    }
    return result;
}

namespace {

struct BatchLoss {
    double loss = 0.0;
    Gradients grads;
};

BatchLoss batch_loss_and_grads(const MLPModel& m, const Dataset& data,
                               const std::vector<std::size_t>& indices, Loss loss,
                               bool want_grads) {
    const std::size_t classes = m.out_dim();
    BatchLoss out;
    if (want_grads) out.grads = zero_gradients(m);
    const double inv = 1.0 / static_cast<double>(indices.size());
    for (std::size_t s : indices) {
        const Vector x = data.points.row(s);
        const auto [logits, cache] = mlp_forward(m, x);
        const LossGrad lg = loss_and_grad(logits, data.labels[s], classes, loss);
        out.loss += inv * lg.loss;
        if (want_grads) {
            const Gradients g = mlp_backward(m, cache, lg.grad);
            accumulate(out.grads, g, inv);
        }
    }
    return out;
}

double model_penalty(const MLPModel& m) {
    double p = 0.0;
    for (const DistanceLayer& l : m.layers) p += orthogonality_penalty(l).penalty;
    return p;
}

}  // namespace

GradCheckResult gradient_check(const MLPModel& m, const Dataset& batch, Loss loss,
                               double epsilon) {
    validate_model(m);
    if (epsilon < 1e-7 || epsilon > 1e-3)
        throw InvalidDimension("gradient_check: epsilon must lie in [1e-7, 1e-3]");
    if (batch.size() == 0) throw ShapeError("gradient_check: empty batch");

    std::vector<std::size_t> all(batch.size());
    std::iota(all.begin(), all.end(), std::size_t{0});

    // Find kinked Abs/ReLU rows: any sample with |pre-activation| < 10 eps.
    const double kink_band = 10.0 * epsilon;
    std::vector<std::vector<bool>> kinked(m.layers.size());
    for (std::size_t li = 0; li < m.layers.size(); ++li)
        kinked[li].assign(m.layers[li].out_dim(), false);
    for (std::size_t s = 0; s < batch.size(); ++s) {
        const auto [logits, cache] = mlp_forward(m, batch.points.row(s));
        (void)logits;
        for (std::size_t li = 0; li < m.layers.size(); ++li) {
            if (m.layers[li].activation == Activation::Identity) continue;
            for (std::size_t r = 0; r < m.layers[li].out_dim(); ++r)
                if (std::abs(cache.pre[li][r]) < kink_band) kinked[li][r] = true;
        }
    }

    // A parameter in layer li is testable when no kinked node sits in a
    // later layer (its perturbation would move that pre-activation across
    // the kink) and its own row is away from the kink band.
    auto row_testable = [&](std::size_t li, std::size_t row) {
        for (std::size_t lj = li + 1; lj < m.layers.size(); ++lj)
            for (bool k : kinked[lj])
                if (k) return false;
        return !kinked[li][row];
    };

    const BatchLoss analytic = batch_loss_and_grads(m, batch, all, loss, true);

    GradCheckResult result;
    MLPModel probe = m;
    auto central_diff = [&](double* param) {
        const double saved = *param;
        *param = saved + epsilon;
        const double fplus = batch_loss_and_grads(probe, batch, all, loss, false).loss;
        *param = saved - epsilon;
        const double fminus = batch_loss_and_grads(probe, batch, all, loss, false).loss;
        *param = saved;
        return (fplus - fminus) / (2.0 * epsilon);
    };

    for (std::size_t li = 0; li < m.layers.size(); ++li) {
        for (std::size_t r = 0; r < m.layers[li].out_dim(); ++r) {
            if (!row_testable(li, r)) continue;
            for (std::size_t c = 0; c < m.layers[li].in_dim(); ++c) {
                const double numeric = central_diff(&probe.layers[li].weights(r, c));
                const double exact = analytic.grads.weights[li](r, c);
                const double denom = std::max({std::abs(numeric), std::abs(exact), 1e-8});
                result.max_rel_error =
                    std::max(result.max_rel_error, std::abs(numeric - exact) / denom);
                ++result.tested;
            }
            const double numeric = central_diff(&probe.layers[li].bias[r]);
            const double exact = analytic.grads.bias[li][r];
            const double denom = std::max({std::abs(numeric), std::abs(exact), 1e-8});
            result.max_rel_error =
                std::max(result.max_rel_error, std::abs(numeric - exact) / denom);
            ++result.tested;
        }
    }
    result.no_testable_parameters = (result.tested == 0);
    return result;
}

TrainResult train(const MLPModel& m, const Dataset& data, const TrainConfig& cfg) {
    validate_model(m);
    if (cfg.learning_rate < 0.0)
        throw InvalidDimension("train: learning rate must be non-negative");
    if (cfg.batch_size == 0) throw InvalidDimension("train: batch size must be >= 1");
    const std::size_t classes = m.out_dim();
    for (int label : data.labels)
        if (label < 0 || static_cast<std::size_t>(label) >= classes)
            throw IndexError("train: label out of range for the output head");

    TrainResult result;
    result.model = m;

    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), std::size_t{0});

    auto record = [&](std::size_t epoch) {
        const double loss = batch_loss_and_grads(result.model, data, all, cfg.loss, false).loss;
        const double penalty = model_penalty(result.model);
        const double total = loss + cfg.ortho_coeff * penalty;
        if (!std::isfinite(total))
            throw DivergenceError(static_cast<int>(epoch), "train: loss diverged");
        result.history.push_back({epoch, loss, penalty, total});
    };
    record(0);

    std::vector<std::size_t> order = all;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        // Per-epoch shuffle seeded from (seed, epoch) so histories are a
        // pure function of the config.
        Rng shuffle_rng(cfg.seed ^ (0x9E3779B97F4A7C15ULL * epoch));
        for (std::size_t i = order.size(); i-- > 1;) {
            const std::size_t j = shuffle_rng.uniform_index(i + 1);
            std::swap(order[i], order[j]);
        }

        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(start + cfg.batch_size, order.size());
            const std::vector<std::size_t> batch(order.begin() + start, order.begin() + end);
            const BatchLoss bl =
                batch_loss_and_grads(result.model, data, batch, cfg.loss, true);

            for (std::size_t li = 0; li < result.model.layers.size(); ++li) {
                DistanceLayer& l = result.model.layers[li];
                Matrix penalty_grad(l.weights.rows(), l.weights.cols());
                if (cfg.ortho_coeff > 0.0)
                    penalty_grad = orthogonality_penalty(l).grad;
                for (std::size_t i = 0; i < l.weights.data().size(); ++i)
                    l.weights.data()[i] -=
                        cfg.learning_rate * (bl.grads.weights[li].data()[i] +
                                             cfg.ortho_coeff * penalty_grad.data()[i]);
                for (std::size_t i = 0; i < l.bias.size(); ++i)
                    l.bias[i] -= cfg.learning_rate * bl.grads.bias[li][i];

                bool finite = l.weights.all_finite();
                for (double b : l.bias) finite = finite && std::isfinite(b);
                if (!finite)
                    throw DivergenceError(static_cast<int>(epoch),
                                          "train: parameters diverged");
            }
        }
        record(epoch);
    }
    return result;
}

}  // namespace gmmnet
