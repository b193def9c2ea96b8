#include "nrcid/mlp.hpp"
#include "nrcid/errors.hpp"
#include "nrcid/random.hpp"

#include "eigen_view.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace nrcid {

using detail::RowMat;
using detail::view;

void MlpConfig::validate() const {
    if (input_dim < 1 || hidden_layers < 1 || hidden_width < 1 || target_dim < 1) {
        throw std::invalid_argument("MLP dimensions, depth and width must all be at least 1");
    }
}

std::size_t MlpModel::parameter_count() const {
    std::size_t n = head.weights.size() + head.bias.size();
    for (const auto& l : hidden) {
        n += l.weights.size() + l.bias.size();
    }
    return n;
}

bool MlpModel::all_finite() const {
    auto finite = [](const DenseLayer& l) {
        return l.weights.all_finite() &&
               std::all_of(l.bias.begin(), l.bias.end(), [](double v) { return std::isfinite(v); });
    };
    return finite(head) && std::all_of(hidden.begin(), hidden.end(), finite);
}

namespace {

using BiasMap = Eigen::Map<const Eigen::RowVectorXd>;
using MutBiasMap = Eigen::Map<Eigen::RowVectorXd>;

BiasMap bias_view(const DenseLayer& l) {
    return BiasMap(l.bias.data(), static_cast<Eigen::Index>(l.bias.size()));
}

MutBiasMap bias_view(DenseLayer& l) {
    return MutBiasMap(l.bias.data(), static_cast<Eigen::Index>(l.bias.size()));
}

DenseLayer zero_layer(std::size_t out, std::size_t in) {
    return DenseLayer{Matrix(out, in), std::vector<double>(out, 0.0)};
}

DenseLayer random_layer(std::size_t out, std::size_t in, Rng& rng) {
    DenseLayer l = zero_layer(out, in);
    const double limit = std::sqrt(6.0 / static_cast<double>(in));
    for (double& w : l.weights.values()) {
        w = (2.0 * uniform01(rng) - 1.0) * limit;
    }
    return l;
}

MlpGradients zero_gradients(const MlpModel& m) {
    MlpGradients g;
    for (const auto& l : m.hidden) {
        g.hidden.push_back(zero_layer(l.weights.rows(), l.weights.cols()));
    }
    g.head = zero_layer(m.head.weights.rows(), m.head.weights.cols());
    return g;
}

void check_model(const MlpModel& m) {
    m.config.validate();
    if (m.hidden.size() != m.config.hidden_layers) {
        throw std::invalid_argument("model depth does not match its config");
    }
}

/// Intermediate values of one forward pass over a batch.
struct Pass {
    std::vector<RowMat> pre;
    std::vector<RowMat> post;
    RowMat out;
};

template <typename Input>
void forward_pass(const MlpModel& m, const Input& x, Pass& p) {
    const std::size_t depth = m.hidden.size();
    p.pre.resize(depth);
    p.post.resize(depth);
    for (std::size_t l = 0; l < depth; ++l) {
        const DenseLayer& layer = m.hidden[l];
        if (l == 0) {
            p.pre[l].noalias() = x * view(layer.weights).transpose();
        } else {
            p.pre[l].noalias() = p.post[l - 1] * view(layer.weights).transpose();
        }
        p.pre[l].rowwise() += bias_view(layer);
        p.post[l] = p.pre[l].cwiseMax(0.0);
    }
    p.out.noalias() = p.post[depth - 1] * view(m.head.weights).transpose();
    p.out.rowwise() += bias_view(m.head);
}

/// Column sums accumulated row by row.
void column_sums(const RowMat& a, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            out[static_cast<std::size_t>(c)] += a(r, c);
        }
    }
}

double penalty_sq_norm(const MlpModel& m, BiasPenalty penalty) {
    double s = view(m.head.weights).squaredNorm();
    for (const auto& l : m.hidden) {
        s += view(l.weights).squaredNorm();
        if (penalty == BiasPenalty::IncludeHiddenBias) {
            s += std::inner_product(l.bias.begin(), l.bias.end(), l.bias.begin(), 0.0);
        }
    }
    return s;
}

/// Fills `g` with the gradient of the regularised loss on the batch (x, y) and
/// returns the loss value at the current parameters.
template <typename Input, typename Target>
double loss_and_gradients(const MlpModel& m, const Input& x, const Target& y, double wd, BiasPenalty penalty,
                          Pass& p, MlpGradients& g) {
    forward_pass(m, x, p);
    const double inv_b = 1.0 / static_cast<double>(x.rows());
    RowMat delta = p.out - y;
    const double data_loss = 0.5 * inv_b * delta.squaredNorm();
    delta *= inv_b;

    const std::size_t depth = m.hidden.size();
    auto g_head = view(g.head.weights);
    g_head.noalias() = delta.transpose() * p.post[depth - 1];
    g_head += wd * view(m.head.weights);
    column_sums(delta, g.head.bias);

    RowMat upstream = delta * view(m.head.weights);
    for (std::size_t l = depth; l-- > 0;) {
        upstream.array() *= (p.pre[l].array() > 0.0).template cast<double>();
        const DenseLayer& layer = m.hidden[l];
        auto g_w = view(g.hidden[l].weights);
        if (l == 0) {
            g_w.noalias() = upstream.transpose() * x;
        } else {
            g_w.noalias() = upstream.transpose() * p.post[l - 1];
        }
        g_w += wd * view(layer.weights);
        column_sums(upstream, g.hidden[l].bias);
        if (penalty == BiasPenalty::IncludeHiddenBias) {
            bias_view(g.hidden[l]) += wd * bias_view(layer);
        }
        if (l > 0) {
            RowMat next = upstream * view(layer.weights);
            upstream.swap(next);
        }
    }
    return data_loss + 0.5 * wd * penalty_sq_norm(m, penalty);
}

void sgd_step(MlpModel& m, const MlpGradients& g, double lr) {
    for (std::size_t l = 0; l < m.hidden.size(); ++l) {
        view(m.hidden[l].weights) -= lr * view(g.hidden[l].weights);
        bias_view(m.hidden[l]) -= lr * bias_view(g.hidden[l]);
    }
    view(m.head.weights) -= lr * view(g.head.weights);
    bias_view(m.head) -= lr * bias_view(g.head);
}

void check_inputs(const MlpModel& m, const Matrix& inputs) {
    if (inputs.cols() != m.config.input_dim) {
        throw DataError("input has " + std::to_string(inputs.cols()) + " columns, model expects " +
                        std::to_string(m.config.input_dim));
    }
}

void check_targets(const MlpModel& m, const Matrix& inputs, const Matrix& targets) {
    check_inputs(m, inputs);
    if (targets.rows() != inputs.rows() || targets.cols() != m.config.target_dim) {
        throw DataError("targets must be " + std::to_string(inputs.rows()) + "x" +
                        std::to_string(m.config.target_dim));
    }
}

} // namespace

MlpModel init_model(const MlpConfig& config) {
    config.validate();
    Rng rng(config.seed);
    MlpModel m;
    m.config = config;
    std::size_t fan_in = config.input_dim;
    for (std::size_t l = 0; l < config.hidden_layers; ++l) {
        m.hidden.push_back(random_layer(config.hidden_width, fan_in, rng));
        fan_in = config.hidden_width;
    }
    m.head = random_layer(config.target_dim, config.hidden_width, rng);
    return m;
}

ForwardResult forward(const MlpModel& model, const Matrix& inputs, bool capture) {
    check_model(model);
    check_inputs(model, inputs);
    Pass p;
    forward_pass(model, view(inputs), p);
    ForwardResult r;
    r.predictions = detail::to_matrix(p.out);
    if (capture) {
        ActivationTrace t;
        t.inputs = inputs;
        for (std::size_t l = 0; l < p.pre.size(); ++l) {
            t.pre_activations.push_back(detail::to_matrix(p.pre[l]));
            t.post_activations.push_back(detail::to_matrix(p.post[l]));
        }
        t.features = t.post_activations.back();
        t.predictions = r.predictions;
        r.trace = std::move(t);
    }
    return r;
}

Matrix predict(const MlpModel& model, const Matrix& inputs) {
    return forward(model, inputs, false).predictions;
}

double loss(const MlpModel& model, const Matrix& inputs, const Matrix& targets, double weight_decay,
            BiasPenalty penalty) {
    check_model(model);
    check_targets(model, inputs, targets);
    const Matrix pred = predict(model, inputs);
    const double data = 0.5 * (view(pred) - view(targets)).squaredNorm() / static_cast<double>(inputs.rows());
    return data + 0.5 * weight_decay * penalty_sq_norm(model, penalty);
}

MlpGradients backward(const MlpModel& model, const Matrix& inputs, const Matrix& targets, double weight_decay,
                      BiasPenalty penalty) {
    check_model(model);
    check_targets(model, inputs, targets);
    Pass p;
    MlpGradients g = zero_gradients(model);
    loss_and_gradients(model, view(inputs), view(targets), weight_decay, penalty, p, g);
    return g;
}

double mse(const Matrix& predictions, const Matrix& targets) {
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols()) {
        throw DataError("mse: shape mismatch");
    }
    if (predictions.rows() == 0) {
        throw DataError("mse: empty input");
    }
    return (view(predictions) - view(targets)).squaredNorm() / static_cast<double>(predictions.rows());
}

TrainResult train(MlpModel model, const Dataset& train_set, const TrainOptions& opts, const Matrix& probe_inputs) {
    check_model(model);
    train_set.validate();
    check_targets(model, train_set.inputs, train_set.targets);
    const std::size_t m = train_set.size();
    if (opts.batch_size < 1 || opts.batch_size > m) {
        throw std::invalid_argument("batch size must lie in [1, dataset size]");
    }
    if (!(opts.learning_rate > 0.0) || !(opts.weight_decay >= 0.0)) {
        throw std::invalid_argument("learning rate must be positive and weight decay non-negative");
    }
    if (!std::is_sorted(opts.probe_epochs.begin(), opts.probe_epochs.end()) ||
        (!opts.probe_epochs.empty() && opts.probe_epochs.back() > opts.epochs)) {
        throw std::invalid_argument("probe epochs must be sorted and not exceed the epoch count");
    }
    if (!opts.probe_epochs.empty()) {
        check_inputs(model, probe_inputs);
    }

    TrainResult result;
    ProbeLog& log = result.log;
    log.initial_loss = loss(model, train_set.inputs, train_set.targets, opts.weight_decay, opts.bias_penalty);
    if (!std::isfinite(log.initial_loss)) {
        throw DivergenceError(0, log.initial_loss);
    }
    const double blowup = opts.divergence_factor * std::max(log.initial_loss, 1e-12);

    auto probe_at = [&](std::size_t epoch) {
        ProbeEntry e;
        e.epoch = epoch;
        e.train_loss = epoch == 0 ? log.initial_loss
                                  : loss(model, train_set.inputs, train_set.targets, opts.weight_decay,
                                         opts.bias_penalty);
        e.trace = std::move(*forward(model, probe_inputs, true).trace);
        e.trace.epoch = epoch;
        log.probes.push_back(std::move(e));
    };

    auto next_probe = opts.probe_epochs.begin();
    auto drain_probes = [&](std::size_t epoch) {
        while (next_probe != opts.probe_epochs.end() && *next_probe == epoch) {
            if (log.probes.empty() || log.probes.back().epoch != epoch) {
                probe_at(epoch);
            }
            ++next_probe;
        }
    };
    drain_probes(0);

    Rng rng(opts.shuffle_seed);
    Pass pass;
    MlpGradients grads = zero_gradients(model);
    const auto x_all = view(train_set.inputs);
    const auto y_all = view(train_set.targets);
    RowMat xb, yb;
    log.epoch_losses.reserve(opts.epochs);

    for (std::size_t epoch = 1; epoch <= opts.epochs; ++epoch) {
        const std::vector<std::size_t> order = random_permutation(m, rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < m; start += opts.batch_size) {
            const std::size_t b = std::min(opts.batch_size, m - start);
            xb.resize(static_cast<Eigen::Index>(b), x_all.cols());
            yb.resize(static_cast<Eigen::Index>(b), y_all.cols());
            for (std::size_t r = 0; r < b; ++r) {
                const auto src = static_cast<Eigen::Index>(order[start + r]);
                xb.row(static_cast<Eigen::Index>(r)) = x_all.row(src);
                yb.row(static_cast<Eigen::Index>(r)) = y_all.row(src);
            }
            const double batch_loss =
                loss_and_gradients(model, xb, yb, opts.weight_decay, opts.bias_penalty, pass, grads);
            loss_sum += batch_loss * static_cast<double>(b);
            sgd_step(model, grads, opts.learning_rate);
        }
        const double epoch_loss = loss_sum / static_cast<double>(m);
        log.epoch_losses.push_back(epoch_loss);
        if (!std::isfinite(epoch_loss) || epoch_loss > blowup) {
            throw DivergenceError(epoch, epoch_loss);
        }
        drain_probes(epoch);
    }
    result.model = std::move(model);
    return result;
}

} // namespace nrcid
