#pragma once

#include "nrcid/dataset.hpp"
#include "nrcid/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

namespace nrcid {

struct MlpConfig {
    std::size_t input_dim = 1;
    std::size_t hidden_layers = 1;
    std::size_t hidden_width = 1;
    std::size_t target_dim = 1;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const MlpConfig&) const = default;
};

/// Affine map y = W x + b with W stored out x in.
struct DenseLayer {
    Matrix weights;
    std::vector<double> bias;

    bool operator==(const DenseLayer&) const = default;
};

/// ReLU feature extractor h(x) (the hidden layers) followed by a linear head
/// f(x) = W h(x) + b.
struct MlpModel {
    MlpConfig config;
    std::vector<DenseLayer> hidden;
    DenseLayer head;

    std::size_t parameter_count() const;
    bool all_finite() const;
    bool operator==(const MlpModel&) const = default;
};

/// Same layout as the model parameters.
struct MlpGradients {
    std::vector<DenseLayer> hidden;
    DenseLayer head;
};

/// Whether the hidden-layer biases belong to the weight-decay penalty.
/// The head bias is never penalised.
enum class BiasPenalty { IncludeHiddenBias, WeightsOnly };

/// Every intermediate matrix of one forward pass. Rows are probe samples.
struct ActivationTrace {
    std::size_t epoch = 0;
    Matrix inputs;
    std::vector<Matrix> pre_activations;  ///< one per hidden layer
    std::vector<Matrix> post_activations; ///< one per hidden layer
    Matrix features;                      ///< last hidden post-activation (input to the head)
    Matrix predictions;
};

struct ForwardResult {
    Matrix predictions;
    std::optional<ActivationTrace> trace;
};

inline constexpr std::string_view kInitScheme = "uniform(+-sqrt(6/fan_in)) weights, zero biases";

/// Uniform weights in +-sqrt(6 / fan_in), zero biases, from a seeded stream.
MlpModel init_model(const MlpConfig& config);

ForwardResult forward(const MlpModel& model, const Matrix& inputs, bool capture = false);

/// forward() without the trace.
Matrix predict(const MlpModel& model, const Matrix& inputs);

/// (1/2M) sum ||f(x_i) - y_i||^2 + (wd/2) (||theta||^2 + ||W||_F^2).
double loss(const MlpModel& model, const Matrix& inputs, const Matrix& targets, double weight_decay,
            BiasPenalty penalty = BiasPenalty::IncludeHiddenBias);

/// Exact gradient of loss() with respect to every parameter.
MlpGradients backward(const MlpModel& model, const Matrix& inputs, const Matrix& targets, double weight_decay,
                      BiasPenalty penalty = BiasPenalty::IncludeHiddenBias);

/// (1/M) sum ||p_i - y_i||^2.
double mse(const Matrix& predictions, const Matrix& targets);

struct TrainOptions {
    std::size_t epochs = 0;
    std::size_t batch_size = 32;
    double learning_rate = 1e-2;
    double weight_decay = 0.0;
    std::uint64_t shuffle_seed = 0;
    std::vector<std::size_t> probe_epochs; ///< sorted; 0 means before the first update
    BiasPenalty bias_penalty = BiasPenalty::IncludeHiddenBias;
    double divergence_factor = 1e6; ///< abort once loss exceeds this multiple of the initial loss
};

struct ProbeEntry {
    std::size_t epoch = 0;
    double train_loss = 0.0; ///< full-batch regularised loss at this epoch
    ActivationTrace trace;
};

struct ProbeLog {
    double initial_loss = 0.0;
    std::vector<double> epoch_losses; ///< mean mini-batch loss of each epoch
    std::vector<ProbeEntry> probes;
};

struct TrainResult {
    MlpModel model;
    ProbeLog log;
};

/// Mini-batch SGD without momentum. Batches are drawn from a fresh seeded
/// permutation every epoch. Throws DivergenceError on a non-finite or exploding loss.
TrainResult train(MlpModel model, const Dataset& train_set, const TrainOptions& opts, const Matrix& probe_inputs);

/// Binary checkpoint plus a plain-text sidecar (same path with ".txt" appended).
void save_checkpoint(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_checkpoint(const std::filesystem::path& path);

} // namespace nrcid
