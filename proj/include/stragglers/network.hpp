#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stragglers/dataset.hpp"

namespace stragglers::nn {

// Weights and biases of the d-20-20-k fully connected ReLU net. Weight
// matrices are row-major [out][in]. A trained instance is treated as an
// immutable snapshot once training finishes.
struct NetworkParams {
    int input_dim = 0;
    int hidden1 = 20;
    int hidden2 = 20;
    int num_classes = 0;

    std::vector<double> w1, b1;  // hidden1 x input_dim, hidden1
    std::vector<double> w2, b2;  // hidden2 x hidden1,  hidden2
    std::vector<double> w3, b3;  // num_classes x hidden2, num_classes

    bool same_shape(const NetworkParams& other) const {
        return input_dim == other.input_dim && hidden1 == other.hidden1 &&
               hidden2 == other.hidden2 && num_classes == other.num_classes;
    }
    bool all_finite() const;
};

// Gradients shaped like NetworkParams.
struct Gradients {
    std::vector<double> w1, b1, w2, b2, w3, b3;
    void resize_like(const NetworkParams& params);
    void zero();
    bool all_finite() const;
};

struct AdamConfig {
    double learning_rate = 0.001;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    // Coupled L2 folds decay into the gradient before the moment update
    // (the framework default for this optimizer configuration); the
    // decoupled variant subtracts lr*wd*theta after the Adam step.
    bool decoupled_weight_decay = false;
};

struct OptimizerState {
    AdamConfig config;
    long long step = 0;
    Gradients first_moment;
    Gradients second_moment;

    void reset(const NetworkParams& params) {
        step = 0;
        first_moment.resize_like(params);
        second_moment.resize_like(params);
        first_moment.zero();
        second_moment.zero();
    }
};

struct TrainConfig {
    int epochs = 500;
    int batch_size = 64;
    int burn_in_epochs = 20;
    int radii_period = 1;
    std::uint64_t seed = 0;
    AdamConfig adam;
};

struct ForwardResult {
    std::vector<double> logits;   // k
    std::vector<double> hidden1;  // first-hidden-layer latent, used for radii
};

// Called after every epoch with the epoch number (1-based), the current
// parameters and the epoch's mean loss. Returning false stops training.
using EpochHook = std::function<bool(int, const NetworkParams&, double)>;

struct TrainLog {
    std::vector<double> epoch_mean_loss;
};

NetworkParams init_params(int input_dim, int num_classes, std::uint64_t seed,
                          int hidden1 = 20, int hidden2 = 20);

ForwardResult forward(const NetworkParams& params, std::span<const double> x);

// Mean softmax cross-entropy over the batch plus analytic gradients.
// `batch` holds view-local indices; pass 0..view.size()-1 for a full batch.
double loss_and_grads(const NetworkParams& params, const data::DatasetView& view,
                      std::span<const std::size_t> batch, Gradients& grads);

void adam_step(NetworkParams& params, const Gradients& grads, OptimizerState& state);

// Epochs x minibatches of adam_step with seeded per-epoch reshuffling.
TrainLog train(NetworkParams& params, const data::DatasetView& view, const TrainConfig& config,
               const EpochHook& on_epoch = nullptr);

int predict(const NetworkParams& params, std::span<const double> x);

// Max softmax probability; low confidence marks a hard sample.
double confidence(const NetworkParams& params, std::span<const double> x);

// Negative log-sum-exp of the logits at temperature 1; high energy marks a
// hard sample.
double energy(const NetworkParams& params, std::span<const double> x);

double accuracy(const NetworkParams& params, const data::DatasetView& view);

// First-hidden-layer latents for every sample in the view, row-major
// view.size() x hidden1. Batched so per-epoch radii probes stay cheap.
std::vector<double> hidden1_latents(const NetworkParams& params, const data::DatasetView& view);

// Versioned snapshot file: JSON header (shapes, hyperparameters, seed)
// followed by a little-endian float64 tensor payload.
void save_params(const NetworkParams& params, const std::string& path,
                 std::uint64_t seed = 0, const AdamConfig& adam = AdamConfig{});
NetworkParams load_params(const std::string& path);

}  // namespace stragglers::nn
