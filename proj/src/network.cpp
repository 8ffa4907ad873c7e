#include "stragglers/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "stragglers/errors.hpp"
#include "stragglers/rng.hpp"

namespace stragglers::nn {

namespace {

bool finite_all(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void affine(const double* w, const double* b, const double* x, int out_dim, int in_dim,
            double* y) {
    for (int o = 0; o < out_dim; ++o) {
        const double* row = w + static_cast<std::size_t>(o) * in_dim;
        double acc = b[o];
        for (int i = 0; i < in_dim; ++i) {
            acc += row[i] * x[i];
        }
        y[o] = acc;
    }
}

// Scratch buffers for one sample's forward/backward pass, reused across the
// batch to keep the training loop allocation-free.
struct Workspace {
    std::vector<double> z1, h1, z2, h2, logits, probs;
    std::vector<double> dlogits, dh2, dh1;

    void resize(const NetworkParams& p) {
        z1.resize(p.hidden1);
        h1.resize(p.hidden1);
        z2.resize(p.hidden2);
        h2.resize(p.hidden2);
        logits.resize(p.num_classes);
        probs.resize(p.num_classes);
        dlogits.resize(p.num_classes);
        dh2.resize(p.hidden2);
        dh1.resize(p.hidden1);
    }
};

void forward_into(const NetworkParams& p, std::span<const double> x, Workspace& ws) {
    affine(p.w1.data(), p.b1.data(), x.data(), p.hidden1, p.input_dim, ws.z1.data());
    for (int i = 0; i < p.hidden1; ++i) ws.h1[i] = ws.z1[i] > 0.0 ? ws.z1[i] : 0.0;
    affine(p.w2.data(), p.b2.data(), ws.h1.data(), p.hidden2, p.hidden1, ws.z2.data());
    for (int i = 0; i < p.hidden2; ++i) ws.h2[i] = ws.z2[i] > 0.0 ? ws.z2[i] : 0.0;
    affine(p.w3.data(), p.b3.data(), ws.h2.data(), p.num_classes, p.hidden2, ws.logits.data());
}

// Max-shifted softmax; returns log-sum-exp of the shifted logits plus the max.
double stable_softmax(const std::vector<double>& logits, std::vector<double>& probs) {
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - m);
        sum += probs[i];
    }
    for (double& p : probs) p /= sum;
    return m + std::log(sum);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32_le(std::istream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw TruncatedFile(path + ": truncated header length");
    }
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f64_le(std::ostream& out, const std::vector<double>& values) {
    for (double v : values) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
        out.write(reinterpret_cast<const char*>(b), 8);
    }
}

void read_f64_le(std::istream& in, std::vector<double>& values, const std::string& path) {
    for (double& v : values) {
        unsigned char b[8];
        if (!in.read(reinterpret_cast<char*>(b), 8)) {
            throw TruncatedFile(path + ": truncated tensor payload");
        }
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        v = std::bit_cast<double>(bits);
    }
}

constexpr char kParamsMagic[8] = {'S', 'G', 'L', 'R', 'P', 'R', 'M', '1'};

}  // namespace

bool NetworkParams::all_finite() const {
    return finite_all(w1) && finite_all(b1) && finite_all(w2) && finite_all(b2) &&
           finite_all(w3) && finite_all(b3);
}

void Gradients::resize_like(const NetworkParams& p) {
    w1.resize(p.w1.size());
    b1.resize(p.b1.size());
    w2.resize(p.w2.size());
    b2.resize(p.b2.size());
    w3.resize(p.w3.size());
    b3.resize(p.b3.size());
}

void Gradients::zero() {
    for (auto* t : {&w1, &b1, &w2, &b2, &w3, &b3}) {
        std::fill(t->begin(), t->end(), 0.0);
    }
}

bool Gradients::all_finite() const {
    return finite_all(w1) && finite_all(b1) && finite_all(w2) && finite_all(b2) &&
           finite_all(w3) && finite_all(b3);
}

NetworkParams init_params(int input_dim, int num_classes, std::uint64_t seed, int hidden1,
                          int hidden2) {
    if (input_dim < 1 || num_classes < 1 || hidden1 < 1 || hidden2 < 1) {
        throw Error("network dimensions must be >= 1");
    }
    NetworkParams p;
    p.input_dim = input_dim;
    p.hidden1 = hidden1;
    p.hidden2 = hidden2;
    p.num_classes = num_classes;
    p.w1.resize(static_cast<std::size_t>(hidden1) * input_dim);
    p.b1.assign(hidden1, 0.0);
    p.w2.resize(static_cast<std::size_t>(hidden2) * hidden1);
    p.b2.assign(hidden2, 0.0);
    p.w3.resize(static_cast<std::size_t>(num_classes) * hidden2);
    p.b3.assign(num_classes, 0.0);

    Rng rng(derive_seed(seed, {0x696e6974}));  // "init"
    auto fill = [&rng](std::vector<double>& w, int fan_in) {
        const double bound = std::sqrt(2.0 / fan_in);
        for (double& v : w) v = rng.uniform(-bound, bound);
    };
    fill(p.w1, input_dim);
    fill(p.w2, hidden1);
    fill(p.w3, hidden2);
    return p;
}

ForwardResult forward(const NetworkParams& params, std::span<const double> x) {
    if (static_cast<int>(x.size()) != params.input_dim) {
        throw DimensionMismatch("input has " + std::to_string(x.size()) + " entries, network expects " +
                                std::to_string(params.input_dim));
    }
    Workspace ws;
    ws.resize(params);
    forward_into(params, x, ws);
    return {ws.logits, ws.h1};
}

double loss_and_grads(const NetworkParams& params, const data::DatasetView& view,
                      std::span<const std::size_t> batch, Gradients& grads) {
    if (batch.empty()) {
        throw EmptySet("loss_and_grads requires a non-empty batch");
    }
    grads.resize_like(params);
    grads.zero();

    Workspace ws;
    ws.resize(params);
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;

    for (std::size_t idx : batch) {
        const auto x = view.feature(idx);
        const int target = view.label(idx);
        forward_into(params, x, ws);
        const double lse = stable_softmax(ws.logits, ws.probs);
        loss += (lse - ws.logits[static_cast<std::size_t>(target)]) * inv_batch;

        for (int j = 0; j < params.num_classes; ++j) {
            ws.dlogits[j] = ws.probs[j] * inv_batch;
        }
        ws.dlogits[static_cast<std::size_t>(target)] -= inv_batch;

        // layer 3
        for (int o = 0; o < params.num_classes; ++o) {
            const double d = ws.dlogits[o];
            double* gw = grads.w3.data() + static_cast<std::size_t>(o) * params.hidden2;
            for (int i = 0; i < params.hidden2; ++i) gw[i] += d * ws.h2[i];
            grads.b3[o] += d;
        }
        for (int i = 0; i < params.hidden2; ++i) {
            double acc = 0.0;
            for (int o = 0; o < params.num_classes; ++o) {
                acc += params.w3[static_cast<std::size_t>(o) * params.hidden2 + i] * ws.dlogits[o];
            }
            ws.dh2[i] = ws.z2[i] > 0.0 ? acc : 0.0;
        }
        // layer 2
        for (int o = 0; o < params.hidden2; ++o) {
            const double d = ws.dh2[o];
            if (d == 0.0) continue;
            double* gw = grads.w2.data() + static_cast<std::size_t>(o) * params.hidden1;
            for (int i = 0; i < params.hidden1; ++i) gw[i] += d * ws.h1[i];
            grads.b2[o] += d;
        }
        for (int i = 0; i < params.hidden1; ++i) {
            double acc = 0.0;
            for (int o = 0; o < params.hidden2; ++o) {
                acc += params.w2[static_cast<std::size_t>(o) * params.hidden1 + i] * ws.dh2[o];
            }
            ws.dh1[i] = ws.z1[i] > 0.0 ? acc : 0.0;
        }
        // layer 1
        for (int o = 0; o < params.hidden1; ++o) {
            const double d = ws.dh1[o];
            if (d == 0.0) continue;
            double* gw = grads.w1.data() + static_cast<std::size_t>(o) * params.input_dim;
            for (int i = 0; i < params.input_dim; ++i) gw[i] += d * x[i];
            grads.b1[o] += d;
        }
    }
    return loss;
}

void adam_step(NetworkParams& params, const Gradients& grads, OptimizerState& state) {
    if (grads.w1.size() != params.w1.size() || grads.w2.size() != params.w2.size() ||
        grads.w3.size() != params.w3.size()) {
        throw DimensionMismatch("gradient shapes do not match parameters");
    }
    if (!grads.all_finite()) {
        throw NonFiniteGradient("non-finite gradient entry");
    }
    if (state.first_moment.w1.size() != params.w1.size()) {
        state.reset(params);
    }
    state.step += 1;
    const AdamConfig& c = state.config;
    const double bias1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));

    auto update = [&](std::vector<double>& theta, const std::vector<double>& g,
                      std::vector<double>& m, std::vector<double>& v) {
        for (std::size_t i = 0; i < theta.size(); ++i) {
            double grad = g[i];
            if (!c.decoupled_weight_decay) {
                grad += c.weight_decay * theta[i];
            }
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * grad;
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * grad * grad;
            const double m_hat = m[i] / bias1;
            const double v_hat = v[i] / bias2;
            theta[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
            if (c.decoupled_weight_decay) {
                theta[i] -= c.learning_rate * c.weight_decay * theta[i];
            }
        }
    };
    update(params.w1, grads.w1, state.first_moment.w1, state.second_moment.w1);
    update(params.b1, grads.b1, state.first_moment.b1, state.second_moment.b1);
    update(params.w2, grads.w2, state.first_moment.w2, state.second_moment.w2);
    update(params.b2, grads.b2, state.first_moment.b2, state.second_moment.b2);
    update(params.w3, grads.w3, state.first_moment.w3, state.second_moment.w3);
    update(params.b3, grads.b3, state.first_moment.b3, state.second_moment.b3);
}

TrainLog train(NetworkParams& params, const data::DatasetView& view, const TrainConfig& config,
               const EpochHook& on_epoch) {
    if (view.size() == 0) {
        throw EmptySet("cannot train on an empty view");
    }
    TrainLog log;
    if (config.epochs <= 0) {
        return log;
    }
    OptimizerState state;
    state.config = config.adam;
    state.reset(params);

    std::vector<std::size_t> order(view.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Gradients grads;
    grads.resize_like(params);

    const std::size_t batch_size =
        std::max<std::size_t>(1, static_cast<std::size_t>(config.batch_size));

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        Rng rng(derive_seed(config.seed, {0x65706f63, static_cast<std::uint64_t>(epoch)}));
        rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t offset = 0;
        std::size_t batch_index = 0;
        while (offset < order.size()) {
            const std::size_t take = std::min(batch_size, order.size() - offset);
            const std::span<const std::size_t> batch(order.data() + offset, take);
            double batch_loss = 0.0;
            try {
                batch_loss = loss_and_grads(params, view, batch, grads);
                adam_step(params, grads, state);
            } catch (const NonFiniteGradient& e) {
                throw NonFiniteGradient("epoch " + std::to_string(epoch) + ", batch " +
                                        std::to_string(batch_index) + ": " + e.what());
            }
            loss_sum += batch_loss * static_cast<double>(take);
            offset += take;
            ++batch_index;
        }
        const double mean_loss = loss_sum / static_cast<double>(order.size());
        log.epoch_mean_loss.push_back(mean_loss);
        if (on_epoch && !on_epoch(epoch, params, mean_loss)) {
            break;
        }
    }
    return log;
}

int predict(const NetworkParams& params, std::span<const double> x) {
    const auto out = forward(params, x);
    int best = 0;
    for (int j = 1; j < params.num_classes; ++j) {
        if (out.logits[static_cast<std::size_t>(j)] > out.logits[static_cast<std::size_t>(best)]) {
            best = j;
        }
    }
    return best;
}

double confidence(const NetworkParams& params, std::span<const double> x) {
    const auto out = forward(params, x);
    std::vector<double> probs(out.logits.size());
    stable_softmax(out.logits, probs);
    return *std::max_element(probs.begin(), probs.end());
}

double energy(const NetworkParams& params, std::span<const double> x) {
    const auto out = forward(params, x);
    const double m = *std::max_element(out.logits.begin(), out.logits.end());
    double sum = 0.0;
    for (double l : out.logits) sum += std::exp(l - m);
    return -(m + std::log(sum));
}

std::vector<double> hidden1_latents(const NetworkParams& params, const data::DatasetView& view) {
    const std::size_t h = static_cast<std::size_t>(params.hidden1);
    std::vector<double> latents(view.size() * h);
    std::vector<double> z1(h);
    for (std::size_t i = 0; i < view.size(); ++i) {
        const auto x = view.feature(i);
        affine(params.w1.data(), params.b1.data(), x.data(), params.hidden1, params.input_dim,
               z1.data());
        double* dst = latents.data() + i * h;
        for (std::size_t j = 0; j < h; ++j) dst[j] = z1[j] > 0.0 ? z1[j] : 0.0;
    }
    return latents;
}

double accuracy(const NetworkParams& params, const data::DatasetView& view) {
    if (view.size() == 0) {
        throw EmptySet("accuracy over an empty view is undefined");
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < view.size(); ++i) {
        if (predict(params, view.feature(i)) == view.label(i)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(view.size());
}

void save_params(const NetworkParams& params, const std::string& path, std::uint64_t seed,
                 const AdamConfig& adam) {
    nlohmann::json header;
    header["version"] = 1;
    header["shapes"] = {{"input_dim", params.input_dim},
                        {"hidden1", params.hidden1},
                        {"hidden2", params.hidden2},
                        {"num_classes", params.num_classes}};
    header["hyperparameters"] = {{"learning_rate", adam.learning_rate},
                                 {"weight_decay", adam.weight_decay},
                                 {"beta1", adam.beta1},
                                 {"beta2", adam.beta2},
                                 {"epsilon", adam.epsilon},
                                 {"decoupled_weight_decay", adam.decoupled_weight_decay}};
    header["seed"] = seed;
    header["tensors"] = {"w1", "b1", "w2", "b2", "w3", "b3"};
    const std::string header_str = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot open " + path + " for writing");
    }
    out.write(kParamsMagic, sizeof(kParamsMagic));
    write_u32_le(out, static_cast<std::uint32_t>(header_str.size()));
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    for (const auto* t : {&params.w1, &params.b1, &params.w2, &params.b2, &params.w3, &params.b3}) {
        write_f64_le(out, *t);
    }
    if (!out) {
        throw Error("failed writing " + path);
    }
}

NetworkParams load_params(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path);
    }
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kParamsMagic, sizeof(magic)) != 0) {
        throw BadMagic(path + ": not a parameter snapshot file");
    }
    const std::uint32_t header_len = read_u32_le(in, path);
    std::string header_str(header_len, '\0');
    if (!in.read(header_str.data(), header_len)) {
        throw TruncatedFile(path + ": truncated JSON header");
    }
    const auto header = nlohmann::json::parse(header_str);
    NetworkParams p;
    p.input_dim = header["shapes"]["input_dim"].get<int>();
    p.hidden1 = header["shapes"]["hidden1"].get<int>();
    p.hidden2 = header["shapes"]["hidden2"].get<int>();
    p.num_classes = header["shapes"]["num_classes"].get<int>();
    p.w1.resize(static_cast<std::size_t>(p.hidden1) * p.input_dim);
    p.b1.resize(p.hidden1);
    p.w2.resize(static_cast<std::size_t>(p.hidden2) * p.hidden1);
    p.b2.resize(p.hidden2);
    p.w3.resize(static_cast<std::size_t>(p.num_classes) * p.hidden2);
    p.b3.resize(p.num_classes);
    for (auto* t : {&p.w1, &p.b1, &p.w2, &p.b2, &p.w3, &p.b3}) {
        read_f64_le(in, *t, path);
    }
    return p;
}

}  // namespace stragglers::nn
