#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "cmmd/errors.hpp"
#include "cmmd/linalg.hpp"
#include "cmmd/rng.hpp"

namespace cmmd {

enum class Activation { linear, relu, leaky_relu, swish };

inline std::string to_string(Activation a) {
    switch (a) {
        case Activation::linear: return "linear";
        case Activation::relu: return "relu";
        case Activation::leaky_relu: return "leaky_relu";
        case Activation::swish: return "swish";
    }
    return "linear";
}

inline Activation activation_from_string(const std::string& s) {
    if (s == "linear") return Activation::linear;
    if (s == "relu") return Activation::relu;
    if (s == "leaky_relu") return Activation::leaky_relu;
    if (s == "swish") return Activation::swish;
    throw ConfigError("unknown activation: " + s);
}

inline double activate(Activation a, double u) {
    switch (a) {
        case Activation::linear: return u;
        case Activation::relu: return u > 0.0 ? u : 0.0;
        case Activation::leaky_relu: return u > 0.0 ? u : 0.01 * u;
        case Activation::swish: return u / (1.0 + std::exp(-u));
    }
    return u;
}

inline double activate_grad(Activation a, double u) {
    switch (a) {
        case Activation::linear: return 1.0;
        case Activation::relu: return u > 0.0 ? 1.0 : 0.0;
        case Activation::leaky_relu: return u > 0.0 ? 1.0 : 0.01;
        case Activation::swish: {
            const double s = 1.0 / (1.0 + std::exp(-u));
            return s + u * s * (1.0 - s);
        }
    }
    return 1.0;
}

/// Feed-forward generator parameters: a chain of affine layers, ReLU on the
/// hidden ones and a configurable output activation.
struct MlpParams {
    std::vector<Matrix> layer_weights;  // weights[l]: (out_dim x in_dim)
    std::vector<Vector> layer_biases;
    Activation hidden_activation = Activation::relu;
    Activation output_activation = Activation::linear;

    std::size_t num_layers() const { return layer_weights.size(); }
    std::size_t input_dim() const { return layer_weights.front().cols(); }
    std::size_t output_dim() const { return layer_weights.back().rows(); }
};

/// He-uniform hidden layers, Xavier-uniform output layer.
inline MlpParams init_mlp(const std::vector<std::size_t>& dims, Activation output_activation,
                          Rng& rng) {
    if (dims.size() < 2) throw ConfigError("network needs at least input and output dims");
    MlpParams p;
    p.output_activation = output_activation;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t fan_in = dims[l], fan_out = dims[l + 1];
        const bool last = (l + 2 == dims.size());
        const double limit = last ? std::sqrt(6.0 / static_cast<double>(fan_in + fan_out))
                                  : std::sqrt(6.0 / static_cast<double>(fan_in));
        Matrix w(fan_out, fan_in);
        for (double& v : w.data()) v = rng.uniform(-limit, limit);
        p.layer_weights.push_back(std::move(w));
        p.layer_biases.emplace_back(fan_out, 0.0);
    }
    return p;
}

/// Activation record of a forward pass over a batch.
struct ForwardTape {
    // activations[l][i]: input of layer l for batch item i; activations.back()
    // holds the network outputs
    std::vector<std::vector<Vector>> activations;
    // pre_activations[l][i]: affine output of layer l before its nonlinearity
    std::vector<std::vector<Vector>> pre_activations;
};

inline std::vector<Vector> forward(const MlpParams& p, const std::vector<Vector>& inputs,
                                   ForwardTape* tape = nullptr) {
    const std::size_t layers = p.num_layers();
    if (tape) {
        tape->activations.assign(layers + 1, {});
        tape->pre_activations.assign(layers, {});
        tape->activations[0] = inputs;
    }
    std::vector<Vector> cur = inputs;
    for (std::size_t l = 0; l < layers; ++l) {
        const Matrix& w = p.layer_weights[l];
        const Vector& b = p.layer_biases[l];
        const Activation act =
            (l + 1 == layers) ? p.output_activation : p.hidden_activation;
        std::vector<Vector> next(cur.size());
        if (tape) tape->pre_activations[l].resize(cur.size());
        for (std::size_t i = 0; i < cur.size(); ++i) {
            if (cur[i].size() != w.cols())
                throw DimensionMismatch("forward: input dimension does not match layer");
            Vector z(w.rows());
            for (std::size_t r = 0; r < w.rows(); ++r) {
                const double* wr = w.row_ptr(r);
                double s = b[r];
                for (std::size_t c = 0; c < w.cols(); ++c) s += wr[c] * cur[i][c];
                z[r] = s;
            }
            if (tape) tape->pre_activations[l][i] = z;
            Vector a(w.rows());
            for (std::size_t r = 0; r < w.rows(); ++r) a[r] = activate(act, z[r]);
            next[i] = std::move(a);
        }
        cur = std::move(next);
        if (tape) tape->activations[l + 1] = cur;
    }
    return cur;
}

struct MlpGrad {
    std::vector<Matrix> d_weights;
    std::vector<Vector> d_biases;
};

inline MlpGrad zero_grad(const MlpParams& p) {
    MlpGrad g;
    for (std::size_t l = 0; l < p.num_layers(); ++l) {
        g.d_weights.emplace_back(p.layer_weights[l].rows(), p.layer_weights[l].cols());
        g.d_biases.emplace_back(p.layer_biases[l].size(), 0.0);
    }
    return g;
}

/// Reverse-mode gradient of sum_i <d_outputs[i], outputs[i]> with respect to
/// every weight and bias, accumulated in batch-index order.
inline MlpGrad backward(const MlpParams& p, const ForwardTape& tape,
                        const std::vector<Vector>& d_outputs) {
    const std::size_t layers = p.num_layers();
    if (tape.activations.size() != layers + 1)
        throw DimensionMismatch("backward: tape does not match network depth");
    const std::size_t batch = tape.activations[0].size();
    if (d_outputs.size() != batch)
        throw DimensionMismatch("backward: output gradient batch size differs from tape");

    MlpGrad g = zero_grad(p);
    for (std::size_t i = 0; i < batch; ++i) {
        if (d_outputs[i].size() != p.output_dim())
            throw DimensionMismatch("backward: output gradient dimension mismatch");
        Vector delta = d_outputs[i];
        for (std::size_t li = layers; li-- > 0;) {
            const Activation act =
                (li + 1 == layers) ? p.output_activation : p.hidden_activation;
            const Vector& z = tape.pre_activations[li][i];
            const Vector& a_in = tape.activations[li][i];
            for (std::size_t r = 0; r < delta.size(); ++r)
                delta[r] *= activate_grad(act, z[r]);
            const Matrix& w = p.layer_weights[li];
            Matrix& dw = g.d_weights[li];
            Vector& db = g.d_biases[li];
            for (std::size_t r = 0; r < w.rows(); ++r) {
                db[r] += delta[r];
                double* dwr = dw.row_ptr(r);
                for (std::size_t c = 0; c < w.cols(); ++c) dwr[c] += delta[r] * a_in[c];
            }
            if (li > 0) {
                Vector prev(w.cols(), 0.0);
                for (std::size_t r = 0; r < w.rows(); ++r) {
                    const double* wr = w.row_ptr(r);
                    for (std::size_t c = 0; c < w.cols(); ++c) prev[c] += wr[c] * delta[r];
                }
                delta = std::move(prev);
            }
        }
    }
    return g;
}

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam state over a flat parameter view: network weights/biases followed by
/// any trainable kernel log-parameters.
class AdamState {
public:
    AdamState(std::size_t n_params, AdamConfig cfg)
        : cfg_(cfg), m_(n_params, 0.0), v_(n_params, 0.0) {}

    std::size_t step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

    /// In-place bias-corrected Adam update of `params` given `grads`.
    void step(std::vector<double*> params, const std::vector<double>& grads) {
        if (params.size() != m_.size() || grads.size() != m_.size())
            throw DimensionMismatch("adam: parameter count mismatch");
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < m_.size(); ++i) {
            const double gi = grads[i];
            m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * gi;
            v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * gi * gi;
            const double mhat = m_[i] / bc1;
            const double vhat = v_[i] / bc2;
            *params[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
    }

private:
    AdamConfig cfg_;
    std::size_t t_ = 0;
    std::vector<double> m_;
    std::vector<double> v_;
};

}  // namespace cmmd
