#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "cmmd/dataset.hpp"
#include "cmmd/discrepancy.hpp"
#include "cmmd/errors.hpp"
#include "cmmd/kernel.hpp"
#include "cmmd/network.hpp"
#include "cmmd/rng.hpp"

namespace cmmd {

struct TrainingConfig {
    std::size_t epochs = 300;
    std::size_t batch_size = 300;
    std::size_t noise_dim = 21;          // M, a.k.a. N_z
    std::size_t noise_regen_interval = 5;  // k
    double lambda = 10.0;  // see KernelConfig::lambda
    std::uint64_t seed = 0;
    bool standardize_inputs = true;
    bool standardize_outputs = true;
    AdamConfig optimizer;
    std::vector<std::size_t> hidden_dims = {64, 64, 64};
    Activation output_activation = Activation::linear;
    bool train_output_lengthscale = true;
    bool train_output_amplitude = false;
    // <= 0: initialize from the median heuristic on the standardized data
    double input_lengthscale = 0.0;
    double output_lengthscale = 0.0;

    void validate(std::size_t total_rows) const {
        if (noise_dim < 1) throw ConfigError("noise_dim must be >= 1");
        if (noise_regen_interval < 1) throw ConfigError("noise_regen_interval must be >= 1");
        if (batch_size < 1 || batch_size > total_rows)
            throw ConfigError("batch_size must be in [1, total rows]");
        if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
        if (hidden_dims.empty()) throw ConfigError("at least one hidden layer required");
    }
};

struct TrainingReport {
    std::vector<double> epoch_mean_loss;
    double wall_seconds = 0.0;
    double final_output_log_lengthscale = 0.0;
    double final_output_log_amplitude = 0.0;
};

/// Frozen generator: network, kernel state, standardization transforms and
/// the noise dimension. Immutable once trained; sampling derives its own RNG
/// stream per call.
struct TrainedSurrogate {
    MlpParams mlp;
    KernelConfig kernels;
    AffineTransform input_transform;
    AffineTransform output_transform;
    std::size_t noise_dim = 0;
    TrainingReport report;

    std::size_t input_dim() const { return input_transform.dim(); }
    std::size_t output_dim() const { return output_transform.dim(); }
};

namespace detail {

/// Gathers gradient pointers/values in a fixed order: weights, biases, then
/// trainable kernel log-parameters.
struct ParamView {
    std::vector<double*> params;
    std::size_t size() const { return params.size(); }
};

inline ParamView collect_params(MlpParams& mlp, SeKernel& output_kernel) {
    ParamView v;
    for (auto& w : mlp.layer_weights)
        for (double& x : w.data()) v.params.push_back(&x);
    for (auto& b : mlp.layer_biases)
        for (double& x : b) v.params.push_back(&x);
    if (output_kernel.trainable_lengthscale) v.params.push_back(&output_kernel.log_lengthscale);
    if (output_kernel.trainable_amplitude) v.params.push_back(&output_kernel.log_amplitude);
    return v;
}

inline std::vector<double> collect_grads(const MlpGrad& g, const SeKernel& output_kernel,
                                         const KernelGrad& kg) {
    std::vector<double> out;
    for (const auto& w : g.d_weights) out.insert(out.end(), w.data().begin(), w.data().end());
    for (const auto& b : g.d_biases) out.insert(out.end(), b.begin(), b.end());
    if (output_kernel.trainable_lengthscale) out.push_back(kg.d_log_lengthscale);
    if (output_kernel.trainable_amplitude) out.push_back(kg.d_log_amplitude);
    return out;
}

}  // namespace detail

/// Mini-batch CMMD training of the generator network. Per epoch: regenerate
/// the per-row noise every `noise_regen_interval` epochs, shuffle rows into
/// batches, and for each batch run forward, paired CMMD loss/gradient and an
/// Adam update of the network plus trainable kernel parameters.
inline TrainedSurrogate train(const Dataset& data, const TrainingConfig& cfg) {
    std::vector<Vector> xs_raw, ys_raw;
    data.flatten(xs_raw, ys_raw);
    if (xs_raw.empty()) throw EmptySample("train: empty dataset");
    cfg.validate(xs_raw.size());

    TrainedSurrogate surrogate;
    surrogate.noise_dim = cfg.noise_dim;

    surrogate.input_transform = cfg.standardize_inputs
                                    ? fit_standardizer(xs_raw).transform
                                    : AffineTransform::identity(xs_raw.front().size());
    surrogate.output_transform = cfg.standardize_outputs
                                     ? fit_standardizer(ys_raw).transform
                                     : AffineTransform::identity(ys_raw.front().size());

    const std::size_t n_rows = xs_raw.size();
    std::vector<Vector> xs(n_rows), ys(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) {
        xs[i] = surrogate.input_transform.apply(xs_raw[i]);
        ys[i] = surrogate.output_transform.apply(ys_raw[i]);
    }

    KernelConfig& kernels = surrogate.kernels;
    kernels.lambda = cfg.lambda;
    kernels.input_kernel.log_lengthscale =
        std::log(cfg.input_lengthscale > 0.0 ? cfg.input_lengthscale : median_heuristic(xs));
    kernels.output_kernel.log_lengthscale =
        std::log(cfg.output_lengthscale > 0.0 ? cfg.output_lengthscale : median_heuristic(ys));
    kernels.output_kernel.trainable_lengthscale = cfg.train_output_lengthscale;
    kernels.output_kernel.trainable_amplitude = cfg.train_output_amplitude;

    const std::size_t in_dim = xs.front().size() + cfg.noise_dim;
    const std::size_t out_dim = ys.front().size();
    std::vector<std::size_t> dims;
    dims.push_back(in_dim);
    dims.insert(dims.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
    dims.push_back(out_dim);
    Rng init_rng(cfg.seed, "init");
    surrogate.mlp = init_mlp(dims, cfg.output_activation, init_rng);

    auto params = detail::collect_params(surrogate.mlp, kernels.output_kernel);
    AdamState adam(params.size(), cfg.optimizer);

    std::vector<Vector> noise(n_rows, Vector(cfg.noise_dim, 0.0));
    std::vector<std::size_t> order(n_rows);
    std::iota(order.begin(), order.end(), 0);

    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (epoch % cfg.noise_regen_interval == 0) {
            const std::size_t window = epoch / cfg.noise_regen_interval;
            for (std::size_t i = 0; i < n_rows; ++i) {
                Rng rng(cfg.seed, "noise", window, i);
                for (double& v : noise[i]) v = rng.normal();
            }
        }
        {
            Rng shuffle_rng(cfg.seed, "shuffle", epoch);
            std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
        }

        double loss_sum = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < n_rows; start += cfg.batch_size) {
            const std::size_t end = std::min(start + cfg.batch_size, n_rows);
            const std::size_t b = end - start;
            std::vector<Vector> bx(b), by(b), binput(b);
            for (std::size_t r = 0; r < b; ++r) {
                const std::size_t row = order[start + r];
                bx[r] = xs[row];
                by[r] = ys[row];
                binput[r] = xs[row];
                binput[r].insert(binput[r].end(), noise[row].begin(), noise[row].end());
            }
            CmmdWorkspace ws = make_cmmd_workspace(kernels, std::move(bx), std::move(by));

            ForwardTape tape;
            const std::vector<Vector> generated = forward(surrogate.mlp, binput, &tape);
            const CmmdLossGrad lg = cmmd_loss_and_grad(ws, kernels, generated);
            if (!std::isfinite(lg.loss)) throw NumericalError("train: loss is not finite");
            const MlpGrad net_grad = backward(surrogate.mlp, tape, lg.d_outputs);
            adam.step(params.params,
                      detail::collect_grads(net_grad, kernels.output_kernel, lg.d_output_kernel));
            loss_sum += lg.loss;
            ++n_batches;
        }
        surrogate.report.epoch_mean_loss.push_back(loss_sum / static_cast<double>(n_batches));
    }
    surrogate.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    surrogate.report.final_output_log_lengthscale = kernels.output_kernel.log_lengthscale;
    surrogate.report.final_output_log_amplitude = kernels.output_kernel.log_amplitude;
    return surrogate;
}

/// Draws n conditional samples y | x: fresh standard-normal noise per draw,
/// forward pass, inverse output transform.
inline std::vector<Vector> sample(const TrainedSurrogate& surrogate, const Vector& x,
                                  std::size_t n, std::uint64_t seed) {
    if (x.size() != surrogate.input_dim())
        throw DimensionMismatch("sample: input dimension mismatch");
    const Vector xt = surrogate.input_transform.apply(x);
    Rng rng(seed, "sample");
    std::vector<Vector> inputs(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vector in = xt;
        for (std::size_t m = 0; m < surrogate.noise_dim; ++m) in.push_back(rng.normal());
        inputs[i] = std::move(in);
    }
    std::vector<Vector> raw = forward(surrogate.mlp, inputs);
    for (auto& y : raw) y = surrogate.output_transform.invert(y);
    return raw;
}

/// Scalar-output convenience wrapper.
inline std::vector<double> sample_scalar(const TrainedSurrogate& surrogate, const Vector& x,
                                         std::size_t n, std::uint64_t seed) {
    const auto ys = sample(surrogate, x, n, seed);
    std::vector<double> out(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) out[i] = ys[i][0];
    return out;
}

}  // namespace cmmd
