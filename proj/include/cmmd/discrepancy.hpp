#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "cmmd/errors.hpp"
#include "cmmd/kernel.hpp"
#include "cmmd/linalg.hpp"

namespace cmmd {

/// Biased two-sample MMD^2: mean k(x,x') - 2 mean k(x,y) + mean k(y,y'),
/// diagonals included. Works for any symmetric kernel callable.
template <typename KernelFn>
double mmd_squared_biased_fn(KernelFn&& kernel, const std::vector<Vector>& xs,
                             const std::vector<Vector>& ys) {
    if (xs.empty() || ys.empty()) throw EmptySample("mmd: empty sample set");
    auto mean_gram = [&kernel](const std::vector<Vector>& a, const std::vector<Vector>& b) {
        double s = 0.0;
        for (const auto& u : a)
            for (const auto& v : b) s += kernel(u, v);
        return s / static_cast<double>(a.size() * b.size());
    };
    return mean_gram(xs, xs) - 2.0 * mean_gram(xs, ys) + mean_gram(ys, ys);
}

inline double mmd_squared_biased(const SeKernel& k, const std::vector<Vector>& xs,
                                 const std::vector<Vector>& ys) {
    return mmd_squared_biased_fn(
        [&k](const Vector& u, const Vector& v) { return kernel_eval(k, u, v); }, xs, ys);
}

/// Conditional MMD^2 between two (input, output) datasets in the three-trace
/// gram form. All inverses go through Cholesky solves.
inline double cmmd_squared_general(const KernelConfig& cfg,
                                   const std::vector<Vector>& d_inputs,
                                   const std::vector<Vector>& d_outputs,
                                   const std::vector<Vector>& s_inputs,
                                   const std::vector<Vector>& s_outputs) {
    if (d_inputs.empty() || s_inputs.empty()) throw EmptySample("cmmd: empty dataset");
    if (d_inputs.size() != d_outputs.size() || s_inputs.size() != s_outputs.size())
        throw DimensionMismatch("cmmd: inputs/outputs row counts differ");
    if (!(cfg.lambda > 0.0)) throw ConfigError("cmmd: lambda must be positive");

    const std::size_t nd = d_inputs.size();
    const std::size_t ns = s_inputs.size();

    Matrix kd = gram(cfg.input_kernel, d_inputs);
    Matrix ks = gram(cfg.input_kernel, s_inputs);
    Matrix ksd = gram(cfg.input_kernel, s_inputs, d_inputs);
    Matrix ld = gram(cfg.output_kernel, d_outputs);
    Matrix ls = gram(cfg.output_kernel, s_outputs);
    Matrix lds = gram(cfg.output_kernel, d_outputs, s_outputs);

    Matrix kd_reg = kd;
    for (std::size_t i = 0; i < nd; ++i) kd_reg(i, i) += cfg.lambda;
    Matrix ks_reg = ks;
    for (std::size_t i = 0; i < ns; ++i) ks_reg(i, i) += cfg.lambda;

    CholeskyFactor chol_d(kd_reg);
    CholeskyFactor chol_s(ks_reg);

    // Tr(K_d Kt_d^-1 L_d Kt_d^-1)
    const double t1 = trace_product(kd, chol_d.solve(chol_d.solve(ld).transposed()));
    // Tr(K_s Kt_s^-1 L_s Kt_s^-1)
    const double t2 = trace_product(ks, chol_s.solve(chol_s.solve(ls).transposed()));
    // Tr(K_sd Kt_d^-1 L_ds Kt_s^-1)
    const Matrix mid = chol_s.solve(chol_d.solve(lds).transposed()).transposed();
    const double t3 = trace_product(ksd, mid);

    return t1 + t2 - 2.0 * t3;
}

/// Per-batch state for the shared-input specialization of the CMMD objective.
/// A = Kt^-1 K Kt^-1 depends only on the batch inputs and the input kernel,
/// so it is computed once per mini-batch.
struct CmmdWorkspace {
    Matrix a_matrix;
    std::vector<Vector> batch_inputs;
    std::vector<Vector> data_outputs;
    double lambda = 0.0;
};

inline CmmdWorkspace make_cmmd_workspace(const KernelConfig& cfg,
                                         std::vector<Vector> batch_inputs,
                                         std::vector<Vector> data_outputs) {
    if (batch_inputs.empty()) throw EmptySample("cmmd workspace: empty batch");
    if (batch_inputs.size() != data_outputs.size())
        throw DimensionMismatch("cmmd workspace: inputs/outputs row counts differ");
    const std::size_t n = batch_inputs.size();
    Matrix k = gram(cfg.input_kernel, batch_inputs);
    Matrix k_reg = k;
    for (std::size_t i = 0; i < n; ++i) k_reg(i, i) += cfg.lambda;
    CholeskyFactor chol(k_reg);
    Matrix a = chol.solve(chol.solve(k).transposed());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));
    return CmmdWorkspace{std::move(a), std::move(batch_inputs), std::move(data_outputs),
                         cfg.lambda};
}

/// CMMD^2 when both datasets share the batch inputs:
/// sum_ij A_ij [ l(yd_i, yd_j) + l(ys_i, ys_j) - 2 l(yd_i, ys_j) ].
inline double cmmd_squared_paired(const CmmdWorkspace& ws, const KernelConfig& cfg,
                                  const std::vector<Vector>& s_outputs) {
    const std::size_t n = ws.data_outputs.size();
    if (s_outputs.size() != n)
        throw DimensionMismatch("cmmd paired: generated output count differs from batch");
    const SeKernel& ok = cfg.output_kernel;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            acc += ws.a_matrix(i, j) *
                   (kernel_eval(ok, ws.data_outputs[i], ws.data_outputs[j]) +
                    kernel_eval(ok, s_outputs[i], s_outputs[j]) -
                    2.0 * kernel_eval(ok, ws.data_outputs[i], s_outputs[j]));
    return acc;
}

struct KernelGrad {
    double d_log_lengthscale = 0.0;
    double d_log_amplitude = 0.0;
};

struct CmmdLossGrad {
    double loss = 0.0;
    std::vector<Vector> d_outputs;  // d loss / d ys_i
    KernelGrad d_output_kernel;     // zero for non-trainable parameters
};

inline constexpr double kCmmdLossEps = 1e-12;

/// Loss sqrt(CMMD^2 + eps) plus its gradient with respect to the generated
/// outputs and the trainable output-kernel log-parameters. A is treated as
/// constant (it only involves the input kernel).
inline CmmdLossGrad cmmd_loss_and_grad(const CmmdWorkspace& ws, const KernelConfig& cfg,
                                       const std::vector<Vector>& s_outputs) {
    const std::size_t n = ws.data_outputs.size();
    if (s_outputs.size() != n)
        throw DimensionMismatch("cmmd grad: generated output count differs from batch");
    const SeKernel& ok = cfg.output_kernel;
    const std::size_t dim = s_outputs.empty() ? 0 : s_outputs[0].size();

    double l2 = 0.0;
    std::vector<Vector> d2(n, Vector(dim, 0.0));  // d CMMD^2 / d ys
    double dl_log_l = 0.0, dl_log_s = 0.0;
    const bool want_l = ok.trainable_lengthscale;
    const bool want_s = ok.trainable_amplitude;

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double aij = ws.a_matrix(i, j);
            l2 += aij * (kernel_eval(ok, ws.data_outputs[i], ws.data_outputs[j]) +
                         kernel_eval(ok, s_outputs[i], s_outputs[j]) -
                         2.0 * kernel_eval(ok, ws.data_outputs[i], s_outputs[j]));
            // d/dys_i of the symmetric double sum: 2 A_ij [ dl(ys_j, ys_i)/dys_i
            //                                             - dl(yd_j, ys_i)/dys_i ]
            const Vector gs = grad_wrt_second(ok, s_outputs[j], s_outputs[i]);
            const Vector gd = grad_wrt_second(ok, ws.data_outputs[j], s_outputs[i]);
            for (std::size_t c = 0; c < dim; ++c) d2[i][c] += 2.0 * aij * (gs[c] - gd[c]);
            if (want_l || want_s) {
                const auto [pl_dd, ps_dd] =
                    grad_wrt_params(ok, ws.data_outputs[i], ws.data_outputs[j]);
                const auto [pl_ss, ps_ss] = grad_wrt_params(ok, s_outputs[i], s_outputs[j]);
                const auto [pl_ds, ps_ds] =
                    grad_wrt_params(ok, ws.data_outputs[i], s_outputs[j]);
                dl_log_l += aij * (pl_dd + pl_ss - 2.0 * pl_ds);
                dl_log_s += aij * (ps_dd + ps_ss - 2.0 * ps_ds);
            }
        }
    }

    CmmdLossGrad out;
    out.loss = std::sqrt(std::max(l2, 0.0) + kCmmdLossEps);
    const double scale = 0.5 / out.loss;
    out.d_outputs = std::move(d2);
    for (auto& g : out.d_outputs)
        for (double& v : g) v *= scale;
    out.d_output_kernel.d_log_lengthscale = want_l ? dl_log_l * scale : 0.0;
    out.d_output_kernel.d_log_amplitude = want_s ? dl_log_s * scale : 0.0;
    return out;
}

}  // namespace cmmd
