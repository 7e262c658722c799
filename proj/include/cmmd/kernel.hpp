#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "cmmd/errors.hpp"
#include "cmmd/linalg.hpp"
#include "cmmd/parallel.hpp"

namespace cmmd {

/// Squared-exponential kernel k(u,v) = sigma^2 * exp(-||u-v||^2 / (2 l^2)).
/// sigma and l live in log space so gradient updates cannot leave the
/// positive orthant.
struct SeKernel {
    double log_lengthscale = 0.0;
    double log_amplitude = 0.0;
    bool trainable_lengthscale = false;
    bool trainable_amplitude = false;

    double lengthscale() const { return std::exp(log_lengthscale); }
    double amplitude() const { return std::exp(log_amplitude); }
};

struct KernelConfig {
    SeKernel input_kernel;
    SeKernel output_kernel;
    // Ridge on the input gram. Deliberately large: A = inv(K+lambda I) K
    // inv(K+lambda I) boosts gram eigenmodes near lambda by up to 1/(4 lambda),
    // and a small ridge lets near-null modes drown the matching signal. At
    // lambda >> ||K|| the weights approach K/lambda^2, a plain kernel
    // smoother, which trains reliably.
    double lambda = 10.0;
};

namespace detail {
inline double sqdist(const Vector& u, const Vector& v) {
    if (u.size() != v.size()) throw DimensionMismatch("kernel: vectors differ in dimension");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - v[i];
        s += d * d;
    }
    return s;
}
}  // namespace detail

inline double kernel_eval(const SeKernel& k, const Vector& u, const Vector& v) {
    const double l = k.lengthscale();
    const double s = k.amplitude();
    return s * s * std::exp(-detail::sqdist(u, v) / (2.0 * l * l));
}

inline Matrix gram(const SeKernel& k, const std::vector<Vector>& xs,
                   const std::vector<Vector>& ys) {
    Matrix g(xs.size(), ys.size());
    parallel_for(xs.size(), [&](std::size_t i) {
        for (std::size_t j = 0; j < ys.size(); ++j) g(i, j) = kernel_eval(k, xs[i], ys[j]);
    });
    return g;
}

inline Matrix gram(const SeKernel& k, const std::vector<Vector>& xs) {
    Matrix g(xs.size(), xs.size());
    const double s2 = k.amplitude() * k.amplitude();
    parallel_for(xs.size(), [&](std::size_t i) {
        g(i, i) = s2;
        for (std::size_t j = 0; j < i; ++j) g(i, j) = kernel_eval(k, xs[i], xs[j]);
    });
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < i; ++j) g(j, i) = g(i, j);
    return g;
}

/// d k(u,v) / d v = k(u,v) * (u - v) / l^2
inline Vector grad_wrt_second(const SeKernel& k, const Vector& u, const Vector& v) {
    const double kv = kernel_eval(k, u, v);
    const double inv_l2 = 1.0 / (k.lengthscale() * k.lengthscale());
    Vector g(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) g[i] = kv * (u[i] - v[i]) * inv_l2;
    return g;
}

/// Gradients with respect to the log-parameters:
///   d k / d log l  = k * ||u-v||^2 / l^2
///   d k / d log s  = 2 k
inline std::pair<double, double> grad_wrt_params(const SeKernel& k, const Vector& u,
                                                 const Vector& v) {
    const double d2 = detail::sqdist(u, v);
    const double l = k.lengthscale();
    const double kv = k.amplitude() * k.amplitude() * std::exp(-d2 / (2.0 * l * l));
    return {kv * d2 / (l * l), 2.0 * kv};
}

/// Median pairwise distance, the usual lengthscale initializer. Falls back to
/// 1 when every pair coincides.
inline double median_heuristic(const std::vector<Vector>& xs) {
    std::vector<double> d;
    d.reserve(xs.size() * (xs.size() - 1) / 2);
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            const double s = detail::sqdist(xs[i], xs[j]);
            if (s > 0.0) d.push_back(std::sqrt(s));
        }
    if (d.empty()) return 1.0;
    std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
    return d[d.size() / 2];
}

}  // namespace cmmd
