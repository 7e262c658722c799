#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include "cmmd/errors.hpp"

namespace cmmd {

/// KDE-backed density on a uniform grid; the unit of Hellinger comparison.
struct EmpiricalPdf {
    std::vector<double> grid;
    std::vector<double> density;
    double bandwidth = 0.0;

    double lo() const { return grid.front(); }
    double hi() const { return grid.back(); }

    /// Linear interpolation on the grid, zero outside.
    double eval(double y) const {
        if (y < grid.front() || y > grid.back()) return 0.0;
        const double dx = grid[1] - grid[0];
        const auto i = static_cast<std::size_t>((y - grid.front()) / dx);
        if (i + 1 >= grid.size()) return density.back();
        const double w = (y - grid[i]) / dx;
        return density[i] * (1.0 - w) + density[i + 1] * w;
    }
};

inline double trapezoid(const std::vector<double>& grid, const std::vector<double>& vals) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        s += 0.5 * (vals[i] + vals[i + 1]) * (grid[i + 1] - grid[i]);
    return s;
}

/// Gaussian KDE with the Silverman rule-of-thumb bandwidth
/// 0.9 * min(std, IQR/1.34) * n^(-1/5), normalized to integrate to 1 on its
/// grid.
inline EmpiricalPdf kde(std::vector<double> samples, std::size_t grid_size = 1024) {
    if (samples.size() < 2) throw DegenerateSample("kde: need at least 2 samples");
    std::sort(samples.begin(), samples.end());
    if (samples.front() == samples.back())
        throw DegenerateSample("kde: all samples identical");
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    var /= (n - 1.0);
    const double sd = std::sqrt(var);
    auto quantile_sorted = [&](double p) {
        const double pos = p * (n - 1.0);
        const auto i = static_cast<std::size_t>(pos);
        const double w = pos - static_cast<double>(i);
        return i + 1 < samples.size() ? samples[i] * (1.0 - w) + samples[i + 1] * w
                                      : samples[i];
    };
    const double iqr = quantile_sorted(0.75) - quantile_sorted(0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
    const double h = 0.9 * spread * std::pow(n, -0.2);

    EmpiricalPdf pdf;
    pdf.bandwidth = h;
    const double lo = samples.front() - 3.0 * h;
    const double hi = samples.back() + 3.0 * h;
    pdf.grid.resize(grid_size);
    pdf.density.assign(grid_size, 0.0);
    const double dx = (hi - lo) / static_cast<double>(grid_size - 1);
    for (std::size_t g = 0; g < grid_size; ++g) pdf.grid[g] = lo + dx * static_cast<double>(g);

    // sorted samples: only the window within 8 bandwidths contributes
    const double norm = 1.0 / (n * h * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t g = 0; g < grid_size; ++g) {
        const double y = pdf.grid[g];
        const auto first = std::lower_bound(samples.begin(), samples.end(), y - 8.0 * h);
        const auto last = std::upper_bound(first, samples.end(), y + 8.0 * h);
        double acc = 0.0;
        for (auto it = first; it != last; ++it) {
            const double z = (y - *it) / h;
            acc += std::exp(-0.5 * z * z);
        }
        pdf.density[g] = acc * norm;
    }
    const double mass = trapezoid(pdf.grid, pdf.density);
    if (!(mass > 0.0)) throw NumericalError("kde: zero mass");
    for (double& d : pdf.density) d /= mass;
    return pdf;
}

/// A density that can be evaluated pointwise on a known finite support.
struct DensityView {
    std::function<double(double)> eval;
    double lo = 0.0;
    double hi = 0.0;
};

inline DensityView density_view(const EmpiricalPdf& pdf) {
    return DensityView{[&pdf](double y) { return pdf.eval(y); }, pdf.lo(), pdf.hi()};
}

inline DensityView lognormal_view(double mu, double sigma) {
    const double lo = std::exp(mu - 8.0 * sigma);
    const double hi = std::exp(mu + 8.0 * sigma);
    return DensityView{[mu, sigma](double y) {
                           if (y <= 0.0) return 0.0;
                           const double z = (std::log(y) - mu) / sigma;
                           return std::exp(-0.5 * z * z) /
                                  (y * sigma * std::sqrt(2.0 * std::numbers::pi));
                       },
                       lo, hi};
}

/// Analytic lognormal convolved with a Gaussian of bandwidth h. A KDE built
/// from n draws estimates the sample density convolved with its kernel, so a
/// reference carrying the same smoothing keeps the comparison bias-matched.
/// The convolution integrates in log-space, where the lognormal is a standard
/// normal and the tails stay stable.
inline DensityView smoothed_lognormal_view(double mu, double sigma, double h) {
    // quadrature runs over whichever factor is narrower so neither spike is
    // missed: t = y + h*v when the Gaussian is narrow, log-space otherwise
    const double width = sigma * std::exp(mu);
    auto eval = [mu, sigma, h, width](double y) {
        constexpr int steps = 400;
        const double d = 16.0 / steps;
        double acc = 0.0;
        if (h < width) {
            for (int i = 0; i <= steps; ++i) {
                const double v = -8.0 + d * static_cast<double>(i);
                const double t = y + h * v;
                if (t <= 0.0) continue;
                const double z = (std::log(t) - mu) / sigma;
                const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
                acc += w * std::exp(-0.5 * (v * v + z * z)) / (t * sigma);
            }
            return acc * d / (2.0 * std::numbers::pi);
        }
        for (int i = 0; i <= steps; ++i) {
            const double u = -8.0 + d * static_cast<double>(i);
            const double t = std::exp(mu + sigma * u);
            const double z = (y - t) / h;
            const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
            acc += w * std::exp(-0.5 * (z * z + u * u));
        }
        return acc * d / (2.0 * std::numbers::pi * h);
    };
    return DensityView{eval, std::exp(mu - 8.0 * sigma) - 6.0 * h,
                       std::exp(mu + 8.0 * sigma) + 6.0 * h};
}

/// Hellinger distance sqrt(1 - int sqrt(p q)), trapezoid rule on a common
/// grid over the union support, both sides renormalized on that grid.
inline double hellinger(const DensityView& p, const DensityView& q,
                        std::size_t grid_size = 2048) {
    const double lo = std::min(p.lo, q.lo);
    const double hi = std::max(p.hi, q.hi);
    if (!(hi > lo)) return 1.0;
    std::vector<double> grid(grid_size), pv(grid_size), qv(grid_size);
    const double dx = (hi - lo) / static_cast<double>(grid_size - 1);
    for (std::size_t i = 0; i < grid_size; ++i) {
        grid[i] = lo + dx * static_cast<double>(i);
        pv[i] = std::max(p.eval(grid[i]), 0.0);
        qv[i] = std::max(q.eval(grid[i]), 0.0);
    }
    const double pm = trapezoid(grid, pv);
    const double qm = trapezoid(grid, qv);
    if (!(pm > 0.0) || !(qm > 0.0)) return 1.0;  // disjoint or empty overlap
    std::vector<double> root(grid_size);
    for (std::size_t i = 0; i < grid_size; ++i)
        root[i] = std::sqrt((pv[i] / pm) * (qv[i] / qm));
    const double bc = trapezoid(grid, root);
    return std::sqrt(std::clamp(1.0 - bc, 0.0, 1.0));
}

inline double hellinger(const EmpiricalPdf& p, const EmpiricalPdf& q,
                        std::size_t grid_size = 2048) {
    return hellinger(density_view(p), density_view(q), grid_size);
}

struct DistStats {
    double mean = 0.0;
    double std = 0.0;
    double q10 = 0.0;
    double q50 = 0.0;
    double q90 = 0.0;
};

inline double quantile(std::vector<double> sorted_or_not, double p) {
    std::sort(sorted_or_not.begin(), sorted_or_not.end());
    const double n = static_cast<double>(sorted_or_not.size());
    const double pos = p * (n - 1.0);
    const auto i = static_cast<std::size_t>(pos);
    const double w = pos - static_cast<double>(i);
    return i + 1 < sorted_or_not.size()
               ? sorted_or_not[i] * (1.0 - w) + sorted_or_not[i + 1] * w
               : sorted_or_not[i];
}

inline DistStats dist_stats(const std::vector<double>& samples) {
    if (samples.size() < 2) throw DegenerateSample("dist_stats: need at least 2 samples");
    DistStats st;
    const double n = static_cast<double>(samples.size());
    for (double v : samples) st.mean += v;
    st.mean /= n;
    double var = 0.0;
    for (double v : samples) var += (v - st.mean) * (v - st.mean);
    st.std = std::sqrt(var / (n - 1.0));
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    auto q = [&](double p) {
        const double pos = p * (n - 1.0);
        const auto i = static_cast<std::size_t>(pos);
        const double w = pos - static_cast<double>(i);
        return i + 1 < sorted.size() ? sorted[i] * (1.0 - w) + sorted[i + 1] * w : sorted[i];
    };
    st.q10 = q(0.1);
    st.q50 = q(0.5);
    st.q90 = q(0.9);
    return st;
}

}  // namespace cmmd
