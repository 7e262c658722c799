#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "cmmd/dataset.hpp"
#include "cmmd/errors.hpp"
#include "cmmd/rng.hpp"

namespace cmmd {

enum class Simulator { sim1d, black_scholes, sde, sir };

inline std::string to_string(Simulator s) {
    switch (s) {
        case Simulator::sim1d: return "sim1d";
        case Simulator::black_scholes: return "black_scholes";
        case Simulator::sde: return "sde";
        case Simulator::sir: return "sir";
    }
    return "sim1d";
}

inline Simulator simulator_from_string(const std::string& s) {
    if (s == "sim1d") return Simulator::sim1d;
    if (s == "black_scholes") return Simulator::black_scholes;
    if (s == "sde") return Simulator::sde;
    if (s == "sir") return Simulator::sir;
    throw ConfigError("unknown simulator: " + s);
}

inline std::size_t simulator_input_dim(Simulator s) {
    return s == Simulator::sim1d ? 1 : 2;
}

// ---------------------------------------------------------------------------
// One-dimensional analytic simulator:
//   Y = sin(2pi/3 x + pi/6) * (Z1 Z2)^cos(x)
// The latent log-std is chosen so log Y has std sqrt(3/8)*cos(x), which is
// the closed form that defines the reference distribution.
// ---------------------------------------------------------------------------

inline constexpr double kSim1dLatentLogStd = 0.43301270189221932;  // sqrt(3)/4

inline double sim1d_mu(double x) {
    const double s = std::sin(2.0 * std::numbers::pi / 3.0 * x + std::numbers::pi / 6.0);
    if (s <= 0.0) throw DomainError("sim1d: sin term non-positive at x=" + std::to_string(x));
    return std::log(s);
}

inline double sim1d_sigma(double x) { return std::sqrt(3.0 / 8.0) * std::cos(x); }

inline std::vector<double> sim1d_sample(double x, std::size_t n, std::uint64_t seed,
                                        double latent_log_std = kSim1dLatentLogStd) {
    const double mu = sim1d_mu(x);  // also validates the domain
    const double cx = std::cos(x);
    Rng rng(seed);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double log_z1 = latent_log_std * rng.normal();
        const double log_z2 = latent_log_std * rng.normal();
        out[i] = std::exp(mu + cx * (log_z1 + log_z2));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Black-Scholes terminal stock price, closed form:
//   Y = exp(x1 - x2^2/2 + x2 * z),  z ~ N(0,1)
// ---------------------------------------------------------------------------

inline std::vector<double> black_scholes_sample(double x1, double x2, std::size_t n,
                                                std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> out(n);
    const double drift = x1 - 0.5 * x2 * x2;
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(drift + x2 * rng.normal());
    return out;
}

// ---------------------------------------------------------------------------
// Mean-reverting SDE with affine multiplicative noise,
//   dY = (x1 - Y) dt + (nu Y + 1) x2 dW,  Y_0 = 0,
// integrated by Euler-Maruyama; the quantity of interest is Y at t = 10.
// ---------------------------------------------------------------------------

struct SdeParams {
    double nu = 0.2;
    double dt = 0.01;
    double t_end = 10.0;
};

inline std::vector<double> sde_em_sample(double x1, double x2, std::size_t n,
                                         std::uint64_t seed, SdeParams params = {}) {
    const auto steps = static_cast<std::size_t>(std::llround(params.t_end / params.dt));
    Rng rng(seed);
    const double sqrt_dt = std::sqrt(params.dt);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double y = 0.0;
        for (std::size_t s = 0; s < steps; ++s) {
            y += (x1 - y) * params.dt + (params.nu * y + 1.0) * x2 * sqrt_dt * rng.normal();
        }
        if (!std::isfinite(y)) throw NumericalError("sde: path diverged");
        out[i] = y;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stochastic SIR epidemic as a CTMC over (S, I) with fixed population,
// simulated exactly by the Gillespie algorithm.
//   infection: (S, I) -> (S-1, I+1) at rate beta * S * I / N
//   recovery:  (S, I) -> (S,   I-1) at rate gamma * I
// Absorption at I = 0; the QoI is the outbreak size S_0 - S_absorption
// (a config flag flips to the raw signed difference).
// ---------------------------------------------------------------------------

struct SirParams {
    long population = 2000;
    double beta = 0.5;
    double gamma = 0.5;
    bool signed_qoi = false;  // true: report S_ta - S_0 (non-positive)
};

struct SirEvent {
    double time;
    long s, i, r;
};

/// Runs one CTMC path to absorption; `on_event` (if set) sees every state
/// after each transition.
inline long sir_gillespie_final_s(long s0, long i0, Rng& rng, const SirParams& params,
                                  const std::function<void(const SirEvent&)>& on_event = {}) {
    if (s0 < 0 || i0 < 0 || s0 + i0 > params.population)
        throw DomainError("sir: invalid initial population");
    long s = s0, i = i0;
    long r = params.population - s0 - i0;
    double t = 0.0;
    const double inv_n = 1.0 / static_cast<double>(params.population);
    while (i > 0) {
        const double rate_inf = params.beta * static_cast<double>(s) * static_cast<double>(i) * inv_n;
        const double rate_rec = params.gamma * static_cast<double>(i);
        const double total = rate_inf + rate_rec;
        t += rng.exponential(total);
        if (rng.uniform() * total < rate_inf) {
            --s;
            ++i;
        } else {
            --i;
            ++r;
        }
        if (on_event) on_event(SirEvent{t, s, i, r});
    }
    return s;
}

inline std::vector<double> sir_gillespie_sample(long s0, long i0, std::size_t n,
                                                std::uint64_t seed, SirParams params = {}) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(seed, "sir_path", i);
        const long s_final = sir_gillespie_final_s(s0, i0, rng, params);
        const long diff = s_final - s0;
        out[i] = static_cast<double>(params.signed_qoi ? diff : -diff);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dispatch and experimental designs
// ---------------------------------------------------------------------------

inline std::vector<std::pair<double, double>> simulator_domain(Simulator s) {
    switch (s) {
        case Simulator::sim1d: return {{0.0, 1.0}};
        case Simulator::black_scholes: return {{0.0, 0.1}, {0.0, 0.4}};
        case Simulator::sde: return {{0.9, 2.0}, {0.1, 1.0}};
        case Simulator::sir: return {{1200.0, 1800.0}, {20.0, 200.0}};
    }
    return {};
}

inline std::vector<double> simulator_sample(Simulator sim, const Vector& x, std::size_t n,
                                            std::uint64_t seed) {
    switch (sim) {
        case Simulator::sim1d:
            if (x.size() != 1) throw DimensionMismatch("sim1d expects 1 input");
            return sim1d_sample(x[0], n, seed);
        case Simulator::black_scholes:
            if (x.size() != 2) throw DimensionMismatch("black_scholes expects 2 inputs");
            return black_scholes_sample(x[0], x[1], n, seed);
        case Simulator::sde:
            if (x.size() != 2) throw DimensionMismatch("sde expects 2 inputs");
            return sde_em_sample(x[0], x[1], n, seed);
        case Simulator::sir:
            if (x.size() != 2) throw DimensionMismatch("sir expects 2 inputs");
            return sir_gillespie_sample(std::lround(x[0]), std::lround(x[1]), n, seed);
    }
    throw ConfigError("unknown simulator tag");
}

enum class DesignSampling { uniform_random, grid };

struct ExperimentalDesign {
    std::vector<std::pair<double, double>> ranges;
    std::size_t n_points = 1;
    std::size_t replications = 1;
    DesignSampling sampling = DesignSampling::uniform_random;
    std::uint64_t seed = 0;
};

/// Design points per the sampling tag; the grid is interior-centered so no
/// point lands on a range boundary.
inline std::vector<Vector> design_points(const ExperimentalDesign& design) {
    const std::size_t dim = design.ranges.size();
    for (const auto& [lo, hi] : design.ranges)
        if (!(lo < hi)) throw ConfigError("design: range bounds must satisfy low < high");
    std::vector<Vector> pts;
    pts.reserve(design.n_points);
    if (design.sampling == DesignSampling::uniform_random) {
        for (std::size_t i = 0; i < design.n_points; ++i) {
            Rng rng(design.seed, "design_point", i);
            Vector x(dim);
            for (std::size_t c = 0; c < dim; ++c)
                x[c] = rng.uniform(design.ranges[c].first, design.ranges[c].second);
            pts.push_back(std::move(x));
        }
    } else {
        const auto per_axis = static_cast<std::size_t>(std::ceil(
            std::pow(static_cast<double>(design.n_points), 1.0 / static_cast<double>(dim))));
        std::vector<std::size_t> idx(dim, 0);
        while (pts.size() < design.n_points) {
            Vector x(dim);
            for (std::size_t c = 0; c < dim; ++c) {
                const auto [lo, hi] = design.ranges[c];
                x[c] = lo + (hi - lo) * (static_cast<double>(idx[c]) + 0.5) /
                                 static_cast<double>(per_axis);
            }
            pts.push_back(std::move(x));
            std::size_t c = dim;
            while (c-- > 0) {
                if (++idx[c] < per_axis) break;
                idx[c] = 0;
                if (c == 0) return pts;  // grid exhausted
            }
        }
    }
    return pts;
}

inline Dataset generate_dataset(const ExperimentalDesign& design, Simulator sim) {
    if (design.ranges.size() != simulator_input_dim(sim))
        throw DimensionMismatch("design dimensionality does not match simulator");
    const auto domain = simulator_domain(sim);
    for (std::size_t c = 0; c < domain.size(); ++c)
        if (design.ranges[c].first < domain[c].first || design.ranges[c].second > domain[c].second)
            throw DomainError("design range exceeds simulator domain");
    Dataset data;
    data.simulator = to_string(sim);
    data.seed = design.seed;
    data.design_points = design_points(design);
    if (sim == Simulator::sir)
        for (auto& x : data.design_points)
            for (double& v : x) v = std::round(v);
    data.replications.resize(data.design_points.size());
    for (std::size_t i = 0; i < data.design_points.size(); ++i) {
        const auto ys = simulator_sample(sim, data.design_points[i], design.replications,
                                         derive_seed(design.seed, "replications", i));
        data.replications[i].reserve(ys.size());
        for (double y : ys) data.replications[i].push_back(Vector{y});
    }
    return data;
}

// ---------------------------------------------------------------------------
// Reference response distributions for evaluation
// ---------------------------------------------------------------------------

struct ReferenceDistribution {
    enum class Kind { analytic_lognormal, empirical };
    Kind kind = Kind::analytic_lognormal;
    double mu = 0.0;     // lognormal parameters (analytic kind)
    double sigma = 1.0;
    std::vector<double> pool;  // empirical kind
};

inline constexpr std::uint64_t kOracleSeed = 0x5eedfacedecafbadULL;

inline void check_in_domain(Simulator sim, const Vector& x) {
    const auto domain = simulator_domain(sim);
    if (x.size() != domain.size()) throw DimensionMismatch("reference: input dimension mismatch");
    for (std::size_t c = 0; c < x.size(); ++c)
        if (x[c] < domain[c].first || x[c] > domain[c].second)
            throw DomainError("reference: input outside simulator domain");
}

inline ReferenceDistribution reference_pdf(Simulator sim, const Vector& x,
                                           std::size_t pool_size = 100000) {
    check_in_domain(sim, x);
    ReferenceDistribution ref;
    switch (sim) {
        case Simulator::sim1d:
            ref.mu = sim1d_mu(x[0]);
            ref.sigma = sim1d_sigma(x[0]);
            if (!(ref.sigma > 0.0)) throw DomainError("sim1d: sigma(x) not positive");
            return ref;
        case Simulator::black_scholes:
            ref.mu = x[0] - 0.5 * x[1] * x[1];
            ref.sigma = x[1];
            if (!(ref.sigma > 0.0)) throw DomainError("black_scholes: zero volatility");
            return ref;
        case Simulator::sde:
        case Simulator::sir:
            ref.kind = ReferenceDistribution::Kind::empirical;
            ref.pool = simulator_sample(sim, x, pool_size,
                                        derive_seed(kOracleSeed, to_string(sim)));
            return ref;
    }
    throw ConfigError("unknown simulator tag");
}

inline double lognormal_pdf(double mu, double sigma, double y) {
    if (y <= 0.0) return 0.0;
    const double z = (std::log(y) - mu) / sigma;
    return std::exp(-0.5 * z * z) / (y * sigma * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace cmmd
