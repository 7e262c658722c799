#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cmmd/errors.hpp"
#include "cmmd/kde.hpp"
#include "cmmd/rng.hpp"
#include "cmmd/simulators.hpp"
#include "cmmd/training.hpp"

namespace cmmd {

struct PointReport {
    std::size_t point_id = 0;
    Vector x;
    double hellinger = 0.0;
    DistStats pred;
    DistStats ref;
};

struct EvaluationReport {
    std::vector<PointReport> points;
    DistStats hellinger_summary;  // mean/std/quantiles over points
};

struct EvalSettings {
    std::size_t samples_per_point = 2000;
    std::size_t grid_size = 1024;
    std::size_t reference_pool = 100000;
    std::uint64_t seed = 0;
};

/// Exact moments/quantiles of LN(mu, sigma).
inline DistStats lognormal_stats(double mu, double sigma) {
    DistStats st;
    st.mean = std::exp(mu + 0.5 * sigma * sigma);
    st.std = st.mean * std::sqrt(std::exp(sigma * sigma) - 1.0);
    constexpr double z10 = -1.2815515655446004;
    st.q10 = std::exp(mu + sigma * z10);
    st.q50 = std::exp(mu);
    st.q90 = std::exp(mu - sigma * z10);
    return st;
}

using ScalarSampler =
    std::function<std::vector<double>(const Vector&, std::size_t, std::uint64_t)>;

/// Scores any conditional sampler against the simulator's reference
/// distribution at each test point: KDE of the sampler draws vs the analytic
/// or empirical-pool reference, compared by Hellinger distance.
inline EvaluationReport evaluate_sampler(const ScalarSampler& sampler, Simulator sim,
                                         const std::vector<Vector>& test_points,
                                         const EvalSettings& settings) {
    EvaluationReport report;
    std::vector<double> distances;
    for (std::size_t i = 0; i < test_points.size(); ++i) {
        const Vector& x = test_points[i];
        PointReport pr;
        pr.point_id = i;
        pr.x = x;
        const auto draws =
            sampler(x, settings.samples_per_point, derive_seed(settings.seed, "eval_point", i));
        const EmpiricalPdf pred_pdf = kde(draws, settings.grid_size);
        pr.pred = dist_stats(draws);

        const ReferenceDistribution ref = reference_pdf(sim, x, settings.reference_pool);
        if (ref.kind == ReferenceDistribution::Kind::analytic_lognormal) {
            // reference smoothed by the prediction's KDE bandwidth so both
            // sides of the comparison carry the same estimator bias
            pr.hellinger = hellinger(
                density_view(pred_pdf),
                smoothed_lognormal_view(ref.mu, ref.sigma, pred_pdf.bandwidth));
            pr.ref = lognormal_stats(ref.mu, ref.sigma);
        } else {
            const EmpiricalPdf ref_pdf = kde(ref.pool, settings.grid_size);
            pr.hellinger = hellinger(density_view(pred_pdf), density_view(ref_pdf));
            pr.ref = dist_stats(ref.pool);
        }
        distances.push_back(pr.hellinger);
        report.points.push_back(std::move(pr));
    }
    if (distances.size() >= 2)
        report.hellinger_summary = dist_stats(distances);
    else if (distances.size() == 1)
        report.hellinger_summary = DistStats{distances[0], 0.0, distances[0], distances[0],
                                             distances[0]};
    return report;
}

inline EvaluationReport evaluate_surrogate(const TrainedSurrogate& surrogate, Simulator sim,
                                           const std::vector<Vector>& test_points,
                                           const EvalSettings& settings) {
    return evaluate_sampler(
        [&surrogate](const Vector& x, std::size_t n, std::uint64_t seed) {
            return sample_scalar(surrogate, x, n, seed);
        },
        sim, test_points, settings);
}

/// KDE/finite-sample noise floor: the simulator itself replayed as the
/// "surrogate", with sample counts matched to the evaluation settings.
inline EvaluationReport evaluate_passthrough(Simulator sim,
                                             const std::vector<Vector>& test_points,
                                             const EvalSettings& settings) {
    return evaluate_sampler(
        [sim](const Vector& x, std::size_t n, std::uint64_t seed) {
            return simulator_sample(sim, x, n, derive_seed(seed, "passthrough"));
        },
        sim, test_points, settings);
}

inline std::vector<Vector> uniform_test_points(Simulator sim, std::size_t count,
                                               std::uint64_t seed) {
    const auto domain = simulator_domain(sim);
    std::vector<Vector> pts(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(seed, "test_point", i);
        Vector x(domain.size());
        for (std::size_t c = 0; c < domain.size(); ++c)
            x[c] = rng.uniform(domain[c].first, domain[c].second);
        if (sim == Simulator::sir)
            for (double& v : x) v = std::round(v);
        pts[i] = std::move(x);
    }
    return pts;
}

// ---------------------------------------------------------------------------
// Convergence sweeps
// ---------------------------------------------------------------------------

enum class SweepVariable { n_points, replications, total_rows, noise_dim };

inline std::string to_string(SweepVariable v) {
    switch (v) {
        case SweepVariable::n_points: return "N";
        case SweepVariable::replications: return "R";
        case SweepVariable::total_rows: return "NxR";
        case SweepVariable::noise_dim: return "Nz";
    }
    return "N";
}

inline SweepVariable sweep_variable_from_string(const std::string& s) {
    if (s == "N") return SweepVariable::n_points;
    if (s == "R") return SweepVariable::replications;
    if (s == "NxR") return SweepVariable::total_rows;
    if (s == "Nz") return SweepVariable::noise_dim;
    throw ConfigError("unknown sweep variable: " + s);
}

struct SweepSpec {
    SweepVariable varying = SweepVariable::n_points;
    std::vector<std::size_t> levels;
    std::size_t repeats = 1;
    std::vector<Vector> probe_points;
    std::size_t samples_per_point = 2000;
    std::size_t grid_size = 1024;
    std::size_t reference_pool = 100000;
};

struct SweepCell {
    std::size_t level = 0;
    std::size_t repeat = 0;
    std::size_t probe_id = 0;
    double hellinger = 0.0;
};

/// Trains one surrogate for a (level, repeat) cell and scores it at the probe
/// points. For the NxR tag the level is the total row budget and N is derived
/// from the fixed R.
inline std::vector<SweepCell> sweep_cell(const SweepSpec& spec, Simulator sim,
                                         ExperimentalDesign design, TrainingConfig training,
                                         std::size_t level_index, std::size_t repeat,
                                         std::uint64_t master_seed) {
    const std::size_t level = spec.levels.at(level_index);
    switch (spec.varying) {
        case SweepVariable::n_points: design.n_points = level; break;
        case SweepVariable::replications: design.replications = level; break;
        case SweepVariable::total_rows:
            design.n_points = std::max<std::size_t>(1, level / design.replications);
            break;
        case SweepVariable::noise_dim: training.noise_dim = level; break;
    }
    const std::uint64_t cell_seed = derive_seed(master_seed, "sweep_cell", level_index, repeat);
    design.seed = derive_seed(cell_seed, "design");
    training.seed = derive_seed(cell_seed, "training");
    const Dataset data = generate_dataset(design, sim);
    training.batch_size = std::min(training.batch_size, data.total_rows());
    const TrainedSurrogate surrogate = train(data, training);

    std::vector<SweepCell> rows;
    EvalSettings settings;
    settings.samples_per_point = spec.samples_per_point;
    settings.grid_size = spec.grid_size;
    settings.reference_pool = spec.reference_pool;
    settings.seed = derive_seed(cell_seed, "evaluation");
    const EvaluationReport rep = evaluate_surrogate(surrogate, sim, spec.probe_points, settings);
    for (std::size_t p = 0; p < rep.points.size(); ++p)
        rows.push_back(SweepCell{level, repeat, p, rep.points[p].hellinger});
    return rows;
}

inline std::vector<SweepCell> run_sweep(const SweepSpec& spec, Simulator sim,
                                        const ExperimentalDesign& design,
                                        const TrainingConfig& training,
                                        std::uint64_t master_seed) {
    if (spec.levels.empty()) throw ConfigError("sweep: no levels");
    std::vector<SweepCell> table;
    for (std::size_t li = 0; li < spec.levels.size(); ++li)
        for (std::size_t r = 0; r < spec.repeats; ++r) {
            auto rows = sweep_cell(spec, sim, design, training, li, r, master_seed);
            table.insert(table.end(), rows.begin(), rows.end());
        }
    return table;
}

/// Mean Hellinger per level (over repeats and probe points), in level order.
inline std::vector<double> sweep_level_means(const SweepSpec& spec,
                                             const std::vector<SweepCell>& table) {
    std::vector<double> means(spec.levels.size(), 0.0);
    std::vector<std::size_t> counts(spec.levels.size(), 0);
    for (const auto& cell : table)
        for (std::size_t li = 0; li < spec.levels.size(); ++li)
            if (spec.levels[li] == cell.level) {
                means[li] += cell.hellinger;
                ++counts[li];
                break;
            }
    for (std::size_t li = 0; li < means.size(); ++li)
        if (counts[li] > 0) means[li] /= static_cast<double>(counts[li]);
    return means;
}

}  // namespace cmmd
