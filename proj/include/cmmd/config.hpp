#pragma once

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmmd/errors.hpp"
#include "cmmd/evaluation.hpp"
#include "cmmd/simulators.hpp"
#include "cmmd/training.hpp"

namespace cmmd {

// Run configs are single JSON documents. Parsing is strict: unknown keys are
// rejected so a typo cannot silently fall back to a default.

namespace cfg_detail {

inline void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                       const std::string& context) {
    if (!obj.is_object()) throw ConfigError(context + ": expected an object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) throw ConfigError(context + ": unknown key '" + key + "'");
}

template <typename T>
T get_or(const nlohmann::json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad value for '" + key + "': " + e.what());
    }
}

}  // namespace cfg_detail

inline ExperimentalDesign parse_design(const nlohmann::json& j, Simulator sim,
                                       std::uint64_t seed) {
    using cfg_detail::get_or;
    cfg_detail::check_keys(j, {"ranges", "n_points", "replications", "sampling"}, "design");
    ExperimentalDesign d;
    d.seed = seed;
    if (j.contains("ranges")) {
        for (const auto& r : j.at("ranges")) {
            if (!r.is_array() || r.size() != 2)
                throw ConfigError("design.ranges entries must be [low, high]");
            d.ranges.emplace_back(r[0].get<double>(), r[1].get<double>());
        }
    } else {
        d.ranges = simulator_domain(sim);
    }
    d.n_points = get_or<std::size_t>(j, "n_points", 1);
    d.replications = get_or<std::size_t>(j, "replications", 1);
    const std::string sampling = get_or<std::string>(j, "sampling", "uniform_random");
    if (sampling == "uniform_random")
        d.sampling = DesignSampling::uniform_random;
    else if (sampling == "grid")
        d.sampling = DesignSampling::grid;
    else
        throw ConfigError("design.sampling must be uniform_random or grid");
    if (d.n_points < 1 || d.replications < 1)
        throw ConfigError("design: n_points and replications must be >= 1");
    return d;
}

inline TrainingConfig parse_training(const nlohmann::json& j, std::uint64_t seed) {
    using cfg_detail::get_or;
    cfg_detail::check_keys(
        j,
        {"epochs", "batch_size", "noise_dim", "noise_regen_interval", "lambda",
         "standardize_inputs", "standardize_outputs", "hidden_dims", "output_activation",
         "learning_rate", "beta1", "beta2", "epsilon", "train_output_lengthscale",
         "train_output_amplitude", "input_lengthscale", "output_lengthscale"},
        "training");
    TrainingConfig t;
    t.seed = seed;
    t.epochs = get_or<std::size_t>(j, "epochs", t.epochs);
    t.batch_size = get_or<std::size_t>(j, "batch_size", t.batch_size);
    t.noise_dim = get_or<std::size_t>(j, "noise_dim", t.noise_dim);
    t.noise_regen_interval =
        get_or<std::size_t>(j, "noise_regen_interval", t.noise_regen_interval);
    t.lambda = get_or<double>(j, "lambda", t.lambda);
    t.standardize_inputs = get_or<bool>(j, "standardize_inputs", t.standardize_inputs);
    t.standardize_outputs = get_or<bool>(j, "standardize_outputs", t.standardize_outputs);
    t.hidden_dims = get_or<std::vector<std::size_t>>(j, "hidden_dims", t.hidden_dims);
    t.output_activation = activation_from_string(
        get_or<std::string>(j, "output_activation", to_string(t.output_activation)));
    t.optimizer.learning_rate = get_or<double>(j, "learning_rate", t.optimizer.learning_rate);
    t.optimizer.beta1 = get_or<double>(j, "beta1", t.optimizer.beta1);
    t.optimizer.beta2 = get_or<double>(j, "beta2", t.optimizer.beta2);
    t.optimizer.epsilon = get_or<double>(j, "epsilon", t.optimizer.epsilon);
    t.train_output_lengthscale =
        get_or<bool>(j, "train_output_lengthscale", t.train_output_lengthscale);
    t.train_output_amplitude =
        get_or<bool>(j, "train_output_amplitude", t.train_output_amplitude);
    t.input_lengthscale = get_or<double>(j, "input_lengthscale", t.input_lengthscale);
    t.output_lengthscale = get_or<double>(j, "output_lengthscale", t.output_lengthscale);
    return t;
}

struct EvalConfig {
    std::size_t test_points = 200;
    std::vector<Vector> explicit_points;  // overrides test_points when set
    EvalSettings settings;
};

inline EvalConfig parse_evaluation(const nlohmann::json& j, std::uint64_t seed) {
    using cfg_detail::get_or;
    cfg_detail::check_keys(
        j, {"test_points", "points", "samples_per_point", "grid_size", "reference_pool"},
        "evaluation");
    EvalConfig e;
    e.settings.seed = seed;
    e.test_points = get_or<std::size_t>(j, "test_points", e.test_points);
    e.settings.samples_per_point =
        get_or<std::size_t>(j, "samples_per_point", e.settings.samples_per_point);
    e.settings.grid_size = get_or<std::size_t>(j, "grid_size", e.settings.grid_size);
    e.settings.reference_pool =
        get_or<std::size_t>(j, "reference_pool", e.settings.reference_pool);
    if (j.contains("points"))
        for (const auto& p : j.at("points")) e.explicit_points.push_back(p.get<Vector>());
    return e;
}

inline SweepSpec parse_sweep(const nlohmann::json& j) {
    using cfg_detail::get_or;
    cfg_detail::check_keys(j,
                           {"varying", "levels", "repeats", "probe_points",
                            "samples_per_point", "grid_size", "reference_pool"},
                           "sweep");
    SweepSpec s;
    s.varying = sweep_variable_from_string(get_or<std::string>(j, "varying", "N"));
    s.levels = get_or<std::vector<std::size_t>>(j, "levels", {});
    if (s.levels.empty()) throw ConfigError("sweep.levels must be non-empty");
    s.repeats = get_or<std::size_t>(j, "repeats", 1);
    if (!j.contains("probe_points")) throw ConfigError("sweep.probe_points required");
    for (const auto& p : j.at("probe_points")) s.probe_points.push_back(p.get<Vector>());
    s.samples_per_point = get_or<std::size_t>(j, "samples_per_point", s.samples_per_point);
    s.grid_size = get_or<std::size_t>(j, "grid_size", s.grid_size);
    s.reference_pool = get_or<std::size_t>(j, "reference_pool", s.reference_pool);
    return s;
}

inline nlohmann::json parse_config_text(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

}  // namespace cmmd
