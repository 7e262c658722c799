#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmmd/errors.hpp"
#include "cmmd/training.hpp"

namespace cmmd {

inline constexpr int kModelFormatVersion = 1;

// Model floats are stored as hex-float strings so serialization round-trips
// bit-exactly.

inline std::string hexfloat(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

inline double parse_hexfloat(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw IoError("model: bad float literal '" + s + "'");
    return v;
}

inline nlohmann::json floats_to_json(const std::vector<double>& vals) {
    nlohmann::json arr = nlohmann::json::array();
    for (double v : vals) arr.push_back(hexfloat(v));
    return arr;
}

inline std::vector<double> floats_from_json(const nlohmann::json& arr) {
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) out.push_back(parse_hexfloat(v.get<std::string>()));
    return out;
}

inline nlohmann::json kernel_to_json(const SeKernel& k) {
    return {{"log_lengthscale", hexfloat(k.log_lengthscale)},
            {"log_amplitude", hexfloat(k.log_amplitude)},
            {"trainable_lengthscale", k.trainable_lengthscale},
            {"trainable_amplitude", k.trainable_amplitude}};
}

inline SeKernel kernel_from_json(const nlohmann::json& j) {
    SeKernel k;
    k.log_lengthscale = parse_hexfloat(j.at("log_lengthscale").get<std::string>());
    k.log_amplitude = parse_hexfloat(j.at("log_amplitude").get<std::string>());
    k.trainable_lengthscale = j.at("trainable_lengthscale").get<bool>();
    k.trainable_amplitude = j.at("trainable_amplitude").get<bool>();
    return k;
}

inline nlohmann::json surrogate_to_json(const TrainedSurrogate& s) {
    nlohmann::json j;
    j["format_version"] = kModelFormatVersion;
    std::vector<std::size_t> dims;
    dims.push_back(s.mlp.input_dim());
    for (const auto& w : s.mlp.layer_weights) dims.push_back(w.rows());
    j["layer_dims"] = dims;
    j["hidden_activation"] = to_string(s.mlp.hidden_activation);
    j["output_activation"] = to_string(s.mlp.output_activation);
    nlohmann::json weights = nlohmann::json::array();
    nlohmann::json biases = nlohmann::json::array();
    for (const auto& w : s.mlp.layer_weights) weights.push_back(floats_to_json(w.data()));
    for (const auto& b : s.mlp.layer_biases) biases.push_back(floats_to_json(b));
    j["weights"] = std::move(weights);
    j["biases"] = std::move(biases);
    j["kernel"] = {{"input", kernel_to_json(s.kernels.input_kernel)},
                   {"output", kernel_to_json(s.kernels.output_kernel)},
                   {"lambda", hexfloat(s.kernels.lambda)}};
    j["input_transform"] = {{"shift", floats_to_json(s.input_transform.shift)},
                            {"scale", floats_to_json(s.input_transform.scale)}};
    j["output_transform"] = {{"shift", floats_to_json(s.output_transform.shift)},
                             {"scale", floats_to_json(s.output_transform.scale)}};
    j["noise_dim"] = s.noise_dim;
    return j;
}

inline TrainedSurrogate surrogate_from_json(const nlohmann::json& j) {
    if (j.at("format_version").get<int>() != kModelFormatVersion)
        throw IoError("model: unsupported format_version");
    TrainedSurrogate s;
    const auto dims = j.at("layer_dims").get<std::vector<std::size_t>>();
    if (dims.size() < 2) throw IoError("model: layer_dims too short");
    s.mlp.hidden_activation = activation_from_string(j.at("hidden_activation"));
    s.mlp.output_activation = activation_from_string(j.at("output_activation"));
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (weights.size() != dims.size() - 1 || biases.size() != dims.size() - 1)
        throw IoError("model: layer count mismatch");
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Matrix w(dims[l + 1], dims[l]);
        auto vals = floats_from_json(weights[l]);
        if (vals.size() != w.data().size()) throw IoError("model: weight size mismatch");
        w.data() = std::move(vals);
        s.mlp.layer_weights.push_back(std::move(w));
        auto b = floats_from_json(biases[l]);
        if (b.size() != dims[l + 1]) throw IoError("model: bias size mismatch");
        s.mlp.layer_biases.push_back(std::move(b));
    }
    const auto& kj = j.at("kernel");
    s.kernels.input_kernel = kernel_from_json(kj.at("input"));
    s.kernels.output_kernel = kernel_from_json(kj.at("output"));
    s.kernels.lambda = parse_hexfloat(kj.at("lambda").get<std::string>());
    s.input_transform.shift = floats_from_json(j.at("input_transform").at("shift"));
    s.input_transform.scale = floats_from_json(j.at("input_transform").at("scale"));
    s.output_transform.shift = floats_from_json(j.at("output_transform").at("shift"));
    s.output_transform.scale = floats_from_json(j.at("output_transform").at("scale"));
    s.noise_dim = j.at("noise_dim").get<std::size_t>();
    if (s.input_transform.dim() + s.noise_dim != dims.front())
        throw IoError("model: input transform + noise_dim does not match first layer");
    return s;
}

}  // namespace cmmd
