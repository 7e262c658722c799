// cmmds: command-line front end for CMMD-trained stochastic-simulator
// surrogates. Subcommands: simulate | train | sample | evaluate | sweep.
//
// Exit codes: 0 ok, 2 config, 3 domain/dimension, 4 I/O, 5 numerical failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmmd/config.hpp"
#include "cmmd/evaluation.hpp"
#include "cmmd/io.hpp"
#include "cmmd/serialize.hpp"
#include "cmmd/simulators.hpp"
#include "cmmd/training.hpp"

namespace {

using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitDomain = 3;
constexpr int kExitIo = 4;
constexpr int kExitNumerical = 5;

std::uint64_t config_seed(const json& cfg, const std::optional<std::uint64_t>& override_seed) {
    if (override_seed) return *override_seed;
    return cmmd::cfg_detail::get_or<std::uint64_t>(cfg, "seed", 0);
}

cmmd::Vector parse_point(const std::string& text) {
    cmmd::Vector x;
    std::string cell;
    std::istringstream in(text);
    while (std::getline(in, cell, ',')) {
        try {
            x.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw cmmd::ConfigError("bad coordinate '" + cell + "' in point '" + text + "'");
        }
    }
    if (x.empty()) throw cmmd::ConfigError("empty point");
    return x;
}

std::string report_csv(const cmmd::EvaluationReport& report, std::size_t input_dim) {
    std::string out = "point_id,";
    for (std::size_t c = 0; c < input_dim; ++c) out += "x" + std::to_string(c + 1) + ",";
    out +=
        "hellinger,mean_pred,mean_ref,std_pred,std_ref,"
        "q10_pred,q10_ref,q50_pred,q50_ref,q90_pred,q90_ref\n";
    for (const auto& p : report.points) {
        out += std::to_string(p.point_id) + ",";
        for (double v : p.x) out += cmmd::format_double(v) + ",";
        out += cmmd::format_double(p.hellinger) + "," + cmmd::format_double(p.pred.mean) +
               "," + cmmd::format_double(p.ref.mean) + "," + cmmd::format_double(p.pred.std) +
               "," + cmmd::format_double(p.ref.std) + "," + cmmd::format_double(p.pred.q10) +
               "," + cmmd::format_double(p.ref.q10) + "," + cmmd::format_double(p.pred.q50) +
               "," + cmmd::format_double(p.ref.q50) + "," + cmmd::format_double(p.pred.q90) +
               "," + cmmd::format_double(p.ref.q90) + "\n";
    }
    return out;
}

json summary_json(const cmmd::EvaluationReport& report) {
    return json{{"mean", report.hellinger_summary.mean},
                {"std", report.hellinger_summary.std},
                {"q10", report.hellinger_summary.q10},
                {"q50", report.hellinger_summary.q50},
                {"q90", report.hellinger_summary.q90},
                {"points", report.points.size()}};
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const std::optional<std::uint64_t>& seed_override) {
    const json cfg = cmmd::parse_config_text(cmmd::read_file(config_path));
    cmmd::cfg_detail::check_keys(cfg, {"seed", "simulator", "design"}, "simulate config");
    if (!cfg.contains("simulator")) throw cmmd::ConfigError("simulate: 'simulator' required");
    const auto sim = cmmd::simulator_from_string(cfg.at("simulator").get<std::string>());
    const std::uint64_t seed = config_seed(cfg, seed_override);
    const auto design =
        cmmd::parse_design(cfg.value("design", json::object()), sim, seed);
    const cmmd::Dataset data = cmmd::generate_dataset(design, sim);

    cmmd::atomic_write_file(out_path, cmmd::dataset_to_csv(data));
    json meta;
    meta["simulator"] = cmmd::to_string(sim);
    meta["seed"] = seed;
    meta["n_points"] = design.n_points;
    meta["replications"] = design.replications;
    json ranges = json::array();
    for (const auto& [lo, hi] : design.ranges) ranges.push_back({lo, hi});
    meta["ranges"] = ranges;
    meta["sampling"] =
        design.sampling == cmmd::DesignSampling::grid ? "grid" : "uniform_random";
    std::filesystem::path meta_path(out_path);
    meta_path.replace_extension(".meta.json");
    cmmd::atomic_write_file(meta_path, meta.dump(2) + "\n");
    return 0;
}

int cmd_train(const std::string& data_path, const std::string& config_path,
              const std::string& model_path, const std::string& report_path,
              const std::optional<std::uint64_t>& seed_override) {
    const json cfg = cmmd::parse_config_text(cmmd::read_file(config_path));
    cmmd::cfg_detail::check_keys(cfg, {"seed", "training"}, "train config");
    const std::uint64_t seed = config_seed(cfg, seed_override);
    const auto training = cmmd::parse_training(cfg.value("training", json::object()), seed);
    const cmmd::Dataset data = cmmd::dataset_from_csv(cmmd::read_file(data_path));

    const cmmd::TrainedSurrogate surrogate = cmmd::train(data, training);
    cmmd::atomic_write_file(model_path, cmmd::surrogate_to_json(surrogate).dump(2) + "\n");
    if (!report_path.empty()) {
        std::string csv = "epoch,mean_loss\n";
        for (std::size_t e = 0; e < surrogate.report.epoch_mean_loss.size(); ++e)
            csv += std::to_string(e) + "," +
                   cmmd::format_double(surrogate.report.epoch_mean_loss[e]) + "\n";
        cmmd::atomic_write_file(report_path, csv);
    }
    const double final_loss = surrogate.report.epoch_mean_loss.empty()
                                  ? 0.0
                                  : surrogate.report.epoch_mean_loss.back();
    std::cout << "final_loss " << cmmd::format_double(final_loss) << "\n";
    return 0;
}

int cmd_sample(const std::string& model_path, const std::vector<std::string>& at,
               std::size_t n, std::uint64_t seed, const std::string& out_path) {
    const auto surrogate =
        cmmd::surrogate_from_json(cmmd::parse_config_text(cmmd::read_file(model_path)));
    std::vector<cmmd::Vector> points;
    for (const auto& a : at) points.push_back(parse_point(a));
    for (const auto& x : points)
        if (x.size() != surrogate.input_dim())
            throw cmmd::DimensionMismatch("sample: model expects " +
                                          std::to_string(surrogate.input_dim()) +
                                          " input coordinate(s)");
    std::string csv;
    for (std::size_t c = 0; c < surrogate.input_dim(); ++c)
        csv += "x" + std::to_string(c + 1) + ",";
    csv += "y\n";
    for (std::size_t p = 0; p < points.size(); ++p) {
        const auto ys =
            cmmd::sample(surrogate, points[p], n, cmmd::derive_seed(seed, "cli_sample", p));
        for (const auto& y : ys) {
            for (double v : points[p]) csv += cmmd::format_double(v) + ",";
            csv += cmmd::format_double(y[0]) + "\n";
        }
    }
    cmmd::atomic_write_file(out_path, csv);
    return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& simulator,
                 const std::string& config_path, const std::string& out_path,
                 const std::string& summary_path,
                 const std::optional<std::uint64_t>& seed_override) {
    const json cfg = cmmd::parse_config_text(cmmd::read_file(config_path));
    cmmd::cfg_detail::check_keys(cfg, {"seed", "evaluation"}, "evaluate config");
    const std::uint64_t seed = config_seed(cfg, seed_override);
    auto eval_cfg = cmmd::parse_evaluation(cfg.value("evaluation", json::object()), seed);
    const auto sim = cmmd::simulator_from_string(simulator);
    const auto surrogate =
        cmmd::surrogate_from_json(cmmd::parse_config_text(cmmd::read_file(model_path)));

    std::vector<cmmd::Vector> points = eval_cfg.explicit_points;
    if (points.empty() && eval_cfg.test_points > 0)
        points = cmmd::uniform_test_points(sim, eval_cfg.test_points,
                                           cmmd::derive_seed(seed, "test_points"));
    const auto report = cmmd::evaluate_surrogate(surrogate, sim, points, eval_cfg.settings);
    cmmd::atomic_write_file(out_path, report_csv(report, surrogate.input_dim()));
    if (!summary_path.empty())
        cmmd::atomic_write_file(summary_path, summary_json(report).dump(2) + "\n");
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_path,
              std::string workdir, const std::optional<std::uint64_t>& seed_override) {
    const json cfg = cmmd::parse_config_text(cmmd::read_file(config_path));
    cmmd::cfg_detail::check_keys(cfg, {"seed", "simulator", "design", "training", "sweep"},
                                 "sweep config");
    if (!cfg.contains("simulator")) throw cmmd::ConfigError("sweep: 'simulator' required");
    const auto sim = cmmd::simulator_from_string(cfg.at("simulator").get<std::string>());
    const std::uint64_t seed = config_seed(cfg, seed_override);
    const auto design = cmmd::parse_design(cfg.value("design", json::object()), sim, seed);
    const auto training = cmmd::parse_training(cfg.value("training", json::object()), seed);
    if (!cfg.contains("sweep")) throw cmmd::ConfigError("sweep: 'sweep' section required");
    const auto spec = cmmd::parse_sweep(cfg.at("sweep"));

    // one completion marker per (level, repeat) cell makes the sweep resumable
    if (workdir.empty()) workdir = out_path + ".cells";
    std::filesystem::create_directories(workdir);
    std::string csv = "level,repeat,probe_id,hellinger\n";
    for (std::size_t li = 0; li < spec.levels.size(); ++li)
        for (std::size_t r = 0; r < spec.repeats; ++r) {
            const std::filesystem::path cell_path =
                std::filesystem::path(workdir) /
                ("cell_" + std::to_string(li) + "_" + std::to_string(r) + ".csv");
            std::string cell_csv;
            if (std::filesystem::exists(cell_path)) {
                cell_csv = cmmd::read_file(cell_path);
            } else {
                const auto rows = cmmd::sweep_cell(spec, sim, design, training, li, r, seed);
                for (const auto& row : rows)
                    cell_csv += std::to_string(row.level) + "," + std::to_string(row.repeat) +
                                "," + std::to_string(row.probe_id) + "," +
                                cmmd::format_double(row.hellinger) + "\n";
                cmmd::atomic_write_file(cell_path, cell_csv);
            }
            csv += cell_csv;
        }
    cmmd::atomic_write_file(out_path, csv);
    std::filesystem::remove_all(workdir);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generative surrogates for stochastic simulators (CMMD training)"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed_override;
    std::string config_path, data_path, model_path, out_path, report_path, summary_path;
    std::string simulator, workdir;
    std::vector<std::string> at_points;
    std::size_t n_samples = 1000;
    std::uint64_t sample_seed = 0;

    const auto add_seed = [&seed_override](CLI::App* sub) {
        sub->add_option("--seed", seed_override, "Override the config's master seed");
    };

    auto* simulate = app.add_subcommand("simulate", "Generate a replicated dataset CSV");
    simulate->add_option("--config", config_path, "Run config JSON")->required();
    simulate->add_option("--out", out_path, "Output dataset CSV")->required();
    add_seed(simulate);

    auto* train = app.add_subcommand("train", "Train a surrogate on a dataset CSV");
    train->add_option("--data", data_path, "Dataset CSV")->required();
    train->add_option("--config", config_path, "Run config JSON")->required();
    train->add_option("--out", model_path, "Output model JSON")->required();
    train->add_option("--report", report_path, "Optional loss-trace CSV");
    add_seed(train);

    auto* sample = app.add_subcommand("sample", "Draw conditional samples from a model");
    sample->add_option("--model", model_path, "Model JSON")->required();
    sample->add_option("--at", at_points, "Input point, comma-separated coordinates")
        ->required();
    sample->add_option("--n", n_samples, "Samples per point");
    sample->add_option("--sample-seed", sample_seed, "Sampling RNG seed");
    sample->add_option("--out", out_path, "Output CSV")->required();

    auto* evaluate = app.add_subcommand("evaluate", "Score a model against its simulator");
    evaluate->add_option("--model", model_path, "Model JSON")->required();
    evaluate->add_option("--simulator", simulator, "Simulator tag")->required();
    evaluate->add_option("--config", config_path, "Run config JSON")->required();
    evaluate->add_option("--out", out_path, "Per-point report CSV")->required();
    evaluate->add_option("--summary", summary_path, "Summary JSON");
    add_seed(evaluate);

    auto* sweep = app.add_subcommand("sweep", "Convergence sweep over N/R/NxR/Nz");
    sweep->add_option("--config", config_path, "Sweep config JSON")->required();
    sweep->add_option("--out", out_path, "Sweep table CSV")->required();
    sweep->add_option("--workdir", workdir, "Cell marker directory (default <out>.cells)");
    add_seed(sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(config_path, out_path, seed_override);
        if (train->parsed())
            return cmd_train(data_path, config_path, model_path, report_path, seed_override);
        if (sample->parsed())
            return cmd_sample(model_path, at_points, n_samples, sample_seed, out_path);
        if (evaluate->parsed())
            return cmd_evaluate(model_path, simulator, config_path, out_path, summary_path,
                                seed_override);
        if (sweep->parsed()) return cmd_sweep(config_path, out_path, workdir, seed_override);
    } catch (const cmmd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const cmmd::DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const cmmd::DimensionMismatch& e) {
        std::cerr << "dimension error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const cmmd::EmptySample& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const cmmd::DegenerateSample& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const cmmd::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const cmmd::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const cmmd::NotPositiveDefinite& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
