#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "cmmd/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kBin = CMMDS_BIN;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("cmmd_cli_test_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path operator/(const std::string& name) const { return path / name; }
};

int run(const std::string& args) {
    const std::string cmd = kBin + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void write_json(const fs::path& p, const json& j) {
    cmmd::atomic_write_file(p, j.dump(2) + "\n");
}

json simulate_config() {
    return json{{"seed", 7},
                {"simulator", "sim1d"},
                {"design", {{"n_points", 6}, {"replications", 8}}}};
}

json train_config() {
    return json{{"seed", 8},
                {"training",
                 {{"epochs", 4},
                  {"batch_size", 48},
                  {"noise_dim", 3},
                  {"hidden_dims", {8, 8}}}}};
}

}  // namespace

TEST_CASE("help exits zero, bad usage exits with the config code") {
    CHECK(run("--help") == 0);
    CHECK(run("train --help") == 0);
    CHECK(run("") == 2);
    CHECK(run("unknown-subcommand") == 2);
    CHECK(run("train --data x.csv") == 2);  // missing required options
}

TEST_CASE("simulate, train, sample, evaluate round trip") {
    TempDir dir;
    write_json(dir / "sim.json", simulate_config());
    write_json(dir / "train.json", train_config());
    write_json(dir / "eval.json",
               json{{"seed", 9},
                    {"evaluation",
                     {{"test_points", 3}, {"samples_per_point", 300}}}});

    CHECK(run("simulate --config " + (dir / "sim.json").string() + " --out " +
              (dir / "data.csv").string()) == 0);
    REQUIRE(fs::exists(dir / "data.csv"));
    REQUIRE(fs::exists(dir / "data.meta.json"));
    const auto data = cmmd::dataset_from_csv(cmmd::read_file(dir / "data.csv"));
    CHECK(data.design_points.size() == 6);
    CHECK(data.total_rows() == 48);
    const json meta = json::parse(cmmd::read_file(dir / "data.meta.json"));
    CHECK(meta.at("simulator") == "sim1d");
    CHECK(meta.at("seed") == 7);

    CHECK(run("train --data " + (dir / "data.csv").string() + " --config " +
              (dir / "train.json").string() + " --out " + (dir / "model.json").string() +
              " --report " + (dir / "loss.csv").string()) == 0);
    REQUIRE(fs::exists(dir / "model.json"));
    const std::string loss_csv = cmmd::read_file(dir / "loss.csv");
    CHECK(loss_csv.rfind("epoch,mean_loss\n", 0) == 0);
    CHECK(std::count(loss_csv.begin(), loss_csv.end(), '\n') == 5);  // header + 4 epochs

    CHECK(run("sample --model " + (dir / "model.json").string() +
              " --at 0.25 --at 0.75 --n 10 --sample-seed 3 --out " +
              (dir / "samples.csv").string()) == 0);
    const std::string samples = cmmd::read_file(dir / "samples.csv");
    CHECK(samples.rfind("x1,y\n", 0) == 0);
    CHECK(std::count(samples.begin(), samples.end(), '\n') == 21);  // header + 2*10 rows

    CHECK(run("evaluate --model " + (dir / "model.json").string() +
              " --simulator sim1d --config " + (dir / "eval.json").string() + " --out " +
              (dir / "report.csv").string() + " --summary " +
              (dir / "summary.json").string()) == 0);
    const std::string report = cmmd::read_file(dir / "report.csv");
    CHECK(report.rfind("point_id,x1,hellinger,mean_pred,mean_ref,std_pred,std_ref,"
                       "q10_pred,q10_ref,q50_pred,q50_ref,q90_pred,q90_ref\n",
                       0) == 0);
    CHECK(std::count(report.begin(), report.end(), '\n') == 4);  // header + 3 points
    const json summary = json::parse(cmmd::read_file(dir / "summary.json"));
    CHECK(summary.at("points") == 3);
    CHECK(summary.at("mean").get<double>() >= 0.0);
    CHECK(summary.at("mean").get<double>() <= 1.0);
}

TEST_CASE("reruns with the same seeds are byte-identical") {
    TempDir dir;
    write_json(dir / "sim.json", simulate_config());
    write_json(dir / "train.json", train_config());

    auto pipeline = [&](const std::string& tag) {
        REQUIRE(run("simulate --config " + (dir / "sim.json").string() + " --out " +
                    (dir / ("data_" + tag + ".csv")).string()) == 0);
        REQUIRE(run("train --data " + (dir / ("data_" + tag + ".csv")).string() +
                    " --config " + (dir / "train.json").string() + " --out " +
                    (dir / ("model_" + tag + ".json")).string()) == 0);
        REQUIRE(run("sample --model " + (dir / ("model_" + tag + ".json")).string() +
                    " --at 0.5 --n 25 --sample-seed 4 --out " +
                    (dir / ("samples_" + tag + ".csv")).string()) == 0);
    };
    pipeline("a");
    pipeline("b");
    CHECK(cmmd::read_file(dir / "data_a.csv") == cmmd::read_file(dir / "data_b.csv"));
    CHECK(cmmd::read_file(dir / "model_a.json") == cmmd::read_file(dir / "model_b.json"));
    CHECK(cmmd::read_file(dir / "samples_a.csv") == cmmd::read_file(dir / "samples_b.csv"));
}

TEST_CASE("the --seed override changes the output") {
    TempDir dir;
    write_json(dir / "sim.json", simulate_config());
    REQUIRE(run("simulate --config " + (dir / "sim.json").string() + " --out " +
                (dir / "a.csv").string()) == 0);
    REQUIRE(run("simulate --config " + (dir / "sim.json").string() + " --seed 99 --out " +
                (dir / "b.csv").string()) == 0);
    CHECK(cmmd::read_file(dir / "a.csv") != cmmd::read_file(dir / "b.csv"));
}

TEST_CASE("error exit codes") {
    TempDir dir;

    // config error: invalid JSON and unknown keys
    cmmd::atomic_write_file(dir / "broken.json", "{not json");
    CHECK(run("simulate --config " + (dir / "broken.json").string() + " --out " +
              (dir / "x.csv").string()) == 2);
    write_json(dir / "unknown.json",
               json{{"simulator", "sim1d"}, {"bogus_key", 1}});
    CHECK(run("simulate --config " + (dir / "unknown.json").string() + " --out " +
              (dir / "x.csv").string()) == 2);
    write_json(dir / "badsim.json", json{{"simulator", "nope"}});
    CHECK(run("simulate --config " + (dir / "badsim.json").string() + " --out " +
              (dir / "x.csv").string()) == 2);

    // domain error: design range outside the simulator domain
    write_json(dir / "domain.json",
               json{{"simulator", "sim1d"},
                    {"design", {{"ranges", {{0.0, 2.0}}}, {"n_points", 2}}}});
    CHECK(run("simulate --config " + (dir / "domain.json").string() + " --out " +
              (dir / "x.csv").string()) == 3);

    // io error: missing input files
    write_json(dir / "sim.json", simulate_config());
    CHECK(run("simulate --config " + (dir / "missing_config.json").string() + " --out " +
              (dir / "x.csv").string()) == 4);
    write_json(dir / "train.json", train_config());
    CHECK(run("train --data " + (dir / "missing_data.csv").string() + " --config " +
              (dir / "train.json").string() + " --out " + (dir / "m.json").string()) == 4);
}

TEST_CASE("sweep runs, is resumable, and cleans up its workdir") {
    TempDir dir;
    json cfg{{"seed", 12},
             {"simulator", "sim1d"},
             {"design", {{"replications", 6}}},
             {"training",
              {{"epochs", 2}, {"batch_size", 12}, {"noise_dim", 2}, {"hidden_dims", {6}}}},
             {"sweep",
              {{"varying", "N"},
               {"levels", {2, 4}},
               {"repeats", 1},
               {"probe_points", {{0.3}, {0.6}}},
               {"samples_per_point", 200}}}};
    write_json(dir / "sweep.json", cfg);

    CHECK(run("sweep --config " + (dir / "sweep.json").string() + " --out " +
              (dir / "sweep.csv").string()) == 0);
    const std::string table = cmmd::read_file(dir / "sweep.csv");
    CHECK(table.rfind("level,repeat,probe_id,hellinger\n", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 5);  // header + 2 levels * 2 probes
    CHECK(!fs::exists(dir / "sweep.csv.cells"));

    // a precomputed cell marker is honored verbatim instead of being re-run
    fs::create_directories(dir / "cells");
    cmmd::atomic_write_file(dir.path / "cells" / "cell_0_0.csv",
                            "2,0,0,0.111\n2,0,1,0.222\n");
    CHECK(run("sweep --config " + (dir / "sweep.json").string() + " --workdir " +
              (dir / "cells").string() + " --out " + (dir / "sweep2.csv").string()) == 0);
    const std::string table2 = cmmd::read_file(dir / "sweep2.csv");
    CHECK(table2.find("2,0,0,0.111") != std::string::npos);
    CHECK(table2.find("2,0,1,0.222") != std::string::npos);
}
