// Command-line front end: preprocessing, LOOCV curves, quasiconvexity
// verdicts, assumption diagnostics, and the simulation experiment runners.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "ridgecv/csvio.hpp"
#include "ridgecv/dataset.hpp"
#include "ridgecv/diagnostics.hpp"
#include "ridgecv/errors.hpp"
#include "ridgecv/experiments.hpp"
#include "ridgecv/loocv.hpp"
#include "ridgecv/quasiconvexity.hpp"
#include "ridgecv/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

namespace {

using namespace ridgecv;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("RIDGECV_SEED"))
        return std::strtoull(env, nullptr, 10);
    return 1729;
}

struct DataFlags {
    std::string input;
    std::string target;
    int pcr_rank = 0;  // 0 = no truncation
};

StandardizedDataset load_standardized(const DataFlags& flags) {
    const RawDataset raw = load_dataset_csv(flags.input, flags.target);
    StandardizedDataset ds = standardize(raw);
    if (flags.pcr_rank > 0) ds = pcr_truncate(ds, flags.pcr_rank);
    return ds;
}

void add_data_flags(CLI::App* cmd, DataFlags& flags) {
    cmd->add_option("--input", flags.input, "input CSV path")->required();
    cmd->add_option("--target", flags.target, "response column name")->required();
    cmd->add_option("--pcr", flags.pcr_rank,
                    "principal-component truncation rank (0 = off)");
}

struct GridFlags {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    int points = 400;

    GridConfig resolve(const SvdForm& svd) const {
        GridConfig g = GridConfig::for_problem(svd, points);
        if (lambda_min > 0.0) g.lambda_min = lambda_min;
        if (lambda_max > 0.0) g.lambda_max = lambda_max;
        return g;
    }
};

void add_grid_flags(CLI::App* cmd, GridFlags& flags) {
    cmd->add_option("--lambda-min", flags.lambda_min,
                    "grid lower end (default 1e-6 * mean squared singular value)");
    cmd->add_option("--lambda-max", flags.lambda_max,
                    "grid upper end (default 1e6 * mean squared singular value)");
    cmd->add_option("--points", flags.points, "grid size")->default_val(400);
}

void write_output(const std::string& path, const std::string& payload) {
    if (path.empty() || path == "-") {
        std::cout << payload;
        return;
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << payload;
}

int run(int argc, char** argv) {
    CLI::App app{"exact leave-one-out curves for ridge regression and their "
                 "quasiconvexity"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("ridgecv ") + kVersion +
                                          " (output schema " +
                                          std::to_string(kOutputSchemaVersion) +
                                          ")");

    // curve
    auto* curve_cmd = app.add_subcommand("curve", "write the LOOCV curve as CSV");
    DataFlags curve_data;
    GridFlags curve_grid;
    std::string curve_out;
    add_data_flags(curve_cmd, curve_data);
    add_grid_flags(curve_cmd, curve_grid);
    curve_cmd->add_option("--out", curve_out, "output path (default stdout)");

    // classify
    auto* classify_cmd =
        app.add_subcommand("classify", "quasiconvexity verdict as JSON");
    DataFlags classify_data;
    GridFlags classify_grid;
    std::string classify_out;
    add_data_flags(classify_cmd, classify_data);
    add_grid_flags(classify_cmd, classify_grid);
    classify_cmd->add_option("--out", classify_out, "output path (default stdout)");

    // diagnose
    auto* diagnose_cmd =
        app.add_subcommand("diagnose", "assumption report as JSON");
    DataFlags diagnose_data;
    std::string diagnose_out;
    add_data_flags(diagnose_cmd, diagnose_data);
    diagnose_cmd->add_option("--out", diagnose_out, "output path (default stdout)");

    // experiment
    auto* exp_cmd = app.add_subcommand("experiment", "run a simulation study");
    std::string exp_kind;
    std::string exp_out = "experiment.csv";
    std::string exp_config_path;
    std::uint64_t exp_seed = default_seed();
    int exp_reps = 1;
    int exp_threads = 1;
    bool exp_paper_scale = false;
    DataFlags exp_data;  // realdata only
    std::string exp_curve_dir;
    exp_cmd->add_option("--kind", exp_kind,
                        "atlas|delta_sweep|coherence|residual_norm|"
                        "coherence_decay|subgaussian|realdata")
        ->required();
    exp_cmd->add_option("--out", exp_out, "output CSV path");
    exp_cmd->add_option("--seed", exp_seed, "master seed (env RIDGECV_SEED)");
    exp_cmd->add_option("--reps", exp_reps,
                        "replications with derived seeds; >1 adds error bars");
    exp_cmd->add_option("--threads", exp_threads, "worker cap");
    exp_cmd->add_flag("--paper-scale", exp_paper_scale,
                      "full reference trial counts instead of desk scale");
    exp_cmd->add_option("--config", exp_config_path,
                        "JSON file overriding individual config fields");
    exp_cmd->add_option("--input", exp_data.input, "realdata: input CSV");
    exp_cmd->add_option("--target", exp_data.target, "realdata: response column");
    exp_cmd->add_option("--curve-dir", exp_curve_dir,
                        "realdata: directory for flagged curves");

    CLI11_PARSE(app, argc, argv);

    if (curve_cmd->parsed()) {
        const StandardizedDataset ds = load_standardized(curve_data);
        const LoocvCurve curve =
            compute_curve(ds.svd, ds.Y, curve_grid.resolve(ds.svd));
        std::ostringstream ss;
        write_curve_csv(curve, ss);
        write_output(curve_out, ss.str());
        return 0;
    }

    if (classify_cmd->parsed()) {
        const StandardizedDataset ds = load_standardized(classify_data);
        const QvxVerdict verdict =
            classify(ds.svd, ds.Y, classify_grid.resolve(ds.svd));
        write_output(classify_out, verdict_to_json(verdict) + "\n");
        return 0;
    }

    if (diagnose_cmd->parsed()) {
        const StandardizedDataset ds = load_standardized(diagnose_data);
        const AssumptionReport report = assumption_report(ds.svd, ds.Y);
        write_output(diagnose_out, report_to_json(report) + "\n");
        return 0;
    }

    if (exp_cmd->parsed()) {
        ExperimentConfig config = ExperimentConfig::defaults(
            experiment_kind_from_string(exp_kind), exp_paper_scale);
        config.master_seed = exp_seed;
        config.threads = exp_threads;
        config.input_path = exp_data.input;
        config.target_column = exp_data.target;
        config.curve_dir = exp_curve_dir;

        if (!exp_config_path.empty()) {
            std::ifstream in(exp_config_path);
            if (!in) throw Error("cannot open " + exp_config_path);
            nlohmann::json j;
            in >> j;
            if (j.contains("n_list")) config.n_list = j["n_list"].get<std::vector<int>>();
            if (j.contains("dim")) config.dim = j["dim"];
            if (j.contains("n0")) config.n0 = j["n0"];
            if (j.contains("n_u")) config.n_u = j["n_u"];
            if (j.contains("n_y")) config.n_y = j["n_y"];
            if (j.contains("sigma2")) config.sigma2 = j["sigma2"];
            if (j.contains("alphas")) config.alphas = j["alphas"].get<std::vector<double>>();
            if (j.contains("atlas_s2")) config.atlas_s2 = j["atlas_s2"].get<std::vector<double>>();
            if (j.contains("atlas_points")) config.atlas_points = j["atlas_points"];
            if (j.contains("residual_nus")) config.residual_nus = j["residual_nus"].get<std::vector<double>>();
            if (j.contains("families")) config.families = j["families"].get<std::vector<std::string>>();
            if (j.contains("grid_points")) config.grid_points = j["grid_points"];
            if (j.contains("pcr_ranks")) config.pcr_ranks = j["pcr_ranks"].get<std::vector<int>>();
            if (j.contains("subset_size")) config.subset_size = j["subset_size"];
            if (j.contains("subset_count")) config.subset_count = j["subset_count"];
        }

        const auto start = std::chrono::steady_clock::now();
        const ExperimentResult result =
            exp_reps > 1 ? replicate_with_errorbars(config, exp_reps)
                         : run_experiment(config);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();

        std::ofstream out(exp_out);
        if (!out) throw Error("cannot write " + exp_out);
        write_result_csv(result, out);
        std::ofstream manifest(exp_out + ".manifest.json");
        if (!manifest) throw Error("cannot write " + exp_out + ".manifest.json");
        manifest << manifest_json(config, result, wall) << "\n";
        std::cerr << "wrote " << result.rows.size() << " rows to " << exp_out
                  << " in " << wall << " s\n";
        return 0;
    }

    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ridgecv::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
