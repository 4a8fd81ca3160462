#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "ridgecv/csvio.hpp"
#include "ridgecv/loocv.hpp"

#include <json.hpp>

namespace {

struct RunResult {
    int exit_code;
    std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(RIDGECV_CLI_PATH) + " " + args + " 2>&1";
    std::array<char, 4096> buf{};
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) out += buf.data();
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
}

void write_sample_csv(const std::string& path) {
    std::ofstream out(path);
    out << "a,b,c,target\n";
    // a mildly noisy linear relation over 12 rows
    const double rows[12][4] = {
        {0.1, 1.2, -0.3, 1.0},  {0.7, 0.3, 0.5, 2.1},   {-0.4, 0.9, 1.1, 0.4},
        {1.3, -0.2, 0.2, 2.8},  {0.5, 0.5, -0.9, 1.9},  {-1.1, 1.4, 0.7, -0.7},
        {0.9, -1.0, 0.4, 2.4},  {0.2, 0.8, -1.2, 1.2},  {-0.6, -0.5, 0.9, -0.2},
        {1.0, 0.1, -0.4, 2.5},  {-0.9, 0.6, 0.3, -0.5}, {0.4, -0.7, -0.6, 1.6}};
    for (const auto& r : rows)
        out << r[0] << ',' << r[1] << ',' << r[2] << ',' << r[3] << "\n";
}

}  // namespace

TEST_CASE("version flag prints the library version") {
    const RunResult r = run_cli("--version");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("ridgecv 0.1.0") != std::string::npos);
}

TEST_CASE("curve output round-trips bitwise") {
    write_sample_csv("cli_sample.csv");
    const RunResult r = run_cli(
        "curve --input cli_sample.csv --target target --points 50 "
        "--out cli_curve.csv");
    REQUIRE(r.exit_code == 0);

    std::ifstream in("cli_curve.csv");
    REQUIRE(in.good());
    const ridgecv::LoocvCurve curve = ridgecv::read_curve_csv(in);
    REQUIRE(curve.lambdas.size() == 50);
    CHECK(curve.tail_limit > 0.0);
    CHECK(curve.hash != 0);

    // re-serializing the parsed curve reproduces the file byte for byte
    std::ostringstream again;
    ridgecv::write_curve_csv(curve, again);
    std::ifstream raw("cli_curve.csv");
    std::stringstream original;
    original << raw.rdbuf();
    CHECK(again.str() == original.str());

    std::remove("cli_sample.csv");
    std::remove("cli_curve.csv");
}

TEST_CASE("custom grid flags are honored") {
    write_sample_csv("cli_sample2.csv");
    const RunResult r = run_cli(
        "curve --input cli_sample2.csv --target target --lambda-min 1e-3 "
        "--lambda-max 1e3 --points 7 --out cli_curve2.csv");
    REQUIRE(r.exit_code == 0);
    std::ifstream in("cli_curve2.csv");
    const ridgecv::LoocvCurve curve = ridgecv::read_curve_csv(in);
    REQUIRE(curve.lambdas.size() == 7);
    CHECK(curve.lambdas.front() == 1e-3);
    CHECK(curve.lambdas.back() == 1e3);
    std::remove("cli_sample2.csv");
    std::remove("cli_curve2.csv");
}

TEST_CASE("classify and diagnose emit parseable JSON") {
    write_sample_csv("cli_sample3.csv");
    const RunResult cls =
        run_cli("classify --input cli_sample3.csv --target target");
    REQUIRE(cls.exit_code == 0);
    const auto j = nlohmann::json::parse(cls.output);
    CHECK(j.contains("is_qvx"));
    CHECK(j.contains("minima"));

    const RunResult diag =
        run_cli("diagnose --input cli_sample3.csv --target target");
    REQUIRE(diag.exit_code == 0);
    const auto jd = nlohmann::json::parse(diag.output);
    CHECK(jd.contains("a1_mean_sq_residual"));
    CHECK(jd.contains("lambda_q_status"));
    std::remove("cli_sample3.csv");
}

TEST_CASE("malformed input fails with a diagnostic and nonzero exit") {
    {
        std::ofstream out("cli_bad.csv");
        out << "a,b\n1,2\n3\n4,5\n";  // ragged row
    }
    const RunResult r = run_cli("curve --input cli_bad.csv --target b");
    CHECK(r.exit_code != 0);
    CHECK(r.output.find("row") != std::string::npos);
    std::remove("cli_bad.csv");

    const RunResult missing = run_cli("curve --input nope.csv --target b");
    CHECK(missing.exit_code != 0);
}

TEST_CASE("experiment subcommand writes csv and manifest") {
    {
        std::ofstream cfg("cli_exp_cfg.json");
        cfg << R"({"n_list": [10], "alphas": [0.0, 1.0], "n_u": 4, "n_y": 4})";
    }
    const RunResult r = run_cli(
        "experiment --kind delta_sweep --seed 7 --config cli_exp_cfg.json "
        "--threads 2 --out cli_exp.csv");
    REQUIRE(r.exit_code == 0);

    std::ifstream csv("cli_exp.csv");
    REQUIRE(csv.good());
    std::string line;
    int data_rows = 0;
    bool header_seen = false;
    while (std::getline(csv, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            CHECK(line.find("fraction_non_qvx") != std::string::npos);
            continue;
        }
        ++data_rows;
    }
    CHECK(data_rows == 2);

    std::ifstream mf("cli_exp.csv.manifest.json");
    REQUIRE(mf.good());
    nlohmann::json manifest;
    mf >> manifest;
    CHECK(manifest["kind"] == "delta_sweep");
    CHECK(manifest["master_seed"] == 7);
    CHECK(manifest.contains("config_hash"));

    std::remove("cli_exp_cfg.json");
    std::remove("cli_exp.csv");
    std::remove("cli_exp.csv.manifest.json");
}

TEST_CASE("environment variable sets the default seed") {
    {
        std::ofstream cfg("cli_env_cfg.json");
        cfg << R"({"n_list": [10], "alphas": [0.5], "n_u": 3, "n_y": 3})";
    }
    const std::string with_env =
        "RIDGECV_SEED=99 " + std::string(RIDGECV_CLI_PATH) +
        " experiment --kind delta_sweep --config cli_env_cfg.json --out "
        "cli_env.csv 2>&1";
    FILE* pipe = popen(with_env.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 1024> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe)) {}
    REQUIRE(WEXITSTATUS(pclose(pipe)) == 0);
    std::ifstream mf("cli_env.csv.manifest.json");
    nlohmann::json manifest;
    mf >> manifest;
    CHECK(manifest["master_seed"] == 99);

    std::remove("cli_env_cfg.json");
    std::remove("cli_env.csv");
    std::remove("cli_env.csv.manifest.json");
}
