#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef PROCO_CLI_PATH
#error "PROCO_CLI_PATH must point at the built command line binary"
#endif

namespace {
namespace fs = std::filesystem;

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const fs::path out = fs::temp_directory_path() / "proco_cli_out.txt";
    const std::string cmd = std::string(PROCO_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out);
    std::ostringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}
}  // namespace

TEST_CASE("gen writes a dataset and is reproducible flag for flag") {
    const fs::path a = fresh_dir("proco_cli_gen_a");
    const fs::path b = fresh_dir("proco_cli_gen_b");
    const std::string flags = "gen --classes 6 --n-max 80 --gamma 10 --p-raw 8 --seed 7 --out ";
    CHECK(run_cli(flags + a.string()).exit_code == 0);
    CHECK(run_cli(flags + b.string()).exit_code == 0);
    CHECK(slurp(a / "train.csv") == slurp(b / "train.csv"));
    CHECK(slurp(a / "test.csv") == slurp(b / "test.csv"));
    CHECK(slurp(a / "dataset.json") == slurp(b / "dataset.json"));

    // sidecar carries the resolved spec and the exponential counts
    nlohmann::json j;
    std::ifstream(a / "dataset.json") >> j;
    CHECK(j.at("spec").at("seed").get<int>() == 7);
    const auto counts = j.at("counts").get<std::vector<int>>();
    CHECK(counts.front() == 80);
    CHECK(counts.back() == 8);  // 80 / gamma
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("gen rejects an imbalance factor below one") {
    const RunResult r = run_cli("gen --gamma 0.5 --out /tmp/proco_cli_reject");
    CHECK(r.exit_code == 2);
}

TEST_CASE("train exits with a usage error when the dataset is missing") {
    const RunResult r = run_cli("train --data /nonexistent/path --epochs 1");
    CHECK(r.exit_code == 2);
}

TEST_CASE("train produces comparable reports for both branch weights") {
    const fs::path data = fresh_dir("proco_cli_train_data");
    REQUIRE(run_cli("gen --classes 4 --n-max 60 --gamma 6 --p-raw 8 --kappa-gen 50 --seed 3 --out " +
                    data.string())
                .exit_code == 0);
    const fs::path r0 = fs::temp_directory_path() / "proco_cli_r0.json";
    const fs::path r1 = fs::temp_directory_path() / "proco_cli_r1.json";
    const std::string common = "train --data " + data.string() +
                               " --p 8 --hidden 12 --epochs 3 --batch 32 --lr 0.05 --seed 5 ";
    CHECK(run_cli(common + "--alpha 0 --report " + r0.string()).exit_code == 0);
    CHECK(run_cli(common + "--alpha 1 --report " + r1.string()).exit_code == 0);

    nlohmann::json j0, j1;
    std::ifstream(r0) >> j0;
    std::ifstream(r1) >> j1;
    CHECK(j0.at("config").at("alpha").get<double>() == 0.0);
    CHECK(j1.at("config").at("alpha").get<double>() == 1.0);
    CHECK(j0.at("overall_acc").get<double>() >= 0.0);
    CHECK(j1.at("overall_acc").get<double>() <= 1.0);
    CHECK(j0.at("config").at("seed").get<int>() == 5);

    // semi-supervised entry point
    const fs::path rs = fs::temp_directory_path() / "proco_cli_rs.json";
    CHECK(run_cli(common + "--alpha 1 --semisup --label-fraction 0.5 --report " + rs.string())
              .exit_code == 0);
    nlohmann::json js;
    std::ifstream(rs) >> js;
    CHECK(js.contains("pseudo_precision"));
    fs::remove_all(data);
}

TEST_CASE("verify runs a suite, reports [PASS], and writes a reproducible report") {
    const fs::path r1 = fs::temp_directory_path() / "proco_cli_v1.json";
    const fs::path r2 = fs::temp_directory_path() / "proco_cli_v2.json";
    const std::string flags = "verify --suite bessel --seed 2 --out ";
    const RunResult a = run_cli(flags + r1.string());
    CHECK(a.exit_code == 0);
    CHECK(a.output.find("[PASS] bessel") != std::string::npos);
    const RunResult b = run_cli(flags + r2.string());
    CHECK(b.exit_code == 0);

    nlohmann::json j1, j2;
    std::ifstream(r1) >> j1;
    std::ifstream(r2) >> j2;
    CHECK(j1.at("options").at("suite").get<std::string>() == "bessel");
    CHECK(j1.at("options").at("seed").get<int>() == 2);
    CHECK(j1.at("passed").get<bool>());
    // measured values reproduce bit for bit; runtimes naturally differ
    j1.at("suites")[0].at("details").erase("suite_runtime_sec");
    j2.at("suites")[0].at("details").erase("suite_runtime_sec");
    j1.at("suites")[0].at("details").erase("runtime_sec");
    j2.at("suites")[0].at("details").erase("runtime_sec");
    CHECK(j1 == j2);
}

TEST_CASE("verify rejects unknown suites") {
    CHECK(run_cli("verify --suite nonsense").exit_code == 2);
}

TEST_CASE("PROCO_OUT_DIR provides the default output directory") {
    const fs::path dir = fresh_dir("proco_cli_envdir");
    const fs::path out = fs::temp_directory_path() / "proco_cli_env_out.txt";
    const std::string cmd = "PROCO_OUT_DIR=" + dir.string() + " " + std::string(PROCO_CLI_PATH) +
                            " gen --classes 3 --n-max 20 --gamma 2 --p-raw 4 --seed 1 > " +
                            out.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(fs::exists(dir / "dataset" / "dataset.json"));
    fs::remove_all(dir);
}
