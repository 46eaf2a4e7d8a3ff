#include <doctest.h>

#include "phaselim/cli.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace fs = std::filesystem;
using namespace phaselim;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "phaselim");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("phaselim_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int shell(const std::string& args) {
    const std::string command = std::string(PHASELIM_BIN) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("digest helper") {
    CHECK(cli::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config files become flags") {
    const auto kv = cli::config_to_args("p = 10\n# note\nn_grid = 0:5:1\nmodel = \"gaussian\"\n");
    CHECK(kv == std::vector<std::string>{"--p", "10", "--n-grid", "0:5:1", "--model", "gaussian"});
    const auto js = cli::config_to_args(R"({"k": 2, "n_grid": [1, 2], "json": true})");
    CHECK(js == std::vector<std::string>{"--json", "--k", "2", "--n-grid", "1,2"});
    CHECK_THROWS(cli::config_to_args("oops"));
}

TEST_CASE("thresholds command") {
    const auto dir = scratch("thr");
    const auto r = invoke({"thresholds", "--model", "gaussian", "--p", "1000", "--k", "10", "--c-beta", "1", "--sigma",
                           "1", "--alpha-star", "0.999999999", "--json", "--out-dir", dir.string()});
    REQUIRE(r.code == 0);
    const auto record = nlohmann::json::parse(r.out);
    CHECK(record["n_ach"].get<double>() == doctest::Approx(437.7).epsilon(1e-4));
    CHECK(fs::exists(dir / "thresholds.json"));
    CHECK(fs::exists(dir / "manifest.json"));

    CHECK(invoke({"thresholds", "--model", "gaussian", "--p", "1000", "--out-dir", dir.string()}).code == 2);
    CHECK(invoke({"thresholds", "--p", "1000", "--k", "10", "--alpha-star", "0", "--out-dir", dir.string()}).code == 2);
    CHECK(invoke({"thresholds", "--p", "1000", "--k", "10", "--model", "laplace", "--out-dir", dir.string()}).code == 2);
    CHECK(invoke({"thresholds", "--model", "discrete-general", "--values", "0,0", "--p", "10", "--k", "2", "--alpha-star",
                  "0.5", "--out-dir", dir.string()})
              .code == 2);
}

TEST_CASE("figure command") {
    const auto dir = scratch("fig");
    const auto r = invoke({"figure", "--out-dir", dir.string()});
    REQUIRE(r.code == 0);
    for (const char* name : {"figure_discrete_flat.csv", "figure_gaussian.csv"}) {
        std::istringstream csv(slurp(dir / name));
        std::string line;
        std::getline(csv, line);
        CHECK(line == "snr_db,n_ach_norm,n_con_norm");
        int rows = 0;
        double previous = 1e300;
        while (std::getline(csv, line)) {
            ++rows;
            double snr, ach, con;
            REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &snr, &ach, &con) == 3);
            CHECK(ach < previous);
            CHECK(con <= ach);
            previous = ach;
        }
        CHECK(rows == 51);
    }
}

TEST_CASE("verify command verdicts and exit codes") {
    const auto dir = scratch("ver");
    const auto coarse = invoke({"verify", "--suite", "sandwich", "--trials", "100", "--out-dir", dir.string()});
    CHECK(coarse.code == 0);
    CHECK(coarse.err.find("12 inconclusive") != std::string::npos);
    CHECK(invoke({"verify", "--suite", "negative-control", "--out-dir", dir.string()}).code == 1);
    CHECK(invoke({"verify", "--suite", "gconv", "--out-dir", dir.string()}).code == 0);
    CHECK(invoke({"verify", "--suite", "logconcavity", "--out-dir", dir.string()}).code == 0);
    CHECK(invoke({"verify", "--suite", "bogus", "--out-dir", dir.string()}).code == 2);
}

TEST_CASE("simulate command") {
    const auto dir = scratch("sim");
    const std::vector<std::string> base{"simulate", "--p", "10", "--k", "2", "--sigma2", "1e-6", "--n-grid", "5:50:5",
                                        "--trials", "400", "--seed", "5"};
    auto args = base;
    args.insert(args.end(), {"--out-dir", (dir / "a").string()});
    REQUIRE(invoke(args).code == 0);
    const auto csv = slurp(dir / "a" / "error_curve.csv");
    CHECK(csv.find("\n50,0,0,400\n") != std::string::npos);
    CHECK(csv.find("# reference thresholds (asymptotic, not finite-p)") != std::string::npos);

    args = base;
    args.insert(args.end(), {"--out-dir", (dir / "b").string(), "--threads", "3"});
    REQUIRE(invoke(args).code == 0);
    CHECK(slurp(dir / "b" / "error_curve.csv") == csv);

    CHECK(invoke({"simulate", "--p", "30", "--k", "5", "--out-dir", dir.string()}).code == 2);
}

TEST_CASE("replay reproduces outputs byte for byte") {
    const auto dir = scratch("replay");
    REQUIRE(invoke({"simulate", "--n-grid", "0,3,6", "--trials", "50", "--out-dir", (dir / "orig").string(),
                    "--threads", "1"})
                .code == 0);
    const auto r = invoke({"replay", "--manifest", (dir / "orig" / "manifest.json").string(), "--out-dir",
                           (dir / "again").string(), "--threads", "4"});
    CHECK(r.code == 0);
    CHECK(r.out.find("identical error_curve.csv") != std::string::npos);

    // tamper with the recorded digest
    auto manifest = nlohmann::json::parse(slurp(dir / "orig" / "manifest.json"));
    manifest["outputs"]["error_curve.csv"] = std::string(64, '0');
    std::ofstream(dir / "tampered.json") << manifest.dump();
    CHECK(invoke({"replay", "--manifest", (dir / "tampered.json").string(), "--out-dir", (dir / "t").string()}).code ==
          1);
    CHECK(invoke({"replay", "--manifest", (dir / "missing.json").string()}).code == 3);
}

TEST_CASE("binary exit codes") {
    const auto dir = scratch("bin");
    CHECK(shell("--help") == 0);
    for (const char* sub : {"thresholds", "figure", "verify", "simulate", "replay"}) {
        CHECK(shell(std::string(sub) + " --help") == 0);
    }
    CHECK(shell("") == 2);
    CHECK(shell("thresholds --p 100 --out-dir " + dir.string()) == 2);
    CHECK(shell("thresholds --p 100 --k 5 --out-dir /proc/phaselim-denied") == 3);
    CHECK(shell("verify --suite negative-control --out-dir " + dir.string()) == 1);
    CHECK(shell("simulate --config " + (dir / "absent.cfg").string()) == 3);
}
