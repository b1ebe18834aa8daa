#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "app.hpp"

namespace fs = std::filesystem;
using hsca::app::Json;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "hsca");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = hsca::app::run(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("hsca_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> r;
    std::istringstream is(s);
    for (std::string l; std::getline(is, l);) r.push_back(l);
    return r;
}

}  // namespace

TEST_CASE("constants table") {
    const auto dir = scratch("constants");
    const auto r = run({"constants", "--m", "3,4,5", "--k", "0,1,2,3", "--out", dir.string()});
    CHECK(r.code == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 13);
    CHECK(ls[0] == "m,k,C1,C2,C");
    CHECK(ls[1].rfind("3,0,4,0,", 0) == 0);
    CHECK(ls[5].rfind("4,0,6,0,", 0) == 0);
    CHECK(ls[9].rfind("5,0,8,0,", 0) == 0);
    CHECK(slurp(dir / "constants.csv") == r.out);
    CHECK(run({"constants", "--m", "3,4,5", "--k", "0,1,2,3"}).out == r.out);
}

TEST_CASE("verify fischer") {
    const auto dir = scratch("fischer");
    const auto r = run({"verify", "--suite", "fischer", "--m", "3", "--k", "2", "--out", dir.string()});
    CHECK(r.code == 0);
    const auto j = Json::parse(slurp(dir / "fischer_m3_k2.json"));
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    REQUIRE(keys.size() >= 6);
    CHECK(std::vector<std::string>(keys.begin(), keys.begin() + 6) ==
          std::vector<std::string>{"suite", "m", "k", "N", "residuals", "order_estimate"});
    CHECK(j["residuals"][0].get<double>() <= 1e-12);
    CHECK(j["pass"].get<bool>());
    CHECK(fs::exists(dir / "verify_summary.txt"));
    CHECK(r.out.find("PASS") != std::string::npos);
}

TEST_CASE("verify artifacts are reproducible") {
    const auto a = scratch("det_a"), b = scratch("det_b");
    const std::vector<std::string> base{"verify", "--suite", "fischer,harortho,stokes", "--m", "3", "--k", "1", "--grid", "4,8"};
    auto args = base;
    args.insert(args.end(), {"--out", a.string()});
    CHECK(run(args).code == 0);
    args = base;
    args.insert(args.end(), {"--out", b.string()});
    CHECK(run(args).code == 0);
    for (const auto& e : fs::directory_iterator(a)) CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
}

TEST_CASE("schema violations exit 2") {
    CHECK(run({"verify", "--m", "9"}).code == 2);
    CHECK(run({"verify", "--k", "5"}).code == 2);
    CHECK(run({"verify", "--grid", "2,4"}).code == 2);
    CHECK(run({"verify", "--suite", "nope"}).code == 2);
    CHECK(run({"verify", "--m", "three"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"verify", "--bogus-flag", "1"}).code == 2);
    const auto dir = scratch("schema");
    fs::create_directories(dir);
    std::ofstream(dir / "bad.json") << R"({"m": 3, "colour": "blue"})";
    std::ofstream(dir / "broken.json") << "{ not json";
    std::ofstream(dir / "type.json") << R"({"m": "three"})";
    CHECK(run({"verify", "--config", (dir / "bad.json").string()}).code == 2);
    CHECK(run({"verify", "--config", (dir / "broken.json").string()}).code == 2);
    CHECK(run({"verify", "--config", (dir / "type.json").string()}).code == 2);
}

TEST_CASE("i/o failures exit 3") {
    CHECK(run({"verify", "--config", "/nonexistent/config.json"}).code == 3);
    const auto dir = scratch("io");
    fs::create_directories(dir);
    std::ofstream(dir / "file") << "x";
    CHECK(run({"constants", "--m", "3", "--k", "0", "--out", (dir / "file").string()}).code == 3);
}

TEST_CASE("config file drives the run; flags override") {
    const auto dir = scratch("config");
    fs::create_directories(dir);
    std::ofstream(dir / "c.json") << R"({"command": "constants", "m": [3], "k": [0, 1]})";
    auto r = run({"--config", (dir / "c.json").string()});
    CHECK(r.code == 0);
    CHECK(lines(r.out).size() == 3);
    r = run({"--config", (dir / "c.json").string(), "--m", "4"});
    CHECK(lines(r.out)[1].rfind("4,0,", 0) == 0);
}

TEST_CASE("beltrami command") {
    const auto dir = scratch("beltrami");
    fs::create_directories(dir);
    std::ofstream(dir / "p.json") << R"({"command": "beltrami", "m": 3, "k": 1, "N": 6,
        "f_mode": "scalar", "f_spec": {"type": "contraction", "factor": 0.5}, "tol": 1e-10, "max_iter": 100})";
    const auto r = run({"--config", (dir / "p.json").string(), "--out", (dir / "out").string()});
    CHECK(r.code == 0);
    const auto csv = lines(slurp(dir / "out" / "beltrami_convergence.csv"));
    REQUIRE(csv.size() > 2);
    CHECK(csv[0] == "iter,update_norm,ratio");
    const auto j = Json::parse(slurp(dir / "out" / "beltrami_summary.json"));
    CHECK(j["converged"].get<bool>());
    CHECK(j["contraction"]["empirical"]["pass"].get<bool>());
    CHECK(j.contains("equation_residual"));

    std::ofstream(dir / "q.json") << R"({"command": "beltrami", "m": 3, "k": 1, "N": 6, "f_spec": {"type": "sideways"}})";
    CHECK(run({"--config", (dir / "q.json").string()}).code == 2);
}

TEST_CASE("report_json") {
    hsca::suites::SuiteReport r;
    r.suite = "adjoint";
    r.m = 3;
    r.k = 1;
    r.N = {8, 16};
    r.residuals = {0.1, 0.05};
    r.sign = 1;
    hsca::app::RunConfig cfg;
    cfg.command = "verify";
    const auto j = hsca::app::report_json(r, cfg);
    CHECK(j["sign"] == 1);
    CHECK(j["order_estimate"].is_null());
    CHECK(j["metadata"]["config"]["command"] == "verify");
    r.suite = "stokes";
    CHECK_FALSE(hsca::app::report_json(r, cfg).contains("sign"));
}
