#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "percont/cli.hpp"
#include "percont/config.hpp"
#include "percont/errors.hpp"

using namespace percont;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kConfigs = PERCONT_CONFIG_DIR;

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "percont");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli::run(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("percont_test_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string config_error_key(const json& doc) {
    try {
        config::parse_config(doc);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<none>";
}

json minimal() {
    return json::parse(R"({"id": "m", "kind": "cyclic", "n": 2, "m": 1, "g": ["x2"], "h": "x1",
                           "window": {"rho": [1, 1], "omega1_lo": -0.5, "omega1_hi": 0.5}})");
}

}  // namespace

TEST_CASE("defaults fill a minimal config") {
    const config::ProblemConfig cfg = config::parse_config(minimal());
    CHECK(cfg.numerics.M == 128);
    CHECK(cfg.numerics.quad_panels == 256);
    CHECK(cfg.T == 1.0);
    const json echo = config::to_json(cfg);
    CHECK(echo["numerics"]["M"] == 128);
    CHECK(config::parse_config(echo).numerics.M == 128);
}

TEST_CASE("config errors name the offending key") {
    json a = minimal();
    a["window"]["rho"][0] = -1.0;
    CHECK(config_error_key(a) == "window.rho[0]");

    json b = minimal();
    b["numerics"] = {{"foo", 1}};
    CHECK(config_error_key(b) == "numerics.foo");

    json c = minimal();
    c["kind"] = "second_order";
    c["phi"] = "laplace";
    c["f"] = "-x";
    c.erase("g");
    c.erase("h");
    c.erase("n");
    try {
        config::parse_config(c);
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("unknown operator 'laplace'") != std::string::npos);
        for (const char* name : {"identity", "p_laplacian", "minkowski", "rotation", "swap_negate"})
            CHECK(what.find(name) != std::string::npos);
    }

    json d = minimal();
    d["g"] = json::array();
    CHECK(config_error_key(d) == "g");
}

TEST_CASE("run on the first introductory example") {
    const fs::path out = scratch("intro1");
    CHECK(run_cli({"run", "--config", (kConfigs / "intro_example1.json").string(), "--out", out.string()}) == 2);
    const json rep = json::parse(slurp(out / "report.json"));
    CHECK(rep["status"] == "BoundaryExit");
    CHECK(rep["exit_code"] == 2);
    CHECK(rep["timings"].is_null());
    REQUIRE(rep["traces"].size() == 1);
    CHECK(std::abs(rep["traces"][0]["lambda_star"].get<double>() - 0.5) <= 1e-6);
    const std::string csv = slurp(out / "trace.csv");
    CHECK(csv.rfind("trace,step,lambda,", 0) == 0);
    CHECK(csv.find("BoundaryExit") != std::string::npos);
}

TEST_CASE("fold in arclength mode and step failure in natural mode") {
    const fs::path out = scratch("intro2");
    const std::string cfg = (kConfigs / "intro_example2.json").string();
    CHECK(run_cli({"continue", "--config", cfg, "--out", out.string()}) == 2);
    CHECK(json::parse(slurp(out / "report.json"))["status"] == "FoldDetected");
    CHECK(run_cli({"continue", "--config", cfg, "--out", out.string(), "--mode", "natural"}) == 2);
    const json rep = json::parse(slurp(out / "report.json"));
    CHECK(rep["config"]["numerics"]["mode"] == "natural");
}

TEST_CASE("subcommands on a cyclic problem") {
    const std::string cfg = (kConfigs / "cyclic_poly.json").string();
    const fs::path out = scratch("poly");
    CHECK(run_cli({"product-check", "--config", cfg, "--out", out.string()}) == 0);
    const json pf = json::parse(slurp(out / "report.json"))["product_formula"];
    CHECK(pf["direct"] == pf["eta_product"]);
    CHECK(pf["direct"] == pf["theorem_product"]);
    CHECK(run_cli({"check-hypotheses", "--config", cfg, "--out", out.string()}) == 0);
    CHECK(run_cli({"degree", "--config", cfg, "--out", out.string()}) == 0);
    CHECK(run_cli({"average", "--config", cfg, "--out", out.string()}) == 0);
    CHECK(run_cli({"run", "--config", cfg, "--out", out.string(), "--mesh", "32"}) == 0);
    const json rep = json::parse(slurp(out / "report.json"));
    CHECK(rep["config"]["numerics"]["M"] == 32);
    CHECK(rep["solutions"].size() == 3);  // one per zero of hat h
}

TEST_CASE("second-order problems") {
    const fs::path out = scratch("second");
    CHECK(run_cli({"run", "--config", (kConfigs / "forced_oscillator.json").string(), "--out", out.string()}) == 0);
    CHECK(run_cli({"run", "--config", (kConfigs / "rotation.json").string(), "--out", out.string()}) == 2);
    const json rep = json::parse(slurp(out / "report.json"));
    CHECK(rep["status"] == "fail");
    CHECK(rep["solutions"].empty());
    CHECK(run_cli({"check-phi", "--config", (kConfigs / "minkowski_manufactured.json").string(), "--out",
                   out.string()}) == 0);
}

TEST_CASE("operational errors exit with 1") {
    const fs::path out = scratch("errors");
    CHECK(run_cli({"run", "--config", (out / "missing.json").string(), "--out", out.string()}) == 1);
    CHECK(run_cli({"run"}) == 1);
    CHECK(run_cli({"frobnicate", "--config", (kConfigs / "cyclic_poly.json").string()}) == 1);
    CHECK(run_cli({"product-check", "--config", (kConfigs / "intro_example1.json").string(), "--out", out.string()}) ==
          1);
}

TEST_CASE("reports are byte-identical across runs") {
    const std::string cfg = (kConfigs / "minkowski_manufactured.json").string();
    const fs::path a = scratch("repro_a"), b = scratch("repro_b");
    CHECK(run_cli({"run", "--config", cfg, "--out", a.string(), "--mesh", "64", "--points"}) == 0);
    CHECK(run_cli({"run", "--config", cfg, "--out", b.string(), "--mesh", "64", "--points"}) == 0);
    CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
    CHECK(slurp(a / "trace.csv") == slurp(b / "trace.csv"));
    CHECK_FALSE(slurp(a / "report.json").empty());
}
