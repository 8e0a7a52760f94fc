#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "frwmax/cli.hpp"

using namespace frwmax;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_main(std::vector<std::string> args) {
  args.insert(args.begin(), "frwmax");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return main_entry(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "frwmax_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string binary() {
  const char* bin = std::getenv("FRWMAX_BIN");
  return bin ? bin : "";
}

}  // namespace

TEST_CASE("config parsing") {
  const Config cfg = Config::parse("# comment\ncurvature = hyperbolic\n\ntau = 1, 2.5\n"
                                   "points = 0,0,1; 0.5,0,1.2\ntiming = on\n");
  CHECK(cfg.get_string("curvature", "") == "hyperbolic");
  CHECK(cfg.get_doubles("tau", {}) == std::vector<double>{1.0, 2.5});
  CHECK(cfg.get_points("points", {}).size() == 2);
  CHECK(cfg.get_bool("timing", false));
  CHECK_THROWS_AS(Config::parse("novalue\n", "x.cfg"), ConfigError);
  try {
    Config::parse("a = 1\nbroken\n", "x.cfg");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("x.cfg:2") != std::string::npos);
  }
  CHECK_THROWS_AS(Config::parse("order = 3x").get_int("order", 32), ConfigError);
  CHECK_THROWS_AS(Config::parse("tau0 = nan").get_double("tau0", 0.0), ConfigError);
}

TEST_CASE("defaults resolve for every task") {
  for (const auto& task : kTasks) {
    for (const char* k : {"flat", "hyperbolic"}) {
      Config cfg;
      cfg.set("curvature", k);
      const RunConfig rc = resolve_config(task, cfg);
      CHECK(rc.task == task);
      CHECK(rc.resolved.count("curvature") == 1);
      CHECK(rc.resolved.at("timing") == "off");
      CHECK(rc.csv_path == task + ".csv");
    }
  }
  Config cfg;
  cfg.set("curvature", "hyperbolic");
  const RunConfig h = resolve_config("huygens", cfg);
  CHECK(h.tau == doctest::Approx(10.0 * h.problem().f.geodesic_support()->radius));
}

TEST_CASE("configuration errors are collected and name the field") {
  Config cfg;
  cfg.set("f.radius", "-1");
  cfg.set("order", "two");
  cfg.set("bogus", "1");
  try {
    resolve_config("propagate", cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("f.radius") != std::string::npos);
    CHECK(msg.find("order") != std::string::npos);
    CHECK(msg.find("bogus") != std::string::npos);
  }
  CHECK_THROWS_AS(resolve_config("nope", Config{}), ConfigError);
  Config past;
  past.set("tau0", "1");
  past.set("tau", "0.5");
  try {
    resolve_config("propagate", past);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("tau:") != std::string::npos);
  }
  Config singular;
  singular.set("tau0", "0.5");
  CHECK_THROWS_AS(resolve_config("singular-limit", singular), ConfigError);
  Config big;
  big.set("grid.n", "200");
  CHECK_THROWS_AS(resolve_config("identify-pde", big), ConfigError);
}

TEST_CASE("propagate writes CSV and JSON and reruns are byte-identical") {
  const auto csv = scratch("prop.csv");
  const auto json = scratch("prop.json");
  const std::vector<std::string> args{"propagate", "--tau", "0.5,1.5", "--points=0,0,0;0.5,0,0",
                                      "--csv", csv.string(), "--json", json.string()};
  REQUIRE(run_main(args) == 0);
  const std::string csv1 = slurp(csv);
  const std::string json1 = slurp(json);
  REQUIRE(run_main(args) == 0);
  CHECK(slurp(csv) == csv1);
  CHECK(slurp(json) == json1);
  CHECK(csv1.rfind("tau,x,y,z,A1,A2,A3,A_tau1,A_tau2,A_tau3,order\n", 0) == 0);
  CHECK(std::count(csv1.begin(), csv1.end(), '\n') == 5);
  const auto j = nlohmann::json::parse(json1);
  CHECK(j["task"] == "propagate");
  CHECK(j["pass"] == true);
  CHECK(j["wall_time_s"] == 0.0);
  CHECK(j["config"]["tau"] == "0.5,1.5");
  CHECK(j["config"]["points"] == "0,0,0;0.5,0,0");
  CHECK(j["metrics"]["samples"] == 4);
}

TEST_CASE("config file plus overrides") {
  const auto cfg = scratch("run.cfg");
  std::ofstream(cfg) << "curvature = hyperbolic\ntau = 1.2\nf.amplitude = 2, 0, 0\n";
  const auto json = scratch("cfg.json");
  REQUIRE(run_main({"propagate", "--config", cfg.string(), "--tau0", "0.2", "--json",
                    json.string(), "--csv", scratch("cfg.csv").string()}) == 0);
  const auto j = nlohmann::json::parse(slurp(json));
  CHECK(j["config"]["curvature"] == "hyperbolic");
  CHECK(j["config"]["tau0"] == "0.20000000000000001");
  CHECK(j["config"]["f.amplitude"] == "2,0,0");
}

TEST_CASE("usage errors exit with status 1") {
  CHECK(run_main({"propagate", "--tau0", "1", "--tau", "1"}) == 1);
  CHECK(run_main({"unknown-task"}) == 1);
  CHECK(run_main({"propagate", "--config", scratch("missing.cfg").string()}) == 1);
  CHECK(run_main({"propagate", "--order"}) == 1);
  CHECK(run_main({"propagate", "stray"}) == 1);
  CHECK(run_main({}) == 1);
}

TEST_CASE("decay with flat defaults passes") {
  const auto json = scratch("decay.json");
  const auto csv = scratch("decay.csv");
  REQUIRE(run_main({"decay", "--csv", csv.string(), "--json", json.string()}) == 0);
  const auto j = nlohmann::json::parse(slurp(json));
  CHECK(j["pass"] == true);
  CHECK(j["metrics"]["estimate_tau"].get<double>() == doctest::Approx(-1.0).epsilon(0.05));
  CHECK(slurp(csv).rfind("tau,t,max_abs_A,used\n", 0) == 0);
}

TEST_CASE("identify-pde JSON carries both distances and a verdict") {
  const auto json = scratch("pde.json");
  REQUIRE(run_main({"identify-pde", "--curvature", "hyperbolic", "--grid.n", "48", "--csv",
                    scratch("pde.csv").string(), "--json", json.string()}) >= 0);
  const auto j = nlohmann::json::parse(slurp(json));
  CHECK(j["metrics"].contains("distance_mass0"));
  CHECK(j["metrics"].contains("distance_mass1"));
  CHECK(j["metrics"].contains("verdict"));
}

TEST_CASE("installed binary reports exit codes") {
  const std::string bin = binary();
  if (bin.empty()) return;
  const std::string out = scratch("bin.out").string();
  CHECK(std::system((bin + " propagate --tau0 1 --tau 0.5 > " + out + " 2>&1").c_str()) != 0);
  CHECK(slurp(out).find("tau") != std::string::npos);
  CHECK(std::system((bin + " --help > " + out + " 2>&1").c_str()) == 0);
}
