#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dergame/cli.hpp"

using namespace dergame;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("dergame_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"dergame"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

const char* kScenarioDoc = R"({
  "id": "toy",
  "n_locations": 2,
  "alpha": 0.5,
  "total_demand": 10.0,
  "base_demand": [5.0, 5.0],
  "grid": {"buy_price": 15.0, "sell_prices": "paper-default"},
  "ders": [{"location": 1, "capacity": 10.0}, {"location": 2, "capacity": 10.0}],
  "algorithm": {"max_iterations": 60, "conv_window": 10, "n_repetitions": 2},
  "seed": 9
})";

}  // namespace

TEST_CASE("fig2 preset: one site, growing producer counts") {
  const std::vector<ScenarioCase> cases = preset("fig2");
  REQUIRE(cases.size() == 3);
  CHECK(cases[0].id == "fig2_P1");
  CHECK(cases[0].scenario.n_locations == 1);
  CHECK(cases[0].scenario.ders.size() == 1);
  CHECK(cases[1].scenario.ders.size() == 2);
  CHECK(cases[2].scenario.ders.size() == 100);
  for (const ScenarioCase& c : cases) {
    CHECK(c.scenario.tariff.buy_price == doctest::Approx(15.0));
    CHECK(c.scenario.tariff.sell_prices[0] == doctest::Approx(50.0));
    CHECK(c.scenario.total_demand == doctest::Approx(5.0));
    CHECK(c.scenario.alpha == 0.0);
    for (const DerSpec& d : c.scenario.ders)
      CHECK(d.capacity == doctest::Approx(10.0));
  }
}

TEST_CASE("fig3 preset sweeps alpha in tenths") {
  const std::vector<ScenarioCase> cases = preset("fig3");
  REQUIRE(cases.size() == 11);
  for (int k = 0; k <= 10; ++k) {
    CHECK(cases[k].scenario.alpha == doctest::Approx(k / 10.0));
    CHECK(cases[k].scenario.n_locations == 3);
    CHECK(cases[k].scenario.ders.size() == 3);
    CHECK(cases[k].scenario.ders[k % 3].location == k % 3 + 1);
    CHECK(cases[k].scenario.total_demand == doctest::Approx(15.0));
  }
  CHECK(cases[0].id == "fig3_alpha0.0");
  CHECK(cases[10].id == "fig3_alpha1.0");
}

TEST_CASE("fig4 preset uses the ten-step tariff ladder") {
  const std::vector<ScenarioCase> cases = preset("fig4");
  REQUIRE(cases.size() == 11);
  const std::vector<double>& sells = cases[0].scenario.tariff.sell_prices;
  REQUIRE(sells.size() == 10);
  CHECK(sells[0] == doctest::Approx(50.0));
  CHECK(sells[1] == doctest::Approx(50.0 - 10.0 / 9.0));
  CHECK(sells[9] == doctest::Approx(40.0));
  CHECK(preset("fig4")[0].scenario.total_demand == doctest::Approx(50.0));
  CHECK_THROWS_AS(preset("fig5"), UnknownPreset);
}

TEST_CASE("scenario documents parse, resolve defaults and round-trip") {
  const nlohmann::json j = nlohmann::json::parse(kScenarioDoc);
  const ScenarioCase c = parse_scenario_json(j);
  CHECK(c.id == "toy");
  CHECK(c.scenario.tariff.sell_prices == std::vector<double>{50.0, 40.0});
  CHECK(c.params.max_iterations == 60);
  CHECK(c.params.conv_window == 10);
  CHECK(c.params.epsilon == doctest::Approx(0.1));   // default kept
  CHECK(c.params.sigma0 == doctest::Approx(5.0));    // default kept
  CHECK(c.scenario.ders[1].id == 1);

  const nlohmann::ordered_json out = scenario_to_json(c);
  const ScenarioCase again = parse_scenario_json(out);
  CHECK(scenario_to_json(again) == out);  // fixed point after one resolve
}

TEST_CASE("malformed scenario documents are rejected") {
  nlohmann::json j = nlohmann::json::parse(kScenarioDoc);
  j.erase("ders");
  CHECK_THROWS_AS(parse_scenario_json(j), std::invalid_argument);
  nlohmann::json j2 = nlohmann::json::parse(kScenarioDoc);
  j2["grid"].erase("buy_price");
  CHECK_THROWS_AS(parse_scenario_json(j2), std::invalid_argument);
}

TEST_CASE("config loader accepts single documents and manifests") {
  const nlohmann::json j = nlohmann::json::parse(kScenarioDoc);
  const ExperimentConfig single = load_config_json(j);
  CHECK(single.seed == 9u);
  CHECK(single.cases.size() == 1);

  ExperimentConfig cfg;
  cfg.seed = 123;
  cfg.trace = true;
  cfg.cases = {parse_scenario_json(j)};
  const ExperimentConfig replay = load_config_json(manifest_json(cfg));
  CHECK(replay.seed == 123u);
  CHECK(replay.trace);
  CHECK(replay.cases.size() == 1);
  CHECK(scenario_to_json(replay.cases[0]) == scenario_to_json(cfg.cases[0]));
}

TEST_CASE("coverage: all-grid allocation jumps by thirds at the tariffs") {
  Scenario s;
  s.n_locations = 3;
  s.ders = {{0, 1, 10.0}, {1, 2, 10.0}, {2, 3, 10.0}};
  s.tariff.buy_price = 15.0;
  s.tariff.sell_prices = {50.0, 45.0, 40.0};
  s.base_demand = {5.0, 5.0, 5.0};
  s.total_demand = 15.0;
  s.alpha = 0.0;

  ExperimentSummary sum;
  RunFinal r;
  r.converged = true;
  r.final_prices = Eigen::VectorXd::Zero(3);
  r.final_prices << 50.0, 45.0, 40.0;  // producers at the grid prices sell 0
  r.final_sold = Eigen::VectorXd::Zero(3);
  r.final_decision.grid_purchase = Eigen::VectorXd::Constant(3, 5.0);
  r.final_decision.demand = Eigen::VectorXd::Constant(3, 5.0);
  sum.runs.push_back(r);

  const std::vector<CoveragePoint> curve =
      coverage_stats(sum, validate_scenario(s));
  REQUIRE(curve.size() == 3);
  CHECK(curve[0].price == doctest::Approx(40.0));
  CHECK(curve[0].fraction == doctest::Approx(1.0 / 3.0));
  CHECK(curve[1].price == doctest::Approx(45.0));
  CHECK(curve[1].fraction == doctest::Approx(2.0 / 3.0));
  CHECK(curve[2].price == doctest::Approx(50.0));
  CHECK(curve[2].fraction == doctest::Approx(1.0));
}

TEST_CASE("coverage: single site, single price is a unit step") {
  Scenario s;
  s.n_locations = 1;
  s.ders = {{0, 1, 10.0}};
  s.tariff.buy_price = 15.0;
  s.tariff.sell_prices = {50.0};
  s.base_demand = {5.0};
  s.total_demand = 5.0;
  s.alpha = 0.0;

  ExperimentSummary sum;
  RunFinal r;
  r.converged = false;  // falls back to pooling all runs
  r.final_prices = Eigen::VectorXd::Constant(1, 33.0);
  r.final_sold = Eigen::VectorXd::Constant(1, 5.0);
  r.final_decision.grid_purchase = Eigen::VectorXd::Zero(1);
  sum.runs.push_back(r);

  const std::vector<CoveragePoint> curve =
      coverage_stats(sum, validate_scenario(s));
  REQUIRE(curve.size() == 1);
  CHECK(curve[0].price == doctest::Approx(33.0));
  CHECK(curve[0].fraction == doctest::Approx(1.0));

  CHECK_THROWS_AS(coverage_stats(ExperimentSummary{}, validate_scenario(s)),
                  NoData);
}

TEST_CASE("cli writes the full results bundle") {
  const fs::path dir = fresh_dir("bundle");
  const fs::path doc = dir / "toy.json";
  std::ofstream(doc) << kScenarioDoc;
  const fs::path out = dir / "results";
  CHECK(cli({"--scenario", doc.string(), "--out", out.string(), "--trace"}) == 0);
  CHECK(fs::exists(out / "runs.csv"));
  CHECK(fs::exists(out / "summary.csv"));
  CHECK(fs::exists(out / "trace.csv"));
  CHECK(fs::exists(out / "manifest.json"));

  const std::string runs = slurp(out / "runs.csv");
  CHECK(runs.find("scenario_id,alpha,repetition,der_id,location,final_price,"
                  "final_sold,final_profit,converged,iterations\r\n") == 0);
  CHECK(runs.find("toy,0.50,0,0,1,") != std::string::npos);
  CHECK(runs.find("toy,0.50,1,1,2,") != std::string::npos);
}

TEST_CASE("identical flags give byte-identical outputs") {
  const fs::path dir = fresh_dir("determinism");
  const fs::path a = dir / "a", b = dir / "b";
  const std::vector<std::string> common = {"--preset", "fig2",  "--runs", "1",
                                           "--max-iter", "80",  "--window", "10",
                                           "--seed", "5"};
  auto with_out = [&](const fs::path& o) {
    std::vector<std::string> args = common;
    args.insert(args.end(), {"--out", o.string()});
    return args;
  };
  CHECK(cli(with_out(a)) == 0);
  CHECK(cli(with_out(b)) == 0);
  CHECK(slurp(a / "runs.csv") == slurp(b / "runs.csv"));
  CHECK(slurp(a / "summary.csv") == slurp(b / "summary.csv"));
  CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
}

TEST_CASE("a manifest alone reproduces runs.csv") {
  const fs::path dir = fresh_dir("replay");
  const fs::path a = dir / "a", b = dir / "b";
  CHECK(cli({"--preset", "fig3", "--runs", "2", "--max-iter", "50", "--window",
             "10", "--seed", "21", "--out", a.string()}) == 0);
  const std::string original = slurp(a / "runs.csv");
  CHECK(cli({"--scenario", (a / "manifest.json").string(), "--out",
             b.string()}) == 0);
  CHECK(slurp(b / "runs.csv") == original);
  CHECK(slurp(b / "manifest.json") == slurp(a / "manifest.json"));
}

TEST_CASE("exit codes separate bad input from io failure") {
  const fs::path dir = fresh_dir("exitcodes");
  CHECK(cli({"--preset", "fig9", "--out", (dir / "x").string()}) == 1);
  CHECK(cli({}) == 1);  // neither source given
  CHECK(cli({"--preset", "fig2", "--scenario", "x.json"}) == 1);
  CHECK(cli({"--scenario", (dir / "missing.json").string()}) == 2);

  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << "{not json";
  CHECK(cli({"--scenario", bad.string()}) == 1);

  const fs::path infeasible = dir / "infeasible.json";
  std::ofstream(infeasible) << R"({"n_locations": 1, "alpha": 0.0,
    "total_demand": 99.0, "base_demand": [5.0],
    "grid": {"buy_price": 15.0, "sell_prices": [50.0]},
    "ders": [{"location": 1, "capacity": 10.0}]})";
  CHECK(cli({"--scenario", infeasible.string()}) == 1);

  const fs::path blocker = dir / "blocker";
  std::ofstream(blocker) << "plain file";
  const fs::path doc = dir / "toy.json";
  std::ofstream(doc) << kScenarioDoc;
  CHECK(cli({"--scenario", doc.string(), "--out",
             (blocker / "sub").string()}) == 2);
}
