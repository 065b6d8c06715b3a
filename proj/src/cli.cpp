#include "dergame/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <utility>

namespace dergame {

namespace {

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

AlgorithmParams params_from_json(const nlohmann::json& j) {
  AlgorithmParams p;  // defaults; present keys override
  if (!j.is_object()) throw std::invalid_argument("algorithm must be an object");
  p.epsilon = j.value("epsilon", p.epsilon);
  p.sigma0 = j.value("sigma0", p.sigma0);
  p.r2_threshold = j.value("r2_threshold", p.r2_threshold);
  p.conv_tolerance = j.value("conv_tolerance", p.conv_tolerance);
  p.conv_window = j.value("conv_window", p.conv_window);
  p.max_iterations = j.value("max_iterations", p.max_iterations);
  p.n_repetitions = j.value("n_repetitions", p.n_repetitions);
  return p;
}

// Canonical reporting order: ascending DER id (the order used by offer and
// purchase vectors everywhere else).
std::vector<DerSpec> sorted_ders(const Scenario& s) {
  std::vector<DerSpec> ds = s.ders;
  std::sort(ds.begin(), ds.end(),
            [](const DerSpec& a, const DerSpec& b) { return a.id < b.id; });
  return ds;
}

Scenario case_study_scenario(int n_locations, int n_ders_per_location,
                             double alpha) {
  Scenario s;
  s.n_locations = n_locations;
  s.alpha = alpha;
  s.tariff.buy_price = 15.0;
  int id = 0;
  for (int n = 1; n <= n_locations; ++n) {
    s.tariff.sell_prices.push_back(default_sell_price(n, n_locations));
    s.base_demand.push_back(5.0);
    for (int p = 0; p < n_ders_per_location; ++p)
      s.ders.push_back({id++, n, 10.0});
  }
  s.total_demand = 5.0 * n_locations;
  return s;
}

std::vector<ScenarioCase> alpha_sweep(const std::string& stem, int n_locations) {
  std::vector<ScenarioCase> cases;
  for (int k = 0; k <= 10; ++k) {
    const double alpha = static_cast<double>(k) / 10.0;
    ScenarioCase c;
    c.id = stem + "_alpha" + fmt("%.1f", alpha);
    c.scenario = case_study_scenario(n_locations, 1, alpha);
    cases.push_back(std::move(c));
  }
  return cases;
}

void append_csv_row(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  out += "\r\n";
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::ios_base::failure("cannot open " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::ios_base::failure("write failed for " + path.string());
}

}  // namespace

std::vector<ScenarioCase> preset(const std::string& name) {
  if (name == "fig2") {
    std::vector<ScenarioCase> cases;
    for (int P : {1, 2, 100}) {
      ScenarioCase c;
      c.id = "fig2_P" + std::to_string(P);
      c.scenario = case_study_scenario(1, P, 0.0);
      cases.push_back(std::move(c));
    }
    return cases;
  }
  if (name == "fig3") return alpha_sweep("fig3", 3);
  if (name == "fig4") return alpha_sweep("fig4", 10);
  throw UnknownPreset("unknown preset '" + name + "' (expected fig2, fig3 or fig4)");
}

ScenarioCase parse_scenario_json(const nlohmann::json& j) {
  try {
    ScenarioCase c;
    c.id = j.value("id", std::string("scenario"));
    Scenario& s = c.scenario;
    s.n_locations = j.at("n_locations").get<int>();
    s.alpha = j.at("alpha").get<double>();
    s.total_demand = j.at("total_demand").get<double>();
    s.base_demand = j.at("base_demand").get<std::vector<double>>();

    const nlohmann::json& grid = j.at("grid");
    s.tariff.buy_price = grid.at("buy_price").get<double>();
    const nlohmann::json& sells = grid.at("sell_prices");
    if (sells.is_string() && sells.get<std::string>() == "paper-default") {
      for (int n = 1; n <= s.n_locations; ++n)
        s.tariff.sell_prices.push_back(default_sell_price(n, s.n_locations));
    } else {
      s.tariff.sell_prices = sells.get<std::vector<double>>();
    }

    int id = 0;
    for (const nlohmann::json& dj : j.at("ders")) {
      DerSpec d;
      d.id = id++;
      d.location = dj.at("location").get<int>();
      d.capacity = dj.at("capacity").get<double>();
      s.ders.push_back(d);
    }

    if (j.contains("algorithm")) c.params = params_from_json(j.at("algorithm"));
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad scenario document: ") + e.what());
  }
}

nlohmann::ordered_json scenario_to_json(const ScenarioCase& c) {
  nlohmann::ordered_json j;
  j["id"] = c.id;
  j["n_locations"] = c.scenario.n_locations;
  j["alpha"] = c.scenario.alpha;
  j["total_demand"] = c.scenario.total_demand;
  j["base_demand"] = c.scenario.base_demand;
  j["grid"]["buy_price"] = c.scenario.tariff.buy_price;
  j["grid"]["sell_prices"] = c.scenario.tariff.sell_prices;
  j["ders"] = nlohmann::ordered_json::array();
  for (const DerSpec& d : sorted_ders(c.scenario))
    j["ders"].push_back({{"location", d.location}, {"capacity", d.capacity}});
  j["algorithm"] = {{"epsilon", c.params.epsilon},
                    {"sigma0", c.params.sigma0},
                    {"r2_threshold", c.params.r2_threshold},
                    {"conv_tolerance", c.params.conv_tolerance},
                    {"conv_window", c.params.conv_window},
                    {"max_iterations", c.params.max_iterations},
                    {"n_repetitions", c.params.n_repetitions}};
  return j;
}

ExperimentConfig load_config_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  try {
    if (j.contains("scenarios")) {  // manifest: replay the whole experiment
      cfg.seed = j.value("seed", cfg.seed);
      cfg.trace = j.value("trace", cfg.trace);
      for (const nlohmann::json& sj : j.at("scenarios"))
        cfg.cases.push_back(parse_scenario_json(sj));
      return cfg;
    }
    cfg.seed = j.value("seed", cfg.seed);
    cfg.cases.push_back(parse_scenario_json(j));
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad scenario document: ") + e.what());
  }
}

nlohmann::ordered_json manifest_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["trace"] = cfg.trace;
  j["scenarios"] = nlohmann::ordered_json::array();
  for (const ScenarioCase& c : cfg.cases) j["scenarios"].push_back(scenario_to_json(c));
  return j;
}

std::vector<CoveragePoint> coverage_stats(const ExperimentSummary& summary,
                                          const ValidatedScenario& s) {
  if (summary.runs.empty()) throw NoData("no repetitions to pool");
  std::vector<const RunFinal*> pool;
  for (const RunFinal& r : summary.runs)
    if (r.converged) pool.push_back(&r);
  if (pool.empty())  // none converged: the curve is still defined over all runs
    for (const RunFinal& r : summary.runs) pool.push_back(&r);

  std::map<double, double> energy_at;  // price -> pooled kW
  double total = 0.0;
  for (const RunFinal* r : pool) {
    for (Eigen::Index k = 0; k < r->final_sold.size(); ++k)
      if (r->final_sold[k] > kFeasTol) {
        energy_at[r->final_prices[k]] += r->final_sold[k];
        total += r->final_sold[k];
      }
    for (Eigen::Index n = 0; n < r->final_decision.grid_purchase.size(); ++n)
      if (r->final_decision.grid_purchase[n] > kFeasTol) {
        energy_at[s->tariff.sell_prices[static_cast<std::size_t>(n)]] +=
            r->final_decision.grid_purchase[n];
        total += r->final_decision.grid_purchase[n];
      }
  }

  std::vector<CoveragePoint> curve;
  double cum = 0.0;
  for (const auto& [price, kw] : energy_at) {
    cum += kw;
    curve.push_back({price, cum / total});
  }
  return curve;
}

void write_results(const ExperimentConfig& cfg,
                   const std::vector<ExperimentSummary>& summaries,
                   const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  std::string runs;
  append_csv_row(runs, {"scenario_id", "alpha", "repetition", "der_id",
                        "location", "final_price", "final_sold",
                        "final_profit", "converged", "iterations"});
  std::string trace;
  if (cfg.trace)
    append_csv_row(trace, {"scenario_id", "repetition", "iteration", "der_id",
                           "bid", "mode", "r2", "sold", "profit",
                           "best_profit", "total_cost"});

  // alpha = 0 reference cost per (locations, producer count) family, for
  // the cost-reduction column.
  std::map<std::pair<int, std::size_t>, double> ref_cost;
  for (std::size_t ci = 0; ci < cfg.cases.size(); ++ci) {
    const Scenario& s = cfg.cases[ci].scenario;
    const auto key = std::make_pair(s.n_locations, s.ders.size());
    if (s.alpha == 0.0 && !ref_cost.count(key))
      ref_cost[key] = summaries[ci].mean_cost;
  }

  std::string summary;
  append_csv_row(summary,
                 {"scenario_id", "alpha", "n_locations", "n_ders", "mean_cost",
                  "cost_reduction_vs_alpha0", "convergence_rate", "price_min",
                  "price_q25", "price_median", "price_q75", "price_max",
                  "coverage"});

  for (std::size_t ci = 0; ci < cfg.cases.size(); ++ci) {
    const ScenarioCase& c = cfg.cases[ci];
    const ExperimentSummary& sum = summaries[ci];
    const std::vector<DerSpec> ders = sorted_ders(c.scenario);

    for (const RunFinal& r : sum.runs) {
      for (std::size_t k = 0; k < ders.size(); ++k) {
        const Eigen::Index ek = static_cast<Eigen::Index>(k);
        append_csv_row(
            runs, {c.id, fmt("%.2f", c.scenario.alpha),
                   std::to_string(r.repetition), std::to_string(ders[k].id),
                   std::to_string(ders[k].location),
                   fmt("%.2f", r.final_prices[ek]),
                   fmt("%.6f", r.final_sold[ek]),
                   fmt("%.4f", r.final_profit[ek]),
                   r.converged ? "1" : "0", std::to_string(r.iterations)});
      }
      for (const IterationRecord& rec : r.trace) {
        for (std::size_t k = 0; k < ders.size(); ++k) {
          const Eigen::Index ek = static_cast<Eigen::Index>(k);
          append_csv_row(
              trace,
              {c.id, std::to_string(r.repetition), std::to_string(rec.iteration),
               std::to_string(ders[k].id), fmt("%.6f", rec.bids[ek]),
               rec.modes[k] == BidMode::kExploit ? "exploit" : "explore",
               fmt("%.6f", rec.r2[ek]), fmt("%.6f", rec.decision.der_purchase[ek]),
               fmt("%.6f", rec.realized_profit[ek]),
               fmt("%.6f", rec.best_profit[ek]),
               fmt("%.6f", rec.decision.total_cost)});
        }
      }
    }

    const auto key = std::make_pair(c.scenario.n_locations, c.scenario.ders.size());
    std::string reduction;
    if (const auto it = ref_cost.find(key); it != ref_cost.end() && it->second > 0.0)
      reduction = fmt("%.6f", 1.0 - sum.mean_cost / it->second);

    std::string coverage;
    for (const CoveragePoint& pt :
         coverage_stats(sum, validate_scenario(c.scenario))) {
      if (!coverage.empty()) coverage += ';';
      coverage += fmt("%.2f:%.6f", pt.price, pt.fraction);
    }

    append_csv_row(summary,
                   {c.id, fmt("%.2f", c.scenario.alpha),
                    std::to_string(c.scenario.n_locations),
                    std::to_string(c.scenario.ders.size()),
                    fmt("%.4f", sum.mean_cost), reduction,
                    fmt("%.3f", sum.convergence_rate),
                    fmt("%.2f", sum.price_quantiles[0]),
                    fmt("%.2f", sum.price_quantiles[1]),
                    fmt("%.2f", sum.price_quantiles[2]),
                    fmt("%.2f", sum.price_quantiles[3]),
                    fmt("%.2f", sum.price_quantiles[4]), '"' + coverage + '"'});
  }

  write_file(out_dir / "runs.csv", runs);
  write_file(out_dir / "summary.csv", summary);
  if (cfg.trace) write_file(out_dir / "trace.csv", trace);
  write_file(out_dir / "manifest.json", manifest_json(cfg).dump(2) + "\n");
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Dynamic pricing negotiation between a multi-location "
               "electricity consumer and local producers"};
  std::string preset_name, scenario_path, out_dir = "results";
  std::optional<std::uint64_t> seed;
  std::optional<int> runs_override, window, max_iter;
  std::optional<double> tol, sigma0, epsilon;
  bool want_trace = false;
  int threads = 0;

  app.add_option("--preset", preset_name, "Experiment family: fig2, fig3 or fig4");
  app.add_option("--scenario", scenario_path, "Scenario or manifest JSON file");
  app.add_option("--seed", seed, "Base seed (repetition k runs with seed+k)");
  app.add_option("--runs", runs_override, "Repetitions per scenario");
  app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--trace", want_trace, "Also write the per-iteration trace.csv");
  app.add_option("--tol", tol, "Convergence tolerance, ct/kWh");
  app.add_option("--window", window, "Convergence window, iterations");
  app.add_option("--sigma0", sigma0, "Initial exploration std. dev., ct/kWh");
  app.add_option("--epsilon", epsilon, "Knowledge seed-point offset, ct/kWh");
  app.add_option("--max-iter", max_iter, "Iteration cap per run");
  app.add_option("--threads", threads, "Worker threads (0 = auto)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (preset_name.empty() == scenario_path.empty()) {
    std::cerr << "exactly one of --preset or --scenario is required\n";
    return 1;
  }

  ExperimentConfig cfg;
  try {
    if (!preset_name.empty()) {
      cfg.cases = preset(preset_name);
    } else {
      std::ifstream f(scenario_path, std::ios::binary);
      if (!f) {
        std::cerr << "cannot read " << scenario_path << "\n";
        return 2;
      }
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(f);
      } catch (const nlohmann::json::exception& e) {
        std::cerr << "bad JSON in " << scenario_path << ": " << e.what() << "\n";
        return 1;
      }
      cfg = load_config_json(j);
    }

    if (seed) cfg.seed = *seed;
    if (want_trace) cfg.trace = true;
    for (ScenarioCase& c : cfg.cases) {
      if (runs_override) c.params.n_repetitions = *runs_override;
      if (tol) c.params.conv_tolerance = *tol;
      if (window) c.params.conv_window = *window;
      if (sigma0) c.params.sigma0 = *sigma0;
      if (epsilon) c.params.epsilon = *epsilon;
      if (max_iter) c.params.max_iterations = *max_iter;
    }

    std::vector<ExperimentSummary> summaries;
    for (const ScenarioCase& c : cfg.cases) {
      validate_params(c.params);
      const ValidatedScenario vs = validate_scenario(c.scenario);
      summaries.push_back(std::move(
          run_experiment({vs}, c.params, cfg.seed, threads, cfg.trace)[0]));
    }
    write_results(cfg, summaries, out_dir);
  } catch (const std::ios_base::failure& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace dergame
