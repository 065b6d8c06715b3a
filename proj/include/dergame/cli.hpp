#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dergame/game.hpp"
#include "dergame/model.hpp"

namespace dergame {

struct UnknownPreset : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One runnable scenario with its learning knobs, as resolved from a preset
// or a scenario file.
struct ScenarioCase {
  std::string id;
  Scenario scenario;
  AlgorithmParams params;
};

// Fully resolved experiment: everything needed to reproduce runs.csv.
struct ExperimentConfig {
  std::vector<ScenarioCase> cases;
  std::uint64_t seed = 42;
  bool trace = false;
};

// Case-study experiment families:
//   fig2 - N=1, alpha=0, P in {1, 2, 100} producers at the single location
//   fig3 - N=3, one producer per location, alpha in {0.0, 0.1, ..., 1.0}
//   fig4 - N=10, one producer per location, same alpha sweep
// All use 5 kW base demand per location, total demand 5N, 10 kW producer
// capacity, 15 ct/kWh feed-in and the default retail tariff.
// Throws UnknownPreset.
std::vector<ScenarioCase> preset(const std::string& name);

// Scenario document: n_locations, alpha, total_demand, base_demand[],
// grid {buy_price, sell_prices[] | "paper-default"}, ders[] {location,
// capacity}, optional algorithm {...} (missing keys take the defaults),
// optional id. Throws std::invalid_argument on malformed documents.
ScenarioCase parse_scenario_json(const nlohmann::json& j);
nlohmann::ordered_json scenario_to_json(const ScenarioCase& c);

// Accepts either a single scenario document or a manifest (a document with
// a "scenarios" array plus top-level seed/trace), so a written
// manifest.json can be fed back in to replay the whole experiment.
ExperimentConfig load_config_json(const nlohmann::json& j);
nlohmann::ordered_json manifest_json(const ExperimentConfig& cfg);

struct CoveragePoint {
  double price = 0.0;     // ct/kWh
  double fraction = 0.0;  // of total demand supplied at or below `price`
};

// Pooled load-coverage curve for one scenario: every purchase in each
// repetition's final allocation counts at its effective price (grid energy
// at the local retail price, producer energy at its final offer); the curve
// accumulates the fraction of total demand supplied at or below each price.
// Pools converged repetitions, or all of them when none converged (the
// curve must still be defined for non-converging configurations).
// Throws NoData when there are no repetitions at all.
std::vector<CoveragePoint> coverage_stats(const ExperimentSummary& summary,
                                          const ValidatedScenario& s);

// Writes runs.csv, summary.csv, manifest.json and (when cfg.trace) trace.csv
// into out_dir. Deterministic byte-for-byte for a fixed config. Offer prices
// are reported at 0.01 ct/kWh granularity. Throws std::ios_base::failure on
// I/O errors.
void write_results(const ExperimentConfig& cfg,
                   const std::vector<ExperimentSummary>& summaries,
                   const std::filesystem::path& out_dir);

// Entry point behind main(): parses flags, runs the experiment, writes the
// results bundle. Returns 0 on success, 1 on invalid input, 2 on I/O
// failure. Non-convergence is data, not an error.
int run_cli(int argc, const char* const* argv);

}  // namespace dergame
