#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "dergame/der.hpp"
#include "dergame/mlec.hpp"
#include "dergame/model.hpp"

namespace dergame {

enum class BidMode : std::uint8_t { kExploit, kExplore };

struct IterationRecord {
  int iteration = 0;                 // 1-based
  Eigen::VectorXd bids;              // per DER, ct/kWh
  std::vector<BidMode> modes;        // per DER
  Eigen::VectorXd r2;                // per DER, fit quality this round
  MlecDecision decision;
  Eigen::VectorXd realized_profit;   // per DER, ct
  Eigen::VectorXd best_profit;       // per DER, record after the update
};

struct GameResult {
  std::vector<IterationRecord> trace;  // filled only when requested
  bool converged = false;
  Eigen::VectorXd final_prices;        // last round's bids
  MlecDecision final_decision;
  double final_cost = 0.0;
  int iterations_used = 0;
  std::uint64_t seed = 0;
};

// Aggregates over the repetitions of one scenario.
struct RunFinal {
  int repetition = 0;
  bool converged = false;
  int iterations = 0;
  Eigen::VectorXd final_prices;
  Eigen::VectorXd final_sold;
  Eigen::VectorXd final_profit;
  MlecDecision final_decision;
  double final_cost = 0.0;
  std::uint64_t seed = 0;
  std::vector<IterationRecord> trace;  // only with record_trace
};

struct ExperimentSummary {
  std::vector<RunFinal> runs;             // repetition order
  Eigen::VectorXd mean_final_price;       // per DER
  double mean_cost = 0.0;
  double convergence_rate = 0.0;
  // Pooled final offer prices across repetitions and DERs:
  // min, lower quartile, median, upper quartile, max.
  std::array<double, 5> price_quantiles{};
};

// One negotiation round. Each agent fits its demand estimate; with
// r2 > r2_threshold and b > 0 it bids the fitted optimum (exploit),
// otherwise a random bid around its best price so far (explore). Bids are
// simultaneous. The consumer then solves its procurement once, and every
// agent records its own (bid, sold) outcome and updates its profit record.
// agents/rngs are advanced in place; the returned record describes the
// round. rngs[k] is agent k's private stream.
IterationRecord step(std::vector<DerAgent>& agents, const ValidatedScenario& s,
                     const AlgorithmParams& params, std::vector<Rng>& rngs,
                     int i);

// True iff the history holds at least window+1 bid vectors and over the
// last `window` consecutive pairs no bid moved by more than tol.
bool check_convergence(const std::vector<Eigen::VectorXd>& price_history,
                       double tol, int window);

// Full negotiation from fresh agents: iterate `step` for i = 1, 2, ... until
// the convergence rule fires or max_iterations is hit (reported via the
// converged flag, not an error). Deterministic given the seed.
GameResult run_game(const ValidatedScenario& s, const AlgorithmParams& params,
                    std::uint64_t seed, bool record_trace = false);

// n_repetitions independent games per scenario with seeds
// base_seed + 0 .. base_seed + n_repetitions - 1, aggregated per scenario.
// n_threads > 1 distributes (scenario, repetition) pairs over a worker
// pool; results are merged in deterministic order, so thread count never
// changes the output. n_threads <= 0 picks a sensible default.
std::vector<ExperimentSummary> run_experiment(
    const std::vector<ValidatedScenario>& scenarios,
    const AlgorithmParams& params, std::uint64_t base_seed, int n_threads = 1,
    bool record_trace = false);

}  // namespace dergame
