#include "dergame/game.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>
#include <utility>

namespace dergame {

namespace {

// Agents ordered by ascending id, mirroring the OfferVector convention.
std::vector<DerAgent> make_agents(const Scenario& s, double epsilon) {
  std::vector<const DerSpec*> specs;
  specs.reserve(s.ders.size());
  for (const DerSpec& d : s.ders) specs.push_back(&d);
  std::sort(specs.begin(), specs.end(),
            [](const DerSpec* a, const DerSpec* b) { return a->id < b->id; });
  std::vector<DerAgent> agents;
  agents.reserve(specs.size());
  for (const DerSpec* d : specs)
    agents.push_back(make_agent(*d, s.tariff.sell_prices[d->location - 1],
                                s.tariff.buy_price, epsilon));
  return agents;
}

// Linear-interpolation quantile of a sorted sample.
double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double h = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

RunFinal to_run_final(GameResult&& g, int repetition,
                      const std::vector<DerAgent>& fresh_agents) {
  RunFinal r;
  r.repetition = repetition;
  r.converged = g.converged;
  r.iterations = g.iterations_used;
  r.final_prices = g.final_prices;
  r.final_sold = g.final_decision.der_purchase;
  r.final_profit = Eigen::VectorXd::Zero(g.final_prices.size());
  for (Eigen::Index k = 0; k < g.final_prices.size(); ++k)
    r.final_profit[k] = profit(g.final_prices[k], r.final_sold[k],
                               fresh_agents[k].capacity,
                               fresh_agents[k].buy_floor);
  r.final_decision = std::move(g.final_decision);
  r.final_cost = g.final_cost;
  r.seed = g.seed;
  r.trace = std::move(g.trace);
  return r;
}

ExperimentSummary summarize(std::vector<RunFinal>&& runs) {
  ExperimentSummary sum;
  sum.runs = std::move(runs);
  if (sum.runs.empty()) return sum;
  const Eigen::Index P = sum.runs.front().final_prices.size();
  sum.mean_final_price = Eigen::VectorXd::Zero(P);
  std::vector<double> pooled;
  pooled.reserve(sum.runs.size() * static_cast<std::size_t>(P));
  int converged = 0;
  for (const RunFinal& r : sum.runs) {
    sum.mean_final_price += r.final_prices;
    sum.mean_cost += r.final_cost;
    converged += r.converged ? 1 : 0;
    for (Eigen::Index k = 0; k < P; ++k) pooled.push_back(r.final_prices[k]);
  }
  const double m = static_cast<double>(sum.runs.size());
  sum.mean_final_price /= m;
  sum.mean_cost /= m;
  sum.convergence_rate = static_cast<double>(converged) / m;
  std::sort(pooled.begin(), pooled.end());
  sum.price_quantiles = {quantile(pooled, 0.0), quantile(pooled, 0.25),
                         quantile(pooled, 0.5), quantile(pooled, 0.75),
                         quantile(pooled, 1.0)};
  return sum;
}

}  // namespace

IterationRecord step(std::vector<DerAgent>& agents, const ValidatedScenario& s,
                     const AlgorithmParams& params, std::vector<Rng>& rngs,
                     int i) {
  const Eigen::Index P = static_cast<Eigen::Index>(agents.size());
  IterationRecord rec;
  rec.iteration = i;
  rec.bids = Eigen::VectorXd::Zero(P);
  rec.modes.resize(agents.size());
  rec.r2 = Eigen::VectorXd::Zero(P);
  rec.realized_profit = Eigen::VectorXd::Zero(P);
  rec.best_profit = Eigen::VectorXd::Zero(P);

  // Simultaneous bids: every agent sees only its own state.
  for (Eigen::Index k = 0; k < P; ++k) {
    DerAgent& a = agents[k];
    const RegressionFit f = a.ols.fit();
    rec.r2[k] = f.r2;
    if (f.r2 > params.r2_threshold && f.b > 0.0) {
      rec.modes[k] = BidMode::kExploit;
      rec.bids[k] = optimal_bid(f, a.capacity, a.buy_floor, a.sell_cap);
    } else {
      rec.modes[k] = BidMode::kExplore;
      rec.bids[k] = explore_bid(rngs[k], a.best_price, params.sigma0, i,
                                a.buy_floor, a.sell_cap);
    }
  }

  rec.decision = solve_mlec(s, rec.bids);

  for (Eigen::Index k = 0; k < P; ++k) {
    const double sold = rec.decision.der_purchase[k];
    rec.realized_profit[k] =
        profit(rec.bids[k], sold, agents[k].capacity, agents[k].buy_floor);
    agents[k] = update_agent(std::move(agents[k]), rec.bids[k], sold);
    rec.best_profit[k] = agents[k].best_profit;
  }
  return rec;
}

bool check_convergence(const std::vector<Eigen::VectorXd>& price_history,
                       double tol, int window) {
  if (static_cast<int>(price_history.size()) < window + 1) return false;
  const std::size_t last = price_history.size() - 1;
  for (int j = 0; j < window; ++j) {
    const Eigen::VectorXd& cur = price_history[last - j];
    const Eigen::VectorXd& prev = price_history[last - j - 1];
    if ((cur - prev).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

GameResult run_game(const ValidatedScenario& s, const AlgorithmParams& params,
                    std::uint64_t seed, bool record_trace) {
  const Scenario& sc = s.get();
  std::vector<DerAgent> agents = make_agents(sc, params.epsilon);
  std::vector<Rng> rngs;
  rngs.reserve(agents.size());
  for (const DerAgent& a : agents)
    rngs.emplace_back(substream_seed(seed, static_cast<std::uint64_t>(a.id)));

  GameResult res;
  res.seed = seed;
  Eigen::VectorXd prev_bids;
  int streak = 0;  // consecutive rounds with all bid moves <= tolerance

  for (int i = 1; i <= params.max_iterations; ++i) {
    IterationRecord rec = step(agents, s, params, rngs, i);
    if (prev_bids.size() > 0) {
      const double move = (rec.bids - prev_bids).cwiseAbs().maxCoeff();
      streak = move <= params.conv_tolerance ? streak + 1 : 0;
    }
    prev_bids = rec.bids;
    res.iterations_used = i;
    res.final_prices = rec.bids;
    res.final_cost = rec.decision.total_cost;
    if (record_trace) {
      res.trace.push_back(std::move(rec));
      if (streak >= params.conv_window) {
        res.final_decision = res.trace.back().decision;
        res.converged = true;
        return res;
      }
    } else {
      res.final_decision = std::move(rec.decision);
      if (streak >= params.conv_window) {
        res.converged = true;
        return res;
      }
    }
  }
  if (record_trace && !res.trace.empty())
    res.final_decision = res.trace.back().decision;
  return res;
}

std::vector<ExperimentSummary> run_experiment(
    const std::vector<ValidatedScenario>& scenarios,
    const AlgorithmParams& params, std::uint64_t base_seed, int n_threads,
    bool record_trace) {
  validate_params(params);
  const int reps = params.n_repetitions;
  const std::size_t n_tasks = scenarios.size() * static_cast<std::size_t>(reps);
  std::vector<std::vector<RunFinal>> finals(scenarios.size());
  for (auto& f : finals) f.resize(reps);

  std::vector<std::vector<DerAgent>> fresh(scenarios.size());
  for (std::size_t si = 0; si < scenarios.size(); ++si)
    fresh[si] = make_agents(scenarios[si].get(), params.epsilon);

  auto run_task = [&](std::size_t t) {
    const std::size_t si = t / static_cast<std::size_t>(reps);
    const int k = static_cast<int>(t % static_cast<std::size_t>(reps));
    GameResult g = run_game(scenarios[si], params,
                            base_seed + static_cast<std::uint64_t>(k),
                            record_trace);
    finals[si][k] = to_run_final(std::move(g), k, fresh[si]);
  };

  if (n_threads <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    n_threads = static_cast<int>(
        std::min<std::size_t>(std::max(hw, 1u), std::max<std::size_t>(n_tasks, 1)));
  }

  if (n_threads <= 1 || n_tasks <= 1) {
    for (std::size_t t = 0; t < n_tasks; ++t) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
      for (;;) {
        const std::size_t t = next.fetch_add(1);
        if (t >= n_tasks || failed.load()) return;
        try {
          run_task(t);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < n_threads; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
    if (failed.load()) std::rethrow_exception(error);
  }

  std::vector<ExperimentSummary> out;
  out.reserve(scenarios.size());
  for (auto& f : finals) out.push_back(summarize(std::move(f)));
  return out;
}

}  // namespace dergame
