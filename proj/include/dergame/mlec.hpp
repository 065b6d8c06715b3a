#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "dergame/model.hpp"

namespace dergame {

struct StepTooCoarse : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One offer price per DER, ordered by ascending DER id. The consumer side
// accepts any finite price here; keeping offers inside
// [buy_price, sell_price] is the bidder's job.
using OfferVector = Eigen::VectorXd;

struct MlecDecision {
  Eigen::VectorXd grid_purchase;  // per location, kW
  Eigen::VectorXd der_purchase;   // per DER (ascending id), kW
  Eigen::VectorXd demand;         // per location, kW
  double total_cost = 0.0;        // ct
};

// Exact minimum-cost procurement for the consumer:
//   minimize   sum_n grid[n]*sell[n] + sum_p der[p]*offer[p]
//   subject to demand[n] = grid[n] + sum of local DER purchases
//              sum_n demand[n] = total_demand
//              0 <= der[p] <= capacity[p],  grid[n] >= 0
//              (1-alpha)*base[n] <= demand[n] <= (1+alpha)*base[n]
// Per-location cost is piecewise-linear convex in demand[n] (merit-order
// fill over the local options), so greedy water-filling is exact: start
// every location at its demand lower bound, then push the remaining demand
// to whichever location currently offers the cheapest marginal kW.
// Tie-breaking is deterministic: options sort by (price, rank) with the
// grid ranked ahead of all DERs and DERs ranked by ascending id; among
// equal marginal prices the lowest location index fills first. One
// consequence: a DER pricing exactly at its local grid price sells 0.
MlecDecision solve_mlec(const ValidatedScenario& s, const OfferVector& offers);

// Independent oracle: enumerates per-location demand vectors on a grid of
// resolution `step` (last location takes the remainder), dispatches each by
// exact merit order, and returns the cheapest. Within
// step * N * (max marginal price spread) of the optimum; exact whenever the
// optimal demand vector lies on the grid. Intended for small N.
// Throws StepTooCoarse if step > min(0.5, min_n base_demand[n]).
MlecDecision brute_force_mlec(const ValidatedScenario& s,
                              const OfferVector& offers, double step);

// Recomputes every constraint and the objective on `d`; returns the largest
// absolute violation found (0 for a clean decision). Shared by tests.
double max_feasibility_violation(const ValidatedScenario& s,
                                 const OfferVector& offers,
                                 const MlecDecision& d);

}  // namespace dergame
