#include "dergame/mlec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace dergame {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One purchase option at a location. rank orders equal-priced options:
// the grid (-1) beats every DER, DERs go by ascending id.
struct Option {
  double price = 0.0;
  int rank = -1;
  int der_index = -1;  // position in the canonical (ascending-id) DER order
  double remaining = kInf;
};

struct LocalMarket {
  std::vector<Option> options;  // sorted by (price, rank)
  std::size_t pos = 0;          // merit-order cursor
  double lo = 0.0, hi = 0.0;    // demand window
  double demand = 0.0;
};

// Canonical DER order used for OfferVector / der_purchase indexing.
std::vector<int> ascending_id_order(const Scenario& s) {
  std::vector<int> order(s.ders.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return s.ders[a].id < s.ders[b].id; });
  return order;
}

std::vector<LocalMarket> build_markets(const Scenario& s,
                                       const OfferVector& offers) {
  std::vector<LocalMarket> mkts(s.n_locations);
  for (int n = 0; n < s.n_locations; ++n) {
    mkts[n].lo = (1.0 - s.alpha) * s.base_demand[n];
    mkts[n].hi = (1.0 + s.alpha) * s.base_demand[n];
    mkts[n].options.push_back({s.tariff.sell_prices[n], -1, -1, kInf});
  }
  const std::vector<int> order = ascending_id_order(s);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const DerSpec& d = s.ders[order[k]];
    mkts[d.location - 1].options.push_back(
        {offers[static_cast<Eigen::Index>(k)], d.id, static_cast<int>(k),
         d.capacity});
  }
  for (LocalMarket& m : mkts)
    std::sort(m.options.begin(), m.options.end(), [](const Option& a, const Option& b) {
      return a.price != b.price ? a.price < b.price : a.rank < b.rank;
    });
  return mkts;
}

// Price of the next kW at this location (the cursor skips spent options).
double marginal_price(LocalMarket& m) {
  while (m.pos < m.options.size() && m.options[m.pos].remaining <= kFeasTol)
    ++m.pos;
  return m.options[m.pos].price;  // the grid option is never spent
}

// Pushes `amount` kW through the local merit order, crediting purchases.
void dispatch(LocalMarket& m, double amount, Eigen::VectorXd& der_purchase,
              double& grid_purchase) {
  while (amount > kFeasTol) {
    marginal_price(m);  // position the cursor
    Option& opt = m.options[m.pos];
    const double take = std::min(amount, opt.remaining);
    if (opt.der_index >= 0)
      der_purchase[opt.der_index] += take;
    else
      grid_purchase += take;
    opt.remaining -= take;
    amount -= take;
  }
}

double objective(const Scenario& s, const OfferVector& offers,
                 const MlecDecision& d) {
  double cost = 0.0;
  for (int n = 0; n < s.n_locations; ++n)
    cost += d.grid_purchase[n] * s.tariff.sell_prices[n];
  for (Eigen::Index p = 0; p < offers.size(); ++p)
    cost += d.der_purchase[p] * offers[p];
  return cost;
}

// Merit-order cost of serving exactly `amount` at one location, without
// mutating the market. Used by the brute-force enumerator.
double local_cost(const LocalMarket& m, double amount) {
  double cost = 0.0;
  for (const Option& opt : m.options) {
    if (amount <= kFeasTol) break;
    const double take = std::min(amount, opt.remaining);
    cost += take * opt.price;
    amount -= take;
  }
  return cost;
}

MlecDecision allocate(const Scenario& s, const OfferVector& offers,
                      std::vector<LocalMarket>& mkts,
                      const std::vector<double>& demand) {
  MlecDecision d;
  d.grid_purchase = Eigen::VectorXd::Zero(s.n_locations);
  d.der_purchase = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.ders.size()));
  d.demand = Eigen::VectorXd::Zero(s.n_locations);
  for (int n = 0; n < s.n_locations; ++n) {
    d.demand[n] = demand[n];
    dispatch(mkts[n], demand[n], d.der_purchase, d.grid_purchase[n]);
  }
  d.total_cost = objective(s, offers, d);
  return d;
}

}  // namespace

MlecDecision solve_mlec(const ValidatedScenario& vs, const OfferVector& offers) {
  const Scenario& s = vs.get();
  if (offers.size() != static_cast<Eigen::Index>(s.ders.size()))
    throw BadIndex("one offer per DER expected");

  std::vector<LocalMarket> mkts = build_markets(s, offers);
  MlecDecision d;
  d.grid_purchase = Eigen::VectorXd::Zero(s.n_locations);
  d.der_purchase = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.ders.size()));
  d.demand = Eigen::VectorXd::Zero(s.n_locations);

  // Mandatory part: every location starts at its demand lower bound.
  double remaining = s.total_demand;
  for (int n = 0; n < s.n_locations; ++n) {
    mkts[n].demand = mkts[n].lo;
    remaining -= mkts[n].lo;
    dispatch(mkts[n], mkts[n].lo, d.der_purchase, d.grid_purchase[n]);
  }

  // Water-filling: the remaining demand always goes to the location with
  // the cheapest next kW; equal marginals resolve to the lowest index.
  while (remaining > kFeasTol) {
    int best = -1;
    double best_price = kInf;
    for (int n = 0; n < s.n_locations; ++n) {
      if (mkts[n].hi - mkts[n].demand <= kFeasTol) continue;
      const double m = marginal_price(mkts[n]);
      if (m < best_price) {
        best_price = m;
        best = n;
      }
    }
    if (best < 0) break;  // cannot happen for a validated scenario
    LocalMarket& m = mkts[best];
    const double take = std::min({remaining, m.hi - m.demand,
                                  m.options[m.pos].remaining});
    dispatch(m, take, d.der_purchase, d.grid_purchase[best]);
    m.demand += take;
    remaining -= take;
  }

  for (int n = 0; n < s.n_locations; ++n) d.demand[n] = mkts[n].demand;
  d.total_cost = objective(s, offers, d);
  return d;
}

MlecDecision brute_force_mlec(const ValidatedScenario& vs,
                              const OfferVector& offers, double step) {
  const Scenario& s = vs.get();
  if (offers.size() != static_cast<Eigen::Index>(s.ders.size()))
    throw BadIndex("one offer per DER expected");
  if (!(step > 0.0)) throw StepTooCoarse("step must be > 0");
  double coarsest = 0.5;
  for (double b : s.base_demand) coarsest = std::min(coarsest, b);
  if (step > coarsest + kFeasTol)
    throw StepTooCoarse("step " + std::to_string(step) +
                        " too coarse for base demand resolution " +
                        std::to_string(coarsest));

  const int N = s.n_locations;
  std::vector<LocalMarket> mkts = build_markets(s, offers);

  // Enumerate demand vectors: the first N-1 locations walk their windows on
  // the step grid (window endpoints always included), the last takes the
  // remainder.
  std::vector<std::vector<double>> grids(std::max(N - 1, 0));
  for (int n = 0; n < N - 1; ++n) {
    for (double v = mkts[n].lo; v <= mkts[n].hi + kFeasTol; v += step)
      grids[n].push_back(std::min(v, mkts[n].hi));
    if (grids[n].back() < mkts[n].hi - kFeasTol)
      grids[n].push_back(mkts[n].hi);
  }
  std::vector<std::size_t> steps(std::max(N - 1, 0), 0);
  std::vector<double> demand(N, 0.0), best_demand;
  double best_cost = kInf;
  bool done = false;
  while (!done) {
    double partial = 0.0;
    for (int n = 0; n < N - 1; ++n) {
      demand[n] = grids[n][steps[n]];
      partial += demand[n];
    }
    const double rest = s.total_demand - partial;
    if (rest >= mkts[N - 1].lo - kFeasTol && rest <= mkts[N - 1].hi + kFeasTol) {
      demand[N - 1] = std::clamp(rest, mkts[N - 1].lo, mkts[N - 1].hi);
      double cost = 0.0;
      for (int n = 0; n < N; ++n) cost += local_cost(mkts[n], demand[n]);
      if (cost < best_cost) {
        best_cost = cost;
        best_demand = demand;
      }
    }
    // odometer increment over the step grid
    done = true;
    for (int n = 0; n < N - 1; ++n) {
      if (steps[n] + 1 < grids[n].size()) {
        ++steps[n];
        std::fill(steps.begin(), steps.begin() + n, 0);
        done = false;
        break;
      }
    }
  }

  if (best_demand.empty())
    throw InfeasibleDemand("no demand vector on the enumeration grid");
  return allocate(s, offers, mkts, best_demand);
}

double max_feasibility_violation(const ValidatedScenario& vs,
                                 const OfferVector& offers,
                                 const MlecDecision& d) {
  const Scenario& s = vs.get();
  double worst = 0.0;
  const std::vector<int> order = ascending_id_order(s);

  Eigen::VectorXd local_der = Eigen::VectorXd::Zero(s.n_locations);
  for (std::size_t k = 0; k < order.size(); ++k)
    local_der[s.ders[order[k]].location - 1] += d.der_purchase[static_cast<Eigen::Index>(k)];

  for (int n = 0; n < s.n_locations; ++n) {
    worst = std::max(worst, std::abs(d.demand[n] - d.grid_purchase[n] - local_der[n]));
    worst = std::max(worst, -d.grid_purchase[n]);
    worst = std::max(worst, (1.0 - s.alpha) * s.base_demand[n] - d.demand[n]);
    worst = std::max(worst, d.demand[n] - (1.0 + s.alpha) * s.base_demand[n]);
  }
  worst = std::max(worst, std::abs(d.demand.sum() - s.total_demand));
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double e = d.der_purchase[static_cast<Eigen::Index>(k)];
    worst = std::max(worst, -e);
    worst = std::max(worst, e - s.ders[order[k]].capacity);
  }
  worst = std::max(worst, std::abs(d.total_cost - objective(s, offers, d)));
  return worst;
}

}  // namespace dergame
