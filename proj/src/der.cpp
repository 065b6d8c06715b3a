#include "dergame/der.hpp"

#include <algorithm>
#include <cmath>

namespace dergame {

void OlsAccumulator::add(double x, double y) {
  if (n_ == 0)
    first_x_ = x;
  else if (x != first_x_)
    two_prices_ = true;
  ++n_;
  const double dx = x - mean_x_;
  mean_x_ += dx / static_cast<double>(n_);
  const double dy = y - mean_y_;
  mean_y_ += dy / static_cast<double>(n_);
  m2x_ += dx * (x - mean_x_);
  m2y_ += dy * (y - mean_y_);
  cxy_ += dx * (y - mean_y_);
}

RegressionFit OlsAccumulator::fit() const {
  if (degenerate())
    throw DegenerateData("need >= 2 observations at >= 2 distinct prices");
  const double slope = cxy_ / m2x_;
  RegressionFit f;
  f.b = -slope;
  f.a = mean_y_ - slope * mean_x_;
  // r2 = 1 - SSres/SStot with SSres = m2y - slope*cxy (guarded against
  // cancellation going negative). Constant observations (SStot = 0) are
  // fully explained by the flat fit: r2 = 1.
  if (m2y_ <= 0.0) {
    f.r2 = 1.0;
  } else {
    const double ss_res = std::max(0.0, m2y_ - slope * cxy_);
    f.r2 = 1.0 - ss_res / m2y_;
  }
  return f;
}

std::vector<Observation> init_knowledge(double sell_cap, double epsilon,
                                        double capacity) {
  return {{sell_cap - epsilon, capacity}, {sell_cap + epsilon, 0.0}};
}

DerAgent make_agent(const DerSpec& spec, double sell_cap, double buy_floor,
                    double epsilon) {
  DerAgent a;
  a.id = spec.id;
  a.location = spec.location;
  a.capacity = spec.capacity;
  a.sell_cap = sell_cap;
  a.buy_floor = buy_floor;
  a.knowledge = init_knowledge(sell_cap, epsilon, spec.capacity);
  for (const Observation& o : a.knowledge) a.ols.add(o.price, o.sold);
  a.best_price = sell_cap - epsilon;
  a.best_profit = 0.0;
  return a;
}

RegressionFit fit_price_demand(const std::vector<Observation>& obs) {
  OlsAccumulator acc;
  for (const Observation& o : obs) acc.add(o.price, o.sold);
  return acc.fit();
}

double optimal_bid(const RegressionFit& fit, double /*capacity*/,
                   double buy_floor, double sell_cap) {
  if (!(fit.b > 0.0))
    throw NonConcave("estimated demand must fall with price (b > 0)");
  // d/dpi [(a - b*pi)*pi + (cap - a + b*pi)*floor] = a - 2b*pi + b*floor
  const double stationary = fit.a / (2.0 * fit.b) + buy_floor / 2.0;
  return std::clamp(stationary, buy_floor, sell_cap);
}

double explore_bid(Rng& rng, double center, double sigma0, int i,
                   double buy_floor, double sell_cap) {
  const double sd = sigma0 / std::sqrt(static_cast<double>(i));
  return std::clamp(rng.normal(center, sd), buy_floor, sell_cap);
}

double profit(double price, double sold, double capacity, double buy_floor) {
  if (sold > capacity + kFeasTol)
    throw OverSold("sold " + std::to_string(sold) + " exceeds capacity " +
                   std::to_string(capacity));
  return sold * price + (capacity - sold) * buy_floor;
}

DerAgent update_agent(DerAgent agent, double price, double sold) {
  agent.knowledge.push_back({price, sold});
  agent.ols.add(price, sold);
  const double p = profit(price, sold, agent.capacity, agent.buy_floor);
  if (p > agent.best_profit) {
    agent.best_profit = p;
    agent.best_price = price;
  }
  return agent;
}

}  // namespace dergame
