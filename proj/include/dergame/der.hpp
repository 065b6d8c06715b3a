#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dergame/model.hpp"
#include "dergame/rng.hpp"

namespace dergame {

struct DegenerateData : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonConcave : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OverSold : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One market outcome as seen by a producer: it offered at `price` and the
// consumer bought `sold` kW.
struct Observation {
  double price = 0.0;  // ct/kWh
  double sold = 0.0;   // kW
};

// Straight-line demand estimate sold(price) = a - b*price, with b the
// negated OLS slope so b > 0 means demand falls as price rises. r2 is the
// coefficient of determination of the underlying fit.
struct RegressionFit {
  double a = 0.0;
  double b = 0.0;
  double r2 = 0.0;
};

// Running OLS moments (Welford / Youngs-Cramer updates) so a growing
// observation set refits in O(1) per new point. Batch and incremental use
// produce bit-identical fits because both add points in insertion order.
class OlsAccumulator {
 public:
  void add(double x, double y);
  long long count() const { return n_; }
  bool degenerate() const { return n_ < 2 || !two_prices_; }
  // OLS of y on x. Convention for zero y-variance: a constant is fully
  // explained by the flat line, so r2 = 1. Throws DegenerateData when all
  // x equal (slope undefined).
  RegressionFit fit() const;

 private:
  long long n_ = 0;
  double mean_x_ = 0.0, mean_y_ = 0.0;
  double m2x_ = 0.0, m2y_ = 0.0, cxy_ = 0.0;
  double first_x_ = 0.0;
  bool two_prices_ = false;
};

// A producer's entire learning state. Plain value type; update_agent
// returns the successor state.
struct DerAgent {
  int id = 0;
  int location = 1;              // 1-based
  double capacity = 0.0;         // kW available each round
  double sell_cap = 0.0;         // local grid retail price, bid ceiling
  double buy_floor = 0.0;        // grid feed-in price, bid floor
  std::vector<Observation> knowledge;
  OlsAccumulator ols;            // moments of `knowledge`, kept in sync
  double best_price = 0.0;       // center of the exploration distribution
  double best_profit = 0.0;      // strictly-improving profit record, ct
};

// The two synthetic seed observations every producer starts from: just
// under the grid price it would sell everything, just over it nothing.
std::vector<Observation> init_knowledge(double sell_cap, double epsilon,
                                        double capacity);

// Fresh agent: seeded knowledge, best_price = sell_cap - epsilon,
// best_profit = 0.
DerAgent make_agent(const DerSpec& spec, double sell_cap, double buy_floor,
                    double epsilon);

// Batch OLS of sold on price. Requires >= 2 observations with at least two
// distinct prices; throws DegenerateData otherwise.
RegressionFit fit_price_demand(const std::vector<Observation>& obs);

// Maximizer of the estimated profit
//   (a - b*price)*price + (capacity - (a - b*price))*buy_floor
// over price in [buy_floor, sell_cap]. Strictly concave for b > 0, so this
// is clip(a/(2b) + buy_floor/2, buy_floor, sell_cap). Throws NonConcave for
// b <= 0 (caller should explore instead).
double optimal_bid(const RegressionFit& fit, double capacity,
                   double buy_floor, double sell_cap);

// Random bid ~ Normal(center, sigma0^2 / i), clipped into
// [buy_floor, sell_cap]. i >= 1 is the game iteration; the shrinking
// variance anneals exploration.
double explore_bid(Rng& rng, double center, double sigma0, int i,
                   double buy_floor, double sell_cap);

// Round profit: sold kW go to the consumer at `price`, the rest feeds into
// the grid at buy_floor. Throws OverSold if sold exceeds capacity.
double profit(double price, double sold, double capacity, double buy_floor);

// Appends the observation, then advances the best-so-far record iff the
// realized profit strictly improves on it.
DerAgent update_agent(DerAgent agent, double price, double sold);

}  // namespace dergame
