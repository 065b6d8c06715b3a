#pragma once

#include <stdexcept>
#include <string>
#include <vector>

// Units: prices in ct/kWh, energy in kW, money in ct over an implicit
// one-hour horizon (so kW * ct/kWh composes directly to ct).

namespace dergame {

// Comparison tolerance for feasibility checks throughout the library.
inline constexpr double kFeasTol = 1e-9;

struct InfeasibleDemand : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyBidInterval : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BadIndex : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridTariff {
  double buy_price = 0.0;                // price paid to producers feeding in
  std::vector<double> sell_prices;       // retail price per location, index n-1
};

struct DerSpec {
  int id = 0;          // unique, >= 0; merit-order rank among equal prices
  int location = 1;    // 1-based location index
  double capacity = 0; // generation available each round, kW
};

struct AlgorithmParams {
  double epsilon = 0.1;        // offset of the two knowledge seed points, ct/kWh
  double sigma0 = 5.0;         // initial exploration std. dev., ct/kWh
  double r2_threshold = 0.7;   // exploit gate on the fit quality
  double conv_tolerance = 0.05; // max per-round bid change, ct/kWh
  int conv_window = 30;        // consecutive rounds the change must stay small
  int max_iterations = 10000;
  int n_repetitions = 10;
};

struct Scenario {
  int n_locations = 0;
  std::vector<DerSpec> ders;
  GridTariff tariff;
  std::vector<double> base_demand; // per location, index n-1
  double total_demand = 0.0;
  double alpha = 0.0;              // per-location demand may deviate by +-alpha
};

// Proof token that a Scenario passed validate_scenario; solvers take this
// type so unchecked scenarios cannot reach them.
class ValidatedScenario {
 public:
  const Scenario& get() const { return s_; }
  const Scenario* operator->() const { return &s_; }

 private:
  friend ValidatedScenario validate_scenario(const Scenario& s);
  explicit ValidatedScenario(Scenario s) : s_(std::move(s)) {}
  Scenario s_;
};

// Checks structural and feasibility invariants:
//  - sizes consistent, locations in range, unique non-negative DER ids
//  - finite, non-negative demands/capacities/prices; alpha in [0,1]
//  - buy_price <= sell_prices[n] everywhere (else no rational bid exists)
//  - sum_n (1-alpha)*base[n] <= total_demand <= sum_n (1+alpha)*base[n]
// Throws InfeasibleDemand / EmptyBidInterval / BadIndex.
ValidatedScenario validate_scenario(const Scenario& s);

// Case-study retail tariff: 50 ct/kWh at location 1 falling linearly to
// 40 ct/kWh at location N. For N == 1 the slope is undefined; we use the
// location-1 value, 50. n is 1-based; throws BadIndex outside [1, N].
double default_sell_price(int n, int N);

// Range checks on the learning knobs (epsilon > 0, sigma0 > 0,
// 0 < r2_threshold < 1, conv_tolerance > 0, conv_window >= 2,
// max_iterations >= conv_window, n_repetitions >= 1).
// Throws std::invalid_argument naming the offending field.
void validate_params(const AlgorithmParams& p);

}  // namespace dergame
