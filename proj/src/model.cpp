#include "dergame/model.hpp"

#include <cmath>
#include <set>

namespace dergame {

namespace {

bool bad(double x) { return !std::isfinite(x) || x < 0.0; }

}  // namespace

ValidatedScenario validate_scenario(const Scenario& s) {
  const int N = s.n_locations;
  if (N < 1) throw BadIndex("n_locations must be >= 1");
  if (static_cast<int>(s.base_demand.size()) != N)
    throw BadIndex("base_demand must have one entry per location");
  if (static_cast<int>(s.tariff.sell_prices.size()) != N)
    throw BadIndex("sell_prices must have one entry per location");
  if (bad(s.total_demand)) throw InfeasibleDemand("total_demand must be finite and >= 0");
  if (!std::isfinite(s.alpha) || s.alpha < 0.0 || s.alpha > 1.0)
    throw InfeasibleDemand("alpha must lie in [0, 1]");
  for (double d : s.base_demand)
    if (bad(d)) throw InfeasibleDemand("base demand must be finite and >= 0");

  if (bad(s.tariff.buy_price)) throw EmptyBidInterval("buy_price must be finite and >= 0");
  for (int n = 0; n < N; ++n) {
    const double sell = s.tariff.sell_prices[n];
    if (bad(sell)) throw EmptyBidInterval("sell price must be finite and >= 0");
    if (s.tariff.buy_price > sell + kFeasTol)
      throw EmptyBidInterval("buy_price exceeds sell price at location " +
                             std::to_string(n + 1));
  }

  std::set<int> ids;
  for (const DerSpec& d : s.ders) {
    if (d.location < 1 || d.location > N)
      throw BadIndex("DER " + std::to_string(d.id) + " maps to location " +
                     std::to_string(d.location) + " outside [1, " +
                     std::to_string(N) + "]");
    if (d.id < 0 || !ids.insert(d.id).second)
      throw BadIndex("DER ids must be unique and >= 0");
    if (bad(d.capacity)) throw InfeasibleDemand("DER capacity must be finite and >= 0");
  }

  double lo = 0.0, hi = 0.0;
  for (double d : s.base_demand) {
    lo += (1.0 - s.alpha) * d;
    hi += (1.0 + s.alpha) * d;
  }
  if (s.total_demand < lo - kFeasTol || s.total_demand > hi + kFeasTol)
    throw InfeasibleDemand("total_demand " + std::to_string(s.total_demand) +
                           " outside the shiftable window [" +
                           std::to_string(lo) + ", " + std::to_string(hi) + "]");

  return ValidatedScenario(s);
}

double default_sell_price(int n, int N) {
  if (N < 1 || n < 1 || n > N)
    throw BadIndex("location " + std::to_string(n) + " outside [1, " +
                   std::to_string(N) + "]");
  if (N == 1) return 50.0;
  return 50.0 - 10.0 * static_cast<double>(n - 1) / static_cast<double>(N - 1);
}

void validate_params(const AlgorithmParams& p) {
  if (!(p.epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (!(p.sigma0 > 0.0)) throw std::invalid_argument("sigma0 must be > 0");
  if (!(p.r2_threshold > 0.0 && p.r2_threshold < 1.0))
    throw std::invalid_argument("r2_threshold must lie in (0, 1)");
  if (!(p.conv_tolerance > 0.0))
    throw std::invalid_argument("conv_tolerance must be > 0");
  if (p.conv_window < 2) throw std::invalid_argument("conv_window must be >= 2");
  if (p.max_iterations < p.conv_window)
    throw std::invalid_argument("max_iterations must be >= conv_window");
  if (p.n_repetitions < 1)
    throw std::invalid_argument("n_repetitions must be >= 1");
}

}  // namespace dergame
