#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dergame/model.hpp"

using namespace dergame;

namespace {

Scenario three_site() {
  Scenario s;
  s.n_locations = 3;
  s.ders = {{0, 1, 10.0}, {1, 2, 10.0}, {2, 3, 10.0}};
  s.tariff.buy_price = 15.0;
  s.tariff.sell_prices = {50.0, 45.0, 40.0};
  s.base_demand = {5.0, 5.0, 5.0};
  s.total_demand = 15.0;
  s.alpha = 0.5;
  return s;
}

}  // namespace

TEST_CASE("valid scenario passes and is returned unchanged") {
  const Scenario s = three_site();
  const ValidatedScenario v = validate_scenario(s);
  CHECK(v->n_locations == 3);
  CHECK(v->total_demand == 15.0);
  CHECK(v->ders.size() == 3);
}

TEST_CASE("total demand outside the shiftable window is rejected") {
  Scenario s = three_site();
  s.n_locations = 2;
  s.ders = {{0, 1, 10.0}, {1, 2, 10.0}};
  s.tariff.sell_prices = {50.0, 45.0};
  s.base_demand = {5.0, 5.0};
  s.total_demand = 25.0;  // max shiftable is 15 at alpha=0.5
  CHECK_THROWS_AS(validate_scenario(s), InfeasibleDemand);
  s.total_demand = 2.0;  // below the lower bound 5
  CHECK_THROWS_AS(validate_scenario(s), InfeasibleDemand);
  s.total_demand = 15.0;
  CHECK_NOTHROW(validate_scenario(s));
}

TEST_CASE("buy price above a sell price leaves no rational bid interval") {
  Scenario s = three_site();
  s.tariff.sell_prices[2] = 10.0;  // below buy_price 15
  CHECK_THROWS_AS(validate_scenario(s), EmptyBidInterval);
}

TEST_CASE("producer mapped to a nonexistent location is rejected") {
  Scenario s = three_site();
  s.ders[1].location = 4;
  CHECK_THROWS_AS(validate_scenario(s), BadIndex);
  s.ders[1].location = 0;
  CHECK_THROWS_AS(validate_scenario(s), BadIndex);
}

TEST_CASE("remaining invariants rejected one at a time") {
  {
    Scenario s = three_site();
    s.alpha = 1.5;
    CHECK_THROWS_AS(validate_scenario(s), InfeasibleDemand);
  }
  {
    Scenario s = three_site();
    s.alpha = -0.1;
    CHECK_THROWS_AS(validate_scenario(s), InfeasibleDemand);
  }
  {
    Scenario s = three_site();
    s.base_demand[0] = -1.0;
    CHECK_THROWS_AS(validate_scenario(s), InfeasibleDemand);
  }
  {
    Scenario s = three_site();
    s.ders[0].capacity = -2.0;
    CHECK_THROWS_AS(validate_scenario(s), InfeasibleDemand);
  }
  {
    Scenario s = three_site();
    s.ders[1].id = s.ders[0].id;  // duplicate id
    CHECK_THROWS_AS(validate_scenario(s), BadIndex);
  }
  {
    Scenario s = three_site();
    s.base_demand.pop_back();  // size mismatch
    CHECK_THROWS_AS(validate_scenario(s), BadIndex);
  }
  {
    Scenario s = three_site();
    s.tariff.buy_price = -1.0;
    CHECK_THROWS_AS(validate_scenario(s), EmptyBidInterval);
  }
}

TEST_CASE("default sell price endpoints and interior values") {
  CHECK(default_sell_price(1, 3) == doctest::Approx(50.0));
  CHECK(default_sell_price(3, 3) == doctest::Approx(40.0));
  CHECK(default_sell_price(1, 1) == doctest::Approx(50.0));
  CHECK(default_sell_price(10, 10) == doctest::Approx(40.0));
  CHECK(default_sell_price(2, 3) == doctest::Approx(45.0));
  CHECK(default_sell_price(2, 10) == doctest::Approx(50.0 - 10.0 / 9.0));
}

TEST_CASE("default sell price is non-increasing with endpoints 50 and 40") {
  for (int N = 2; N <= 12; ++N) {
    CHECK(default_sell_price(1, N) == doctest::Approx(50.0));
    CHECK(default_sell_price(N, N) == doctest::Approx(40.0));
    for (int n = 2; n <= N; ++n)
      CHECK(default_sell_price(n, N) <= default_sell_price(n - 1, N) + 1e-12);
  }
}

TEST_CASE("default sell price rejects out-of-range locations") {
  CHECK_THROWS_AS(default_sell_price(0, 3), BadIndex);
  CHECK_THROWS_AS(default_sell_price(4, 3), BadIndex);
  CHECK_THROWS_AS(default_sell_price(1, 0), BadIndex);
}

TEST_CASE("learning knob ranges are enforced") {
  AlgorithmParams p;
  CHECK_NOTHROW(validate_params(p));
  p.epsilon = 0.0;
  CHECK_THROWS_AS(validate_params(p), std::invalid_argument);
  p = {};
  p.sigma0 = -1.0;
  CHECK_THROWS_AS(validate_params(p), std::invalid_argument);
  p = {};
  p.r2_threshold = 1.0;
  CHECK_THROWS_AS(validate_params(p), std::invalid_argument);
  p = {};
  p.conv_window = 1;
  CHECK_THROWS_AS(validate_params(p), std::invalid_argument);
  p = {};
  p.max_iterations = 10;
  CHECK_THROWS_AS(validate_params(p), std::invalid_argument);  // < window
  p = {};
  p.n_repetitions = 0;
  CHECK_THROWS_AS(validate_params(p), std::invalid_argument);
}
