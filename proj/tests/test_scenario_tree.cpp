#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "fsuc/rng.hpp"
#include "fsuc/scenario_tree.hpp"

using namespace fsuc;

namespace {

const std::vector<double> kSeven = {0.005, 0.1, 0.3, 0.5, 0.7, 0.9, 0.995};

ForecastModel flat_forecast(double demand, double wind, double sigma0, int hours = 60) {
  ForecastModel fm;
  fm.demand_profile.assign(static_cast<size_t>(hours), demand);
  fm.wind_point_forecast.assign(static_cast<size_t>(hours), wind);
  fm.error_sigma0 = sigma0;
  fm.error_growth = 1.0;
  return fm;
}

}  // namespace

TEST_CASE("seven quantile chains over 24 stages make 169 nodes") {
  ForecastModel fm = flat_forecast(30000, 8000, 1000);
  ScenarioTree t = build_tree(fm, kSeven, 24, 0, 30000, 8000, 20000);
  CHECK(t.nodes.size() == 169);  // 7 * 24 + root
  CHECK(t.horizon == 24);
  CHECK(t.num_stages() == 25);
  validate_tree(t);
}

TEST_CASE("stage masses sum to one and follow the interval-midpoint rule") {
  // midpoints of consecutive quantiles bound each mass; ends at 0 and 1:
  // {0.0525, 0.1475, 0.2, 0.2, 0.2, 0.1475, 0.0525}
  std::vector<double> masses = quantile_masses(kSeven);
  REQUIRE(masses.size() == 7);
  CHECK(masses[0] == doctest::Approx(0.0525));
  CHECK(masses[1] == doctest::Approx(0.1475));
  CHECK(masses[2] == doctest::Approx(0.2));
  CHECK(masses[3] == doctest::Approx(0.2));
  CHECK(masses[4] == doctest::Approx(0.2));
  CHECK(masses[5] == doctest::Approx(0.1475));
  CHECK(masses[6] == doctest::Approx(0.0525));

  ForecastModel fm = flat_forecast(30000, 8000, 1000);
  ScenarioTree t = build_tree(fm, kSeven, 6, 0, 30000, 8000, 20000);
  for (int s = 0; s <= t.horizon; ++s) {
    double total = 0;
    for (int id : t.stage_nodes(s)) total += t.node(id).probability;
    CHECK(total == doctest::Approx(1.0));
  }
}

TEST_CASE("inverse normal matches tabulated quantiles and is antisymmetric") {
  CHECK(inverse_normal(0.5) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(inverse_normal(0.975) == doctest::Approx(1.959964).epsilon(1e-5));
  CHECK(inverse_normal(0.995) == doctest::Approx(2.575829).epsilon(1e-5));
  RngStream rng(11, 0);
  for (int i = 0; i < 200; ++i) {
    double p = rng.uniform(0.001, 0.999);
    CHECK(inverse_normal(p) == doctest::Approx(-inverse_normal(1.0 - p)).epsilon(1e-9));
  }
}

TEST_CASE("error growth follows sigma0 at one hour and sqrt growth at unit rate") {
  ForecastModel fm = flat_forecast(30000, 8000, 1200);
  CHECK(forecast_sigma(fm, 1) == doctest::Approx(1200));
  CHECK(forecast_sigma(fm, 4) == doctest::Approx(2400));
  fm.error_growth = 0.5;
  CHECK(forecast_sigma(fm, 4) == doctest::Approx(1200 * (1 + 0.5 * (2 - 1))));
}

TEST_CASE("zero forecast error collapses all chains onto the point forecast") {
  ForecastModel fm = flat_forecast(30000, 8000, 0);
  ScenarioTree t = build_tree(fm, kSeven, 6, 0, 30000, 8000, 20000);
  for (const ScenarioNode& n : t.nodes) {
    CHECK(n.demand == doctest::Approx(30000));
    CHECK(n.wind_available == doctest::Approx(8000));
  }
}

TEST_CASE("a single quantile gives one deterministic chain") {
  ForecastModel fm = flat_forecast(30000, 8000, 1000);
  ScenarioTree t = build_tree(fm, {0.98}, 24, 0, 30000, 8000, 20000);
  CHECK(t.nodes.size() == 25);
  for (int s = 1; s <= 24; ++s) {
    auto ids = t.stage_nodes(s);
    REQUIRE(ids.size() == 1);
    CHECK(t.node(ids[0]).probability == doctest::Approx(1.0));
    // 0.98 quantile of net demand = wind reduced below its point forecast
    CHECK(t.node(ids[0]).wind_available < 8000);
  }
}

TEST_CASE("wind stays inside [0, capacity] under extreme quantiles") {
  ForecastModel fm = flat_forecast(30000, 500, 4000);
  ScenarioTree t = build_tree(fm, kSeven, 8, 0, 30000, 500, 1000);
  for (const ScenarioNode& n : t.nodes) {
    CHECK(n.wind_available >= 0);
    CHECK(n.wind_available <= 1000);
  }
}

TEST_CASE("root carries the live measurement, not the forecast") {
  ForecastModel fm = flat_forecast(30000, 8000, 1000);
  ScenarioTree t = build_tree(fm, kSeven, 6, 3, 31234, 7777, 20000);
  CHECK(t.node(0).demand == doctest::Approx(31234));
  CHECK(t.node(0).wind_available == doctest::Approx(7777));
  CHECK(t.node(0).stage == 0);
  CHECK_FALSE(t.node(0).parent.has_value());
}

TEST_CASE("ancestors walk nearest-first including the node itself") {
  ForecastModel fm = flat_forecast(30000, 8000, 1000);
  ScenarioTree t = build_tree(fm, kSeven, 6, 0, 30000, 8000, 20000);
  int leaf = -1;
  for (const ScenarioNode& n : t.nodes)
    if (n.stage == 6) { leaf = n.id; break; }
  REQUIRE(leaf >= 0);
  std::vector<int> chain = t.ancestors(leaf, 3);
  REQUIRE(chain.size() == 4);  // self + 3 edges
  CHECK(chain[0] == leaf);
  CHECK(chain[1] == *t.node(leaf).parent);
  CHECK(t.node(chain[1]).stage == 5);
  CHECK(t.node(chain[3]).stage == 3);
  // depth past the root truncates at the root
  std::vector<int> full = t.ancestors(leaf, 99);
  CHECK(full.size() == 7);
  CHECK(full.back() == 0);
}

TEST_CASE("children are consistent with parents") {
  ForecastModel fm = flat_forecast(30000, 8000, 1000);
  ScenarioTree t = build_tree(fm, kSeven, 4, 0, 30000, 8000, 20000);
  CHECK(t.children(0).size() == 7);
  for (const ScenarioNode& n : t.nodes)
    for (int c : t.children(n.id)) CHECK(*t.node(c).parent == n.id);
}

TEST_CASE("demand spread widens with stage under growing error") {
  ForecastModel fm = flat_forecast(30000, 8000, 1000);
  ScenarioTree t = build_tree(fm, kSeven, 6, 0, 30000, 8000, 20000);
  double prev_spread = 0;
  for (int s = 1; s <= 6; ++s) {
    double lo = 1e18, hi = -1e18;
    for (int id : t.stage_nodes(s)) {
      double net = t.node(id).demand - t.node(id).wind_available;
      lo = std::min(lo, net);
      hi = std::max(hi, net);
    }
    CHECK(hi - lo > prev_spread);
    prev_spread = hi - lo;
  }
}

TEST_CASE("malformed trees are rejected") {
  ForecastModel fm = flat_forecast(30000, 8000, 1000);
  ScenarioTree t = build_tree(fm, kSeven, 4, 0, 30000, 8000, 20000);
  ScenarioTree broken = t;
  broken.nodes[3].probability = -0.1;
  CHECK_THROWS_AS(validate_tree(broken), Error);
  broken = t;
  broken.nodes[5].parent = 9999;
  CHECK_THROWS_AS(validate_tree(broken), Error);
}

TEST_CASE("build rejects bad quantile lists and horizons") {
  ForecastModel fm = flat_forecast(30000, 8000, 1000);
  CHECK_THROWS_AS(build_tree(fm, {0.5, 0.3}, 4, 0, 30000, 8000, 20000), Error);
  CHECK_THROWS_AS(build_tree(fm, {0.0, 0.5}, 4, 0, 30000, 8000, 20000), Error);
  CHECK_THROWS_AS(build_tree(fm, kSeven, 0, 0, 30000, 8000, 20000), Error);
}

TEST_CASE("profiles shorter than the horizon hold the last value") {
  ForecastModel fm = flat_forecast(30000, 8000, 0, 3);
  ScenarioTree t = build_tree(fm, {0.5}, 6, 1, 30000, 8000, 20000);
  for (const ScenarioNode& n : t.nodes) CHECK(n.demand == doctest::Approx(30000));
}
