#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fsuc/system_model.hpp"

using namespace fsuc;

namespace {

const char* kSmall = R"({
  "generators": [
    {"name": "nuclear", "unit_count": 2, "p_max": 1800, "p_min": 1400, "cost_marginal": 10,
     "inertia_const": 5, "ramp_rate": 100, "must_run": true, "deloadable": true, "deload_max": 400},
    {"name": "ccgt", "unit_count": 10, "p_max": 500, "p_min": 250, "cost_noload": 4500,
     "cost_marginal": 47, "cost_startup": 10000, "startup_time": 4, "min_up": 4, "min_down": 1,
     "inertia_const": 4, "pfr_max_per_unit": 50, "emissions": 0.394}
  ],
  "storage": [
    {"name": "bess", "capacity": 2000, "rating": 700, "round_trip_efficiency": 0.9,
     "provides_efr": true, "soc_initial": 1200}
  ],
  "wind": {"capacity": 20000},
  "frequency": {"f0": 50, "df_max": 0.8, "df_ss_max": 0.5, "rocof_max": 0.5, "T_s": 0.5,
                "T_g": 10, "D": 0.005, "H_W": 0.1, "H_L": 5, "P_L_max": 1800, "R_S_max": 800},
  "economics": {"voll": 30000, "wind_marginal_cost": 5, "efr_backing_h": 0.5}
})";

SystemModel parse_small() { return parse_system(kSmall, "inline"); }

}  // namespace

TEST_CASE("parses every field of a two-class system") {
  SystemModel m = parse_small();
  REQUIRE(m.generators.size() == 2);
  const GeneratorClass& nu = m.generators[0];
  CHECK(nu.name == "nuclear");
  CHECK(nu.unit_count == 2);
  CHECK(nu.p_max == 1800);
  CHECK(nu.p_min == 1400);
  CHECK(nu.must_run);
  CHECK(nu.deloadable);
  CHECK(nu.deload_max == 400);
  CHECK(nu.ramp_rate == 100);
  const GeneratorClass& cc = m.generators[1];
  CHECK(cc.cost_noload == 4500);
  CHECK(cc.cost_startup == 10000);
  CHECK(cc.startup_time == 4);
  CHECK(cc.min_up == 4);
  CHECK(cc.min_down == 1);
  CHECK(cc.pfr_max_per_unit == 50);
  CHECK(cc.emissions == doctest::Approx(0.394));
  REQUIRE(m.storage.size() == 1);
  CHECK(m.storage[0].rating == 700);
  CHECK(m.storage[0].round_trip_efficiency == doctest::Approx(0.9));
  CHECK(m.storage[0].provides_efr);
  CHECK(m.wind_capacity == 20000);
  CHECK(m.freq.H_W == doctest::Approx(0.1));
  CHECK(m.freq.P_L_max == 1800);
  CHECK(m.freq.R_S_max == 800);
  CHECK(m.voll == 30000);
  CHECK(m.wind_marginal_cost == 5);
  CHECK(m.efr_backing_h == doctest::Approx(0.5));
}

TEST_CASE("serialize then parse is the identity on parsed content") {
  SystemModel m = parse_small();
  SystemModel m2 = parse_system(serialize_system(m), "round-trip");
  REQUIRE(m2.generators.size() == m.generators.size());
  for (size_t i = 0; i < m.generators.size(); ++i) {
    CHECK(m2.generators[i].name == m.generators[i].name);
    CHECK(m2.generators[i].p_max == m.generators[i].p_max);
    CHECK(m2.generators[i].cost_marginal == m.generators[i].cost_marginal);
    CHECK(m2.generators[i].must_run == m.generators[i].must_run);
  }
  CHECK(m2.storage[0].capacity == m.storage[0].capacity);
  CHECK(m2.freq.T_g == m.freq.T_g);
  CHECK(m2.voll == m.voll);
}

TEST_CASE("rejects a deload range wider than the dispatch band") {
  SystemModel m = parse_small();
  m.generators[0].deload_max = 500;  // band is p_max - p_min = 400
  CHECK_THROWS_AS(validate_system(m), Error);
}

TEST_CASE("rejects a deloadable class without a ramp rate") {
  SystemModel m = parse_small();
  m.generators[0].ramp_rate = 0;
  CHECK_THROWS_AS(validate_system(m), Error);
}

TEST_CASE("rejects a value of lost load at or below a marginal cost") {
  SystemModel m = parse_small();
  m.voll = 47;
  CHECK_THROWS_AS(validate_system(m), Error);
}

TEST_CASE("rejects nonpositive unit counts and inverted dispatch bands") {
  SystemModel m = parse_small();
  m.generators[1].unit_count = -1;
  CHECK_THROWS_AS(validate_system(m), Error);
  m = parse_small();
  m.generators[1].p_min = 600;  // above p_max
  CHECK_THROWS_AS(validate_system(m), Error);
}

TEST_CASE("rejects storage efficiency outside (0, 1]") {
  SystemModel m = parse_small();
  m.storage[0].round_trip_efficiency = 0;
  CHECK_THROWS_AS(validate_system(m), Error);
  m = parse_small();
  m.storage[0].round_trip_efficiency = 1.2;
  CHECK_THROWS_AS(validate_system(m), Error);
}

TEST_CASE("rejects an initial state of charge above capacity") {
  SystemModel m = parse_small();
  m.storage[0].soc_initial = 2500;
  CHECK_THROWS_AS(validate_system(m), Error);
}

TEST_CASE("counts must-run units over all classes") {
  SystemModel m = parse_small();
  CHECK(total_must_run_count(m) == 2);
  m.generators[1].must_run = true;
  CHECK(total_must_run_count(m) == 12);
}

TEST_CASE("malformed json reports the origin") {
  try {
    parse_system("{ not json", "broken.json");
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
    CHECK(std::string(e.what()).find("broken.json") != std::string::npos);
  }
}

TEST_CASE("loads the checked-in GB system") {
  SystemModel m = load_system(std::string(FSUC_SOURCE_DIR) + "/configs/gb2030.json");
  validate_system(m);
  REQUIRE(m.generators.size() == 3);
  CHECK(m.generators[0].must_run);
  CHECK(m.generators[1].unit_count == 100);
  CHECK(m.wind_capacity == 20000);
  CHECK(m.freq.P_L_max == 1800);
}
