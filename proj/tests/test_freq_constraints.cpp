#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fsuc/freq_constraints.hpp"
#include "fsuc/milp.hpp"
#include "fsuc/rng.hpp"
#include "fsuc/system_model.hpp"

using namespace fsuc;

namespace {

FrequencyParams gb_freq() { return FrequencyParams{}; }  // defaults are the GB values

// Reference post-fault dispatch: H 132 GWs, EFR 220 MW, PFR 2240 MW,
// infeed 1660 MW, demand 38.3 GW.
FrequencyState ref_state() {
  FrequencyState s;
  s.H = 132000;
  s.R_S = 220;
  s.R_G = 2240;
  s.P_L = 1660;
  s.P_D = 38300;
  return s;
}

struct Emitted {
  MilpModel model;
  NadirVarHandles v;
};

// Caller-side variable set mirroring the engine: bounded H/R_S/R_G/P_L plus
// one z/m/k triple per bit.
void make_handles(Emitted& e, const ExpansionConfig& cfg, double h_up, double rs_up, double rg_up, double pl_fixed) {
  e.v.H = e.model.add_variable("H", VarKind::continuous, 0, h_up);
  e.v.R_S = e.model.add_variable("RS", VarKind::continuous, 0, rs_up);
  e.v.R_G = e.model.add_variable("RG", VarKind::continuous, 0, rg_up);
  e.v.P_L = e.model.add_variable("PL", VarKind::continuous, pl_fixed, pl_fixed);
  for (int l : cfg.bits) {
    std::string suffix = std::to_string(l);
    e.v.z.push_back(e.model.add_variable("z" + suffix, VarKind::binary, 0, 1));
    e.v.m.push_back(e.model.add_variable("m" + suffix, VarKind::continuous, 0, cfg.bigM_H));
    e.v.k.push_back(e.model.add_variable("k" + suffix, VarKind::continuous, 0, cfg.bigM_RS));
  }
}

}  // namespace

TEST_CASE("rocof on the reference dispatch is 0.3144 Hz/s") {
  // f0 P_L / (2H) = 50 * 1660 / 264000
  CHECK(rocof_of(ref_state(), gb_freq()) == doctest::Approx(0.3143939).epsilon(1e-6));
}

TEST_CASE("rocof scales linearly with infeed and inversely with inertia") {
  FrequencyState s = ref_state();
  FrequencyParams f = gb_freq();
  double base = rocof_of(s, f);
  s.P_L *= 2;
  CHECK(rocof_of(s, f) == doctest::Approx(2 * base));
  s.H *= 4;
  CHECK(rocof_of(s, f) == doctest::Approx(base / 2));
}

TEST_CASE("system inertia sums class contributions net of the lost unit") {
  SystemModel m;
  GeneratorClass nu;
  nu.name = "nuclear";
  nu.unit_count = 2;
  nu.p_max = 1800;
  nu.p_min = 1400;
  nu.inertia_const = 5;
  nu.must_run = true;
  nu.deloadable = true;
  nu.deload_max = 400;
  nu.ramp_rate = 100;
  GeneratorClass cc;
  cc.name = "ccgt";
  cc.unit_count = 20;
  cc.p_max = 500;
  cc.p_min = 250;
  cc.inertia_const = 4;
  m.generators = {nu, cc};
  m.freq.H_W = 0.1;
  m.freq.H_L = 5;
  m.freq.P_L_max = 1800;
  // 2*1800*5 + 10*500*4 + 0.1*5000 - 1800*5 = 18000 + 20000 + 500 - 9000
  CHECK(system_inertia({2, 10}, 5000, m) == doctest::Approx(29500));
  // count vector must match the class list
  CHECK_THROWS_AS(system_inertia({2}, 5000, m), Error);
}

TEST_CASE("quasi-steady-state deviation is the uncovered infeed over load damping") {
  FrequencyState s;
  s.P_L = 1800;
  s.R_S = 200;
  s.R_G = 1300;
  s.P_D = 26000;
  CHECK(qss_deviation(s, gb_freq()) == doctest::Approx(300.0 / 130.0));
  s.R_G = 1600;  // fully covered: no residual deviation
  CHECK(qss_deviation(s, gb_freq()) == doctest::Approx(0.0));
}

TEST_CASE("undamped nadir time and depth on the reference dispatch") {
  FrequencyState s = ref_state();
  FrequencyParams f = gb_freq();
  // t* = T_g (P_L - R_S) / R_G = 10 * 1440 / 2240
  CHECK(nadir_time_no_damping(s, f) == doctest::Approx(6.42857).epsilon(1e-5));
  // f0 (P_L-R_S)^2 T_g / (4 H R_G) + f0 R_S T_s / (4H) = 0.8766 + 0.0104
  CHECK(nadir_no_damping(s, f) == doctest::Approx(0.887).epsilon(1e-3));
}

TEST_CASE("nadir time outside the delivery windows is rejected") {
  FrequencyState s = ref_state();
  FrequencyParams f = gb_freq();
  s.R_G = 100000;  // nadir would fall before EFR delivery completes
  CHECK_THROWS_AS(nadir_time_no_damping(s, f), Error);
  s.R_G = 100;  // nadir would fall after the PFR ramp ends
  CHECK_THROWS_AS(nadir_time_no_damping(s, f), Error);
}

TEST_CASE("damped security margin on the reference dispatch is 4.6e4 MW^2 s") {
  // LHS = (2640 - 34.375) * 2240 = 5.8366e6
  // RHS = 1440^2*10/3.2 - 1440*10*0.005/4 * 38300 = 6.48e6 - 689400 = 5.7906e6
  NadirCheck damped = nadir_constraint_satisfied(ref_state(), gb_freq(), true);
  CHECK(damped.satisfied);
  CHECK(damped.margin == doctest::Approx(46000).epsilon(1e-6));
  // without damping credit the same dispatch violates the constraint
  NadirCheck undamped = nadir_constraint_satisfied(ref_state(), gb_freq(), false);
  CHECK_FALSE(undamped.satisfied);
  CHECK(undamped.margin == doctest::Approx(5836600.0 - 6480000.0).epsilon(1e-6));
}

TEST_CASE("one plane over [0, 1800] is the chord through the endpoints") {
  PlaneSet ps = build_planes(0, 1800, 1, gb_freq());
  REQUIRE(ps.planes.size() == 1);
  // alpha(x) = x^2 * 10 / 3.2; chord slope = alpha(1800)/1800 = 5625
  CHECK(ps.planes[0].a_p == doctest::Approx(5625));
  CHECK(ps.planes[0].b_p == doctest::Approx(-5625));
  CHECK(ps.planes[0].c_p == doctest::Approx(0).epsilon(1e-9));
  CHECK(ps.envelope(1800) == doctest::Approx(1.0125e7));
  CHECK(ps.alpha(1800) == doctest::Approx(1.0125e7));
}

TEST_CASE("two planes join at the midpoint with exact endpoint contact") {
  PlaneSet ps = build_planes(0, 1800, 2, gb_freq());
  REQUIRE(ps.planes.size() == 2);
  REQUIRE(ps.breakpoints.size() == 3);
  CHECK(ps.breakpoints[1] == doctest::Approx(900));
  CHECK(ps.envelope(900) == doctest::Approx(ps.alpha(900)));
  CHECK(ps.planes[0].a_p == doctest::Approx(2812.5));
  CHECK(ps.planes[1].a_p == doctest::Approx(8437.5));
}

TEST_CASE("the plane envelope never undercuts the quadratic") {
  FrequencyParams f = gb_freq();
  RngStream rng(21, 0);
  for (int planes = 1; planes <= 8; planes *= 2) {
    PlaneSet ps = build_planes(600, 1800, planes, f);
    for (int i = 0; i < 500; ++i) {
      double x = rng.uniform(600, 1800);
      CHECK(ps.envelope(x) >= ps.alpha(x) - 1e-6);
    }
    for (double bp : ps.breakpoints) CHECK(ps.envelope(bp) == doctest::Approx(ps.alpha(bp)));
  }
}

TEST_CASE("doubling the plane count shrinks the worst overestimation 3x to 4.5x") {
  FrequencyParams f = gb_freq();
  double prev = -1;
  for (int planes : {2, 4, 8}) {
    PlaneSet ps = build_planes(1000, 1800, planes, f);
    OverestimationStats st = plane_overestimation_stats(ps, 1.0);
    CHECK(st.max_pct > 0);
    CHECK(st.mean_pct > 0);
    CHECK(st.mean_pct <= st.max_pct);
    if (prev > 0) {
      double ratio = prev / st.max_pct;
      CHECK(ratio >= 3.0);
      CHECK(ratio <= 4.5);
    }
    prev = st.max_pct;
  }
}

TEST_CASE("credit granularity is two to the lowest bit") {
  auto granularity = [](const std::vector<int>& bits) {
    return std::ldexp(1.0, *std::min_element(bits.begin(), bits.end()));
  };
  std::vector<int> full(12);
  for (int i = 0; i < 12; ++i) full[static_cast<size_t>(i)] = i;
  CHECK(granularity(full) == 1.0);
  CHECK(granularity({5, 6, 7, 8, 9, 10, 11}) == 32.0);
  CHECK(granularity({10, 11}) == 1024.0);
}

TEST_CASE("emitted constraint system is conservative for the true nadir limit") {
  FrequencyParams f = gb_freq();
  ExpansionConfig cfg;
  cfg.bits = {8, 9, 10, 11};
  cfg.bigM_H = 200000;
  cfg.bigM_RS = 400;
  double pl = 1800;
  double pd = 30000;
  PlaneSet ps = build_planes(1400, 1800, 2, f);

  for (bool fortify : {false, true}) {
    cfg.fortify = fortify;
    cfg.h_lo = 20000;
    cfg.h_up = 200000;
    cfg.p_l_lo = 1400;
    cfg.p_l_hi = 1800;
    Emitted e;
    make_handles(e, cfg, cfg.bigM_H, 400, 4000, pl);
    int rows_before = e.model.num_constraints();
    std::vector<int> rows = emit_nadir_constraints(e.model, e.v, pd, ps, cfg);
    CHECK(static_cast<int>(rows.size()) == e.model.num_constraints() - rows_before);
    CHECK(rows.size() >= cfg.bits.size() * 4 + 2 + ps.planes.size());

    // minimizing inertia against the linearized system must still satisfy the
    // exact damped constraint: planes overestimate the requirement and the
    // credit understates the product
    e.model.add_objective_term(e.v.H, 1.0);
    e.model.add_objective_term(e.v.R_G, 0.01);
    Solution sol = solve(e.model, 1e-6, 120);
    REQUIRE(sol.status == Solution::Status::optimal);
    FrequencyState s;
    s.H = sol.values[static_cast<size_t>(e.v.H.index)];
    s.R_S = sol.values[static_cast<size_t>(e.v.R_S.index)];
    s.R_G = sol.values[static_cast<size_t>(e.v.R_G.index)];
    s.P_L = pl;
    s.P_D = pd;
    NadirCheck check = nadir_constraint_satisfied(s, f, true);
    CHECK(check.margin >= -1e-3);
  }
}

TEST_CASE("credit lattice keeps delivered response within one granularity step") {
  FrequencyParams f = gb_freq();
  ExpansionConfig cfg;
  cfg.bits = {5, 6, 7, 8, 9, 10, 11};
  cfg.bigM_H = 200000;
  cfg.bigM_RS = 400;
  PlaneSet ps = build_planes(1000, 1800, 1, f);
  Emitted e;
  make_handles(e, cfg, cfg.bigM_H, 0, 4000, 1800);
  emit_nadir_constraints(e.model, e.v, 30000, ps, cfg);
  e.model.add_objective_term(e.v.R_G, 1.0);
  e.model.add_objective_term(e.v.H, 0.001);
  Solution sol = solve(e.model, 1e-6, 120);
  REQUIRE(sol.status == Solution::Status::optimal);
  double rg = sol.values[static_cast<size_t>(e.v.R_G.index)];
  double credit = 0;
  for (size_t i = 0; i < cfg.bits.size(); ++i)
    credit += std::ldexp(1.0, cfg.bits[i]) * sol.values[static_cast<size_t>(e.v.z[i].index)];
  CHECK(credit <= rg + 1e-6);
  CHECK(rg - credit <= 32.0 + 1e-6);  // one step of the lowest bit
}
