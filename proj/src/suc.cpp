#include "fsuc/suc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fsuc/csv.hpp"

namespace fsuc {

namespace {

std::string node_tag(int id) { return "n" + std::to_string(id); }

double class_capacity(const GeneratorClass& g) { return g.p_max * g.unit_count; }

// per-class lower output bound under the strategy (total MW at full commitment)
double deload_floor_per_unit(const GeneratorClass& g, bool deload_enabled) {
  if (!g.must_run) return g.p_min;
  if (deload_enabled && g.deloadable) return g.p_max - g.deload_max;
  return g.p_max;
}

}  // namespace

FleetState initial_fleet_state(const SystemModel& m) {
  FleetState st;
  for (const auto& g : m.generators) {
    st.n_up.push_back(g.must_run ? g.unit_count : 0);
    st.pending.emplace_back(static_cast<size_t>(std::max(0, g.startup_time)), 0);
    st.recent_starts.emplace_back(static_cast<size_t>(std::max(0, g.min_up - 1)), 0);
    st.recent_stops.emplace_back(static_cast<size_t>(std::max(0, g.min_down - 1)), 0);
    st.p_prev.push_back(g.must_run ? class_capacity(g) : 0.0);
  }
  for (const auto& s : m.storage) st.soc.push_back(s.soc_initial);
  return st;
}

FleetState warm_fleet_state(const SystemModel& m, double demand0, double wind0, bool frequency_secured) {
  FleetState st = initial_fleet_state(m);
  double net = demand0 - wind0;
  for (const auto& g : m.generators)
    if (g.must_run) net -= class_capacity(g);
  for (size_t i = 0; i < m.generators.size(); ++i) {
    const auto& g = m.generators[i];
    if (g.must_run || net <= 0 || g.p_max <= 0) continue;
    int n = std::min(g.unit_count, static_cast<int>(std::ceil(net / g.p_max)));
    st.n_up[i] = n;
    st.p_prev[i] = std::min(net, g.p_max * n);
    st.p_prev[i] = std::max(st.p_prev[i], g.p_min * n);
    net -= st.p_prev[i];
  }
  if (frequency_secured) {
    const FrequencyParams& f = m.freq;
    // no EFR, no wind inertia, min-gen dispatch: the most demanding strategy
    auto secure = [&]() {
      double H = -f.P_L_max * f.H_L;
      double rg = 0;
      for (size_t i = 0; i < m.generators.size(); ++i) {
        const auto& g = m.generators[i];
        H += g.inertia_const * g.p_max * st.n_up[i];
        double headroom = (g.p_max - g.p_min) * st.n_up[i];
        rg += std::min(g.pfr_max_per_unit * st.n_up[i], headroom);
      }
      if (H <= 0) return false;
      FrequencyState s{H, 0, rg, f.P_L_max, demand0};
      if (rocof_of(s, f) > f.rocof_max) return false;
      if (s.P_L - s.R_G > f.D * demand0 * f.df_ss_max) return false;
      return nadir_constraint_satisfied(s, f, true).satisfied;
    };
    for (size_t i = 0; i < m.generators.size() && !secure(); ++i) {
      const auto& g = m.generators[i];
      if (g.must_run || g.inertia_const <= 0) continue;
      while (st.n_up[i] < g.unit_count && !secure()) st.n_up[i]++;
      st.p_prev[i] = std::clamp(st.p_prev[i], g.p_min * st.n_up[i], g.p_max * st.n_up[i]);
    }
  }
  return st;
}

void validate_fleet_state(const SystemModel& m, const FleetState& st) {
  size_t G = m.generators.size(), S = m.storage.size();
  if (st.n_up.size() != G || st.pending.size() != G || st.recent_starts.size() != G ||
      st.recent_stops.size() != G || st.p_prev.size() != G || st.soc.size() != S)
    fail(ErrorKind::validation, "fleet state does not match the system's class and storage counts");
  for (size_t i = 0; i < G; ++i) {
    const auto& g = m.generators[i];
    if (st.n_up[i] < 0 || st.n_up[i] > g.unit_count)
      fail(ErrorKind::validation, "online count out of range for class " + g.name);
    if (g.must_run && st.n_up[i] != g.unit_count)
      fail(ErrorKind::validation, "must-run class " + g.name + " must be fully online");
    if (st.pending[i].size() != static_cast<size_t>(std::max(0, g.startup_time)))
      fail(ErrorKind::validation, "pending-start pipeline length mismatch for class " + g.name);
    int pend = 0;
    for (int v : st.pending[i]) {
      if (v < 0) fail(ErrorKind::validation, "negative pending starts for class " + g.name);
      pend += v;
    }
    if (st.n_up[i] + pend > g.unit_count)
      fail(ErrorKind::validation, "online plus pending exceeds unit count for class " + g.name);
    if (st.recent_starts[i].size() != static_cast<size_t>(std::max(0, g.min_up - 1)) ||
        st.recent_stops[i].size() != static_cast<size_t>(std::max(0, g.min_down - 1)))
      fail(ErrorKind::validation, "start/stop history length mismatch for class " + g.name);
    if (st.p_prev[i] < -1e-9 || st.p_prev[i] > class_capacity(g) + 1e-9)
      fail(ErrorKind::validation, "previous output out of range for class " + g.name);
  }
  for (size_t b = 0; b < S; ++b)
    if (st.soc[b] < -1e-9 || st.soc[b] > m.storage[b].capacity + 1e-9)
      fail(ErrorKind::validation, "state of charge out of range for " + m.storage[b].name);
}

SucModel build_suc_model(const SystemModel& m, const ScenarioTree& tree, const StrategyOptions& opts,
                         const FleetState& initial) {
  validate_system(m);
  validate_tree(tree);
  validate_fleet_state(m, initial);
  const FrequencyParams& f = m.freq;
  size_t G = m.generators.size(), S = m.storage.size();

  bool any_efr_storage = false;
  for (const auto& s : m.storage) any_efr_storage |= s.provides_efr;
  if (opts.efr_mode == StrategyOptions::EfrMode::fixed) {
    if (opts.efr_fixed_mw > f.R_S_max) fail(ErrorKind::config, "fixed EFR volume exceeds the EFR ceiling");
    if (!any_efr_storage) fail(ErrorKind::config, "fixed EFR mode needs EFR-capable storage");
  }
  if (opts.frequency_constraints_enabled && opts.bits.empty())
    fail(ErrorKind::config, "frequency constraints need a non-empty bit set");

  SucModel sm;
  sm.opts = opts;
  MilpModel& md = sm.model;
  sm.node.resize(tree.nodes.size());
  sm.shared_sg.assign(G, -1);

  int NM = total_must_run_count(m);

  // static envelopes for big-M values and strengthening rows
  double h_up = -f.P_L_max * f.H_L + f.H_W * m.wind_capacity;
  double mustrun_h = -f.P_L_max * f.H_L;
  for (const auto& g : m.generators) {
    h_up += g.inertia_const * class_capacity(g);
    if (g.must_run) mustrun_h += g.inertia_const * class_capacity(g);
  }
  double p_l_floor = f.P_L_max;
  if (opts.deload_enabled) {
    p_l_floor = 0;
    bool first = true;
    for (const auto& g : m.generators)
      if (g.must_run) {
        double flr = deload_floor_per_unit(g, true);
        p_l_floor = first ? flr : std::min(p_l_floor, flr);
        first = false;
      }
    if (first) p_l_floor = 0;  // no must-run units anchor the infeed from below
  }
  double rs_ub = 0, rb_ub_total = 0;
  for (const auto& s : m.storage)
    if (s.provides_efr) {
      rs_ub += 2 * s.rating;
      rb_ub_total += 2 * s.rating;
    }
  rs_ub = std::min(rs_ub, f.R_S_max);
  if (opts.efr_mode == StrategyOptions::EfrMode::none) rs_ub = 0;
  if (opts.efr_mode == StrategyOptions::EfrMode::fixed) rs_ub = std::min(rs_ub, opts.efr_fixed_mw);
  double rs_lb = opts.efr_mode == StrategyOptions::EfrMode::fixed ? opts.efr_fixed_mw : 0;
  double rg_ub = opts.efr_mode == StrategyOptions::EfrMode::none ? rb_ub_total : 0;
  for (const auto& g : m.generators) rg_ub += g.pfr_max_per_unit * g.unit_count;

  // frequency machinery shared across nodes
  bool freq = opts.frequency_constraints_enabled;
  double x_max = f.P_L_max - rs_lb;
  double x_min = std::max(0.0, p_l_floor - rs_ub);
  if (x_min > x_max - 2.0) x_min = std::max(0.0, x_max - 2.0);
  bool nadir_active = freq && x_max > 0;
  if (nadir_active) sm.planes = build_planes(x_min, x_max, opts.planes, f);
  double h_lo = std::max(0.0, mustrun_h);
  if (freq) h_lo = std::max(h_lo, f.f0 * p_l_floor / (2.0 * f.rocof_max));
  ExpansionConfig& ec = sm.expansion;
  ec.bits = opts.bits;
  ec.bigM_H = std::max(h_up, 1.0);
  ec.bigM_RS = std::max(rs_ub, 1.0);
  ec.D = f.D;
  ec.f0 = f.f0;
  ec.T_s = f.T_s;
  ec.fortify = opts.fortify;
  ec.h_lo = h_lo;
  ec.h_up = std::max(h_up, 1.0);
  ec.p_l_lo = p_l_floor;
  ec.p_l_hi = f.P_L_max;

  for (const auto& nd : tree.nodes) {
    NodeVarSet& v = sm.node[static_cast<size_t>(nd.id)];
    std::string t = node_tag(nd.id);
    double pi = nd.probability;
    double dtau = nd.delta_tau;

    // generator variables
    for (size_t gi = 0; gi < G; ++gi) {
      const auto& g = m.generators[gi];
      std::string gt = "_g" + std::to_string(gi) + "_" + t;
      Var n_up;
      if (g.must_run)
        n_up = md.add_variable("nup" + gt, VarKind::integer, g.unit_count, g.unit_count);
      else
        n_up = md.add_variable("nup" + gt, VarKind::integer, 0, g.unit_count);
      v.n_up.push_back(n_up);
      md.add_objective_term(n_up, pi * dtau * g.cost_noload);

      double p_lo = 0, p_hi = class_capacity(g);
      if (g.must_run) {
        p_lo = deload_floor_per_unit(g, opts.deload_enabled) * g.unit_count;
        p_hi = class_capacity(g);
        if (!(opts.deload_enabled && g.deloadable)) p_lo = p_hi;
      }
      Var p = md.add_variable("p" + gt, VarKind::continuous, p_lo, p_hi);
      v.p.push_back(p);
      md.add_objective_term(p, pi * dtau * g.cost_marginal);

      if (g.must_run) {
        v.n_sg.push_back(Var{});
        v.n_sh.push_back(Var{});
      } else {
        int lead = std::max(0, g.startup_time);
        Var sg;
        if (nd.stage < lead) {
          int pinned = initial.pending[gi][static_cast<size_t>(nd.stage)];
          sg = md.add_variable("nsg" + gt, VarKind::integer, pinned, pinned);
        } else if (nd.stage == lead && lead > 0) {
          // root-initiated starts arrive here in every branch: one shared decision
          if (sm.shared_sg[gi] < 0) {
            Var shared = md.add_variable("nsg_g" + std::to_string(gi) + "_lead", VarKind::integer, 0, g.unit_count);
            sm.shared_sg[gi] = shared.index;
          }
          sg = Var{sm.shared_sg[gi]};
        } else {
          sg = md.add_variable("nsg" + gt, VarKind::integer, 0, g.unit_count);
        }
        Var sh = md.add_variable("nsh" + gt, VarKind::integer, 0, g.unit_count);
        v.n_sg.push_back(sg);
        v.n_sh.push_back(sh);
        md.add_objective_term(sg, pi * g.cost_startup);

        // dispatch window tied to commitment
        md.add_constraint("pmin" + gt, {{p, 1.0}, {n_up, -g.p_min}}, Sense::ge, 0.0);
        md.add_constraint("pmax" + gt, {{p, 1.0}, {n_up, -g.p_max}}, Sense::le, 0.0);
      }

      if (g.pfr_max_per_unit > 0) {
        Var rg = md.add_variable("rg" + gt, VarKind::continuous, 0, g.pfr_max_per_unit * g.unit_count);
        v.r_g.push_back(rg);
        md.add_constraint("rgcap" + gt, {{rg, 1.0}, {n_up, -g.pfr_max_per_unit}}, Sense::le, 0.0);
        md.add_constraint("rghead" + gt, {{p, 1.0}, {rg, 1.0}, {n_up, -g.p_max}}, Sense::le, 0.0);
      } else {
        v.r_g.push_back(Var{});
      }
    }

    // storage variables
    for (size_t b = 0; b < S; ++b) {
      const auto& s = m.storage[b];
      std::string bt = "_b" + std::to_string(b) + "_" + t;
      Var ch = md.add_variable("ch" + bt, VarKind::continuous, 0, s.rating);
      Var dis = md.add_variable("dis" + bt, VarKind::continuous, 0, s.rating);
      Var soc = md.add_variable("soc" + bt, VarKind::continuous, 0, s.capacity);
      v.charge.push_back(ch);
      v.discharge.push_back(dis);
      v.soc.push_back(soc);
      double se = std::sqrt(s.round_trip_efficiency);
      if (!nd.parent) {
        md.add_constraint("socrec" + bt, {{soc, 1.0}, {ch, -se * dtau}, {dis, dtau / se}}, Sense::eq,
                          initial.soc[b]);
      } else {
        Var psoc = sm.node[static_cast<size_t>(*nd.parent)].soc[b];
        md.add_constraint("socrec" + bt, {{soc, 1.0}, {psoc, -1.0}, {ch, -se * dtau}, {dis, dtau / se}},
                          Sense::eq, 0.0);
      }
      if (nd.stage == tree.horizon) md.set_bounds(soc, s.soc_initial, s.capacity);

      if (s.provides_efr) {
        double rs_cap = opts.efr_mode == StrategyOptions::EfrMode::none ? 0.0 : 2 * s.rating;
        double rb_cap = opts.efr_mode == StrategyOptions::EfrMode::none ? 2 * s.rating : 0.0;
        Var rs = md.add_variable("rs" + bt, VarKind::continuous, 0, rs_cap);
        Var rb = md.add_variable("rb" + bt, VarKind::continuous, 0, rb_cap);
        v.r_s.push_back(rs);
        v.r_b.push_back(rb);
        // swing from full charge to full discharge bounds deliverable response
        if (rs_cap > 0) {
          md.add_constraint("rshead" + bt, {{rs, 1.0}, {dis, 1.0}, {ch, -1.0}}, Sense::le, s.rating);
          md.add_constraint("rsback" + bt, {{rs, m.efr_backing_h}, {soc, -1.0}}, Sense::le, 0.0);
        }
        if (rb_cap > 0) {
          md.add_constraint("rbhead" + bt, {{rb, 1.0}, {dis, 1.0}, {ch, -1.0}}, Sense::le, s.rating);
          md.add_constraint("rbback" + bt, {{rb, m.efr_backing_h}, {soc, -1.0}}, Sense::le, 0.0);
        }
      } else {
        v.r_s.push_back(Var{});
        v.r_b.push_back(Var{});
      }
    }

    v.wind = md.add_variable("wind_" + t, VarKind::continuous, 0, nd.wind_available);
    md.add_objective_term(v.wind, pi * dtau * m.wind_marginal_cost);
    v.shed = md.add_variable("shed_" + t, VarKind::continuous, 0, nd.demand);
    md.add_objective_term(v.shed, pi * dtau * m.voll);

    // power balance
    {
      std::vector<LinTerm> bal;
      for (size_t gi = 0; gi < G; ++gi) bal.push_back({v.p[gi], 1.0});
      for (size_t b = 0; b < S; ++b) {
        bal.push_back({v.discharge[b], 1.0});
        bal.push_back({v.charge[b], -1.0});
      }
      bal.push_back({v.wind, 1.0});
      bal.push_back({v.shed, 1.0});
      md.add_constraint("balance_" + t, bal, Sense::eq, nd.demand);
    }

    // commitment recursion and start/stop accounting
    for (size_t gi = 0; gi < G; ++gi) {
      const auto& g = m.generators[gi];
      if (g.must_run) continue;
      std::string gt = "_g" + std::to_string(gi) + "_" + t;
      if (!nd.parent) {
        md.add_constraint("commit" + gt, {{v.n_up[gi], 1.0}, {v.n_sg[gi], -1.0}, {v.n_sh[gi], 1.0}},
                          Sense::eq, initial.n_up[gi]);
      } else {
        Var pn = sm.node[static_cast<size_t>(*nd.parent)].n_up[gi];
        md.add_constraint("commit" + gt,
                          {{v.n_up[gi], 1.0}, {pn, -1.0}, {v.n_sg[gi], -1.0}, {v.n_sh[gi], 1.0}}, Sense::eq,
                          0.0);
      }
      if (g.min_up < 2) md.add_constraint("sgcap" + gt, {{v.n_up[gi], 1.0}, {v.n_sg[gi], -1.0}}, Sense::ge, 0.0);
    }

    // ramping for classes that declare a rate (must-run and deloadable units)
    for (size_t gi = 0; gi < G; ++gi) {
      const auto& g = m.generators[gi];
      if (g.ramp_rate <= 0 || !(g.must_run || g.deloadable)) continue;
      std::string gt = "_g" + std::to_string(gi) + "_" + t;
      double rr = g.ramp_rate * dtau;
      if (!nd.parent) {
        md.add_constraint("rampup" + gt, {{v.p[gi], 1.0}, {v.n_up[gi], -rr}}, Sense::le, initial.p_prev[gi]);
        md.add_constraint("rampdn" + gt, {{v.p[gi], -1.0}, {v.n_up[gi], -rr}}, Sense::le, -initial.p_prev[gi]);
      } else {
        Var pp = sm.node[static_cast<size_t>(*nd.parent)].p[gi];
        md.add_constraint("rampup" + gt, {{v.p[gi], 1.0}, {pp, -1.0}, {v.n_up[gi], -rr}}, Sense::le, 0.0);
        md.add_constraint("rampdn" + gt, {{pp, 1.0}, {v.p[gi], -1.0}, {v.n_up[gi], -rr}}, Sense::le, 0.0);
      }
    }

    // system frequency-service aggregates
    v.r_s_total = md.add_variable("rstot_" + t, VarKind::continuous, rs_lb, std::max(rs_lb, rs_ub));
    v.r_g_total = md.add_variable("rgtot_" + t, VarKind::continuous, 0, rg_ub);
    {
      std::vector<LinTerm> te{{v.r_s_total, 1.0}};
      for (size_t b = 0; b < S; ++b)
        if (v.r_s[b].valid()) te.push_back({v.r_s[b], -1.0});
      md.add_constraint("rssum_" + t, te, Sense::eq, 0.0);
      std::vector<LinTerm> tg{{v.r_g_total, 1.0}};
      for (size_t gi = 0; gi < G; ++gi)
        if (v.r_g[gi].valid()) tg.push_back({v.r_g[gi], -1.0});
      for (size_t b = 0; b < S; ++b)
        if (v.r_b[b].valid()) tg.push_back({v.r_b[b], -1.0});
      md.add_constraint("rgsum_" + t, tg, Sense::eq, 0.0);
    }

    // largest infeed and must-run block output
    double pm_ub = 0;
    for (const auto& g : m.generators)
      if (g.must_run) pm_ub += class_capacity(g);
    v.p_m = md.add_variable("pm_" + t, VarKind::continuous, 0, std::max(pm_ub, 0.0));
    {
      std::vector<LinTerm> te{{v.p_m, 1.0}};
      for (size_t gi = 0; gi < G; ++gi)
        if (m.generators[gi].must_run) te.push_back({v.p[gi], -1.0});
      md.add_constraint("pmsum_" + t, te, Sense::eq, 0.0);
    }
    double pl_lo = opts.deload_enabled ? p_l_floor : f.P_L_max;
    v.p_l = md.add_variable("pl_" + t, VarKind::continuous, pl_lo, f.P_L_max);
    if (opts.general_infeed_form) {
      // per-class infeed bound via unit-count assignment binaries
      for (size_t gi = 0; gi < G; ++gi) {
        const auto& g = m.generators[gi];
        if (g.unit_count < 1 || g.p_max <= 0) continue;
        std::string gt = "_g" + std::to_string(gi) + "_" + t;
        if (g.must_run) {
          md.add_constraint("infeed" + gt, {{v.p_l, static_cast<double>(g.unit_count)}, {v.p[gi], -1.0}},
                            Sense::ge, 0.0);
          continue;
        }
        double mg = class_capacity(g);
        std::vector<LinTerm> pick, ncount{{v.n_up[gi], 1.0}};
        for (int u = 0; u <= g.unit_count; ++u) {
          Var y = md.add_variable("y" + std::to_string(u) + gt, VarKind::binary, 0, 1);
          pick.push_back({y, 1.0});
          if (u > 0) {
            ncount.push_back({y, static_cast<double>(-u)});
            md.add_constraint("infeed" + std::to_string(u) + gt,
                              {{v.p_l, static_cast<double>(u)}, {v.p[gi], -1.0}, {y, -mg}}, Sense::ge, -mg);
          }
        }
        md.add_constraint("pickone" + gt, pick, Sense::eq, 1.0);
        md.add_constraint("npick" + gt, ncount, Sense::eq, 0.0);
      }
    } else if (NM >= 1) {
      md.add_constraint("infeed_" + t, {{v.p_l, static_cast<double>(NM)}, {v.p_m, -1.0}}, Sense::ge, 0.0);
    }

    // system inertia after the loss
    double h_nat_lo = std::max(mustrun_h, freq ? h_lo : mustrun_h);
    v.h = md.add_variable("h_" + t, VarKind::continuous, std::min(h_nat_lo, h_up), h_up);
    {
      std::vector<LinTerm> te{{v.h, 1.0}};
      for (size_t gi = 0; gi < G; ++gi)
        te.push_back({v.n_up[gi], -m.generators[gi].inertia_const * m.generators[gi].p_max});
      if (f.H_W > 0) te.push_back({v.wind, -f.H_W});
      md.add_constraint("hsum_" + t, te, Sense::eq, -f.P_L_max * f.H_L);
    }

    if (freq) {
      md.add_constraint("rocof_" + t, {{v.h, 2.0 * f.rocof_max}, {v.p_l, -f.f0}}, Sense::ge, 0.0);
      md.add_constraint("qss_" + t, {{v.r_s_total, 1.0}, {v.r_g_total, 1.0}, {v.p_l, -1.0}}, Sense::ge,
                        -f.D * nd.demand * f.df_ss_max);
      if (nadir_active) {
        NadirVarHandles nh;
        nh.H = v.h;
        nh.R_S = v.r_s_total;
        nh.R_G = v.r_g_total;
        nh.P_L = v.p_l;
        for (int bit : opts.bits) {
          std::string bt = "_l" + std::to_string(bit) + "_" + t;
          v.z.push_back(md.add_variable("z" + bt, VarKind::binary, 0, 1));
          v.m.push_back(md.add_variable("mh" + bt, VarKind::continuous, 0, ec.bigM_H));
          v.k.push_back(md.add_variable("ks" + bt, VarKind::continuous, 0, ec.bigM_RS));
        }
        nh.z = v.z;
        nh.m = v.m;
        nh.k = v.k;
        emit_nadir_constraints(md, nh, nd.demand, sm.planes, ec);
      }
    }
  }

  // minimum up/down windows across the ancestor chain plus pre-run history
  for (const auto& nd : tree.nodes) {
    NodeVarSet& v = sm.node[static_cast<size_t>(nd.id)];
    std::string t = node_tag(nd.id);
    for (size_t gi = 0; gi < G; ++gi) {
      const auto& g = m.generators[gi];
      if (g.must_run) continue;
      std::string gt = "_g" + std::to_string(gi) + "_" + t;
      if (g.min_up >= 2) {
        auto chain = tree.ancestors(nd.id, g.min_up - 1);
        std::vector<LinTerm> te{{v.n_up[gi], 1.0}};
        for (int a : chain) te.push_back({sm.node[static_cast<size_t>(a)].n_sg[gi], -1.0});
        int hist = 0;
        for (int j = 1; j <= g.min_up - 1 - nd.stage; ++j) hist += initial.recent_starts[gi][static_cast<size_t>(j - 1)];
        md.add_constraint("minup" + gt, te, Sense::ge, hist);
      }
      if (g.min_down >= 2) {
        auto chain = tree.ancestors(nd.id, g.min_down - 1);
        std::vector<LinTerm> te{{v.n_up[gi], 1.0}};
        for (int a : chain) te.push_back({sm.node[static_cast<size_t>(a)].n_sh[gi], 1.0});
        int hist = 0;
        for (int j = 1; j <= g.min_down - 1 - nd.stage; ++j) hist += initial.recent_stops[gi][static_cast<size_t>(j - 1)];
        md.add_constraint("mindown" + gt, te, Sense::le, g.unit_count - hist);
      }
    }
  }

  sm.model.metadata["nodes"] = std::to_string(tree.nodes.size());
  return sm;
}

namespace {

int round_integral(double v, const std::string& what) {
  double r = std::round(v);
  if (std::abs(v - r) > 1e-6)
    fail(ErrorKind::validation, "integrality residual " + std::to_string(std::abs(v - r)) + " on " + what);
  return static_cast<int>(r);
}

}  // namespace

std::vector<NodeSchedule> extract_schedule(const SucModel& sm, const Solution& sol, const SystemModel& m,
                                           const ScenarioTree& tree) {
  if (sol.status != Solution::Status::optimal && sol.status != Solution::Status::gap_feasible)
    fail(ErrorKind::solver, "cannot extract from status " + status_name(sol.status));
  if (sol.values.size() != static_cast<size_t>(sm.model.num_variables()))
    fail(ErrorKind::solver, "solution length does not match the model");
  auto val = [&](Var v) { return v.valid() ? sol.values[static_cast<size_t>(v.index)] : 0.0; };
  size_t G = m.generators.size(), S = m.storage.size();
  std::vector<NodeSchedule> out(tree.nodes.size());
  for (const auto& nd : tree.nodes) {
    const NodeVarSet& v = sm.node[static_cast<size_t>(nd.id)];
    NodeSchedule& s = out[static_cast<size_t>(nd.id)];
    double balance = -nd.demand;
    for (size_t gi = 0; gi < G; ++gi) {
      const auto& g = m.generators[gi];
      int nup = round_integral(val(v.n_up[gi]), "online count of " + g.name);
      if (nup < 0 || nup > g.unit_count)
        fail(ErrorKind::validation, "online count outside [0, unit count] for " + g.name);
      s.n_up.push_back(nup);
      s.n_sg.push_back(v.n_sg[gi].valid() ? round_integral(val(v.n_sg[gi]), "starts of " + g.name) : 0);
      s.n_sh.push_back(v.n_sh[gi].valid() ? round_integral(val(v.n_sh[gi]), "stops of " + g.name) : 0);
      if (s.n_sg.back() < 0 || s.n_sh.back() < 0)
        fail(ErrorKind::validation, "negative start/stop count for " + g.name);
      s.p.push_back(val(v.p[gi]));
      s.r_g.push_back(val(v.r_g[gi]));
      balance += s.p.back();
    }
    for (size_t b = 0; b < S; ++b) {
      s.charge.push_back(val(v.charge[b]));
      s.discharge.push_back(val(v.discharge[b]));
      s.soc.push_back(val(v.soc[b]));
      s.r_s.push_back(val(v.r_s[b]));
      s.r_b.push_back(val(v.r_b[b]));
      if (s.soc.back() < -1e-6 || s.soc.back() > m.storage[b].capacity + 1e-6)
        fail(ErrorKind::validation, "state of charge outside capacity for " + m.storage[b].name);
      balance += s.discharge.back() - s.charge.back();
    }
    s.wind = val(v.wind);
    s.shed = val(v.shed);
    balance += s.wind + s.shed;
    if (std::abs(balance) > 1e-6)
      fail(ErrorKind::validation,
           "power balance residual " + std::to_string(balance) + " MW at node " + std::to_string(nd.id));
    s.p_l = val(v.p_l);
    s.p_m = val(v.p_m);
    s.r_s_total = val(v.r_s_total);
    s.r_g_total = val(v.r_g_total);
    s.h = val(v.h);
    for (const Var& z : v.z) s.z.push_back(round_integral(val(z), "expansion bit"));
  }
  return out;
}

void screen_schedule(const std::vector<NodeSchedule>& sched, const SystemModel& m, const ScenarioTree& tree,
                     const StrategyOptions& opts) {
  if (!opts.frequency_constraints_enabled) return;
  const FrequencyParams& f = m.freq;
  for (const auto& nd : tree.nodes) {
    const NodeSchedule& s = sched[static_cast<size_t>(nd.id)];
    FrequencyState st{s.h, s.r_s_total, s.r_g_total, s.p_l, nd.demand};
    std::string where = " at node " + std::to_string(nd.id);
    double rc = rocof_of(st, f);
    if (rc > f.rocof_max * (1 + 1e-9) + 1e-9)
      fail(ErrorKind::validation, "scheduled RoCoF " + std::to_string(rc) + " exceeds the limit" + where);
    double deficit = s.p_l - s.r_s_total - s.r_g_total;
    double q = deficit <= 1e-6 ? 0.0 : qss_deviation(st, f);  // absorbs row-level solver slack
    if (q > f.df_ss_max * (1 + 1e-9) + 1e-9)
      fail(ErrorKind::validation, "scheduled q-s-s deviation " + std::to_string(q) + " exceeds the limit" + where);
    NadirCheck nc = nadir_constraint_satisfied(st, f, true);
    // tolerance absorbs solver feasibility slack on rows of ~1e6 magnitude
    if (nc.margin < -10.0)
      fail(ErrorKind::validation, "nadir security margin " + std::to_string(nc.margin) + where);
  }
}

RealizedSeries load_realized_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  int cd = t.column("demand_mw"), cw = t.column("wind_mw");
  RealizedSeries rs;
  for (const auto& r : t.rows) {
    rs.demand.push_back(r[static_cast<size_t>(cd)]);
    rs.wind.push_back(r[static_cast<size_t>(cw)]);
  }
  return rs;
}

namespace {

struct Redispatch {
  std::vector<double> p;
  double wind = 0, shed = 0, dump = 0;
  double cost_marginal = 0, cost_shed = 0;
  double emissions = 0;
};

// Realization step: committed units, response volumes, and storage flows stay
// at their scheduled values; energy output, wind, and shedding rebalance
// against what actually happened.
Redispatch redispatch_to_realization(const SystemModel& m, const NodeSchedule& root, const FleetState& state,
                                     double demand, double wind_avail, const StrategyOptions& opts,
                                     const SolverConfig& solver) {
  size_t G = m.generators.size(), S = m.storage.size();
  MilpModel lp;
  std::vector<Var> pv(G);
  std::vector<LinTerm> bal;
  int NM = total_must_run_count(m);
  for (size_t gi = 0; gi < G; ++gi) {
    const auto& g = m.generators[gi];
    int n = root.n_up[gi];
    double lo = g.must_run ? deload_floor_per_unit(g, opts.deload_enabled) * g.unit_count : g.p_min * n;
    double hi = g.must_run ? class_capacity(g) : g.p_max * n;
    if (g.must_run && !(opts.deload_enabled && g.deloadable)) lo = hi;
    hi = std::min(hi, (g.must_run ? class_capacity(g) : g.p_max * n) - root.r_g[gi]);
    if (g.ramp_rate > 0 && (g.must_run || g.deloadable)) {
      lo = std::max(lo, state.p_prev[gi] - g.ramp_rate * n);
      hi = std::min(hi, state.p_prev[gi] + g.ramp_rate * n);
    }
    if (lo > hi) lo = hi;  // commitments guarantee a window; numeric guard only
    pv[gi] = lp.add_variable("p_g" + std::to_string(gi), VarKind::continuous, lo, hi);
    lp.add_objective_term(pv[gi], g.cost_marginal);
    bal.push_back({pv[gi], 1.0});
  }
  // scheduled deloading caps the must-run block at the committed infeed level
  if (NM >= 1 && !opts.general_infeed_form && opts.deload_enabled) {
    std::vector<LinTerm> te;
    for (size_t gi = 0; gi < G; ++gi)
      if (m.generators[gi].must_run) te.push_back({pv[gi], 1.0});
    if (!te.empty()) lp.add_constraint("infeed_cap", te, Sense::le, NM * root.p_l);
  }
  Var wv = lp.add_variable("wind", VarKind::continuous, 0, std::max(0.0, wind_avail));
  lp.add_objective_term(wv, m.wind_marginal_cost);
  Var shed = lp.add_variable("shed", VarKind::continuous, 0, std::max(0.0, demand));
  lp.add_objective_term(shed, m.voll);
  Var dump = lp.add_variable("dump", VarKind::continuous, 0, 1e9);
  lp.add_objective_term(dump, m.voll);
  bal.push_back({wv, 1.0});
  bal.push_back({shed, 1.0});
  bal.push_back({dump, -1.0});
  double storage_net = 0;
  for (size_t b = 0; b < S; ++b) storage_net += root.discharge[b] - root.charge[b];
  lp.add_constraint("balance", bal, Sense::eq, demand - storage_net);

  Solution sol = solve(lp, solver);
  if (sol.status != Solution::Status::optimal && sol.status != Solution::Status::gap_feasible)
    fail(ErrorKind::solver, "realization dispatch failed: " + status_name(sol.status) + " " + sol.diagnostics);
  Redispatch rd;
  for (size_t gi = 0; gi < G; ++gi) {
    double p = sol.values[static_cast<size_t>(pv[gi].index)];
    rd.p.push_back(p);
    rd.cost_marginal += m.generators[gi].cost_marginal * p;
    rd.emissions += m.generators[gi].emissions * p;
  }
  rd.wind = sol.values[static_cast<size_t>(wv.index)];
  rd.shed = sol.values[static_cast<size_t>(shed.index)];
  rd.dump = sol.values[static_cast<size_t>(dump.index)];
  rd.cost_shed = m.voll * rd.shed;
  return rd;
}

}  // namespace

OperationLog rolling_horizon_run(const SystemModel& m, const RealizedSeries& realized, const ForecastModel& forecast,
                                 const StrategyOptions& opts, int steps, const SolverConfig& solver,
                                 const FleetState& start) {
  if (steps < 1) fail(ErrorKind::config, "need at least one step");
  if (realized.demand.size() < static_cast<size_t>(steps) || realized.wind.size() < static_cast<size_t>(steps))
    fail(ErrorKind::config, "realized series shorter than the requested run");
  std::vector<double> qs = opts.quantiles;
  if (opts.deterministic_quantile > 0) {
    if (opts.deterministic_quantile >= 1) fail(ErrorKind::config, "deterministic quantile must lie in (0,1)");
    qs = {opts.deterministic_quantile};
  }
  FleetState state = start;
  validate_fleet_state(m, state);
  OperationLog log;
  size_t G = m.generators.size(), S = m.storage.size();

  auto profile_at = [](const std::vector<double>& p, int h) {
    if (p.empty()) fail(ErrorKind::config, "empty forecast profile");
    return p[static_cast<size_t>(std::min<int>(h, static_cast<int>(p.size()) - 1))];
  };

  for (int t = 0; t < steps; ++t) {
    double fc_wind = profile_at(forecast.wind_point_forecast, t);
    // the root carries the live measurement; only future hours are uncertain
    double rz_demand = realized.demand[static_cast<size_t>(t)];
    double rz_wind = realized.wind[static_cast<size_t>(t)];
    ScenarioTree tree = build_tree(forecast, qs, opts.lookahead, t, rz_demand, rz_wind, m.wind_capacity);
    SucModel sm = build_suc_model(m, tree, opts, state);
    Solution sol;
    try {
      sol = solve(sm.model, solver);
    } catch (const Error& e) {
      fail(ErrorKind::solver, "step " + std::to_string(t) + ": " + e.what());
    }
    auto sched = extract_schedule(sm, sol, m, tree);
    screen_schedule(sched, m, tree, opts);
    const NodeSchedule& root = sched[0];

    Redispatch rd =
        redispatch_to_realization(m, root, state, realized.demand[static_cast<size_t>(t)],
                                  realized.wind[static_cast<size_t>(t)], opts, solver);

    StepRecord rec;
    rec.step = t;
    rec.demand_realized = realized.demand[static_cast<size_t>(t)];
    rec.wind_realized = realized.wind[static_cast<size_t>(t)];
    rec.wind_forecast = fc_wind;
    // startup charges accrue when the start is initiated, i.e. now
    for (size_t gi = 0; gi < G; ++gi) {
      const auto& g = m.generators[gi];
      rec.cost_noload += g.cost_noload * root.n_up[gi];
      if (g.must_run) continue;
      int initiated;
      if (g.startup_time >= 1)
        initiated = sm.shared_sg[gi] >= 0
                        ? round_integral(sol.values[static_cast<size_t>(sm.shared_sg[gi])], "shared starts")
                        : 0;
      else
        initiated = root.n_sg[gi];
      rec.cost_startup += g.cost_startup * initiated;
    }
    rec.cost_marginal = rd.cost_marginal;
    rec.cost_shed = rd.cost_shed + m.voll * rd.dump;
    rec.cost_total = rec.cost_startup + rec.cost_noload + rec.cost_marginal + rec.cost_shed +
                     m.wind_marginal_cost * rd.wind;
    rec.shed = rd.shed;
    rec.dump = rd.dump;
    rec.curtailment = std::max(0.0, realized.wind[static_cast<size_t>(t)] - rd.wind);
    rec.emissions = rd.emissions;
    rec.inertia = root.h;
    rec.efr = root.r_s_total;
    rec.pfr = root.r_g_total;
    rec.infeed = root.p_l;
    if (opts.frequency_constraints_enabled) {
      FrequencyState st{root.h, root.r_s_total, root.r_g_total, root.p_l, tree.nodes[0].demand};
      rec.nadir_margin = nadir_constraint_satisfied(st, m.freq, true).margin;
    }
    rec.n_up = root.n_up;
    rec.p = rd.p;
    rec.solve_seconds = sol.solve_time;
    rec.gap = sol.gap;
    rec.status = status_name(sol.status);

    // advance the fleet
    for (size_t gi = 0; gi < G; ++gi) {
      const auto& g = m.generators[gi];
      state.n_up[gi] = root.n_up[gi];
      state.p_prev[gi] = rd.p[gi];
      if (!g.must_run) {
        int lead = std::max(0, g.startup_time);
        int initiated = 0;
        if (lead >= 1) {
          initiated = sm.shared_sg[gi] >= 0
                          ? round_integral(sol.values[static_cast<size_t>(sm.shared_sg[gi])], "shared starts")
                          : 0;
          auto& pipe = state.pending[gi];
          for (size_t j = 0; j + 1 < pipe.size(); ++j) pipe[j] = pipe[j + 1];
          pipe.back() = initiated;
        }
        if (g.min_up >= 2) {
          auto& ring = state.recent_starts[gi];
          for (size_t j = ring.size(); j-- > 1;) ring[j] = ring[j - 1];
          ring[0] = root.n_sg[gi];
        }
        if (g.min_down >= 2) {
          auto& ring = state.recent_stops[gi];
          for (size_t j = ring.size(); j-- > 1;) ring[j] = ring[j - 1];
          ring[0] = root.n_sh[gi];
        }
      }
    }
    for (size_t b = 0; b < S; ++b) state.soc[b] = root.soc[b];
    rec.soc = state.soc;

    log.steps.push_back(std::move(rec));
  }

  for (const auto& r : log.steps) {
    log.total_cost += r.cost_total;
    log.total_emissions += r.emissions;
    log.total_curtailment += r.curtailment;
    log.total_shed += r.shed;
    log.mean_inertia += r.inertia;
    log.mean_efr += r.efr;
    log.mean_pfr += r.pfr;
    log.mean_infeed += r.infeed;
  }
  double n = static_cast<double>(log.steps.size());
  log.mean_inertia /= n;
  log.mean_efr /= n;
  log.mean_pfr /= n;
  log.mean_infeed /= n;
  log.final_state = state;
  return log;
}

void write_operation_csv(const OperationLog& log, const SystemModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  // solve wall time stays out of the CSV so reruns are byte-identical
  out << "step,demand_mw,wind_mw,cost_total,cost_startup,cost_noload,cost_marginal,cost_shed,shed_mw,dump_mw,"
         "curtailment_mwh,emissions_t,inertia_mws,efr_mw,pfr_mw,infeed_mw,nadir_margin,gap,status";
  for (const auto& g : m.generators) out << ",n_up_" << g.name << ",p_" << g.name;
  for (const auto& s : m.storage) out << ",soc_" << s.name;
  out << "\n";
  out.precision(10);
  for (const auto& r : log.steps) {
    out << r.step << "," << r.demand_realized << "," << r.wind_realized << "," << r.cost_total << ","
        << r.cost_startup << "," << r.cost_noload << "," << r.cost_marginal << "," << r.cost_shed << "," << r.shed
        << "," << r.dump << "," << r.curtailment << "," << r.emissions << "," << r.inertia << "," << r.efr << ","
        << r.pfr << "," << r.infeed << "," << r.nadir_margin << "," << r.gap << "," << r.status;
    for (size_t gi = 0; gi < m.generators.size(); ++gi) out << "," << r.n_up[gi] << "," << r.p[gi];
    for (size_t b = 0; b < m.storage.size(); ++b) out << "," << r.soc[b];
    out << "\n";
  }
}

std::string operation_summary_json(const OperationLog& log) {
  std::ostringstream os;
  os.precision(10);
  os << "{\"steps\":" << log.steps.size() << ",\"total_cost\":" << log.total_cost
     << ",\"total_emissions_t\":" << log.total_emissions << ",\"total_curtailment_mwh\":" << log.total_curtailment
     << ",\"total_shed_mwh\":" << log.total_shed << ",\"mean_inertia_mws\":" << log.mean_inertia
     << ",\"mean_efr_mw\":" << log.mean_efr << ",\"mean_pfr_mw\":" << log.mean_pfr
     << ",\"mean_infeed_mw\":" << log.mean_infeed << "}";
  return os.str();
}

}  // namespace fsuc
