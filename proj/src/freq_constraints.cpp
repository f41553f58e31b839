#include "fsuc/freq_constraints.hpp"

#include <algorithm>
#include <cmath>

namespace fsuc {

double PlaneSet::envelope(double x) const {
  double best = -1e300;
  for (const auto& p : planes) best = std::max(best, p.a_p * x + p.c_p);
  return best;
}

double PlaneSet::alpha(double x) const { return x * x * T_g / (4.0 * df_max); }

double rocof_of(const FrequencyState& s, const FrequencyParams& f) {
  if (s.H <= 0) {
    if (s.P_L == 0 && s.H == 0) return 0.0;
    fail(ErrorKind::numeric, "rocof undefined: inertia must be positive");
  }
  return s.P_L * f.f0 / (2.0 * s.H);
}

double system_inertia(const std::vector<int>& online_counts, double wind_mw, const SystemModel& m) {
  if (online_counts.size() != m.generators.size())
    fail(ErrorKind::validation, "online count vector does not match generator classes");
  double h = 0;
  for (size_t i = 0; i < online_counts.size(); ++i) {
    const auto& g = m.generators[i];
    if (online_counts[i] < 0 || online_counts[i] > g.unit_count)
      fail(ErrorKind::validation, "online count out of range for class " + g.name);
    h += g.inertia_const * g.p_max * online_counts[i];
  }
  h += m.freq.H_W * wind_mw;
  h -= m.freq.P_L_max * m.freq.H_L;
  return h;
}

double qss_deviation(const FrequencyState& s, const FrequencyParams& f) {
  double deficit = s.P_L - s.R_S - s.R_G;
  if (deficit <= 0) return 0.0;
  double damping = f.D * s.P_D;
  if (damping <= 0)
    fail(ErrorKind::numeric, "uncovered power deficit with zero load damping: steady state does not exist");
  return deficit / damping;
}

double nadir_time_no_damping(const FrequencyState& s, const FrequencyParams& f) {
  if (s.R_G <= 0) fail(ErrorKind::numeric, "PFR is zero: frequency declines without bound");
  double t = (s.P_L - s.R_S) * f.T_g / s.R_G;
  if (t < f.T_s || t >= f.T_g)
    fail(ErrorKind::numeric, "nadir time " + std::to_string(t) + " s outside the modeled window [" +
                                 std::to_string(f.T_s) + ", " + std::to_string(f.T_g) + ")");
  return t;
}

double nadir_no_damping(const FrequencyState& s, const FrequencyParams& f) {
  if (s.R_S >= s.P_L) return 0.0;  // loss fully covered within T_s
  double t = nadir_time_no_damping(s, f);
  double drop = s.P_L * t - s.R_S * (t - f.T_s / 2.0) - s.R_G * t * t / (2.0 * f.T_g);
  return f.f0 / (2.0 * s.H) * drop;
}

NadirCheck nadir_constraint_satisfied(const FrequencyState& s, const FrequencyParams& f, bool with_damping) {
  double x = std::max(0.0, s.P_L - s.R_S);
  double lhs = (s.H / f.f0 - s.R_S * f.T_s / (4.0 * f.df_max)) * s.R_G;
  double rhs = x * x * f.T_g / (4.0 * f.df_max);
  if (with_damping) rhs -= x * f.T_g * f.D / 4.0 * s.P_D;
  return {lhs >= rhs, lhs - rhs};
}

PlaneSet build_planes(double x_min, double x_max, int n_planes, const FrequencyParams& f) {
  if (!(x_min >= 0 && x_min < x_max)) fail(ErrorKind::config, "plane range must satisfy 0 <= x_min < x_max");
  if (n_planes < 1) fail(ErrorKind::config, "need at least one plane");
  PlaneSet ps;
  ps.T_g = f.T_g;
  ps.df_max = f.df_max;
  ps.p_l_lo = x_min;
  ps.p_l_hi = x_max;
  double width = (x_max - x_min) / n_planes;
  for (int i = 0; i <= n_planes; ++i) ps.breakpoints.push_back(x_min + i * width);
  for (int i = 0; i < n_planes; ++i) {
    double x1 = ps.breakpoints[static_cast<size_t>(i)];
    double x2 = ps.breakpoints[static_cast<size_t>(i) + 1];
    Plane p;
    p.a_p = (x1 + x2) * f.T_g / (4.0 * f.df_max);
    p.b_p = -p.a_p;
    p.c_p = -x1 * x2 * f.T_g / (4.0 * f.df_max);
    p.x_lo = x1;
    p.x_hi = x2;
    ps.planes.push_back(p);
  }
  return ps;
}

OverestimationStats plane_overestimation_stats(const PlaneSet& ps, double grid_step) {
  if (grid_step <= 0) fail(ErrorKind::config, "grid step must be positive");
  if (ps.planes.empty()) fail(ErrorKind::config, "empty plane set");
  OverestimationStats st;
  double sum = 0;
  for (double pl = ps.p_l_lo; pl <= ps.p_l_hi + 1e-9; pl += grid_step) {
    for (double rs = ps.r_s_lo; rs <= ps.r_s_hi + 1e-9; rs += grid_step) {
      double x = pl - rs;
      double a = ps.alpha(x);
      if (a <= 0) continue;
      double rel = (ps.envelope(x) - a) / a * 100.0;
      sum += rel;
      st.max_pct = std::max(st.max_pct, rel);
      ++st.points;
      if (ps.r_s_lo >= ps.r_s_hi) break;
    }
    if (ps.p_l_lo >= ps.p_l_hi) break;
  }
  if (st.points == 0) fail(ErrorKind::config, "overestimation grid is empty");
  st.mean_pct = sum / st.points;
  return st;
}

namespace {

// Linear under-estimator of g(x) = 2 sqrt(f0 * (co*x + ic)) between x_lo and
// x_hi; g is concave there when co*x + ic > 0 at both ends, so the chord is
// valid. Returns false when the chord does not exist.
bool sqrt_chord(double f0, double co, double ic, double x_lo, double x_hi, double& slope, double& at_hi) {
  double flo = co * x_lo + ic, fhi = co * x_hi + ic;
  if (flo <= 0 || fhi <= 0) return false;
  double glo = 2.0 * std::sqrt(f0 * flo), ghi = 2.0 * std::sqrt(f0 * fhi);
  slope = x_hi > x_lo ? (ghi - glo) / (x_hi - x_lo) : 0.0;
  at_hi = ghi;
  return true;
}

}  // namespace

std::vector<int> emit_nadir_constraints(MilpModel& model, const NadirVarHandles& v, double P_D,
                                        const PlaneSet& planes, const ExpansionConfig& cfg) {
  if (cfg.bits.empty()) fail(ErrorKind::config, "binary expansion needs a non-empty bit set");
  if (cfg.bigM_H <= 0 || cfg.bigM_RS <= 0) fail(ErrorKind::config, "expansion big-M bounds must be positive");
  size_t nb = cfg.bits.size();
  if (v.z.size() != nb || v.m.size() != nb || v.k.size() != nb)
    fail(ErrorKind::config, "expansion handle vectors must match the bit set");
  if (planes.planes.empty()) fail(ErrorKind::config, "empty plane set");

  std::vector<double> w(nb);  // bit weights 2^l
  int lmin = cfg.bits[0];
  double max_credit = 0;
  for (size_t i = 0; i < nb; ++i) {
    w[i] = std::ldexp(1.0, cfg.bits[i]);
    lmin = std::min(lmin, cfg.bits[i]);
    max_credit += w[i];
  }
  double granularity = std::ldexp(1.0, lmin);
  std::string tag = model.variable_name(v.R_G);

  std::vector<int> rows;
  auto add = [&](const std::string& name, std::vector<LinTerm> terms, Sense s, double rhs) {
    rows.push_back(model.add_constraint(name + "_" + tag, std::move(terms), s, rhs));
  };

  // credit sandwich: sum z 2^l <= R_G <= sum z 2^l + granularity - 1
  {
    std::vector<LinTerm> lo{{v.R_G, 1.0}}, hi{{v.R_G, 1.0}};
    for (size_t i = 0; i < nb; ++i) {
      lo.push_back({v.z[i], -w[i]});
      hi.push_back({v.z[i], -w[i]});
    }
    add("credit_lo", lo, Sense::ge, 0.0);
    add("credit_hi", hi, Sense::le, granularity - 1.0);
  }

  // products m ~ H z, k ~ R_S z: uppers bind the inertia credit, lowers bind
  // the EFR debit, which is all the plane row's direction consumes
  for (size_t i = 0; i < nb; ++i) {
    std::string b = std::to_string(cfg.bits[i]);
    add("m_cap_z" + b, {{v.m[i], 1.0}, {v.z[i], -cfg.bigM_H}}, Sense::le, 0.0);
    add("m_cap_h" + b, {{v.m[i], 1.0}, {v.H, -1.0}}, Sense::le, 0.0);
    add("k_cap_z" + b, {{v.k[i], 1.0}, {v.z[i], -cfg.bigM_RS}}, Sense::le, 0.0);
    add("k_flr_x" + b, {{v.k[i], 1.0}, {v.R_S, -1.0}, {v.z[i], -cfg.bigM_RS}}, Sense::ge, -cfg.bigM_RS);
    if (cfg.fortify) {
      add("m_flr_x" + b, {{v.m[i], 1.0}, {v.H, -1.0}, {v.z[i], -cfg.bigM_H}}, Sense::ge, -cfg.bigM_H);
      add("k_cap_x" + b, {{v.k[i], 1.0}, {v.R_S, -1.0}}, Sense::le, 0.0);
      if (cfg.h_lo > 0) {
        add("m_hull_lo" + b, {{v.m[i], 1.0}, {v.z[i], -cfg.h_lo}}, Sense::ge, 0.0);
        add("m_hull_hi" + b, {{v.m[i], 1.0}, {v.H, -1.0}, {v.z[i], -cfg.h_lo}}, Sense::le, -cfg.h_lo);
      }
    }
  }

  if (cfg.fortify) {
    double h_up = cfg.h_up > 0 ? cfg.h_up : cfg.bigM_H;
    std::vector<LinTerm> agg{{v.R_G, -h_up}};
    for (size_t i = 0; i < nb; ++i) agg.push_back({v.m[i], w[i]});
    add("credit_weight_cap", agg, Sense::le, 0.0);
  }

  double f0 = cfg.f0;
  double T_s = cfg.T_s;
  double x_hi = cfg.p_l_hi;                // largest feasible x = P_L - R_S
  double x_lo = cfg.p_l_lo - cfg.bigM_RS;  // smallest

  for (size_t p = 0; p < planes.planes.size(); ++p) {
    const Plane& pl = planes.planes[p];
    // damping relief is linear in x because P_D is a node constant
    double co = pl.a_p - planes.T_g * cfg.D * P_D / 4.0;
    std::string pn = std::to_string(p);

    // (1/f0) sum m 2^l - (T_s/(4 df)) sum k 2^l - co P_L + co R_S >= c_p
    std::vector<LinTerm> terms{{v.P_L, -co}, {v.R_S, co}};
    for (size_t i = 0; i < nb; ++i) {
      terms.push_back({v.m[i], w[i] / f0});
      terms.push_back({v.k[i], -T_s / (4.0 * planes.df_max) * w[i]});
    }
    add("nadir_p" + pn, terms, Sense::ge, pl.c_p);

    if (!cfg.fortify) continue;

    // chord of 2 sqrt(f0 (co x + c_p)) under-estimates the response product
    // requirement, so weighted-sum rows on (H, R_G) and (H, credit) are valid
    double chord_slope, chord_hi;
    if (!sqrt_chord(f0, co, pl.c_p, x_lo, x_hi, chord_slope, chord_hi)) continue;
    double chord_rhs = chord_hi - chord_slope * x_hi;
    for (size_t li = 0; li < cfg.lambdas.size(); ++li) {
      double lam = cfg.lambdas[li];
      if (lam <= 0) fail(ErrorKind::config, "weighted-sum multipliers must be positive");
      std::string ln = pn + "_" + std::to_string(li);
      add("prodcut_rg" + ln,
          {{v.H, lam}, {v.R_G, 1.0 / lam}, {v.P_L, -chord_slope}, {v.R_S, chord_slope}}, Sense::ge,
          chord_rhs);
      std::vector<LinTerm> creditcut{{v.H, lam}, {v.P_L, -chord_slope}, {v.R_S, chord_slope}};
      for (size_t i = 0; i < nb; ++i) creditcut.push_back({v.z[i], w[i] / lam});
      add("prodcut_cr" + ln, creditcut, Sense::ge, chord_rhs);
    }

    // dropping the top credit bit caps the credit, which forces an inertia
    // floor linear in x; big-M disarms the row when the top bit is set
    if (nb >= 2) {
      size_t ti = 0;
      for (size_t i = 1; i < nb; ++i)
        if (cfg.bits[i] > cfg.bits[ti]) ti = i;
      double credit0 = max_credit - w[ti];
      if (credit0 > 0) {
        double slope_x = f0 * co / credit0;
        double need_hi = slope_x * x_hi + f0 * pl.c_p / credit0;
        double need_lo = slope_x * x_lo + f0 * pl.c_p / credit0;
        double bigm = std::max(0.0, std::max(need_hi, need_lo) - cfg.h_lo);
        add("topbit_p" + pn, {{v.H, 1.0}, {v.P_L, -slope_x}, {v.R_S, slope_x}, {v.z[ti], bigm}},
            Sense::ge, f0 * pl.c_p / credit0);
      }
    }
  }
  return rows;
}

}  // namespace fsuc
