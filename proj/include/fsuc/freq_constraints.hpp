#pragma once
#include <vector>

#include "fsuc/milp.hpp"
#include "fsuc/system_model.hpp"

namespace fsuc {

// Post-loss operating point the frequency constraints are evaluated at.
struct FrequencyState {
  double H = 0;    // MW s, system inertia after the loss
  double R_S = 0;  // MW, total EFR
  double R_G = 0;  // MW, total PFR
  double P_L = 0;  // MW, largest power infeed
  double P_D = 0;  // MW, demand
};

// One overestimating chord of the quadratic alpha(x) = x^2 T_g/(4 df_max), x = P_L - R_S.
// Evaluates as a_p*P_L + b_p*R_S + c_p = s*x + c with b_p = -a_p.
struct Plane {
  double a_p = 0;
  double b_p = 0;
  double c_p = 0;
  double x_lo = 0;  // segment where the chord touches alpha at both ends
  double x_hi = 0;
};

struct PlaneSet {
  std::vector<double> breakpoints;  // n_planes+1 values partitioning [x_min, x_max]
  std::vector<Plane> planes;
  double T_g = 10.0;
  double df_max = 0.8;
  // grid ranges used by plane_overestimation_stats; build_planes presets a 1-D
  // sweep of x (R_S pinned at 0), callers widen for 2-D assessments
  double p_l_lo = 0, p_l_hi = 0;
  double r_s_lo = 0, r_s_hi = 0;

  double envelope(double x) const;  // max over planes of s*x + c
  double alpha(double x) const;     // x^2 T_g/(4 df_max)
};

// Binary-expansion settings for the linearized nadir constraint. The
// fortification rows are valid for every feasible point and redundant once the
// binaries are integral; they exist to tighten the LP relaxation and are off
// by default.
struct ExpansionConfig {
  std::vector<int> bits;  // exponents l; PFR credit = sum z_l 2^l
  double bigM_H = 0;      // >= any feasible inertia
  double bigM_RS = 0;     // >= any feasible EFR
  double D = 0.005;       // load damping, fraction of demand per Hz
  double f0 = 50.0;       // Hz
  double T_s = 0.5;       // s, EFR delivery time

  bool fortify = false;
  double h_lo = 0;    // valid inertia floor (must-run floor or RoCoF implication)
  double h_up = 0;    // valid inertia cap; 0 means bigM_H
  double p_l_lo = 0;  // infeed range the strengthening rows are anchored on
  double p_l_hi = 0;
  std::vector<double> lambdas = {0.06, 0.08, 0.105, 0.14, 0.19, 0.25};
};

// Handles the caller created in the model: one z/m/k triple per bit, aligned
// with ExpansionConfig::bits. m ~ H*z and k ~ R_S*z.
struct NadirVarHandles {
  Var H, R_S, R_G, P_L;
  std::vector<Var> z, m, k;
};

double rocof_of(const FrequencyState& s, const FrequencyParams& f);

// Post-loss inertia from per-class online counts plus wind contribution, net
// of the lost unit's own inertia.
double system_inertia(const std::vector<int>& online_counts, double wind_mw, const SystemModel& m);

double qss_deviation(const FrequencyState& s, const FrequencyParams& f);

// Time of the frequency minimum assuming no load damping; only valid in
// [T_s, T_g), errors outside.
double nadir_time_no_damping(const FrequencyState& s, const FrequencyParams& f);

double nadir_no_damping(const FrequencyState& s, const FrequencyParams& f);

struct NadirCheck {
  bool satisfied = false;
  double margin = 0;  // MW^2 s, LHS - RHS of the nadir security constraint
};
NadirCheck nadir_constraint_satisfied(const FrequencyState& s, const FrequencyParams& f, bool with_damping);

PlaneSet build_planes(double x_min, double x_max, int n_planes, const FrequencyParams& f);

struct OverestimationStats {
  double mean_pct = 0;
  double max_pct = 0;
  long points = 0;
};
OverestimationStats plane_overestimation_stats(const PlaneSet& planes, double grid_step);

// Emits the linearized nadir constraint system for one node: credit coupling,
// big-M products, one row per plane, and (when cfg.fortify) the strengthening
// battery. Returns the indices of the added rows.
std::vector<int> emit_nadir_constraints(MilpModel& model, const NadirVarHandles& v, double P_D,
                                        const PlaneSet& planes, const ExpansionConfig& cfg);

}  // namespace fsuc
