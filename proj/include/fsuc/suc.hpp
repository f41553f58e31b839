#pragma once
#include <optional>
#include <string>
#include <vector>

#include "fsuc/freq_constraints.hpp"
#include "fsuc/milp.hpp"
#include "fsuc/scenario_tree.hpp"
#include "fsuc/system_model.hpp"

namespace fsuc {

struct StrategyOptions {
  enum class EfrMode { none, fixed, optimized };
  EfrMode efr_mode = EfrMode::optimized;
  double efr_fixed_mw = 200;
  bool deload_enabled = false;
  std::vector<int> bits = {8, 9, 10, 11};
  int planes = 2;
  bool frequency_constraints_enabled = true;
  double deterministic_quantile = 0;  // in (0,1) selects a single-chain tree
  bool fortify = true;                // LP-strengthening rows, redundant at integrality
  bool general_infeed_form = false;   // per-class infeed bound via assignment binaries
  int lookahead = 6;                  // tree depth in hours for rolling operation
  std::vector<double> quantiles = {0.005, 0.1, 0.3, 0.5, 0.7, 0.9, 0.995};
};

// Commitment and storage carry-over between rolling-horizon steps.
struct FleetState {
  std::vector<int> n_up;                      // per class, online units
  std::vector<std::vector<int>> pending;      // per class: starts arriving s hours from now, s < startup lead
  std::vector<std::vector<int>> recent_starts;  // per class, index 0 = started 1 h ago
  std::vector<std::vector<int>> recent_stops;
  std::vector<double> p_prev;  // per class MW in the previous hour
  std::vector<double> soc;     // per storage MWh
};

FleetState initial_fleet_state(const SystemModel& m);
// Sizes the flexible fleet to the first hour's net demand so a run does not
// begin with artificial shedding. When frequency_secured, also raises the
// commitment until a no-EFR dispatch can satisfy the frequency limits, since
// startup leads block corrections inside the first lookahead window.
FleetState warm_fleet_state(const SystemModel& m, double demand0, double wind0, bool frequency_secured = true);
void validate_fleet_state(const SystemModel& m, const FleetState& st);

// Handles for one node's variables inside the assembled model.
struct NodeVarSet {
  std::vector<Var> n_up, n_sg, n_sh;  // per class (n_sg/n_sh invalid for must-run classes)
  std::vector<Var> p, r_g;            // per class (r_g invalid where the class offers none)
  std::vector<Var> charge, discharge, soc, r_s, r_b;  // per storage (r_s/r_b invalid for non-EFR units)
  Var wind, shed;
  Var p_l, p_m, r_s_total, r_g_total, h;
  std::vector<Var> z, m, k;  // nadir expansion, aligned with StrategyOptions::bits
};

struct SucModel {
  MilpModel model;
  std::vector<NodeVarSet> node;  // by node id
  std::vector<int> shared_sg;    // per class: model var index of the root-initiated start decision, -1 if none
  StrategyOptions opts;
  ExpansionConfig expansion;
  PlaneSet planes;
};

SucModel build_suc_model(const SystemModel& m, const ScenarioTree& tree, const StrategyOptions& opts,
                         const FleetState& initial);

struct NodeSchedule {
  std::vector<int> n_up, n_sg, n_sh;
  std::vector<double> p, r_g;
  std::vector<double> charge, discharge, soc, r_s, r_b;
  double wind = 0, shed = 0;
  double p_l = 0, p_m = 0, r_s_total = 0, r_g_total = 0, h = 0;
  std::vector<int> z;
};

// Rounds integral variables (residual <= 1e-6 enforced), checks node power
// balance to 1e-6 MW and storage bounds, returns schedules by node id.
std::vector<NodeSchedule> extract_schedule(const SucModel& sm, const Solution& sol, const SystemModel& m,
                                           const ScenarioTree& tree);

// Analytic security screen on an extracted schedule; throws a validation
// error naming the node when a frequency row is violated beyond tolerance.
void screen_schedule(const std::vector<NodeSchedule>& sched, const SystemModel& m, const ScenarioTree& tree,
                     const StrategyOptions& opts);

struct StepRecord {
  int step = 0;
  double demand_realized = 0, wind_realized = 0, wind_forecast = 0;
  double cost_total = 0;        // currency for this hour
  double cost_startup = 0, cost_noload = 0, cost_marginal = 0, cost_shed = 0;
  double shed = 0, dump = 0;    // MW unserved / absorbed surplus
  double curtailment = 0;       // MWh
  double emissions = 0;         // tCO2
  double inertia = 0, efr = 0, pfr = 0, infeed = 0;  // committed root quantities
  double nadir_margin = 0;      // MW^2 s, analytic damped-nadir slack at the root
  std::vector<int> n_up;        // per class after the step
  std::vector<double> p;        // per class realized MW
  std::vector<double> soc;      // per storage MWh after the step
  double solve_seconds = 0;
  double gap = 0;
  std::string status;
};

struct OperationLog {
  std::vector<StepRecord> steps;
  double total_cost = 0;
  double total_emissions = 0;
  double total_curtailment = 0;
  double total_shed = 0;
  double mean_inertia = 0, mean_efr = 0, mean_pfr = 0, mean_infeed = 0;
  FleetState final_state;
};

struct RealizedSeries {
  std::vector<double> demand;
  std::vector<double> wind;
};

RealizedSeries load_realized_csv(const std::string& path);

OperationLog rolling_horizon_run(const SystemModel& m, const RealizedSeries& realized, const ForecastModel& forecast,
                                 const StrategyOptions& opts, int steps, const SolverConfig& solver,
                                 const FleetState& start);

void write_operation_csv(const OperationLog& log, const SystemModel& m, const std::string& path);
std::string operation_summary_json(const OperationLog& log);

}  // namespace fsuc
