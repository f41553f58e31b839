#pragma once
#include <string>
#include <vector>

#include "fsuc/dynamics.hpp"
#include "fsuc/nadir_oracle.hpp"
#include "fsuc/suc.hpp"

namespace fsuc {

struct StrategySpec {
  std::string name;
  StrategyOptions options;
};

struct RunConfig {
  std::string system_path;
  std::string forecast_path;
  std::string realized_path;
  std::vector<StrategySpec> strategies;
  int steps = 48;
  int lookahead = 6;
  int planes = 2;
  std::vector<int> bits = {8, 9, 10, 11};
  double sigma0 = 0;        // overrides the forecast error level when > 0
  double sigma_growth = 1;  // per sqrt(h)
  uint64_t seed = 1;
  SolverConfig solver;
  std::string out_dir = ".";
  bool write_traces = true;
};

RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir);
RunConfig load_run_config(const std::string& path);

struct StrategyResult {
  std::string name;
  bool failed = false;
  std::string error;
  double cost = 0, emissions = 0, curtailment = 0, shed = 0;
  double mean_inertia = 0, mean_efr = 0, mean_pfr = 0, mean_infeed = 0;
  double savings_vs_baseline = 0;  // baseline cost minus this strategy's cost
  int binding_steps = 0;           // committed hours where the nadir limit is tight
  int sim_checked = 0;             // hours post-validated in the time domain
  int sim_failures = 0;            // analytic pass but simulated verdict failure
  OperationLog log;
};

struct ComparisonReport {
  std::string baseline;  // strategy name savings refer to
  std::vector<StrategyResult> strategies;
};

// Runs every strategy on identical inputs, post-validates each committed hour
// in the time domain, writes per-strategy logs and the comparison artifacts.
// A strategy failure marks its row failed; the others still complete.
ComparisonReport run_case(const RunConfig& cfg);

void write_comparison_csv(const ComparisonReport& rep, const std::string& path);
std::string comparison_json(const ComparisonReport& rep);

// Per-strategy daily profile series shaped for plotting: committed EFR share
// against net demand and storage state, one row per hour. Also writes the
// savings bar table. No-op rows for failed strategies.
void emit_plot_data(const ComparisonReport& rep, const SystemModel& m, const std::string& out_dir);

struct DampingAssessment {
  AssessmentReport linear;
  AssessmentReport none;
};
DampingAssessment run_damping_assessment(const SampleRanges& r, int n_samples, uint64_t seed,
                                         const FrequencyParams& f);

struct PlanesRow {
  int planes = 0;
  double mean_pct = 0, max_pct = 0;
};
struct PlanesAssessment {
  std::vector<PlanesRow> rows;
};
// Chord-plane overestimation of the nadir requirement over the system's
// infeed-minus-EFR range, swept on a 1 MW grid.
PlanesAssessment run_planes_assessment(const SystemModel& m, const std::vector<int>& counts);

struct BitsRow {
  std::string label;
  double granularity_mw = 0;   // smallest representable response step
  double objective = 0;        // fixed-case scheduling cost
  double cost_delta = 0;       // versus the finest set assessed
  double solve_seconds = 0;
};
struct BitsAssessment {
  std::vector<BitsRow> rows;
};
// Re-solves one fixed lookahead case per bit set; coarser sets can only
// restrict the representable response, so the cost delta is one-sided.
BitsAssessment run_bits_assessment(const RunConfig& cfg, const std::vector<std::vector<int>>& bit_sets);

std::string planes_assessment_json(const PlanesAssessment& a);
std::string bits_assessment_json(const BitsAssessment& a);

}  // namespace fsuc
