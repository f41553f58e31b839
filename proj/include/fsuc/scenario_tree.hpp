#pragma once
#include <optional>
#include <string>
#include <vector>

#include "fsuc/errors.hpp"

namespace fsuc {

struct ScenarioNode {
  int id = 0;
  std::optional<int> parent;
  int stage = 0;          // hours ahead, 0 = current
  double delta_tau = 1.0; // h
  double probability = 1.0;
  double demand = 0;          // MW
  double wind_available = 0;  // MW, pre-curtailment
};

struct ScenarioTree {
  std::vector<ScenarioNode> nodes;  // node id == index
  std::vector<double> quantiles;
  int horizon = 0;  // h (stages beyond the root)

  const ScenarioNode& node(int id) const {
    if (id < 0 || id >= static_cast<int>(nodes.size())) fail(ErrorKind::validation, "unknown node id");
    return nodes[static_cast<size_t>(id)];
  }
  std::vector<int> children(int id) const;
  // chain of n and its ancestors, nearest first, up to `depth` edges
  std::vector<int> ancestors(int id, int depth) const;
  std::vector<int> stage_nodes(int stage) const;
  int num_stages() const { return horizon + 1; }
};

struct ForecastModel {
  std::vector<double> demand_profile;       // MW by absolute hour
  std::vector<double> wind_point_forecast;  // MW by absolute hour
  double error_sigma0 = 0;                  // MW at 1 h lead
  double error_growth = 1.0;                // per sqrt(h)
};

ForecastModel load_forecast_csv(const std::string& path);

// sigma(lead) = sigma0 * (1 + error_growth*(sqrt(lead)-1)); equals sigma0*sqrt(lead) at growth 1.
double forecast_sigma(const ForecastModel& fm, int lead_hours);

// Probability-weighted quantile chains branching at the root only. Stage-t
// net-demand error is attributed to wind: wind_available = clamp(point - z_q*sigma(t), 0, cap).
ScenarioTree build_tree(const ForecastModel& fm, const std::vector<double>& quantiles, int horizon, int start_hour,
                        double current_demand, double current_wind, double wind_capacity);

double node_probability(const ScenarioTree& tree, int id);

// Interval-midpoint masses: boundaries at midpoints of consecutive quantiles, ends at 0 and 1.
std::vector<double> quantile_masses(const std::vector<double>& quantiles);

// Inverse standard normal CDF.
double inverse_normal(double p);

void validate_tree(const ScenarioTree& tree);

}  // namespace fsuc
