#include "fsuc/scenario_tree.hpp"

#include <algorithm>
#include <cmath>

#include "fsuc/csv.hpp"

namespace fsuc {

std::vector<int> ScenarioTree::children(int id) const {
  std::vector<int> out;
  for (const auto& n : nodes)
    if (n.parent && *n.parent == id) out.push_back(n.id);
  return out;
}

std::vector<int> ScenarioTree::ancestors(int id, int depth) const {
  std::vector<int> out{id};
  while (depth-- > 0) {
    const auto& n = node(out.back());
    if (!n.parent) break;
    out.push_back(*n.parent);
  }
  return out;
}

std::vector<int> ScenarioTree::stage_nodes(int stage) const {
  std::vector<int> out;
  for (const auto& n : nodes)
    if (n.stage == stage) out.push_back(n.id);
  return out;
}

ForecastModel load_forecast_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  int ch = t.column("hour"), cd = t.column("demand_mw"), cw = t.column("wind_mw");
  ForecastModel fm;
  fm.demand_profile.resize(t.rows.size());
  fm.wind_point_forecast.resize(t.rows.size());
  for (const auto& r : t.rows) {
    int h = static_cast<int>(std::lround(r[static_cast<size_t>(ch)]));
    if (h < 0 || h >= static_cast<int>(t.rows.size()))
      fail(ErrorKind::config, "forecast csv hour out of range: " + std::to_string(h));
    fm.demand_profile[static_cast<size_t>(h)] = r[static_cast<size_t>(cd)];
    fm.wind_point_forecast[static_cast<size_t>(h)] = r[static_cast<size_t>(cw)];
  }
  return fm;
}

double forecast_sigma(const ForecastModel& fm, int lead_hours) {
  if (lead_hours <= 0) return 0.0;
  return fm.error_sigma0 * (1.0 + fm.error_growth * (std::sqrt(static_cast<double>(lead_hours)) - 1.0));
}

double inverse_normal(double p) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorKind::numeric, "inverse_normal needs p in (0,1)");
  // rational approximation, then one Halley refinement against erfc
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                             1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                             6.680131188771972e+01,  -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                             -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                             3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= phigh) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  // Halley: r = (Phi(x)-p)/phi(x); x -= r / (1 + x r / 2)
  const double inv_sqrt2pi = 0.3989422804014327;
  double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  double u = e / (inv_sqrt2pi * std::exp(-x * x / 2));
  x -= u / (1 + x * u / 2);
  return x;
}

std::vector<double> quantile_masses(const std::vector<double>& quantiles) {
  const size_t k = quantiles.size();
  if (k == 0) fail(ErrorKind::config, "need at least one quantile");
  for (size_t i = 0; i < k; ++i) {
    if (!(quantiles[i] > 0 && quantiles[i] < 1)) fail(ErrorKind::config, "quantiles must lie in (0,1)");
    if (i && !(quantiles[i] > quantiles[i - 1])) fail(ErrorKind::config, "quantiles must be strictly increasing");
  }
  std::vector<double> mass(k);
  for (size_t i = 0; i < k; ++i) {
    double lo = i == 0 ? 0.0 : 0.5 * (quantiles[i - 1] + quantiles[i]);
    double hi = i + 1 == k ? 1.0 : 0.5 * (quantiles[i] + quantiles[i + 1]);
    mass[i] = hi - lo;
  }
  return mass;
}

ScenarioTree build_tree(const ForecastModel& fm, const std::vector<double>& quantiles, int horizon, int start_hour,
                        double current_demand, double current_wind, double wind_capacity) {
  if (horizon < 1) fail(ErrorKind::config, "tree horizon must be >= 1");
  std::vector<double> mass = quantile_masses(quantiles);
  ScenarioTree tree;
  tree.quantiles = quantiles;
  tree.horizon = horizon;

  ScenarioNode root;
  root.id = 0;
  root.stage = 0;
  root.probability = 1.0;
  root.demand = std::max(0.0, current_demand);
  root.wind_available = std::clamp(current_wind, 0.0, wind_capacity);
  tree.nodes.push_back(root);

  auto profile_at = [&](const std::vector<double>& p, int h) {
    if (p.empty()) fail(ErrorKind::config, "empty forecast profile");
    return p[static_cast<size_t>(std::min<int>(h, static_cast<int>(p.size()) - 1))];
  };

  int next_id = 1;
  for (size_t q = 0; q < quantiles.size(); ++q) {
    double z = inverse_normal(quantiles[q]);
    int parent = 0;
    for (int s = 1; s <= horizon; ++s) {
      ScenarioNode n;
      n.id = next_id++;
      n.parent = parent;
      n.stage = s;
      n.probability = mass[q];
      int h = start_hour + s;
      double sigma = forecast_sigma(fm, s);
      // net-demand quantile z maps to a wind shortfall of z*sigma
      n.demand = std::max(0.0, profile_at(fm.demand_profile, h));
      n.wind_available = std::clamp(profile_at(fm.wind_point_forecast, h) - z * sigma, 0.0, wind_capacity);
      tree.nodes.push_back(n);
      parent = n.id;
    }
  }
  validate_tree(tree);
  return tree;
}

double node_probability(const ScenarioTree& tree, int id) { return tree.node(id).probability; }

void validate_tree(const ScenarioTree& tree) {
  if (tree.nodes.empty() || tree.nodes[0].stage != 0 || tree.nodes[0].parent)
    fail(ErrorKind::validation, "tree must have a single stage-0 root");
  for (int s = 0; s <= tree.horizon; ++s) {
    double sum = 0;
    for (const auto& n : tree.nodes)
      if (n.stage == s) sum += n.probability;
    if (std::abs(sum - 1.0) > 1e-9)
      fail(ErrorKind::validation, "stage " + std::to_string(s) + " probabilities sum to " + std::to_string(sum));
  }
  for (const auto& n : tree.nodes) {
    if (n.id == 0) continue;
    if (!n.parent) fail(ErrorKind::validation, "non-root node without parent");
    const auto& p = tree.node(*n.parent);
    if (p.stage != n.stage - 1) fail(ErrorKind::validation, "parent not at previous stage");
    if (n.stage >= 2 && *n.parent == 0) fail(ErrorKind::validation, "branching outside the root");
    if (n.demand < 0 || n.wind_available < 0) fail(ErrorKind::validation, "negative demand or wind");
    if (!(n.probability > 0 && n.probability <= 1)) fail(ErrorKind::validation, "probability outside (0,1]");
  }
}

}  // namespace fsuc
