#include "fsuc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fsuc {

namespace {

using nlohmann::json;

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty() || p.front() == '/') return p;
  if (base.empty()) return p;
  return (std::filesystem::path(base) / p).string();
}

StrategyOptions::EfrMode efr_mode_from(const std::string& s) {
  if (s == "none") return StrategyOptions::EfrMode::none;
  if (s == "fixed") return StrategyOptions::EfrMode::fixed;
  if (s == "optimized") return StrategyOptions::EfrMode::optimized;
  fail(ErrorKind::config, "unknown EFR mode '" + s + "' (none, fixed, optimized)");
}

double profile_at(const std::vector<double>& p, int h) {
  if (p.empty()) fail(ErrorKind::config, "empty forecast profile");
  return p[static_cast<size_t>(std::clamp<int>(h, 0, static_cast<int>(p.size()) - 1))];
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorKind::config, std::string("run config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  try {
    cfg.system_path = resolve(base_dir, j.at("system").get<std::string>());
    cfg.forecast_path = resolve(base_dir, j.at("forecast").get<std::string>());
    cfg.realized_path = resolve(base_dir, j.at("realized").get<std::string>());
    cfg.steps = j.value("steps", cfg.steps);
    cfg.lookahead = j.value("lookahead", cfg.lookahead);
    cfg.planes = j.value("planes", cfg.planes);
    if (j.contains("bits")) cfg.bits = j.at("bits").get<std::vector<int>>();
    cfg.sigma0 = j.value("sigma0", cfg.sigma0);
    cfg.sigma_growth = j.value("sigma_growth", cfg.sigma_growth);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.out_dir = resolve(base_dir, j.value("output_dir", cfg.out_dir));
    cfg.write_traces = j.value("write_traces", cfg.write_traces);
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      cfg.solver.backend = s.value("backend", cfg.solver.backend);
      cfg.solver.gap = s.value("gap", cfg.solver.gap);
      cfg.solver.time_limit = s.value("time_limit", cfg.solver.time_limit);
      cfg.solver.seed = s.value("seed", cfg.solver.seed);
      cfg.solver.threads = s.value("threads", cfg.solver.threads);
    }
    if (!j.contains("strategies") || !j.at("strategies").is_array() || j.at("strategies").empty())
      fail(ErrorKind::config, "run config needs a non-empty strategies array");
    for (const json& s : j.at("strategies")) {
      StrategySpec sp;
      sp.name = s.at("name").get<std::string>();
      sp.options.efr_mode = efr_mode_from(s.value("efr", std::string("optimized")));
      sp.options.efr_fixed_mw = s.value("efr_mw", sp.options.efr_fixed_mw);
      sp.options.deload_enabled = s.value("deload", false);
      sp.options.frequency_constraints_enabled = s.value("frequency_constraints", true);
      sp.options.fortify = s.value("fortify", true);
      sp.options.deterministic_quantile = s.value("deterministic_quantile", 0.0);
      sp.options.general_infeed_form = s.value("general_infeed_form", false);
      sp.options.planes = cfg.planes;
      sp.options.bits = cfg.bits;
      sp.options.lookahead = cfg.lookahead;
      cfg.strategies.push_back(std::move(sp));
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorKind::config, std::string("run config field error: ") + e.what());
  }
  for (size_t i = 0; i < cfg.strategies.size(); ++i)
    for (size_t k = i + 1; k < cfg.strategies.size(); ++k)
      if (cfg.strategies[i].name == cfg.strategies[k].name)
        fail(ErrorKind::config, "duplicate strategy name '" + cfg.strategies[i].name + "'");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::config, "cannot open run config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), std::filesystem::path(path).parent_path().string());
}

ComparisonReport run_case(const RunConfig& cfg) {
  SystemModel m = load_system(cfg.system_path);
  ForecastModel fm = load_forecast_csv(cfg.forecast_path);
  if (cfg.sigma0 > 0) {
    fm.error_sigma0 = cfg.sigma0;
    fm.error_growth = cfg.sigma_growth;
  }
  RealizedSeries rz = load_realized_csv(cfg.realized_path);
  if (rz.demand.size() < static_cast<size_t>(cfg.steps))
    fail(ErrorKind::config, "realized trace shorter than the requested number of steps");
  std::filesystem::create_directories(cfg.out_dir);
  FleetState warm = warm_fleet_state(m, profile_at(fm.demand_profile, 0), profile_at(fm.wind_point_forecast, 0));

  ComparisonReport rep;
  for (const auto& sp : cfg.strategies) {
    StrategyResult r;
    r.name = sp.name;
    try {
      auto t0 = std::chrono::steady_clock::now();
      r.log = rolling_horizon_run(m, rz, fm, sp.options, cfg.steps, cfg.solver, warm);
      (void)t0;
      r.cost = r.log.total_cost;
      r.emissions = r.log.total_emissions;
      r.curtailment = r.log.total_curtailment;
      r.shed = r.log.total_shed;
      r.mean_inertia = r.log.mean_inertia;
      r.mean_efr = r.log.mean_efr;
      r.mean_pfr = r.log.mean_pfr;
      r.mean_infeed = r.log.mean_infeed;
      // time-domain check of every committed hour against the same limits
      int traces_written = 0;
      if (sp.options.frequency_constraints_enabled) {
        for (const auto& rec : r.log.steps) {
          double pd = profile_at(fm.demand_profile, rec.step);
          FrequencyState st{rec.inertia, rec.efr, rec.pfr, rec.infeed, pd};
          SimulationTrace tr = simulate_post_fault(st, m.freq, DynamicParams{});
          SecurityVerdict v = security_verdict(tr, m.freq);
          r.sim_checked++;
          if (!v.all_ok()) r.sim_failures++;
          bool binding = rec.nadir_margin <= 50.0;  // MW^2 s, tight against a ~1e6 scale
          if (binding) {
            r.binding_steps++;
            if (cfg.write_traces && traces_written < 3) {
              write_trace_csv(tr, cfg.out_dir + "/trace_" + sp.name + "_h" + std::to_string(rec.step) + ".csv");
              traces_written++;
            }
          }
        }
      }
      write_operation_csv(r.log, m, cfg.out_dir + "/" + sp.name + "_operation.csv");
      std::ofstream js(cfg.out_dir + "/" + sp.name + "_summary.json");
      js << operation_summary_json(r.log) << "\n";
    } catch (const Error& e) {
      r.failed = true;
      r.error = e.what();
    }
    rep.strategies.push_back(std::move(r));
  }

  rep.baseline = rep.strategies.front().name;
  for (const auto& r : rep.strategies)
    if (r.name == "just-pfr") rep.baseline = r.name;
  double base_cost = 0;
  bool base_ok = false;
  for (const auto& r : rep.strategies)
    if (r.name == rep.baseline && !r.failed) {
      base_cost = r.cost;
      base_ok = true;
    }
  for (auto& r : rep.strategies) r.savings_vs_baseline = (base_ok && !r.failed) ? base_cost - r.cost : 0.0;

  write_comparison_csv(rep, cfg.out_dir + "/comparison.csv");
  std::ofstream js(cfg.out_dir + "/comparison.json");
  js << comparison_json(rep) << "\n";
  return rep;
}

void write_comparison_csv(const ComparisonReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  out << "strategy,failed,cost,savings_vs_" << rep.baseline
      << ",emissions_t,curtailment_mwh,shed_mwh,mean_inertia_mws,mean_efr_mw,mean_pfr_mw,mean_infeed_mw,"
         "binding_steps,sim_checked,sim_failures,error\n";
  out.precision(10);
  for (const auto& r : rep.strategies) {
    out << r.name << "," << (r.failed ? 1 : 0) << "," << r.cost << "," << r.savings_vs_baseline << ","
        << r.emissions << "," << r.curtailment << "," << r.shed << "," << r.mean_inertia << "," << r.mean_efr
        << "," << r.mean_pfr << "," << r.mean_infeed << "," << r.binding_steps << "," << r.sim_checked << ","
        << r.sim_failures << "," << r.error << "\n";
  }
}

std::string comparison_json(const ComparisonReport& rep) {
  std::ostringstream os;
  os.precision(10);
  os << "{\"baseline\":\"" << rep.baseline << "\",\"strategies\":[";
  for (size_t i = 0; i < rep.strategies.size(); ++i) {
    const auto& r = rep.strategies[i];
    if (i) os << ",";
    os << "{\"name\":\"" << r.name << "\",\"failed\":" << (r.failed ? "true" : "false") << ",\"cost\":" << r.cost
       << ",\"savings\":" << r.savings_vs_baseline << ",\"emissions_t\":" << r.emissions
       << ",\"curtailment_mwh\":" << r.curtailment << ",\"shed_mwh\":" << r.shed
       << ",\"mean_inertia_mws\":" << r.mean_inertia << ",\"mean_efr_mw\":" << r.mean_efr
       << ",\"mean_pfr_mw\":" << r.mean_pfr << ",\"mean_infeed_mw\":" << r.mean_infeed
       << ",\"binding_steps\":" << r.binding_steps << ",\"sim_checked\":" << r.sim_checked
       << ",\"sim_failures\":" << r.sim_failures << "}";
  }
  os << "]}";
  return os.str();
}

void emit_plot_data(const ComparisonReport& rep, const SystemModel& m, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const auto& r : rep.strategies) {
    if (r.failed) continue;
    std::ofstream out(out_dir + "/profile_" + r.name + ".csv");
    out << "hour,net_demand_mw,soc_mwh,efr_frac\n";
    out.precision(10);
    for (const auto& rec : r.log.steps) {
      double soc = 0;
      for (double v : rec.soc) soc += v;
      double frac = m.freq.R_S_max > 0 ? rec.efr / m.freq.R_S_max : 0.0;
      out << rec.step << "," << rec.demand_realized - rec.wind_realized << "," << soc << "," << frac << "\n";
    }
  }
  std::ofstream bars(out_dir + "/savings.csv");
  bars << "strategy,cost,savings\n";
  bars.precision(10);
  for (const auto& r : rep.strategies)
    if (!r.failed) bars << r.name << "," << r.cost << "," << r.savings_vs_baseline << "\n";
}

DampingAssessment run_damping_assessment(const SampleRanges& r, int n_samples, uint64_t seed,
                                         const FrequencyParams& f) {
  DampingAssessment a;
  a.linear = assess_damping_approx(r, n_samples, seed, AssessMode::linear_damping, f);
  a.none = assess_damping_approx(r, n_samples, seed, AssessMode::no_damping, f);
  return a;
}

PlanesAssessment run_planes_assessment(const SystemModel& m, const std::vector<int>& counts) {
  const FrequencyParams& f = m.freq;
  double p_l_floor = f.P_L_max;
  for (const auto& g : m.generators)
    if (g.must_run && g.deloadable) p_l_floor = std::min(p_l_floor, g.p_max - g.deload_max);
  double x_min = std::max(0.0, p_l_floor - f.R_S_max);
  double x_max = f.P_L_max;
  PlanesAssessment out;
  for (int n : counts) {
    PlaneSet ps = build_planes(x_min, x_max, n, f);
    OverestimationStats st = plane_overestimation_stats(ps, 1.0);
    out.rows.push_back({n, st.mean_pct, st.max_pct});
  }
  return out;
}

BitsAssessment run_bits_assessment(const RunConfig& cfg, const std::vector<std::vector<int>>& bit_sets) {
  SystemModel m = load_system(cfg.system_path);
  ForecastModel fm = load_forecast_csv(cfg.forecast_path);
  if (cfg.sigma0 > 0) {
    fm.error_sigma0 = cfg.sigma0;
    fm.error_growth = cfg.sigma_growth;
  }
  StrategyOptions opts;
  opts.planes = cfg.planes;
  opts.lookahead = cfg.lookahead;
  ScenarioTree tree = build_tree(fm, opts.quantiles, opts.lookahead, 0, profile_at(fm.demand_profile, 0),
                                 profile_at(fm.wind_point_forecast, 0), m.wind_capacity);
  FleetState warm = warm_fleet_state(m, profile_at(fm.demand_profile, 0), profile_at(fm.wind_point_forecast, 0));
  SolverConfig solver = cfg.solver;
  solver.gap = std::min(solver.gap, 2.5e-4);  // deltas between bit sets must dominate gap noise
  BitsAssessment out;
  for (const auto& bits : bit_sets) {
    if (bits.empty()) fail(ErrorKind::config, "empty bit set in assessment");
    StrategyOptions o = opts;
    o.bits = bits;
    SucModel sm = build_suc_model(m, tree, o, warm);
    auto t0 = std::chrono::steady_clock::now();
    Solution sol = solve(sm.model, solver);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (sol.status != Solution::Status::optimal && sol.status != Solution::Status::gap_feasible)
      fail(ErrorKind::solver, "bit-set assessment solve failed: " + status_name(sol.status));
    int lo = *std::min_element(bits.begin(), bits.end());
    int hi = *std::max_element(bits.begin(), bits.end());
    BitsRow row;
    row.label = std::to_string(lo) + ".." + std::to_string(hi);
    row.granularity_mw = std::ldexp(1.0, lo);
    row.objective = sol.objective;
    row.solve_seconds = secs;
    out.rows.push_back(row);
  }
  for (auto& row : out.rows) row.cost_delta = row.objective - out.rows.front().objective;
  return out;
}

std::string planes_assessment_json(const PlanesAssessment& a) {
  std::ostringstream os;
  os.precision(10);
  os << "{\"rows\":[";
  for (size_t i = 0; i < a.rows.size(); ++i) {
    if (i) os << ",";
    os << "{\"planes\":" << a.rows[i].planes << ",\"mean_pct\":" << a.rows[i].mean_pct
       << ",\"max_pct\":" << a.rows[i].max_pct << "}";
  }
  os << "]}";
  return os.str();
}

std::string bits_assessment_json(const BitsAssessment& a) {
  std::ostringstream os;
  os.precision(10);
  os << "{\"rows\":[";
  for (size_t i = 0; i < a.rows.size(); ++i) {
    if (i) os << ",";
    os << "{\"bits\":\"" << a.rows[i].label << "\",\"granularity_mw\":" << a.rows[i].granularity_mw
       << ",\"objective\":" << a.rows[i].objective << ",\"cost_delta\":" << a.rows[i].cost_delta
       << ",\"solve_seconds\":" << a.rows[i].solve_seconds << "}";
  }
  os << "]}";
  return os.str();
}

}  // namespace fsuc
