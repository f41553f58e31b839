#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fsuc/harness.hpp"

using namespace fsuc;

namespace {

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::config:
    case ErrorKind::io:
      return 2;
    case ErrorKind::solver:
      return 3;
    case ErrorKind::validation:
      return 4;
    default:
      return 1;
  }
}

std::vector<int> parse_bits(const std::string& s) {
  // "8,9,10,11" or "8..11"
  std::vector<int> out;
  auto dots = s.find("..");
  if (dots != std::string::npos) {
    int lo = std::stoi(s.substr(0, dots)), hi = std::stoi(s.substr(dots + 2));
    for (int b = lo; b <= hi; ++b) out.push_back(b);
    return out;
  }
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(std::stoi(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

void apply_overrides(RunConfig& cfg, const std::string& out, double gap, int planes, const std::string& bits,
                     uint64_t seed, bool seed_set, bool gap_set) {
  if (!out.empty()) cfg.out_dir = out;
  if (gap_set) cfg.solver.gap = gap;
  if (planes > 0) {
    cfg.planes = planes;
    for (auto& s : cfg.strategies) s.options.planes = planes;
  }
  if (!bits.empty()) {
    cfg.bits = parse_bits(bits);
    for (auto& s : cfg.strategies) s.options.bits = cfg.bits;
  }
  if (seed_set) {
    cfg.seed = seed;
    cfg.solver.seed = static_cast<int>(seed);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-secured stochastic scheduling toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, bits_arg, system_path;
  double gap = 0.001;
  int planes = 0;
  uint64_t seed = 1;
  int samples = 3500;
  int steps = -1;
  double damping = 0.01;
  double sim_h = 0, sim_rs = 0, sim_rg = 0, sim_pl = 0, sim_pd = 0;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--out", out_dir, "output directory or file");
    c->add_option("--seed", seed, "RNG / solver seed");
    c->add_option("--gap", gap, "MILP relative duality gap");
    c->add_option("--planes", planes, "nadir plane count");
    c->add_option("--bits", bits_arg, "expansion bits, e.g. 8..11 or 8,9,10,11");
  };

  CLI::App* run = app.add_subcommand("run", "rolling-horizon strategy comparison");
  run->add_option("--config", config_path, "run configuration JSON")->required();
  run->add_option("--steps", steps, "override the number of hourly steps");
  add_common(run);

  CLI::App* adamp = app.add_subcommand("assess-damping", "nadir-rule conservativeness sampling");
  adamp->add_option("--samples", samples, "accepted sample count");
  adamp->add_option("--damping", damping, "demand damping factor per Hz");
  adamp->add_option("--system", system_path, "system JSON for frequency parameters");
  add_common(adamp);

  CLI::App* aplanes = app.add_subcommand("assess-planes", "chord-plane overestimation sweep");
  aplanes->add_option("--system", system_path, "system JSON")->required();
  add_common(aplanes);

  CLI::App* abits = app.add_subcommand("assess-bits", "expansion granularity and cost sweep");
  abits->add_option("--config", config_path, "run configuration JSON")->required();
  add_common(abits);

  CLI::App* sim = app.add_subcommand("simulate", "post-fault frequency simulation of one dispatch");
  sim->add_option("--system", system_path, "system JSON for frequency parameters")->required();
  sim->add_option("--inertia", sim_h, "post-fault inertia MW s")->required();
  sim->add_option("--efr", sim_rs, "EFR volume MW")->required();
  sim->add_option("--pfr", sim_rg, "PFR volume MW")->required();
  sim->add_option("--infeed", sim_pl, "lost infeed MW")->required();
  sim->add_option("--demand", sim_pd, "demand MW")->required();
  add_common(sim);

  CLI::App* exp = app.add_subcommand("export-model", "write the first-step scheduling model as MPS");
  exp->add_option("--config", config_path, "run configuration JSON")->required();
  add_common(exp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      RunConfig cfg = load_run_config(config_path);
      apply_overrides(cfg, out_dir, gap, planes, bits_arg, seed, run->count("--seed") > 0, run->count("--gap") > 0);
      if (steps > 0) cfg.steps = steps;
      double est = static_cast<double>(cfg.steps) * cfg.strategies.size() * 3.0;
      std::cout << "estimated runtime ~" << static_cast<long>(est) << " s for " << cfg.steps << " steps x "
                << cfg.strategies.size() << " strategies\n";
      ComparisonReport rep = run_case(cfg);
      SystemModel m = load_system(cfg.system_path);
      emit_plot_data(rep, m, cfg.out_dir);
      std::cout << comparison_json(rep) << "\n";
      for (const auto& r : rep.strategies)
        if (r.failed) std::cerr << "strategy " << r.name << " failed: " << r.error << "\n";
      return 0;
    }
    if (*adamp) {
      FrequencyParams f;
      if (!system_path.empty()) f = load_system(system_path).freq;
      f.D = damping;
      std::string dir = out_dir.empty() ? "." : out_dir;
      std::filesystem::create_directories(dir);
      DampingAssessment a = run_damping_assessment(SampleRanges{}, samples, seed, f);
      write_assessment_csv(a.linear, dir + "/damping_linear.csv");
      write_assessment_csv(a.none, dir + "/damping_none.csv");
      std::ofstream js(dir + "/damping_summary.json");
      js << "{\"linear\":" << assessment_summary_json(a.linear) << ",\"none\":" << assessment_summary_json(a.none)
         << "}\n";
      std::cout << "{\"linear\":" << assessment_summary_json(a.linear)
                << ",\"none\":" << assessment_summary_json(a.none) << "}\n";
      return 0;
    }
    if (*aplanes) {
      SystemModel m = load_system(system_path);
      PlanesAssessment a = run_planes_assessment(m, {2, 4, 8});
      std::string dir = out_dir.empty() ? "." : out_dir;
      std::filesystem::create_directories(dir);
      std::ofstream js(dir + "/planes_assessment.json");
      js << planes_assessment_json(a) << "\n";
      std::cout << planes_assessment_json(a) << "\n";
      return 0;
    }
    if (*abits) {
      RunConfig cfg = load_run_config(config_path);
      apply_overrides(cfg, out_dir, gap, planes, bits_arg, seed, abits->count("--seed") > 0,
                      abits->count("--gap") > 0);
      std::vector<std::vector<int>> sets;
      auto range = [](int lo, int hi) {
        std::vector<int> v;
        for (int b = lo; b <= hi; ++b) v.push_back(b);
        return v;
      };
      sets = {range(0, 11), range(5, 11), range(10, 11)};
      BitsAssessment a = run_bits_assessment(cfg, sets);
      std::filesystem::create_directories(cfg.out_dir);
      std::ofstream js(cfg.out_dir + "/bits_assessment.json");
      js << bits_assessment_json(a) << "\n";
      std::cout << bits_assessment_json(a) << "\n";
      return 0;
    }
    if (*sim) {
      SystemModel m = load_system(system_path);
      FrequencyState st{sim_h, sim_rs, sim_rg, sim_pl, sim_pd};
      SimulationTrace tr = simulate_post_fault(st, m.freq, DynamicParams{});
      SecurityVerdict v = security_verdict(tr, m.freq);
      if (!out_dir.empty()) {
        std::filesystem::create_directories(std::filesystem::path(out_dir));
        write_trace_csv(tr, out_dir + "/trace.csv");
        std::ofstream js(out_dir + "/verdict.json");
        js << verdict_json(v) << "\n";
      }
      std::cout << verdict_json(v) << "\n";
      return v.all_ok() ? 0 : 4;
    }
    if (*exp) {
      RunConfig cfg = load_run_config(config_path);
      apply_overrides(cfg, out_dir, gap, planes, bits_arg, seed, exp->count("--seed") > 0, exp->count("--gap") > 0);
      SystemModel m = load_system(cfg.system_path);
      ForecastModel fm = load_forecast_csv(cfg.forecast_path);
      if (cfg.sigma0 > 0) {
        fm.error_sigma0 = cfg.sigma0;
        fm.error_growth = cfg.sigma_growth;
      }
      const StrategySpec& sp = cfg.strategies.front();
      ScenarioTree tree = build_tree(fm, sp.options.quantiles, sp.options.lookahead, 0, fm.demand_profile.at(0),
                                     fm.wind_point_forecast.at(0), m.wind_capacity);
      FleetState warm = warm_fleet_state(m, fm.demand_profile.at(0), fm.wind_point_forecast.at(0));
      SucModel sm = build_suc_model(m, tree, sp.options, warm);
      std::string path = cfg.out_dir + "/model.mps";
      std::filesystem::create_directories(cfg.out_dir);
      export_model(sm.model, path);
      std::string diag = validate_model_file(path, cfg.solver);
      std::cout << "wrote " << path << " (" << tree.nodes.size() << " nodes): " << diag << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
