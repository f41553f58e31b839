#include "fsuc/system_model.hpp"

#include <fstream>

#include <json.hpp>

namespace fsuc {

using nlohmann::json;

namespace {

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) fail(ErrorKind::validation, "invalid " + field + ": " + why);
}

GeneratorClass parse_generator(const json& j) {
  GeneratorClass g;
  g.name = j.at("name").get<std::string>();
  g.unit_count = j.at("unit_count").get<int>();
  g.p_max = j.at("p_max").get<double>();
  g.p_min = j.at("p_min").get<double>();
  g.cost_noload = j.value("cost_noload", 0.0);
  g.cost_marginal = j.value("cost_marginal", 0.0);
  g.cost_startup = j.value("cost_startup", 0.0);
  g.startup_time = j.value("startup_time", 0);
  g.min_up = j.value("min_up", 0);
  g.min_down = j.value("min_down", 0);
  g.inertia_const = j.value("inertia_const", 0.0);
  g.pfr_max_per_unit = j.value("pfr_max_per_unit", 0.0);
  g.emissions = j.value("emissions", 0.0);
  g.ramp_rate = j.value("ramp_rate", 0.0);
  g.must_run = j.value("must_run", false);
  g.deloadable = j.value("deloadable", false);
  g.deload_max = j.value("deload_max", 0.0);
  return g;
}

StorageUnit parse_storage(const json& j) {
  StorageUnit s;
  s.name = j.at("name").get<std::string>();
  s.capacity = j.at("capacity").get<double>();
  s.rating = j.at("rating").get<double>();
  s.round_trip_efficiency = j.value("round_trip_efficiency", 1.0);
  s.provides_efr = j.value("provides_efr", false);
  s.soc_initial = j.value("soc_initial", s.capacity * 0.5);
  return s;
}

FrequencyParams parse_freq(const json& j) {
  FrequencyParams f;
  f.f0 = j.value("f0", f.f0);
  f.df_max = j.value("df_max", f.df_max);
  f.df_ss_max = j.value("df_ss_max", f.df_ss_max);
  f.rocof_max = j.value("rocof_max", f.rocof_max);
  f.T_s = j.value("T_s", f.T_s);
  f.T_g = j.value("T_g", f.T_g);
  f.D = j.value("D", f.D);
  f.H_W = j.value("H_W", f.H_W);
  f.H_L = j.value("H_L", f.H_L);
  f.P_L_max = j.value("P_L_max", f.P_L_max);
  f.R_S_max = j.value("R_S_max", f.R_S_max);
  return f;
}

}  // namespace

void validate_system(const SystemModel& m) {
  for (const auto& g : m.generators) {
    const std::string p = "generators[" + g.name + "].";
    require(g.unit_count >= 0, p + "unit_count", "must be >= 0");
    require(g.p_min >= 0, p + "p_min", "must be >= 0");
    require(g.p_min <= g.p_max, p + "p_min", "exceeds p_max");
    require(g.inertia_const >= 0, p + "inertia_const", "must be >= 0");
    require(g.pfr_max_per_unit >= 0, p + "pfr_max_per_unit", "must be >= 0");
    require(g.deload_max <= g.p_max - g.p_min, p + "deload_max", "exceeds p_max - p_min");
    require(g.deload_max >= 0, p + "deload_max", "must be >= 0");
    require(g.startup_time >= 0, p + "startup_time", "must be >= 0");
    require(g.min_up >= 0 && g.min_down >= 0, p + "min_up/min_down", "must be >= 0");
    require(!g.deloadable || g.ramp_rate > 0, p + "ramp_rate", "required positive for deloadable classes");
  }
  for (const auto& s : m.storage) {
    const std::string p = "storage[" + s.name + "].";
    require(s.rating > 0, p + "rating", "must be > 0");
    require(s.capacity >= 0, p + "capacity", "must be >= 0");
    require(s.round_trip_efficiency > 0 && s.round_trip_efficiency <= 1.0, p + "round_trip_efficiency",
            "must be in (0,1]");
    require(s.soc_initial >= 0 && s.soc_initial <= s.capacity, p + "soc_initial", "must be in [0, capacity]");
  }
  const auto& f = m.freq;
  require(f.T_s > 0 && f.T_s < f.T_g, "frequency.T_s", "must satisfy 0 < T_s < T_g");
  require(f.df_max > f.df_ss_max && f.df_ss_max > 0, "frequency.df_max", "must satisfy df_max > df_ss_max > 0");
  require(f.rocof_max > 0, "frequency.rocof_max", "must be > 0");
  require(f.D >= 0, "frequency.D", "must be >= 0");
  require(f.f0 > 0, "frequency.f0", "must be > 0");
  require(!m.generators.empty() || m.wind_capacity > 0, "generators", "need at least one class or wind capacity");
  for (const auto& g : m.generators)
    require(m.voll > g.cost_marginal, "economics.voll", "must exceed every marginal cost (" + g.name + ")");
  require(m.efr_backing_h >= 0, "economics.efr_backing_h", "must be >= 0");
}

SystemModel parse_system(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::config, "schema error in " + origin + ": " + e.what());
  }
  SystemModel m;
  try {
    for (const auto& gj : j.value("generators", json::array())) m.generators.push_back(parse_generator(gj));
    for (const auto& sj : j.value("storage", json::array())) m.storage.push_back(parse_storage(sj));
    if (j.contains("wind")) m.wind_capacity = j["wind"].value("capacity", 0.0);
    if (j.contains("frequency")) m.freq = parse_freq(j["frequency"]);
    if (j.contains("economics")) {
      m.voll = j["economics"].value("voll", m.voll);
      m.wind_marginal_cost = j["economics"].value("wind_marginal_cost", m.wind_marginal_cost);
      m.efr_backing_h = j["economics"].value("efr_backing_h", m.efr_backing_h);
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::config, "schema error in " + origin + ": " + e.what());
  }
  validate_system(m);
  return m;
}

SystemModel load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::config, "system config not found: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_system(text, path);
}

std::string serialize_system(const SystemModel& m) {
  json j;
  for (const auto& g : m.generators) {
    j["generators"].push_back({{"name", g.name},
                               {"unit_count", g.unit_count},
                               {"p_max", g.p_max},
                               {"p_min", g.p_min},
                               {"cost_noload", g.cost_noload},
                               {"cost_marginal", g.cost_marginal},
                               {"cost_startup", g.cost_startup},
                               {"startup_time", g.startup_time},
                               {"min_up", g.min_up},
                               {"min_down", g.min_down},
                               {"inertia_const", g.inertia_const},
                               {"pfr_max_per_unit", g.pfr_max_per_unit},
                               {"emissions", g.emissions},
                               {"ramp_rate", g.ramp_rate},
                               {"must_run", g.must_run},
                               {"deloadable", g.deloadable},
                               {"deload_max", g.deload_max}});
  }
  j["storage"] = json::array();
  for (const auto& s : m.storage) {
    j["storage"].push_back({{"name", s.name},
                            {"capacity", s.capacity},
                            {"rating", s.rating},
                            {"round_trip_efficiency", s.round_trip_efficiency},
                            {"provides_efr", s.provides_efr},
                            {"soc_initial", s.soc_initial}});
  }
  j["wind"] = {{"capacity", m.wind_capacity}};
  j["frequency"] = {{"f0", m.freq.f0},
                    {"df_max", m.freq.df_max},
                    {"df_ss_max", m.freq.df_ss_max},
                    {"rocof_max", m.freq.rocof_max},
                    {"T_s", m.freq.T_s},
                    {"T_g", m.freq.T_g},
                    {"D", m.freq.D},
                    {"H_W", m.freq.H_W},
                    {"H_L", m.freq.H_L},
                    {"P_L_max", m.freq.P_L_max},
                    {"R_S_max", m.freq.R_S_max}};
  j["economics"] = {{"voll", m.voll},
                    {"wind_marginal_cost", m.wind_marginal_cost},
                    {"efr_backing_h", m.efr_backing_h}};
  return j.dump(2);
}

int total_must_run_count(const SystemModel& m) {
  int n = 0;
  for (const auto& g : m.generators)
    if (g.must_run) n += g.unit_count;
  return n;
}

}  // namespace fsuc
