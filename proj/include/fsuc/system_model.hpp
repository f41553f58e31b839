#pragma once
#include <string>
#include <vector>

#include "fsuc/errors.hpp"

namespace fsuc {

struct GeneratorClass {
  std::string name;
  int unit_count = 0;
  double p_max = 0;              // MW per unit
  double p_min = 0;              // MW per unit, minimum stable generation
  double cost_noload = 0;        // currency/h
  double cost_marginal = 0;      // currency/MWh
  double cost_startup = 0;       // currency
  int startup_time = 0;          // h, lead between initiation and generation
  int min_up = 0;                // h
  int min_down = 0;              // h
  double inertia_const = 0;      // s
  double pfr_max_per_unit = 0;   // MW
  double emissions = 0;          // tCO2/MWh
  double ramp_rate = 0;          // MW/h per unit (0 = unconstrained, non-deloadable classes)
  bool must_run = false;
  bool deloadable = false;
  double deload_max = 0;         // MW per unit
};

struct StorageUnit {
  std::string name;
  double capacity = 0;                // MWh
  double rating = 0;                  // MW
  double round_trip_efficiency = 1.0; // fraction in (0,1]
  bool provides_efr = false;
  double soc_initial = 0;             // MWh
};

struct FrequencyParams {
  double f0 = 50.0;        // Hz
  double df_max = 0.8;     // Hz, nadir limit
  double df_ss_max = 0.5;  // Hz, quasi-steady-state limit
  double rocof_max = 0.5;  // Hz/s
  double T_s = 0.5;        // s, EFR delivery time
  double T_g = 10.0;       // s, PFR delivery time
  double D = 0.005;        // fraction of demand per Hz
  double H_W = 0.0;        // s, wind synthetic-inertia constant
  double H_L = 5.0;        // s, inertia constant of the lost unit
  double P_L_max = 1800;   // MW
  double R_S_max = 400;    // MW
};

struct SystemModel {
  std::vector<GeneratorClass> generators;
  std::vector<StorageUnit> storage;
  double wind_capacity = 0;  // MW
  FrequencyParams freq;
  double voll = 30000;           // currency/MWh, load-shedding penalty
  double wind_marginal_cost = 0; // currency/MWh
  double efr_backing_h = 0.5;    // h of EFR sustained from storage energy
};

SystemModel load_system(const std::string& path);
SystemModel parse_system(const std::string& json_text, const std::string& origin);
std::string serialize_system(const SystemModel& m);
void validate_system(const SystemModel& m);  // throws validation error naming the field
int total_must_run_count(const SystemModel& m);

}  // namespace fsuc
