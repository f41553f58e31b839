#pragma once
#include <string>
#include <vector>

#include "fsuc/freq_constraints.hpp"
#include "fsuc/system_model.hpp"

namespace fsuc {

// Closed-loop dynamic model settings: droop command through a first-order lag
// with output saturation, one channel for governors and one for the battery.
struct DynamicParams {
  double tau_g = 5.0;   // s
  double tau_b = 0.1;   // s
  double K_g = 0;       // Hz/MW; <= 0 sizes the droop to deliver R_G at the q-s-s limit
  double K_b = 0;       // Hz/MW; <= 0 analogous for R_S
  double dt = 1e-3;     // s
  double horizon = 60;  // s, must cover the 60 s recovery check
};

struct SimulationTrace {
  std::vector<double> times;
  std::vector<double> delta_f;        // Hz, signed (negative during the drop)
  std::vector<double> pfr_injection;  // MW
  std::vector<double> efr_injection;  // MW
  double rocof_max = 0;  // Hz/s, largest absolute slope
  double nadir = 0;      // Hz, largest drop
  double t_nadir = 0;    // s
  double qss_60s = 0;    // Hz, drop remaining at t = 60 s
};

SimulationTrace simulate_post_fault(const FrequencyState& s, const FrequencyParams& f, const DynamicParams& d);

struct SecurityVerdict {
  bool rocof_ok = false, nadir_ok = false, qss_ok = false;
  double rocof_margin = 0;  // Hz/s, limit minus observed
  double nadir_margin = 0;  // Hz
  double qss_margin = 0;    // Hz
  bool all_ok() const { return rocof_ok && nadir_ok && qss_ok; }
};

SecurityVerdict security_verdict(const SimulationTrace& trace, const FrequencyParams& f);

void write_trace_csv(const SimulationTrace& trace, const std::string& path);
std::string verdict_json(const SecurityVerdict& v);

}  // namespace fsuc
