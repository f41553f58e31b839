#include "fsuc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fsuc {

SimulationTrace simulate_post_fault(const FrequencyState& s, const FrequencyParams& f, const DynamicParams& d) {
  if (s.H <= 0) fail(ErrorKind::validation, "inertia must be positive");
  if (d.tau_g <= 0 || d.tau_b <= 0 || d.dt <= 0) fail(ErrorKind::validation, "time constants and step must be positive");
  if (d.horizon < 60.0) fail(ErrorKind::validation, "horizon must cover the 60 s recovery check");

  // droop slope in MW/Hz; default delivers the full volume at the q-s-s limit
  double slope_g = d.K_g > 0 ? 1.0 / d.K_g : s.R_G / f.df_ss_max;
  double slope_b = d.K_b > 0 ? 1.0 / d.K_b : s.R_S / f.df_ss_max;
  double dd = f.D * s.P_D;

  int steps = static_cast<int>(std::lround(d.horizon / d.dt));
  SimulationTrace tr;
  tr.times.reserve(static_cast<size_t>(steps) + 1);
  tr.delta_f.reserve(static_cast<size_t>(steps) + 1);
  tr.pfr_injection.reserve(static_cast<size_t>(steps) + 1);
  tr.efr_injection.reserve(static_cast<size_t>(steps) + 1);

  // states: frequency deviation, governor lag output, battery lag output;
  // saturation acts on the lag outputs, so the lag states may wind up
  double df = 0, pg = 0, pb = 0;
  auto sat = [](double v, double hi) { return std::min(std::max(v, 0.0), hi); };
  struct Deriv {
    double ddf, dpg, dpb;
  };
  auto deriv = [&](double dfv, double pgv, double pbv) -> Deriv {
    double inj_g = sat(pgv, s.R_G);
    double inj_b = sat(pbv, s.R_S);
    double ddf = f.f0 / (2.0 * s.H) * (-dd * dfv + inj_g + inj_b - s.P_L);
    double dpg = (-dfv * slope_g - pgv) / d.tau_g;
    double dpb = (-dfv * slope_b - pbv) / d.tau_b;
    return {ddf, dpg, dpb};
  };

  double t = 0;
  for (int i = 0;; ++i) {
    tr.times.push_back(t);
    tr.delta_f.push_back(df);
    tr.pfr_injection.push_back(sat(pg, s.R_G));
    tr.efr_injection.push_back(sat(pb, s.R_S));
    if (-df > tr.nadir) {
      tr.nadir = -df;
      tr.t_nadir = t;
    }
    Deriv k1 = deriv(df, pg, pb);
    tr.rocof_max = std::max(tr.rocof_max, std::abs(k1.ddf));
    if (i >= steps) break;
    Deriv k2 = deriv(df + d.dt / 2 * k1.ddf, pg + d.dt / 2 * k1.dpg, pb + d.dt / 2 * k1.dpb);
    Deriv k3 = deriv(df + d.dt / 2 * k2.ddf, pg + d.dt / 2 * k2.dpg, pb + d.dt / 2 * k2.dpb);
    Deriv k4 = deriv(df + d.dt * k3.ddf, pg + d.dt * k3.dpg, pb + d.dt * k3.dpb);
    df += d.dt / 6 * (k1.ddf + 2 * k2.ddf + 2 * k3.ddf + k4.ddf);
    pg += d.dt / 6 * (k1.dpg + 2 * k2.dpg + 2 * k3.dpg + k4.dpg);
    pb += d.dt / 6 * (k1.dpb + 2 * k2.dpb + 2 * k3.dpb + k4.dpb);
    t += d.dt;
    if (!std::isfinite(df) || !std::isfinite(pg) || !std::isfinite(pb))
      fail(ErrorKind::numeric, "non-finite state at step " + std::to_string(i + 1));
  }

  // drop remaining at the 60 s recovery check
  size_t i60 = static_cast<size_t>(std::lround(60.0 / d.dt));
  i60 = std::min(i60, tr.delta_f.size() - 1);
  tr.qss_60s = std::max(0.0, -tr.delta_f[i60]);
  return tr;
}

SecurityVerdict security_verdict(const SimulationTrace& trace, const FrequencyParams& f) {
  SecurityVerdict v;
  v.rocof_margin = f.rocof_max - trace.rocof_max;
  v.nadir_margin = f.df_max - trace.nadir;
  v.qss_margin = f.df_ss_max - trace.qss_60s;
  v.rocof_ok = v.rocof_margin >= 0;
  v.nadir_ok = v.nadir_margin >= 0;
  v.qss_ok = v.qss_margin >= 0;
  return v;
}

void write_trace_csv(const SimulationTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  out << "t_s,delta_f_hz,pfr_mw,efr_mw\n";
  out.precision(10);
  for (size_t i = 0; i < trace.times.size(); ++i)
    out << trace.times[i] << "," << trace.delta_f[i] << "," << trace.pfr_injection[i] << ","
        << trace.efr_injection[i] << "\n";
}

std::string verdict_json(const SecurityVerdict& v) {
  std::ostringstream os;
  os.precision(10);
  auto b = [](bool x) { return x ? "true" : "false"; };
  os << "{\"rocof_ok\":" << b(v.rocof_ok) << ",\"nadir_ok\":" << b(v.nadir_ok) << ",\"qss_ok\":" << b(v.qss_ok)
     << ",\"rocof_margin_hzps\":" << v.rocof_margin << ",\"nadir_margin_hz\":" << v.nadir_margin
     << ",\"qss_margin_hz\":" << v.qss_margin << "}";
  return os.str();
}

}  // namespace fsuc
