#include "fsuc/nadir_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fsuc/rng.hpp"

namespace fsuc {

namespace {

// int_0^tau e^{-z u/tau} du / tau and int_0^tau u e^{-z u/tau} du / tau^2,
// series fallbacks keep the zero-damping limit exact
double phi0(double z) { return z < 1e-12 ? 1.0 : -std::expm1(-z) / z; }
double phi1(double z) {
  if (z < 1e-4) return 0.5 - z / 6.0 + z * z / 24.0;
  return (1.0 - std::exp(-z) * (1.0 + z)) / (z * z);
}

}  // namespace

std::pair<double, double> pd_feasible_range(double P_L, double R_S, const FrequencyParams& f) {
  if (P_L <= R_S) return {0.0, 0.0};
  return {0.0, (P_L - R_S) / (f.D * f.df_max)};
}

double deviation_at(const DampingNadirProblem& p, double R_G, double t) {
  if (t <= 0) return 0.0;
  const FrequencyParams& f = p.f;
  double kappa = f.D * p.P_D * f.f0 / (2.0 * p.H);
  double scale = f.f0 / (2.0 * p.H);
  double c2 = R_G / f.T_g;
  if (t <= f.T_s) {
    double c1 = p.R_S / f.T_s + c2;
    return scale * ((p.P_L - c1 * t) * t * phi0(kappa * t) + c1 * t * t * phi1(kappa * t));
  }
  double c1 = p.R_S / f.T_s + c2;
  double inner = (p.P_L - c1 * f.T_s) * f.T_s * phi0(kappa * f.T_s) + c1 * f.T_s * f.T_s * phi1(kappa * f.T_s);
  double tau = t - f.T_s;
  double tail = (p.P_L - p.R_S - c2 * t) * tau * phi0(kappa * tau) + c2 * tau * tau * phi1(kappa * tau);
  return scale * (std::exp(-kappa * tau) * inner + tail);
}

double damped_nadir_time(const DampingNadirProblem& p, double R_G) {
  if (R_G <= 0) fail(ErrorKind::numeric, "nadir time undefined without PFR");
  return p.f.T_g * (p.P_L - p.R_S - p.f.D * p.P_D * p.f.df_max) / R_G;
}

double equality_residual(const DampingNadirProblem& p, double R_G) {
  double t = damped_nadir_time(p, R_G);
  return p.f.D * p.P_D * (deviation_at(p, R_G, t) - p.f.df_max);
}

double required_pfr_with_damping(const DampingNadirProblem& p) {
  const FrequencyParams& f = p.f;
  if (p.H <= 0) fail(ErrorKind::validation, "inertia must be positive");
  if (p.P_L <= p.R_S) fail(ErrorKind::validation, "infeed already covered by EFR: no nadir past the EFR delivery time");
  auto range = pd_feasible_range(p.P_L, p.R_S, f);
  if (!(p.P_D > range.first && p.P_D < range.second))
    fail(ErrorKind::numeric, "demand outside the solvable range (" + std::to_string(range.first) + ", " +
                                 std::to_string(range.second) + ") MW");

  double lo = 1e-9 * p.P_L;
  double hi = 10.0 * p.P_L;
  double flo = equality_residual(p, lo);
  if (flo <= 0) fail(ErrorKind::numeric, "bracket failure: residual not positive at the lower end");
  int guard = 0;
  while (equality_residual(p, hi) > 0) {
    hi *= 2.0;
    if (++guard > 60) fail(ErrorKind::numeric, "bracket failure: no sign change up to " + std::to_string(hi) + " MW");
  }
  while ((hi - lo) / std::max(1.0, hi) > 1e-8) {
    double mid = 0.5 * (lo + hi);
    if (equality_residual(p, mid) > 0)
      lo = mid;
    else
      hi = mid;
  }
  // secant polish: bisection to 1e-8 relative still leaves the residual well
  // above the 1e-6 MW target because the slope is order one
  double a = lo, b = hi;
  double fa = equality_residual(p, a), fb = equality_residual(p, b);
  double best = std::abs(fa) < std::abs(fb) ? a : b;
  for (int i = 0; i < 30 && std::abs(equality_residual(p, best)) > 1e-6; ++i) {
    if (fb == fa) break;
    double c = b - fb * (b - a) / (fb - fa);
    if (!(c > 0)) break;
    a = b;
    fa = fb;
    b = c;
    fb = equality_residual(p, b);
    if (std::abs(fb) < std::abs(equality_residual(p, best))) best = b;
  }
  return best;
}

OdeNadir nadir_by_ode(const FrequencyState& s, const FrequencyParams& f, bool include_damping) {
  if (s.H <= 0) fail(ErrorKind::validation, "inertia must be positive");
  if (s.R_G < 0 || s.R_S < 0) fail(ErrorKind::validation, "negative response volume");
  double dd = include_damping ? f.D * s.P_D : 0.0;
  double dt = 1e-3;
  int steps = static_cast<int>(60.0 / dt);
  double x = 0.0, t = 0.0;  // x is the deviation magnitude (frequency drop)
  auto xdot = [&](double xv, double tv) {
    double efr = s.R_S * std::min(tv / f.T_s, 1.0);
    double pfr = s.R_G * std::min(tv / f.T_g, 1.0);
    return f.f0 / (2.0 * s.H) * (s.P_L - efr - pfr - dd * xv);
  };
  for (int i = 0; i < steps; ++i) {
    double k1 = xdot(x, t);
    if (k1 <= 0 && t > 0) return {x, t};
    double k2 = xdot(x + dt / 2 * k1, t + dt / 2);
    double k3 = xdot(x + dt / 2 * k2, t + dt / 2);
    double k4 = xdot(x + dt * k3, t + dt);
    x += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    t += dt;
  }
  fail(ErrorKind::numeric, "frequency did not reach a minimum within 60 s");
}

AssessmentReport assess_damping_approx(const SampleRanges& r, int n_samples, uint64_t seed, AssessMode mode,
                                       const FrequencyParams& f) {
  if (n_samples < 1) fail(ErrorKind::config, "need at least one sample");
  AssessmentReport rep;
  rep.mode = mode;
  double sum = 0;
  rep.min_nadir = 1e300;
  long max_trials = 1000L * n_samples + 1000;
  for (long trial = 0; rep.sample_count < n_samples; ++trial) {
    if (trial >= max_trials)
      fail(ErrorKind::assessment, "rejection rate too high: " + std::to_string(rep.sample_count) + " of " +
                                      std::to_string(n_samples) + " accepted after " + std::to_string(trial) +
                                      " draws");
    ++rep.trials;
    RngStream rng(seed, static_cast<uint64_t>(trial));
    SampleRecord rec;
    rec.H = rng.uniform(r.h_lo, r.h_hi);
    rec.R_S = rng.uniform(r.rs_lo, r.rs_hi);
    rec.P_L = rng.uniform(r.pl_lo, r.pl_hi);
    rec.P_D = rng.uniform(r.pd_lo, r.pd_hi);

    double coef = rec.H / f.f0 - rec.R_S * f.T_s / (4.0 * f.df_max);
    if (coef <= 0) continue;
    double x = rec.P_L - rec.R_S;
    double rhs = x * x * f.T_g / (4.0 * f.df_max);
    if (mode == AssessMode::linear_damping) rhs -= x * f.T_g * f.D / 4.0 * rec.P_D;
    rec.R_G = rhs / coef;
    if (!(rec.R_G >= r.rg_lo && rec.R_G <= r.rg_hi)) continue;

    rec.t_star = mode == AssessMode::linear_damping
                     ? f.T_g * (x - f.D * rec.P_D * f.df_max) / rec.R_G
                     : f.T_g * x / rec.R_G;
    if (!(rec.t_star >= f.T_s && rec.t_star < f.T_g)) continue;

    FrequencyState st{rec.H, rec.R_S, rec.R_G, rec.P_L, rec.P_D};
    OdeNadir od;
    try {
      od = nadir_by_ode(st, f, true);
    } catch (const Error&) {
      continue;
    }
    rec.nadir = od.nadir;
    rec.t_nadir = od.t_nadir;
    rep.records.push_back(rec);
    ++rep.sample_count;
    sum += rec.nadir;
    rep.max_nadir = std::max(rep.max_nadir, rec.nadir);
    rep.min_nadir = std::min(rep.min_nadir, rec.nadir);
  }
  rep.mean_nadir = sum / rep.sample_count;
  return rep;
}

void write_assessment_csv(const AssessmentReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  out << "inertia_mws,efr_mw,infeed_mw,demand_mw,pfr_mw,t_star_s,nadir_hz,t_nadir_s\n";
  out.precision(10);
  for (const auto& r : rep.records)
    out << r.H << "," << r.R_S << "," << r.P_L << "," << r.P_D << "," << r.R_G << "," << r.t_star << "," << r.nadir
        << "," << r.t_nadir << "\n";
}

std::string assessment_summary_json(const AssessmentReport& rep) {
  std::ostringstream os;
  os.precision(10);
  os << "{\"mode\":\"" << (rep.mode == AssessMode::linear_damping ? "linear-damping" : "no-damping") << "\","
     << "\"samples\":" << rep.sample_count << ",\"trials\":" << rep.trials << ",\"mean_nadir_hz\":" << rep.mean_nadir
     << ",\"max_nadir_hz\":" << rep.max_nadir << ",\"min_nadir_hz\":" << rep.min_nadir << "}";
  return os.str();
}

}  // namespace fsuc
