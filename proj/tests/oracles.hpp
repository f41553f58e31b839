#pragma once
// Independent reference implementations used only by tests: a dense two-phase
// simplex, an MPS re-parser, and small numeric helpers. Deliberately naive and
// separate from the library code so the two cannot share a bug.
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool close(double a, double b, double atol = 1e-9, double rtol = 1e-9) {
  return std::fabs(a - b) <= atol + rtol * std::max(std::fabs(a), std::fabs(b));
}

// ---------------------------------------------------------------------------
// Dense two-phase simplex with Bland's rule. Rows are a*x (sense) b with
// sense -1 (<=), 0 (=), +1 (>=); variable bounds are handled by substituting
// x = lo + x' and adding explicit upper-bound rows, so it is only suitable for
// small instances.
// ---------------------------------------------------------------------------
struct LpProblem {
  int n = 0;
  std::vector<double> c;
  std::vector<std::vector<double>> a;
  std::vector<int> sense;
  std::vector<double> b;
  std::vector<double> lo, hi;
};

struct LpResult {
  int status = -1;  // 0 optimal, 1 infeasible, 2 unbounded
  std::vector<double> x;
  double obj = 0;
};

namespace detail {

struct Tableau {
  int m = 0, n = 0;
  std::vector<std::vector<double>> t;  // m+1 rows by n+1 cols, last row = objective
  std::vector<int> basis;
};

inline void pivot(Tableau& tab, int pr, int pc) {
  double pv = tab.t[pr][pc];
  for (double& v : tab.t[pr]) v /= pv;
  for (int r = 0; r <= tab.m; ++r) {
    if (r == pr) continue;
    double f = tab.t[r][pc];
    if (f == 0.0) continue;
    for (int ccol = 0; ccol <= tab.n; ++ccol) tab.t[r][ccol] -= f * tab.t[pr][ccol];
  }
  tab.basis[pr] = pc;
}

// Bland: entering = lowest-index negative reduced cost; leaving = lowest-index
// tie-broken min ratio. Returns 0 optimal, 2 unbounded. Only columns below
// enter_limit may enter the basis (phase 2 shuts out the artificials).
inline int run_simplex(Tableau& tab, int enter_limit, double eps = 1e-9) {
  for (long iter = 0; iter < 200000; ++iter) {
    int pc = -1;
    for (int j = 0; j < enter_limit; ++j)
      if (tab.t[tab.m][j] < -eps) { pc = j; break; }
    if (pc < 0) return 0;
    int pr = -1;
    double best = kInf;
    for (int r = 0; r < tab.m; ++r) {
      if (tab.t[r][pc] <= eps) continue;
      double ratio = tab.t[r][tab.n] / tab.t[r][pc];
      if (ratio < best - eps || (std::fabs(ratio - best) <= eps && (pr < 0 || tab.basis[r] < tab.basis[pr]))) {
        best = ratio;
        pr = r;
      }
    }
    if (pr < 0) return 2;
    pivot(tab, pr, pc);
  }
  return 2;  // cycling guard; unreachable with Bland on these sizes
}

}  // namespace detail

inline LpResult solve_lp(const LpProblem& p) {
  using namespace detail;
  LpResult res;
  // substitute x = lo + x' (x' >= 0); finite lower bounds required
  int n0 = p.n;
  std::vector<std::vector<double>> rows;
  std::vector<int> sense;
  std::vector<double> rhs;
  for (size_t i = 0; i < p.a.size(); ++i) {
    double shift = 0;
    for (int j = 0; j < n0; ++j) shift += p.a[i][j] * p.lo[j];
    rows.push_back(p.a[i]);
    sense.push_back(p.sense[i]);
    rhs.push_back(p.b[i] - shift);
  }
  for (int j = 0; j < n0; ++j) {
    if (p.hi[j] == kInf) continue;
    std::vector<double> r(n0, 0.0);
    r[j] = 1.0;
    rows.push_back(r);
    sense.push_back(-1);
    rhs.push_back(p.hi[j] - p.lo[j]);
  }
  int m = static_cast<int>(rows.size());
  // flip rows to nonnegative rhs
  for (int i = 0; i < m; ++i)
    if (rhs[i] < 0) {
      for (double& v : rows[i]) v = -v;
      rhs[i] = -rhs[i];
      sense[i] = -sense[i];
    }
  // columns: n0 structural + slacks/surplus + artificials
  int n_slack = 0, n_art = 0;
  for (int i = 0; i < m; ++i) {
    if (sense[i] != 0) ++n_slack;
    if (sense[i] >= 0) ++n_art;
  }
  int n = n0 + n_slack + n_art;
  Tableau tab;
  tab.m = m;
  tab.n = n;
  tab.t.assign(m + 1, std::vector<double>(n + 1, 0.0));
  tab.basis.assign(m, -1);
  int sc = n0, ac = n0 + n_slack;
  std::vector<int> art_rows;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n0; ++j) tab.t[i][j] = rows[i][j];
    tab.t[i][n] = rhs[i];
    if (sense[i] == -1) {
      tab.t[i][sc] = 1.0;
      tab.basis[i] = sc++;
    } else if (sense[i] == 1) {
      tab.t[i][sc++] = -1.0;
      tab.t[i][ac] = 1.0;
      tab.basis[i] = ac++;
      art_rows.push_back(i);
    } else {
      tab.t[i][ac] = 1.0;
      tab.basis[i] = ac++;
      art_rows.push_back(i);
    }
  }
  // phase 1: minimize sum of artificials
  for (int j = n0 + n_slack; j < n; ++j) tab.t[m][j] = 1.0;
  for (int i : art_rows)
    for (int j = 0; j <= n; ++j) tab.t[m][j] -= tab.t[i][j];
  if (run_simplex(tab, n) != 0) { res.status = 1; return res; }
  double art_sum = -tab.t[m][n];
  if (art_sum > 1e-7) { res.status = 1; return res; }
  // drive leftover artificials out of the basis where possible
  for (int r = 0; r < m; ++r) {
    if (tab.basis[r] < n0 + n_slack) continue;
    int pc = -1;
    for (int j = 0; j < n0 + n_slack; ++j)
      if (std::fabs(tab.t[r][j]) > 1e-9) { pc = j; break; }
    if (pc >= 0) detail::pivot(tab, r, pc);
  }
  // phase 2 objective on shifted vars; artificials may not re-enter (leftover
  // basic ones sit at zero in redundant rows and never change value)
  for (int j = 0; j <= n; ++j) tab.t[m][j] = 0.0;
  for (int j = 0; j < n0; ++j) tab.t[m][j] = p.c[j];
  for (int r = 0; r < m; ++r) {
    int bj = tab.basis[r];
    double cb = bj < n0 ? p.c[bj] : 0.0;
    if (cb == 0.0) continue;
    for (int j = 0; j <= n; ++j) tab.t[m][j] -= cb * tab.t[r][j];
  }
  int st = run_simplex(tab, n0 + n_slack);
  if (st == 2) { res.status = 2; return res; }
  res.status = 0;
  res.x.assign(n0, 0.0);
  for (int r = 0; r < m; ++r)
    if (tab.basis[r] < n0) res.x[tab.basis[r]] = tab.t[r][n];
  res.obj = 0;
  for (int j = 0; j < n0; ++j) {
    res.x[j] += p.lo[j];
    res.obj += p.c[j] * res.x[j];
  }
  return res;
}

// ---------------------------------------------------------------------------
// MPS re-parser (fixed tokens, as emitted one coefficient per line).
// ---------------------------------------------------------------------------
struct MpsColumn {
  std::string name;
  bool integer = false;
  double lo = 0, hi = kInf;
  std::map<std::string, double> coef;  // row name -> value, objective under its row name
};

struct MpsFile {
  std::string obj_row;
  std::vector<std::string> row_names;      // constraint rows, declaration order
  std::map<std::string, char> row_sense;   // L, G, E
  std::map<std::string, double> rhs;
  std::vector<MpsColumn> cols;
  std::map<std::string, int> col_index;

  const MpsColumn& col(const std::string& name) const {
    auto it = col_index.find(name);
    if (it == col_index.end()) throw std::runtime_error("mps column not found: " + name);
    return cols[static_cast<size_t>(it->second)];
  }
};

inline MpsFile parse_mps(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  MpsFile f;
  std::string line, section;
  bool integer_mode = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '*') continue;
    if (!std::isspace(static_cast<unsigned char>(line[0]))) {
      std::istringstream ss(line);
      ss >> section;
      continue;
    }
    std::istringstream ss(line);
    std::vector<std::string> tok;
    std::string t;
    while (ss >> t) tok.push_back(t);
    if (section == "ROWS") {
      if (tok[0] == "N")
        f.obj_row = tok[1];
      else {
        f.row_sense[tok[1]] = tok[0][0];
        f.row_names.push_back(tok[1]);
      }
    } else if (section == "COLUMNS") {
      if (tok.size() >= 3 && tok[1] == "'MARKER'") {
        integer_mode = tok[2] == "'INTORG'";
        continue;
      }
      if (!f.col_index.count(tok[0])) {
        f.col_index[tok[0]] = static_cast<int>(f.cols.size());
        f.cols.push_back({tok[0], integer_mode, 0, kInf, {}});
      }
      MpsColumn& c = f.cols[static_cast<size_t>(f.col_index[tok[0]])];
      for (size_t i = 1; i + 1 < tok.size(); i += 2) c.coef[tok[i]] += std::stod(tok[i + 1]);
    } else if (section == "RHS") {
      for (size_t i = 1; i + 1 < tok.size(); i += 2) f.rhs[tok[i]] = std::stod(tok[i + 1]);
    } else if (section == "BOUNDS") {
      MpsColumn& c = f.cols[static_cast<size_t>(f.col_index.at(tok[2])) ];
      const std::string& bt = tok[0];
      double v = tok.size() > 3 ? std::stod(tok[3]) : 0.0;
      if (bt == "UP" || bt == "UI")
        c.hi = v;
      else if (bt == "LO" || bt == "LI")
        c.lo = v;
      else if (bt == "FX")
        c.lo = c.hi = v;
      else if (bt == "MI")
        c.lo = -kInf;
      else if (bt == "BV") {
        c.lo = 0;
        c.hi = 1;
        c.integer = true;
      }
    }
  }
  return f;
}

// Pearson correlation; NaN-free inputs expected.
inline double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  size_t n = xs.size();
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) { mx += xs[i]; my += ys[i]; }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0 || syy <= 0) return 0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace oracle
