#include "fsuc/milp.hpp"

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fsuc {

using nlohmann::json;

int MilpModel::check(Var v) const {
  if (v.index < 0 || v.index >= static_cast<int>(vars_.size()))
    fail(ErrorKind::validation, "variable handle does not belong to this model");
  return v.index;
}

Var MilpModel::add_variable(const std::string& name, VarKind kind, double lower, double upper) {
  if (names_.count(name)) fail(ErrorKind::validation, "duplicate variable name: " + name);
  if (lower > upper) fail(ErrorKind::validation, "variable " + name + " has lower > upper");
  if (kind == VarKind::binary && (lower < 0.0 || upper > 1.0))
    fail(ErrorKind::validation, "binary variable " + name + " bounds outside [0,1]");
  Var v{static_cast<int>(vars_.size())};
  vars_.push_back({name, kind, lower, upper});
  names_[name] = v.index;
  objective_.push_back(0.0);
  return v;
}

int MilpModel::add_constraint(const std::string& name, const std::vector<LinTerm>& terms, Sense sense, double rhs) {
  RowDef row;
  row.name = name;
  row.sense = sense;
  row.rhs = rhs;
  row.terms.reserve(terms.size());
  for (const auto& t : terms) row.terms.emplace_back(check(t.var), t.coef);
  rows_.push_back(std::move(row));
  return static_cast<int>(rows_.size()) - 1;
}

void MilpModel::set_objective(const std::vector<LinTerm>& terms) {
  std::fill(objective_.begin(), objective_.end(), 0.0);
  for (const auto& t : terms) objective_[check(t.var)] += t.coef;
}

void MilpModel::add_objective_term(Var v, double coef) { objective_[check(v)] += coef; }

void MilpModel::set_bounds(Var v, double lower, double upper) {
  if (lower > upper) fail(ErrorKind::validation, "set_bounds: lower > upper for " + vars_[check(v)].name);
  vars_[check(v)].lower = lower;
  vars_[check(v)].upper = upper;
}

std::string status_name(Solution::Status s) {
  switch (s) {
    case Solution::Status::optimal: return "optimal";
    case Solution::Status::gap_feasible: return "gap-feasible";
    case Solution::Status::infeasible: return "infeasible";
    case Solution::Status::unbounded: return "unbounded";
    default: return "error";
  }
}

namespace {

std::string num12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string col_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "X%07d", i);
  return buf;
}

std::string row_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "R%07d", i);
  return buf;
}

void emit_pair(std::ofstream& out, const std::string& col, const std::string& row, double value) {
  out << "    " << col;
  for (size_t i = col.size(); i < 10; ++i) out << ' ';
  out << row;
  for (size_t i = row.size(); i < 10; ++i) out << ' ';
  out << num12(value) << "\n";
}

}  // namespace

void export_model(const MilpModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write model file: " + path);
  const double inf = std::numeric_limits<double>::infinity();

  out << "NAME          FSUC\n";
  out << "ROWS\n";
  out << " N  COST\n";
  for (int r = 0; r < model.num_constraints(); ++r) {
    char s = model.constraint(r).sense == Sense::le ? 'L' : (model.constraint(r).sense == Sense::ge ? 'G' : 'E');
    out << " " << s << "  " << row_name(r) << "\n";
  }

  // column-major entries: objective first so every column appears in declaration order
  std::vector<std::vector<std::pair<int, double>>> by_col(model.num_variables());
  for (int r = 0; r < model.num_constraints(); ++r)
    for (const auto& [ci, coef] : model.constraint(r).terms) by_col[ci].emplace_back(r, coef);

  out << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  for (int c = 0; c < model.num_variables(); ++c) {
    bool is_int = model.variable(c).kind != VarKind::continuous;
    if (is_int && !in_int) {
      out << "    MARK" << marker++ << "     'MARKER'                 'INTORG'\n";
      in_int = true;
    } else if (!is_int && in_int) {
      out << "    MARK" << marker++ << "     'MARKER'                 'INTEND'\n";
      in_int = false;
    }
    emit_pair(out, col_name(c), "COST", model.objective()[c]);
    for (const auto& [r, coef] : by_col[c]) emit_pair(out, col_name(c), row_name(r), coef);
  }
  if (in_int) out << "    MARK" << marker++ << "     'MARKER'                 'INTEND'\n";

  out << "RHS\n";
  for (int r = 0; r < model.num_constraints(); ++r)
    if (model.constraint(r).rhs != 0.0) emit_pair(out, "RHS", row_name(r), model.constraint(r).rhs);

  out << "BOUNDS\n";
  for (int c = 0; c < model.num_variables(); ++c) {
    const auto& v = model.variable(c);
    const std::string cn = col_name(c);
    auto bound = [&](const char* tag, double value, bool has_value) {
      out << " " << tag << " BND       " << cn;
      if (has_value) {
        for (size_t i = cn.size(); i < 10; ++i) out << ' ';
        out << num12(value);
      }
      out << "\n";
    };
    if (v.kind == VarKind::binary) {
      // bounds tightened after declaration must survive the export
      if (v.lower == v.upper) bound("FX", v.lower, true);
      else if (v.lower > 0.0 || v.upper < 1.0) {
        bound("LI", v.lower, true);
        bound("UI", v.upper, true);
      } else bound("BV", 0, false);
      continue;
    }
    if (v.kind == VarKind::integer) {
      if (!std::isfinite(v.upper)) fail(ErrorKind::validation, "integer variable " + v.name + " needs a finite upper bound");
      bound("LI", v.lower, true);
      bound("UI", v.upper, true);
      continue;
    }
    if (v.lower == v.upper) {
      bound("FX", v.lower, true);
      continue;
    }
    if (v.lower == -inf) bound("MI", 0, false);
    else if (v.lower != 0.0) bound("LO", v.lower, true);
    if (v.upper != inf) bound("UP", v.upper, true);
  }
  out << "ENDATA\n";
  if (!out) fail(ErrorKind::io, "write failure on model file: " + path);
}

namespace {

std::string default_driver() { return std::string(FSUC_SOURCE_DIR) + "/tools/milp_solve.py"; }

std::string temp_base(const SolverConfig& cfg) {
  static std::atomic<int> counter{0};
  std::string dir = cfg.work_dir.empty() ? "/tmp" : cfg.work_dir;
  return dir + "/fsuc_" + std::to_string(::getpid()) + "_" + std::to_string(counter++);
}

Solution parse_response(const json& resp, const MilpModel& model) {
  Solution sol;
  if (resp.contains("error")) {
    sol.status = Solution::Status::error;
    sol.diagnostics = resp["error"].get<std::string>();
    return sol;
  }
  std::string st = resp.value("status", "error");
  if (st == "optimal") sol.status = Solution::Status::optimal;
  else if (st == "gap-feasible") sol.status = Solution::Status::gap_feasible;
  else if (st == "infeasible") sol.status = Solution::Status::infeasible;
  else if (st == "unbounded") sol.status = Solution::Status::unbounded;
  else sol.status = Solution::Status::error;
  sol.objective = resp.value("objective", 0.0);
  sol.gap = resp.value("gap", 0.0);
  sol.solve_time = resp.value("solve_time", 0.0);
  sol.diagnostics = resp.value("message", "");
  if (sol.status == Solution::Status::optimal || sol.status == Solution::Status::gap_feasible) {
    sol.values = resp["values"].get<std::vector<double>>();
    if (static_cast<int>(sol.values.size()) != model.num_variables())
      fail(ErrorKind::solver, "solver returned " + std::to_string(sol.values.size()) + " values for " +
                                  std::to_string(model.num_variables()) + " variables");
  }
  return sol;
}

// Persistent driver subprocess speaking one JSON object per line on stdin/stdout.
class SolverServer {
public:
  static SolverServer& instance() {
    static SolverServer s;
    return s;
  }

  json request(const json& req, const SolverConfig& cfg) {
    ensure_running(cfg);
    std::string line = req.dump();
    line += "\n";
    if (!write_all(line)) {
      stop();
      fail(ErrorKind::solver, "solver server pipe closed while writing");
    }
    std::string resp_line;
    if (!read_line(resp_line)) {
      stop();
      fail(ErrorKind::solver, "solver server pipe closed while reading (driver crash?)");
    }
    return json::parse(resp_line);
  }

  void stop() {
    if (pid_ <= 0) return;
    ::close(to_child_);
    ::close(from_child_);
    int status = 0;
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }

  ~SolverServer() { stop(); }

private:
  void ensure_running(const SolverConfig& cfg) {
    if (pid_ > 0) return;
    std::string driver = cfg.path.empty() ? default_driver() : cfg.path;
    int in_pipe[2], out_pipe[2];
    if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0) fail(ErrorKind::solver, "pipe() failed");
    pid_t pid = ::fork();
    if (pid < 0) fail(ErrorKind::solver, "fork() failed");
    if (pid == 0) {
      ::dup2(in_pipe[0], STDIN_FILENO);
      ::dup2(out_pipe[1], STDOUT_FILENO);
      ::close(in_pipe[0]);
      ::close(in_pipe[1]);
      ::close(out_pipe[0]);
      ::close(out_pipe[1]);
      ::execlp("python3", "python3", driver.c_str(), "--server", (char*)nullptr);
      std::perror("execlp python3");
      _exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    pid_ = pid;
  }

  bool write_all(const std::string& s) {
    size_t off = 0;
    while (off < s.size()) {
      ssize_t n = ::write(to_child_, s.data() + off, s.size() - off);
      if (n <= 0) return false;
      off += static_cast<size_t>(n);
    }
    return true;
  }

  bool read_line(std::string& out) {
    out.clear();
    char ch;
    while (true) {
      ssize_t n = ::read(from_child_, &ch, 1);
      if (n <= 0) return false;
      if (ch == '\n') return true;
      out.push_back(ch);
    }
  }

  pid_t pid_ = -1;
  int to_child_ = -1, from_child_ = -1;
};

json run_subprocess(const std::vector<std::string>& args, const std::string& out_path) {
  std::string cmd = "python3";
  for (const auto& a : args) {
    cmd += " '";
    cmd += a;
    cmd += "'";
  }
  cmd += " 2>/dev/null";
  int rc = std::system(cmd.c_str());
  std::ifstream in(out_path);
  if (!in) {
    fail(ErrorKind::solver, "solver driver produced no output (exit " + std::to_string(rc) + "): " + cmd);
  }
  json resp;
  in >> resp;
  return resp;
}

}  // namespace

void shutdown_solver_server() { SolverServer::instance().stop(); }

Solution solve(const MilpModel& model, const SolverConfig& cfg) {
  if (cfg.gap < 0) fail(ErrorKind::validation, "negative duality gap requested");
  std::string base = temp_base(cfg);
  std::string mps = base + ".mps";
  export_model(model, mps);
  json resp;
  if (cfg.backend == "server") {
    json req{{"mps", mps},        {"gap", cfg.gap},     {"time_limit", cfg.time_limit},
             {"seed", cfg.seed},  {"threads", cfg.threads}};
    resp = SolverServer::instance().request(req, cfg);
  } else if (cfg.backend == "subprocess") {
    std::string out_path = base + ".sol.json";
    std::string driver = cfg.path.empty() ? default_driver() : cfg.path;
    resp = run_subprocess({driver, "--mps", mps, "--gap", num12(cfg.gap), "--time-limit", num12(cfg.time_limit),
                           "--seed", std::to_string(cfg.seed), "--threads", std::to_string(cfg.threads), "--out",
                           out_path},
                          out_path);
    if (!cfg.keep_files) ::unlink(out_path.c_str());
  } else {
    fail(ErrorKind::config, "unknown solver backend: " + cfg.backend + " (use 'server' or 'subprocess')");
  }
  if (!cfg.keep_files) ::unlink(mps.c_str());
  Solution sol = parse_response(resp, model);
  if (sol.status == Solution::Status::error && !sol.diagnostics.empty())
    fail(ErrorKind::solver, "solver failure: " + sol.diagnostics);
  return sol;
}

Solution solve(const MilpModel& model, double gap, double time_limit) {
  SolverConfig cfg;
  cfg.gap = gap;
  cfg.time_limit = time_limit;
  return solve(model, cfg);
}

std::string validate_model_file(const std::string& mps_path, const SolverConfig& cfg) {
  json req{{"mps", mps_path}, {"validate_only", true}};
  json resp;
  if (cfg.backend == "server") {
    resp = SolverServer::instance().request(req, cfg);
  } else {
    std::string out_path = temp_base(cfg) + ".val.json";
    std::string driver = cfg.path.empty() ? default_driver() : cfg.path;
    resp = run_subprocess({driver, "--mps", mps_path, "--validate-only", "--out", out_path}, out_path);
    ::unlink(out_path.c_str());
  }
  if (!resp.value("valid", false))
    fail(ErrorKind::solver, "model file rejected by solver: " + resp.value("messages", std::string("unknown")));
  return resp.value("messages", std::string());
}

Var linearize_product_bin_cont(MilpModel& model, const std::string& w_name, Var x, double M, Var z) {
  if (!(M >= 0) || !std::isfinite(M)) fail(ErrorKind::validation, "product linearization needs a finite bound M >= 0");
  Var w = model.add_variable(w_name, VarKind::continuous, 0.0, M);
  model.add_constraint(w_name + "_ub_z", {{w, 1.0}, {z, -M}}, Sense::le, 0.0);           // w <= M z
  model.add_constraint(w_name + "_ub_x", {{w, 1.0}, {x, -1.0}}, Sense::le, 0.0);         // w <= x
  model.add_constraint(w_name + "_lb_x", {{w, 1.0}, {x, -1.0}, {z, -M}}, Sense::ge, -M); // w >= x - M(1-z)
  return w;
}

}  // namespace fsuc
