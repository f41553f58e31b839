#pragma once
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fsuc/errors.hpp"

namespace fsuc {

enum class VarKind { continuous, integer, binary };
enum class Sense { le, eq, ge };

struct Var {
  int index = -1;
  bool valid() const { return index >= 0; }
};

struct LinTerm {
  Var var;
  double coef;
};

struct VarDef {
  std::string name;
  VarKind kind;
  double lower;
  double upper;
};

struct RowDef {
  std::string name;
  std::vector<std::pair<int, double>> terms;  // (variable index, coefficient)
  Sense sense;
  double rhs;
};

class MilpModel {
public:
  Var add_variable(const std::string& name, VarKind kind, double lower, double upper);
  int add_constraint(const std::string& name, const std::vector<LinTerm>& terms, Sense sense, double rhs);
  void set_objective(const std::vector<LinTerm>& terms);  // minimize
  void add_objective_term(Var v, double coef);            // accumulates

  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  const VarDef& variable(int i) const { return vars_.at(i); }
  const RowDef& constraint(int i) const { return rows_.at(i); }
  const std::vector<double>& objective() const { return objective_; }
  const std::string& variable_name(Var v) const { return vars_.at(check(v)).name; }

  void set_bounds(Var v, double lower, double upper);

  std::map<std::string, std::string> metadata;

private:
  int check(Var v) const;
  std::vector<VarDef> vars_;
  std::vector<RowDef> rows_;
  std::vector<double> objective_;  // dense by variable index
  std::map<std::string, int> names_;
};

struct Solution {
  enum class Status { optimal, gap_feasible, infeasible, unbounded, error };
  Status status = Status::error;
  std::vector<double> values;  // by variable index; present iff optimal/gap_feasible
  double objective = 0.0;
  double gap = 0.0;
  double solve_time = 0.0;
  std::string diagnostics;
};

std::string status_name(Solution::Status s);

// Fixed-field MPS, one coefficient per line, declaration order, 12 significant digits.
void export_model(const MilpModel& model, const std::string& path);

struct SolverConfig {
  std::string backend = "server";  // "server" (persistent driver) or "subprocess" (spawn per solve)
  std::string path;                // driver script; empty -> <source dir>/tools/milp_solve.py
  double gap = 0.001;
  double time_limit = 600.0;
  int seed = 7;
  int threads = 1;
  std::string work_dir = "";  // empty -> temp dir
  bool keep_files = false;
};

Solution solve(const MilpModel& model, const SolverConfig& cfg);
Solution solve(const MilpModel& model, double gap, double time_limit);

// Checks that an exported model file is readable by the external solver.
// Returns diagnostics; throws on rejection.
std::string validate_model_file(const std::string& mps_path, const SolverConfig& cfg);

// Adds w = x*z (x continuous in [0,M], z binary): w <= M z, w <= x, w >= x - M(1-z), w >= 0.
Var linearize_product_bin_cont(MilpModel& model, const std::string& w_name, Var x, double M, Var z);

// Stops the shared persistent driver (started lazily by solve with backend "server").
void shutdown_solver_server();

}  // namespace fsuc
