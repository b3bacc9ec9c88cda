#pragma once

// Sparse mixed-integer linear model (minimization) and the embedded solver.

#include <chrono>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace gridsplit {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, Equal, GreaterEqual };

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInfinity;
  bool integer = false;
  double cost = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
};

class MilpModel {
 public:
  int add_variable(std::string name, double lower, double upper, bool integer = false, double cost = 0.0);
  int add_binary(std::string name, double cost = 0.0) { return add_variable(std::move(name), 0.0, 1.0, true, cost); }
  int add_constraint(std::string name, std::vector<Term> terms, Relation relation, double rhs);

  void set_cost(int var, double cost) { vars_.at(var).cost = cost; }
  void add_cost(int var, double delta) { vars_.at(var).cost += delta; }
  void set_bounds(int var, double lower, double upper);
  void add_objective_constant(double c) { objective_constant_ += c; }

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  const Variable& variable(int var) const { return vars_.at(var); }
  double objective_constant() const { return objective_constant_; }
  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  int num_integer() const;

  double evaluate_objective(std::span<const double> values) const;
  // Largest bound or row violation (absolute).
  double max_violation(std::span<const double> values) const;
  // Largest distance of an integer variable from the nearest integer.
  double max_integrality_gap(std::span<const double> values) const;

  // Throws ModelError for dangling variable references or unbounded integers.
  void check() const;

  MilpModel relaxed() const;

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  double objective_constant_ = 0.0;
};

// CPLEX LP text format, readable by common external solvers.
void write_lp_format(const MilpModel& model, std::ostream& out);

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

std::string to_string(SolveStatus s);

struct SolveReport {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = kInfinity;
  std::vector<double> values;
  long node_count = 0;
  long lp_iterations = 0;
  std::chrono::duration<double> wall_time{0.0};
};

struct SolverOptions {
  double feasibility_tol = 1e-7;
  double integrality_tol = 1e-6;
  double prune_eps = 1e-9;
  long node_limit = 1'000'000;
  long pivot_limit = 0;  // 0 means 100 * (rows + cols)
  long bland_after_degenerate = 1000;
};

SolveReport solve_lp(const MilpModel& model, const SolverOptions& options = {});
SolveReport solve_milp(const MilpModel& model, const SolverOptions& options = {});

}  // namespace gridsplit
