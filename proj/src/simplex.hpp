#pragma once

// Bounded-variable revised simplex with an explicit dense basis inverse.
// Every row is stored as a.x + s = b with the slack bounds encoding the
// relation, plus one artificial column per row for the cold start.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gridsplit/milp.hpp"

namespace gridsplit::detail {

enum class VarState : std::uint8_t { Basic, AtLower, AtUpper, FreeZero };

struct Basis {
  std::vector<int> head;
  std::vector<VarState> state;
};

enum class LpOutcome { Optimal, Infeasible, Unbounded, IterationLimit };

class BoundedSimplex {
 public:
  BoundedSimplex(const MilpModel& model, const SolverOptions& options);

  // Two-phase primal from a slack/artificial basis.
  LpOutcome solve();
  // Warm start after bound changes or load_basis(): dual simplex when the
  // basis is dual feasible, primal when it is primal feasible, else cold.
  LpOutcome reoptimize();

  void set_bounds(int var, double lower, double upper);
  void restore_bounds();
  double lower(int var) const { return lb_[var]; }
  double upper(int var) const { return ub_[var]; }

  Basis basis() const { return {head_, state_}; }
  bool load_basis(const Basis& basis);

  std::vector<double> structural_values() const;
  double objective() const;
  long iterations() const { return iterations_; }

 private:
  using Column = std::vector<std::pair<int, double>>;

  double nonbasic_value(int j) const;
  void normalize_nonbasic();
  bool refactor();
  void recompute_basic_values();
  void compute_duals(std::span<const double> cost, std::vector<double>& y) const;
  double reduced_cost(int j, std::span<const double> cost, const std::vector<double>& y) const;
  void ftran(int j, std::vector<double>& alpha) const;
  void pivot(int row, int entering, const std::vector<double>& alpha);
  double primal_infeasibility(int j) const;
  bool dual_feasible(std::span<const double> cost) const;
  bool primal_feasible() const;

  LpOutcome run_primal(std::span<const double> cost);
  LpOutcome run_dual();
  LpOutcome finish(LpOutcome outcome);

  const MilpModel* model_;
  SolverOptions opts_;
  int m_ = 0;
  int n_ = 0;
  int ntot_ = 0;
  std::vector<Column> cols_;
  std::vector<double> rhs_;
  std::vector<double> cost_;
  std::vector<double> lb_;
  std::vector<double> ub_;
  std::vector<double> x_;
  std::vector<int> head_;
  std::vector<VarState> state_;
  std::vector<double> binv_;  // m x m, row-major
  int pivots_since_refactor_ = 0;
  long iterations_ = 0;
  long budget_ = 0;
};

}  // namespace gridsplit::detail
