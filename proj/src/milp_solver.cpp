#include <cmath>
#include <memory>
#include <queue>

#include "gridsplit/milp.hpp"
#include "simplex.hpp"

namespace gridsplit {

namespace {

using detail::BoundedSimplex;
using detail::LpOutcome;

SolveStatus to_status(LpOutcome o) {
  switch (o) {
    case LpOutcome::Optimal: return SolveStatus::Optimal;
    case LpOutcome::Infeasible: return SolveStatus::Infeasible;
    case LpOutcome::Unbounded: return SolveStatus::Unbounded;
    case LpOutcome::IterationLimit: return SolveStatus::IterationLimit;
  }
  return SolveStatus::Infeasible;
}

struct BoundChange {
  int var;
  double lower;
  double upper;
};

struct Node {
  double bound;
  long id;
  long parent;
  std::vector<BoundChange> changes;
  std::shared_ptr<const detail::Basis> basis;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

// Most fractional integer variable, ties to the lowest id; -1 when integral.
int pick_branch_variable(const MilpModel& model, const std::vector<double>& values, double tol) {
  int best = -1;
  double best_frac = tol;
  for (int j = 0; j < model.num_variables(); ++j) {
    if (!model.variable(j).integer) continue;
    const double f = values[j] - std::floor(values[j]);
    const double frac = std::min(f, 1.0 - f);
    if (frac > best_frac) {
      best_frac = frac;
      best = j;
    }
  }
  return best;
}

}  // namespace

SolveReport solve_lp(const MilpModel& model, const SolverOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  model.check();
  const MilpModel relaxed = model.relaxed();
  BoundedSimplex lp(relaxed, options);
  SolveReport report;
  report.status = to_status(lp.solve());
  report.lp_iterations = lp.iterations();
  if (report.status == SolveStatus::Optimal) {
    report.values = lp.structural_values();
    report.objective = model.evaluate_objective(report.values);
  }
  report.wall_time = std::chrono::steady_clock::now() - start;
  return report;
}

SolveReport solve_milp(const MilpModel& model, const SolverOptions& options) {
  if (model.num_integer() == 0) return solve_lp(model, options);

  const auto start = std::chrono::steady_clock::now();
  model.check();
  SolveReport report;
  BoundedSimplex lp(model, options);
  const auto finish = [&](SolveStatus status) {
    report.status = status;
    report.lp_iterations = lp.iterations();
    report.wall_time = std::chrono::steady_clock::now() - start;
    return report;
  };

  double incumbent = kInfinity;
  std::vector<double> best;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  open.push({-kInfinity, 0, -1, {}, nullptr});
  long next_id = 1;
  long engine_holds = -2;  // node whose optimal basis the engine currently has

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    const double eps = options.prune_eps * std::max(1.0, std::abs(incumbent));
    if (node.bound >= incumbent - eps) break;  // best-first: nothing left can improve
    if (++report.node_count > options.node_limit) {
      if (!best.empty()) {
        report.values = best;
        report.objective = model.evaluate_objective(best);
      }
      return finish(SolveStatus::IterationLimit);
    }

    lp.restore_bounds();
    for (const auto& c : node.changes) lp.set_bounds(c.var, c.lower, c.upper);
    LpOutcome outcome;
    if (node.parent < 0) {
      outcome = lp.solve();
    } else {
      if (engine_holds != node.parent && !lp.load_basis(*node.basis)) {
        outcome = lp.solve();
      } else {
        outcome = lp.reoptimize();
      }
    }
    engine_holds = node.id;

    if (outcome == LpOutcome::IterationLimit) return finish(SolveStatus::IterationLimit);
    if (outcome == LpOutcome::Unbounded) return finish(node.parent < 0 ? SolveStatus::Unbounded : SolveStatus::IterationLimit);
    if (outcome == LpOutcome::Infeasible) continue;

    const double obj = lp.objective();
    if (obj >= incumbent - eps) continue;
    const auto values = lp.structural_values();
    const int j = pick_branch_variable(model, values, options.integrality_tol);
    if (j < 0) {
      incumbent = obj;
      best = values;
      continue;
    }

    auto basis = std::make_shared<const detail::Basis>(lp.basis());
    const double v = values[j];
    Node down{obj, 0, node.id, node.changes, basis};
    down.changes.push_back({j, lp.lower(j), std::floor(v)});
    Node up{obj, 0, node.id, node.changes, basis};
    up.changes.push_back({j, std::ceil(v), lp.upper(j)});
    // Explore the rounding direction first.
    if (v - std::floor(v) < 0.5) {
      down.id = next_id++;
      up.id = next_id++;
    } else {
      up.id = next_id++;
      down.id = next_id++;
    }
    open.push(std::move(down));
    open.push(std::move(up));
  }

  if (best.empty()) return finish(SolveStatus::Infeasible);

  // Polish: fix the integers at their rounded values and re-solve the
  // continuous part so integer values come out exact.
  lp.restore_bounds();
  for (int j = 0; j < model.num_variables(); ++j) {
    if (!model.variable(j).integer) continue;
    const double r = std::round(best[j]);
    lp.set_bounds(j, r, r);
  }
  if (lp.reoptimize() == LpOutcome::Optimal &&
      std::abs(lp.objective() - incumbent) <= 1e-7 * std::max(1.0, std::abs(incumbent))) {
    best = lp.structural_values();
  }
  for (int j = 0; j < model.num_variables(); ++j)
    if (model.variable(j).integer) best[j] = std::round(best[j]);

  report.values = std::move(best);
  report.objective = model.evaluate_objective(report.values);
  return finish(SolveStatus::Optimal);
}

}  // namespace gridsplit
