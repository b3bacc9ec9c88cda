#include <algorithm>
#include <cmath>
#include <ostream>

#include "gridsplit/errors.hpp"
#include "gridsplit/milp.hpp"

namespace gridsplit {

int MilpModel::add_variable(std::string name, double lower, double upper, bool integer, double cost) {
  vars_.push_back({std::move(name), lower, upper, integer, cost});
  return static_cast<int>(vars_.size()) - 1;
}

int MilpModel::add_constraint(std::string name, std::vector<Term> terms, Relation relation, double rhs) {
  rows_.push_back({std::move(name), std::move(terms), relation, rhs});
  return static_cast<int>(rows_.size()) - 1;
}

void MilpModel::set_bounds(int var, double lower, double upper) {
  auto& v = vars_.at(var);
  v.lower = lower;
  v.upper = upper;
}

int MilpModel::num_integer() const {
  return static_cast<int>(std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) { return v.integer; }));
}

double MilpModel::evaluate_objective(std::span<const double> values) const {
  double obj = objective_constant_;
  for (std::size_t j = 0; j < vars_.size(); ++j) obj += vars_[j].cost * values[j];
  return obj;
}

double MilpModel::max_violation(std::span<const double> values) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    worst = std::max(worst, vars_[j].lower - values[j]);
    worst = std::max(worst, values[j] - vars_[j].upper);
  }
  for (const auto& row : rows_) {
    double lhs = 0.0;
    for (const auto& t : row.terms) lhs += t.coef * values[t.var];
    switch (row.relation) {
      case Relation::LessEqual: worst = std::max(worst, lhs - row.rhs); break;
      case Relation::GreaterEqual: worst = std::max(worst, row.rhs - lhs); break;
      case Relation::Equal: worst = std::max(worst, std::abs(lhs - row.rhs)); break;
    }
  }
  return worst;
}

double MilpModel::max_integrality_gap(std::span<const double> values) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < vars_.size(); ++j)
    if (vars_[j].integer) worst = std::max(worst, std::abs(values[j] - std::round(values[j])));
  return worst;
}

void MilpModel::check() const {
  for (const auto& v : vars_) {
    if (v.lower > v.upper) throw ModelError("variable " + v.name + ": lower bound exceeds upper bound");
    if (v.integer && (!std::isfinite(v.lower) || !std::isfinite(v.upper)))
      throw ModelError("integer variable " + v.name + " needs finite bounds");
  }
  for (const auto& row : rows_)
    for (const auto& t : row.terms)
      if (t.var < 0 || t.var >= num_variables())
        throw ModelError("constraint " + row.name + " references unknown variable");
}

MilpModel MilpModel::relaxed() const {
  MilpModel out = *this;
  for (auto& v : out.vars_) v.integer = false;
  return out;
}

namespace {

void write_linear(std::ostream& out, const MilpModel& model, const std::vector<Term>& terms) {
  bool first = true;
  for (const auto& t : terms) {
    if (t.coef == 0.0) continue;
    out << (t.coef < 0 ? " - " : (first ? " " : " + ")) << std::abs(t.coef) << ' ' << model.variable(t.var).name;
    first = false;
  }
  if (first) out << " 0";
}

}  // namespace

void write_lp_format(const MilpModel& model, std::ostream& out) {
  const auto precision = out.precision(17);
  out << "\\ objective constant " << model.objective_constant() << "\nMinimize\n obj:";
  std::vector<Term> objective;
  for (int j = 0; j < model.num_variables(); ++j)
    if (model.variable(j).cost != 0.0) objective.push_back({j, model.variable(j).cost});
  write_linear(out, model, objective);
  out << "\nSubject To\n";
  for (const auto& row : model.constraints()) {
    out << ' ' << row.name << ':';
    write_linear(out, model, row.terms);
    switch (row.relation) {
      case Relation::LessEqual: out << " <= "; break;
      case Relation::GreaterEqual: out << " >= "; break;
      case Relation::Equal: out << " = "; break;
    }
    out << row.rhs << '\n';
  }
  out << "Bounds\n";
  for (const auto& v : model.variables()) {
    out << ' ';
    if (std::isinf(v.lower)) out << "-inf";
    else out << v.lower;
    out << " <= " << v.name << " <= ";
    if (std::isinf(v.upper)) out << "+inf";
    else out << v.upper;
    out << '\n';
  }
  bool any_int = false;
  for (const auto& v : model.variables()) {
    if (!v.integer) continue;
    if (!any_int) out << "General\n";
    any_int = true;
    out << ' ' << v.name << '\n';
  }
  out << "End\n";
  out.precision(precision);
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::IterationLimit: return "IterationLimit";
  }
  return "Unknown";
}

}  // namespace gridsplit
