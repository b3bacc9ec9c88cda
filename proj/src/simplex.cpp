#include "simplex.hpp"

#include <algorithm>
#include <cmath>

namespace gridsplit::detail {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPrimalTol = 1e-9;
constexpr double kTieTol = 1e-12;
constexpr int kRefactorEvery = 64;

}  // namespace

BoundedSimplex::BoundedSimplex(const MilpModel& model, const SolverOptions& options)
    : model_(&model), opts_(options) {
  m_ = model.num_constraints();
  n_ = model.num_variables();
  ntot_ = n_ + 2 * m_;
  cols_.assign(ntot_, {});
  rhs_.resize(m_);
  cost_.assign(ntot_, 0.0);
  lb_.assign(ntot_, 0.0);
  ub_.assign(ntot_, 0.0);
  x_.assign(ntot_, 0.0);
  state_.assign(ntot_, VarState::AtLower);
  head_.assign(m_, 0);

  for (int j = 0; j < n_; ++j) cost_[j] = model.variable(j).cost;
  for (int i = 0; i < m_; ++i) {
    const auto& row = model.constraints()[i];
    rhs_[i] = row.rhs;
    for (const auto& t : row.terms) {
      auto& col = cols_[t.var];
      if (!col.empty() && col.back().first == i) col.back().second += t.coef;
      else col.emplace_back(i, t.coef);
    }
    const int s = n_ + i;
    cols_[s] = {{i, 1.0}};
    switch (row.relation) {
      case Relation::LessEqual: lb_[s] = 0.0; ub_[s] = kInfinity; break;
      case Relation::GreaterEqual: lb_[s] = -kInfinity; ub_[s] = 0.0; break;
      case Relation::Equal: lb_[s] = 0.0; ub_[s] = 0.0; break;
    }
    cols_[n_ + m_ + i] = {{i, 1.0}};
  }
  restore_bounds();
  budget_ = opts_.pivot_limit > 0 ? opts_.pivot_limit : 100L * (m_ + n_);
}

void BoundedSimplex::set_bounds(int var, double lower, double upper) {
  lb_[var] = lower;
  ub_[var] = upper;
}

void BoundedSimplex::restore_bounds() {
  for (int j = 0; j < n_; ++j) {
    lb_[j] = model_->variable(j).lower;
    ub_[j] = model_->variable(j).upper;
  }
}

double BoundedSimplex::nonbasic_value(int j) const {
  switch (state_[j]) {
    case VarState::AtLower: return lb_[j];
    case VarState::AtUpper: return ub_[j];
    default: return 0.0;
  }
}

// Keeps each nonbasic variable's state consistent with its (possibly changed)
// bounds and places it there.
void BoundedSimplex::normalize_nonbasic() {
  for (int j = 0; j < ntot_; ++j) {
    if (state_[j] == VarState::Basic) continue;
    const bool lo = std::isfinite(lb_[j]);
    const bool hi = std::isfinite(ub_[j]);
    if (state_[j] == VarState::AtLower && !lo) state_[j] = hi ? VarState::AtUpper : VarState::FreeZero;
    else if (state_[j] == VarState::AtUpper && !hi) state_[j] = lo ? VarState::AtLower : VarState::FreeZero;
    else if (state_[j] == VarState::FreeZero && (lo || hi)) state_[j] = lo ? VarState::AtLower : VarState::AtUpper;
    x_[j] = nonbasic_value(j);
  }
}

bool BoundedSimplex::refactor() {
  // Gauss-Jordan on [B | I].
  std::vector<double> b(static_cast<std::size_t>(m_) * m_, 0.0);
  for (int c = 0; c < m_; ++c)
    for (const auto& [row, v] : cols_[head_[c]]) b[static_cast<std::size_t>(row) * m_ + c] = v;
  std::vector<double> inv(static_cast<std::size_t>(m_) * m_, 0.0);
  for (int i = 0; i < m_; ++i) inv[static_cast<std::size_t>(i) * m_ + i] = 1.0;

  for (int c = 0; c < m_; ++c) {
    int p = -1;
    double best = 0.0;
    for (int r = c; r < m_; ++r) {
      const double v = std::abs(b[static_cast<std::size_t>(r) * m_ + c]);
      if (v > best) {
        best = v;
        p = r;
      }
    }
    if (p < 0 || best < 1e-12) return false;
    if (p != c) {
      std::swap_ranges(b.begin() + static_cast<long>(p) * m_, b.begin() + static_cast<long>(p + 1) * m_,
                       b.begin() + static_cast<long>(c) * m_);
      std::swap_ranges(inv.begin() + static_cast<long>(p) * m_, inv.begin() + static_cast<long>(p + 1) * m_,
                       inv.begin() + static_cast<long>(c) * m_);
    }
    double* brow = &b[static_cast<std::size_t>(c) * m_];
    double* irow = &inv[static_cast<std::size_t>(c) * m_];
    const double piv = brow[c];
    for (int k = 0; k < m_; ++k) {
      brow[k] /= piv;
      irow[k] /= piv;
    }
    for (int r = 0; r < m_; ++r) {
      if (r == c) continue;
      double* br = &b[static_cast<std::size_t>(r) * m_];
      const double f = br[c];
      if (f == 0.0) continue;
      double* ir = &inv[static_cast<std::size_t>(r) * m_];
      for (int k = 0; k < m_; ++k) {
        br[k] -= f * brow[k];
        ir[k] -= f * irow[k];
      }
    }
  }
  binv_ = std::move(inv);
  pivots_since_refactor_ = 0;
  return true;
}

void BoundedSimplex::recompute_basic_values() {
  std::vector<double> r = rhs_;
  for (int j = 0; j < ntot_; ++j) {
    if (state_[j] == VarState::Basic || x_[j] == 0.0) continue;
    for (const auto& [row, v] : cols_[j]) r[row] -= v * x_[j];
  }
  for (int i = 0; i < m_; ++i) {
    const double* bi = &binv_[static_cast<std::size_t>(i) * m_];
    double s = 0.0;
    for (int k = 0; k < m_; ++k) s += bi[k] * r[k];
    x_[head_[i]] = s;
  }
}

void BoundedSimplex::compute_duals(std::span<const double> cost, std::vector<double>& y) const {
  y.assign(m_, 0.0);
  for (int i = 0; i < m_; ++i) {
    const double c = cost[head_[i]];
    if (c == 0.0) continue;
    const double* bi = &binv_[static_cast<std::size_t>(i) * m_];
    for (int k = 0; k < m_; ++k) y[k] += c * bi[k];
  }
}

double BoundedSimplex::reduced_cost(int j, std::span<const double> cost, const std::vector<double>& y) const {
  double d = cost[j];
  for (const auto& [row, v] : cols_[j]) d -= y[row] * v;
  return d;
}

void BoundedSimplex::ftran(int j, std::vector<double>& alpha) const {
  alpha.assign(m_, 0.0);
  for (const auto& [row, v] : cols_[j])
    for (int i = 0; i < m_; ++i) alpha[i] += binv_[static_cast<std::size_t>(i) * m_ + row] * v;
}

void BoundedSimplex::pivot(int row, int entering, const std::vector<double>& alpha) {
  double* pr = &binv_[static_cast<std::size_t>(row) * m_];
  const double piv = alpha[row];
  for (int k = 0; k < m_; ++k) pr[k] /= piv;
  for (int i = 0; i < m_; ++i) {
    if (i == row || alpha[i] == 0.0) continue;
    double* ri = &binv_[static_cast<std::size_t>(i) * m_];
    const double f = alpha[i];
    for (int k = 0; k < m_; ++k) ri[k] -= f * pr[k];
  }
  head_[row] = entering;
  state_[entering] = VarState::Basic;
  ++iterations_;
  ++pivots_since_refactor_;
}

double BoundedSimplex::primal_infeasibility(int j) const {
  const double tol_lo = kPrimalTol * (1.0 + (std::isfinite(lb_[j]) ? std::abs(lb_[j]) : 0.0));
  const double tol_hi = kPrimalTol * (1.0 + (std::isfinite(ub_[j]) ? std::abs(ub_[j]) : 0.0));
  if (x_[j] < lb_[j] - tol_lo) return lb_[j] - x_[j];
  if (x_[j] > ub_[j] + tol_hi) return x_[j] - ub_[j];
  return 0.0;
}

bool BoundedSimplex::primal_feasible() const {
  for (int i = 0; i < m_; ++i)
    if (primal_infeasibility(head_[i]) > 0.0) return false;
  return true;
}

bool BoundedSimplex::dual_feasible(std::span<const double> cost) const {
  std::vector<double> y;
  compute_duals(cost, y);
  for (int j = 0; j < ntot_; ++j) {
    if (state_[j] == VarState::Basic || lb_[j] == ub_[j]) continue;
    const double d = reduced_cost(j, cost, y);
    if (state_[j] == VarState::AtLower && d < -kDualTol) return false;
    if (state_[j] == VarState::AtUpper && d > kDualTol) return false;
    if (state_[j] == VarState::FreeZero && std::abs(d) > kDualTol) return false;
  }
  return true;
}

LpOutcome BoundedSimplex::run_primal(std::span<const double> cost) {
  bool bland = false;
  long degenerate = 0;
  std::vector<double> y;
  std::vector<double> alpha;
  while (true) {
    if (budget_-- <= 0) return LpOutcome::IterationLimit;
    if (pivots_since_refactor_ >= kRefactorEvery) {
      if (!refactor()) return LpOutcome::IterationLimit;
      recompute_basic_values();
    }
    compute_duals(cost, y);

    int q = -1;
    int dir = 0;
    double best = 0.0;
    for (int j = 0; j < ntot_; ++j) {
      if (state_[j] == VarState::Basic || lb_[j] == ub_[j]) continue;
      const double d = reduced_cost(j, cost, y);
      int jdir = 0;
      if (state_[j] == VarState::AtLower && d < -kDualTol) jdir = 1;
      else if (state_[j] == VarState::AtUpper && d > kDualTol) jdir = -1;
      else if (state_[j] == VarState::FreeZero && std::abs(d) > kDualTol) jdir = d < 0 ? 1 : -1;
      if (jdir == 0) continue;
      if (bland) {
        q = j;
        dir = jdir;
        break;
      }
      if (std::abs(d) > best) {
        best = std::abs(d);
        q = j;
        dir = jdir;
      }
    }
    if (q < 0) return LpOutcome::Optimal;

    ftran(q, alpha);
    double theta = kInfinity;
    int leave = -1;
    bool leave_to_lower = false;
    for (int i = 0; i < m_; ++i) {
      const double a = alpha[i];
      if (std::abs(a) < kPivotTol) continue;
      const double rate = -dir * a;
      const int h = head_[i];
      double t;
      bool to_lower;
      if (rate < 0) {
        if (!std::isfinite(lb_[h])) continue;
        t = (x_[h] - lb_[h]) / -rate;
        to_lower = true;
      } else {
        if (!std::isfinite(ub_[h])) continue;
        t = (ub_[h] - x_[h]) / rate;
        to_lower = false;
      }
      t = std::max(t, 0.0);
      bool take = false;
      if (leave < 0 || t < theta - kTieTol) take = true;
      else if (t <= theta + kTieTol)
        take = bland ? h < head_[leave] : std::abs(a) > std::abs(alpha[leave]);
      if (take) {
        theta = t;
        leave = i;
        leave_to_lower = to_lower;
      }
    }

    const double span = ub_[q] - lb_[q];
    const bool flip = std::isfinite(span) && span <= theta;
    if (!flip && leave < 0) return LpOutcome::Unbounded;
    const double step = flip ? span : theta;

    if (step < 1e-12) {
      if (++degenerate > opts_.bland_after_degenerate) bland = true;
    }

    if (step != 0.0) {
      x_[q] += dir * step;
      for (int i = 0; i < m_; ++i)
        if (alpha[i] != 0.0) x_[head_[i]] -= alpha[i] * dir * step;
    }
    if (flip) {
      state_[q] = dir > 0 ? VarState::AtUpper : VarState::AtLower;
      x_[q] = nonbasic_value(q);
      ++iterations_;
      continue;
    }
    const int h = head_[leave];
    state_[h] = leave_to_lower ? VarState::AtLower : VarState::AtUpper;
    x_[h] = leave_to_lower ? lb_[h] : ub_[h];
    pivot(leave, q, alpha);
  }
}

LpOutcome BoundedSimplex::run_dual() {
  bool bland = false;
  long degenerate = 0;
  std::vector<double> y;
  std::vector<double> alpha;
  std::vector<double> rho(m_);
  while (true) {
    if (budget_-- <= 0) return LpOutcome::IterationLimit;
    if (pivots_since_refactor_ >= kRefactorEvery) {
      if (!refactor()) return LpOutcome::IterationLimit;
      recompute_basic_values();
    }

    int r = -1;
    double worst = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double v = primal_infeasibility(head_[i]);
      if (v <= 0.0) continue;
      if (bland ? (r < 0 || head_[i] < head_[r]) : v > worst) {
        worst = v;
        r = i;
      }
    }
    if (r < 0) return LpOutcome::Optimal;

    const int h = head_[r];
    const bool to_lower = x_[h] < lb_[h];
    compute_duals(cost_, y);
    std::copy_n(&binv_[static_cast<std::size_t>(r) * m_], m_, rho.begin());

    int q = -1;
    double best_ratio = kInfinity;
    double best_alpha = 0.0;
    for (int j = 0; j < ntot_; ++j) {
      if (state_[j] == VarState::Basic || lb_[j] == ub_[j]) continue;
      double arj = 0.0;
      for (const auto& [row, v] : cols_[j]) arj += rho[row] * v;
      if (std::abs(arj) < kPivotTol) continue;
      const VarState s = state_[j];
      bool eligible;
      if (to_lower)
        eligible = (s == VarState::AtLower && arj < 0) || (s == VarState::AtUpper && arj > 0) || s == VarState::FreeZero;
      else
        eligible = (s == VarState::AtLower && arj > 0) || (s == VarState::AtUpper && arj < 0) || s == VarState::FreeZero;
      if (!eligible) continue;
      const double d = reduced_cost(j, cost_, y);
      double slack;
      if (s == VarState::AtLower) slack = std::max(d, 0.0);
      else if (s == VarState::AtUpper) slack = std::max(-d, 0.0);
      else slack = std::abs(d);
      const double ratio = slack / std::abs(arj);
      bool take = false;
      if (q < 0 || ratio < best_ratio - kTieTol) take = true;
      else if (ratio <= best_ratio + kTieTol) take = bland ? false : std::abs(arj) > best_alpha;
      if (take) {
        q = j;
        best_ratio = ratio;
        best_alpha = std::abs(arj);
      }
    }
    if (q < 0) return LpOutcome::Infeasible;

    if (best_ratio < 1e-12) {
      if (++degenerate > opts_.bland_after_degenerate) bland = true;
    }

    ftran(q, alpha);
    if (std::abs(alpha[r]) < kPivotTol) {
      // Row and column disagree: the inverse has drifted.
      if (!refactor()) return LpOutcome::IterationLimit;
      recompute_basic_values();
      continue;
    }
    const double target = to_lower ? lb_[h] : ub_[h];
    const double delta = (x_[h] - target) / alpha[r];
    x_[q] += delta;
    for (int i = 0; i < m_; ++i)
      if (alpha[i] != 0.0) x_[head_[i]] -= alpha[i] * delta;
    state_[h] = to_lower ? VarState::AtLower : VarState::AtUpper;
    x_[h] = target;
    pivot(r, q, alpha);
  }
}

LpOutcome BoundedSimplex::finish(LpOutcome outcome) {
  if (outcome != LpOutcome::Optimal) return outcome;
  // Clean up accumulated drift and confirm both feasibilities.
  if (!refactor()) return LpOutcome::IterationLimit;
  recompute_basic_values();
  if (!primal_feasible()) {
    if (!dual_feasible(cost_)) return run_primal(cost_);
    outcome = run_dual();
    if (outcome != LpOutcome::Optimal) return outcome;
  }
  return run_primal(cost_);
}

LpOutcome BoundedSimplex::solve() {
  budget_ = opts_.pivot_limit > 0 ? opts_.pivot_limit : 100L * (m_ + n_);
  for (int j = 0; j < n_ + m_; ++j) {
    state_[j] = std::isfinite(lb_[j]) ? VarState::AtLower
                : std::isfinite(ub_[j]) ? VarState::AtUpper
                                        : VarState::FreeZero;
    x_[j] = nonbasic_value(j);
  }
  std::vector<double> residual = rhs_;
  for (int j = 0; j < n_; ++j) {
    if (x_[j] == 0.0) continue;
    for (const auto& [row, v] : cols_[j]) residual[row] -= v * x_[j];
  }

  bool need_phase1 = false;
  for (int i = 0; i < m_; ++i) {
    const int s = n_ + i;
    const int a = n_ + m_ + i;
    const double r = residual[i];
    if (r >= lb_[s] && r <= ub_[s]) {
      head_[i] = s;
      state_[s] = VarState::Basic;
      x_[s] = r;
      lb_[a] = ub_[a] = 0.0;
      state_[a] = VarState::AtLower;
      x_[a] = 0.0;
      cols_[a] = {{i, 1.0}};
    } else {
      const double sv = std::clamp(r, lb_[s], ub_[s]);
      x_[s] = sv;
      state_[s] = sv == lb_[s] ? VarState::AtLower : VarState::AtUpper;
      const double rest = r - sv;
      cols_[a] = {{i, rest < 0 ? -1.0 : 1.0}};
      lb_[a] = 0.0;
      ub_[a] = kInfinity;
      head_[i] = a;
      state_[a] = VarState::Basic;
      x_[a] = std::abs(rest);
      need_phase1 = true;
    }
  }
  binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
  for (int i = 0; i < m_; ++i) binv_[static_cast<std::size_t>(i) * m_ + i] = cols_[head_[i]].front().second;
  pivots_since_refactor_ = 0;

  if (need_phase1) {
    std::vector<double> phase1(ntot_, 0.0);
    for (int i = 0; i < m_; ++i) phase1[n_ + m_ + i] = 1.0;
    const auto outcome = run_primal(phase1);
    if (outcome != LpOutcome::Optimal) return outcome == LpOutcome::Unbounded ? LpOutcome::Infeasible : outcome;
    double infeasibility = 0.0;
    for (int i = 0; i < m_; ++i) infeasibility += x_[n_ + m_ + i];
    if (infeasibility > opts_.feasibility_tol) return LpOutcome::Infeasible;
    for (int i = 0; i < m_; ++i) {
      const int a = n_ + m_ + i;
      lb_[a] = ub_[a] = 0.0;
      if (state_[a] != VarState::Basic) {
        state_[a] = VarState::AtLower;
        x_[a] = 0.0;
      }
    }
    if (!refactor()) return LpOutcome::IterationLimit;
    recompute_basic_values();
  }
  return finish(run_primal(cost_));
}

LpOutcome BoundedSimplex::reoptimize() {
  budget_ = opts_.pivot_limit > 0 ? opts_.pivot_limit : 100L * (m_ + n_);
  normalize_nonbasic();
  recompute_basic_values();
  if (dual_feasible(cost_)) return finish(run_dual());
  if (primal_feasible()) return finish(run_primal(cost_));
  return solve();
}

bool BoundedSimplex::load_basis(const Basis& basis) {
  head_ = basis.head;
  state_ = basis.state;
  normalize_nonbasic();
  if (!refactor()) return false;
  recompute_basic_values();
  return true;
}

std::vector<double> BoundedSimplex::structural_values() const { return {x_.begin(), x_.begin() + n_}; }

double BoundedSimplex::objective() const {
  double obj = model_->objective_constant();
  for (int j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
  return obj;
}

}  // namespace gridsplit::detail
