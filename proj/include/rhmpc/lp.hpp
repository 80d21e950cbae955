#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "rhmpc/error.hpp"

namespace rhmpc {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/**
 * @brief Linear program in computational standard form
 *
 *   min cost'y + objective_offset   s.t.  eq_matrix y = eq_rhs,  y >= 0.
 *
 * The offset carries constants absorbed when bounded variables are shifted to
 * a zero lower bound; it never influences the optimal basis.
 */
struct StandardLP {
  Vec cost;
  SpMat eq_matrix;
  Vec eq_rhs;
  double objective_offset = 0.0;

  int rows() const { return static_cast<int>(eq_matrix.rows()); }
  int cols() const { return static_cast<int>(eq_matrix.cols()); }
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LPStatus s) {
  switch (s) {
    case LPStatus::Optimal: return "Optimal";
    case LPStatus::Infeasible: return "Infeasible";
    case LPStatus::Unbounded: return "Unbounded";
  }
  return "?";
}

struct LPSolution {
  LPStatus status = LPStatus::Infeasible;
  Vec primal;
  double objective = std::numeric_limits<double>::quiet_NaN();
  /// Row multipliers; a basic solution of {pi : A'pi <= c}.
  Vec dual;
  /// Redundant equality rows found in phase 1. Their multiplier is reported as 0.
  std::vector<int> dropped_rows;
  int iterations = 0;
};

/// Basic column per row. An entry >= cols() marks the artificial of row (entry - cols()).
struct LPBasis {
  std::vector<int> basic;
  bool empty() const { return basic.empty(); }
};

struct SimplexOptions {
  double feas_tol = 1e-9;   // relative to max(1, |rhs|_inf)
  double opt_tol = 1e-9;    // relative to max(1, |cost|_inf)
  double pivot_tol = 1e-9;
  int refactor_every = 64;
  int degenerate_limit = 50;  // consecutive degenerate pivots before Bland's rule
  int max_iterations = 500000;
};

namespace detail {

class RevisedSimplex {
 public:
  RevisedSimplex(const StandardLP& lp, const SimplexOptions& opt) : opt_(opt) {
    m_ = lp.rows();
    n_ = lp.cols();
    A_ = lp.eq_matrix;
    A_.makeCompressed();
    b_ = lp.eq_rhs;
    c_ = lp.cost;
    offset_ = lp.objective_offset;
    sign_.assign(m_, 1.0);
    bnorm_ = std::max(1.0, b_.size() ? b_.cwiseAbs().maxCoeff() : 0.0);
    cnorm_ = std::max(1.0, c_.size() ? c_.cwiseAbs().maxCoeff() : 0.0);
    ftol_ = opt_.feas_tol * bnorm_;
    dtol_ = opt_.opt_tol * cnorm_;
  }

  LPSolution solve(const LPBasis* warm, LPBasis* basis_out) {
    LPSolution sol;
    bool done = false;
    if (warm != nullptr && !warm->empty()) done = try_warm(*warm, sol);
    if (!done) cold(sol);
    sol.iterations = iterations_;
    if (basis_out != nullptr) {
      if (sol.status == LPStatus::Optimal)
        basis_out->basic = head_;
      else
        basis_out->basic.clear();
    }
    return sol;
  }

 private:
  enum class Loop { Optimal, Unbounded, Infeasible, Stalled };

  SimplexOptions opt_;
  int m_ = 0, n_ = 0;
  SpMat A_;
  Vec b_, c_;
  double offset_ = 0.0;
  std::vector<double> sign_;
  double bnorm_ = 1, cnorm_ = 1, ftol_ = 0, dtol_ = 0;

  std::vector<int> head_;
  std::vector<int> where_;
  Vec xB_;
  mutable Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  struct Eta {
    int row;
    double pivot;
    std::vector<std::pair<int, double>> entries;
  };
  std::vector<Eta> etas_;
  int iterations_ = 0;
  std::vector<int> dropped_;

  bool artificial(int j) const { return j >= n_; }

  double col_dot(int j, const Vec& y) const {
    if (artificial(j)) return y[j - n_];
    double s = 0.0;
    for (SpMat::InnerIterator it(A_, j); it; ++it) s += it.value() * y[it.row()];
    return s;
  }

  Vec column(int j) const {
    Vec v = Vec::Zero(m_);
    if (artificial(j)) {
      v[j - n_] = 1.0;
    } else {
      for (SpMat::InnerIterator it(A_, j); it; ++it) v[it.row()] = it.value();
    }
    return v;
  }

  double cost_of(int j, bool phase1) const {
    if (phase1) return artificial(j) ? 1.0 : 0.0;
    return artificial(j) ? 0.0 : c_[j];
  }

  void apply_row_signs(const std::vector<double>& signs) {
    bool any = false;
    for (int i = 0; i < m_; ++i) {
      if (signs[i] == sign_[i]) continue;
      any = true;
      b_[i] = -b_[i];
    }
    if (!any) return;
    for (int j = 0; j < n_; ++j)
      for (SpMat::InnerIterator it(A_, j); it; ++it)
        if (signs[it.row()] != sign_[it.row()]) it.valueRef() = -it.valueRef();
    sign_ = signs;
  }

  bool refactor() {
    std::vector<Triplet> trips;
    trips.reserve(static_cast<size_t>(m_) * 3);
    for (int i = 0; i < m_; ++i) {
      const int j = head_[i];
      if (artificial(j)) {
        trips.emplace_back(j - n_, i, 1.0);
      } else {
        for (SpMat::InnerIterator it(A_, j); it; ++it) trips.emplace_back(it.row(), i, it.value());
      }
    }
    SpMat B(m_, m_);
    B.setFromTriplets(trips.begin(), trips.end());
    B.makeCompressed();
    lu_.analyzePattern(B);
    lu_.factorize(B);
    etas_.clear();
    return lu_.info() == Eigen::Success;
  }

  void ftran(Vec& v) const {
    v = lu_.solve(v);
    for (const Eta& e : etas_) {
      const double vr = v[e.row] / e.pivot;
      if (vr != 0.0)
        for (const auto& [i, a] : e.entries) v[i] -= a * vr;
      v[e.row] = vr;
    }
  }

  void btran(Vec& u) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = u[it->row];
      for (const auto& [i, a] : it->entries) s -= u[i] * a;
      u[it->row] = s / it->pivot;
    }
    u = lu_.transpose().solve(u);
  }

  void compute_xB() {
    Vec v = b_;
    ftran(v);
    xB_ = v;
  }

  Vec duals(bool phase1) const {
    Vec y(m_);
    for (int i = 0; i < m_; ++i) y[i] = cost_of(head_[i], phase1);
    btran(y);
    return y;
  }

  void pivot(int q, int r, const Vec& alpha, double theta) {
    for (int i = 0; i < m_; ++i)
      if (alpha[i] != 0.0) xB_[i] -= theta * alpha[i];
    xB_[r] = theta;
    where_[head_[r]] = -1;
    head_[r] = q;
    where_[q] = r;
    Eta e{r, alpha[r], {}};
    for (int i = 0; i < m_; ++i)
      if (i != r && alpha[i] != 0.0) e.entries.emplace_back(i, alpha[i]);
    etas_.push_back(std::move(e));
    ++iterations_;
    if (static_cast<int>(etas_.size()) >= opt_.refactor_every) {
      if (!refactor()) throw Error(ErrorCode::NumericalBreakdown, "basis factorization failed");
      compute_xB();
    }
  }

  void check_budget() const {
    if (iterations_ > opt_.max_iterations)
      throw Error(ErrorCode::NumericalBreakdown, "simplex iteration limit reached");
  }

  Loop primal_loop(bool phase1) {
    int degenerate_run = 0;
    const double dtol = phase1 ? opt_.opt_tol : dtol_;
    while (true) {
      check_budget();
      const bool bland = degenerate_run >= opt_.degenerate_limit;
      const Vec y = duals(phase1);
      int q = -1;
      double best = -dtol;
      for (int j = 0; j < n_; ++j) {
        if (where_[j] >= 0) continue;
        const double d = cost_of(j, phase1) - col_dot(j, y);
        if (d < best) {
          q = j;
          best = d;
          if (bland) break;
        }
      }
      if (q < 0) return Loop::Optimal;

      Vec alpha = column(q);
      ftran(alpha);
      int r = -1;
      double best_ratio = kInf, best_abs = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double a = alpha[i];
        double ratio;
        if (!phase1 && artificial(head_[i])) {
          if (std::abs(a) <= opt_.pivot_tol) continue;
          ratio = 0.0;
        } else {
          if (a <= opt_.pivot_tol) continue;
          ratio = std::max(xB_[i], 0.0) / a;
        }
        const double tie = 1e-12 * std::max(1.0, std::abs(best_ratio));
        bool take = false;
        if (r < 0 || ratio < best_ratio - tie) {
          take = true;
        } else if (ratio <= best_ratio + tie) {
          take = bland ? head_[i] < head_[r] : std::abs(a) > best_abs;
        }
        if (take) {
          r = i;
          best_ratio = ratio;
          best_abs = std::abs(a);
        }
      }
      if (r < 0) {
        if (phase1) throw Error(ErrorCode::NumericalBreakdown, "unbounded phase-1 direction");
        return Loop::Unbounded;
      }
      double theta = (!phase1 && artificial(head_[r])) ? 0.0 : std::max(xB_[r], 0.0) / alpha[r];
      degenerate_run = theta <= 1e-12 * bnorm_ ? degenerate_run + 1 : 0;
      pivot(q, r, alpha, theta);
    }
  }

  /// Restores primal feasibility from a dual feasible basis.
  Loop dual_loop() {
    const int budget = iterations_ + 20 * (m_ + n_) + 100;
    while (true) {
      check_budget();
      if (iterations_ > budget) return Loop::Stalled;
      int r = -1;
      double worst = -ftol_;
      for (int i = 0; i < m_; ++i) {
        if (artificial(head_[i])) {
          if (std::abs(xB_[i]) > ftol_) return Loop::Stalled;
          continue;
        }
        if (xB_[i] < worst) {
          worst = xB_[i];
          r = i;
        }
      }
      if (r < 0) return Loop::Optimal;

      const Vec y = duals(false);
      Vec rho = Vec::Zero(m_);
      rho[r] = 1.0;
      btran(rho);
      int q = -1;
      double best_ratio = kInf, best_abs = 0.0;
      for (int j = 0; j < n_; ++j) {
        if (where_[j] >= 0) continue;
        const double a = col_dot(j, rho);
        if (a >= -opt_.pivot_tol) continue;
        const double d = std::max(c_[j] - col_dot(j, y), 0.0);
        const double ratio = d / -a;
        const double tie = 1e-12 * std::max(1.0, std::abs(best_ratio));
        if (q < 0 || ratio < best_ratio - tie ||
            (ratio <= best_ratio + tie && std::abs(a) > best_abs)) {
          q = j;
          best_ratio = ratio;
          best_abs = std::abs(a);
        }
      }
      if (q < 0) return Loop::Infeasible;
      Vec alpha = column(q);
      ftran(alpha);
      if (std::abs(alpha[r]) <= opt_.pivot_tol) return Loop::Stalled;
      pivot(q, r, alpha, xB_[r] / alpha[r]);
    }
  }

  bool dual_feasible(const Vec& y) const {
    for (int j = 0; j < n_; ++j) {
      if (where_[j] >= 0) continue;
      if (c_[j] - col_dot(j, y) < -dtol_) return false;
    }
    return true;
  }

  bool primal_feasible() const {
    for (int i = 0; i < m_; ++i) {
      if (artificial(head_[i])) {
        if (std::abs(xB_[i]) > ftol_) return false;
      } else if (xB_[i] < -ftol_) {
        return false;
      }
    }
    return true;
  }

  void set_basis(const std::vector<int>& basic) {
    head_ = basic;
    where_.assign(n_ + m_, -1);
    for (int i = 0; i < m_; ++i) where_[head_[i]] = i;
  }

  bool try_warm(const LPBasis& warm, LPSolution& sol) {
    if (static_cast<int>(warm.basic.size()) != m_) return false;
    std::vector<char> seen(n_ + m_, 0);
    for (int i = 0; i < m_; ++i) {
      const int j = warm.basic[i];
      if (j < 0 || j >= n_ + m_ || seen[j]) return false;
      if (artificial(j) && j - n_ != i) return false;
      seen[j] = 1;
    }
    set_basis(warm.basic);
    if (!refactor()) return false;
    compute_xB();
    if (!primal_feasible()) {
      if (!dual_feasible(duals(false))) return false;
      const Loop l = dual_loop();
      if (l == Loop::Stalled) return false;
      if (l == Loop::Infeasible) {
        sol.status = LPStatus::Infeasible;
        return true;
      }
    }
    for (int i = 0; i < m_; ++i)
      if (artificial(head_[i])) dropped_.push_back(i);
    return finish(sol);
  }

  void cold(LPSolution& sol) {
    iterations_ = 0;
    dropped_.clear();
    // Choose row orientation so that a positive unit column can start the basis.
    std::vector<int> unit(m_, -1);
    std::vector<int> neg_unit(m_, -1);
    for (int j = 0; j < n_; ++j) {
      if (A_.col(j).nonZeros() != 1) continue;
      SpMat::InnerIterator it(A_, j);
      if (it.value() == 0.0) continue;
      const int i = it.row();
      if (it.value() > 0 && unit[i] < 0) unit[i] = j;
      if (it.value() < 0 && neg_unit[i] < 0) neg_unit[i] = j;
    }
    std::vector<int> basic(m_);
    std::vector<double> signs(m_, 1.0);
    bool need_phase1 = false;
    for (int i = 0; i < m_; ++i) {
      int pick = -1;
      if (b_[i] > 0) {
        pick = unit[i];
      } else if (b_[i] < 0) {
        signs[i] = -1.0;
        pick = neg_unit[i];
      } else if (unit[i] >= 0) {
        pick = unit[i];
      } else if (neg_unit[i] >= 0) {
        signs[i] = -1.0;
        pick = neg_unit[i];
      }
      if (pick < 0) {
        pick = n_ + i;
        need_phase1 = true;
      }
      basic[i] = pick;
    }
    apply_row_signs(signs);
    set_basis(basic);
    if (!refactor()) throw Error(ErrorCode::NumericalBreakdown, "initial basis is singular");
    compute_xB();

    if (need_phase1) {
      primal_loop(true);
      if (!refactor()) throw Error(ErrorCode::NumericalBreakdown, "basis factorization failed");
      compute_xB();
      double infeas = 0.0;
      for (int i = 0; i < m_; ++i)
        if (artificial(head_[i])) infeas += std::abs(xB_[i]);
      if (infeas > 1e2 * ftol_) {
        sol.status = LPStatus::Infeasible;
        return;
      }
      drive_out_artificials();
    }
    const Loop l = primal_loop(false);
    if (l == Loop::Unbounded) {
      sol.status = LPStatus::Unbounded;
      return;
    }
    if (!finish(sol)) throw Error(ErrorCode::NumericalBreakdown, "could not certify optimal basis");
  }

  void drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (!artificial(head_[i])) continue;
      Vec rho = Vec::Zero(m_);
      rho[i] = 1.0;
      btran(rho);
      int q = -1;
      double best = 1e-7;
      for (int j = 0; j < n_; ++j) {
        if (where_[j] >= 0) continue;
        const double a = std::abs(col_dot(j, rho));
        if (a > best) {
          best = a;
          q = j;
        }
      }
      if (q < 0) {
        dropped_.push_back(i);
        continue;
      }
      Vec alpha = column(q);
      ftran(alpha);
      pivot(q, i, alpha, xB_[i] / alpha[i]);
    }
    if (!refactor()) throw Error(ErrorCode::NumericalBreakdown, "basis factorization failed");
    compute_xB();
  }

  /// Refactors, verifies primal and dual feasibility, repairs small drift and extracts the solution.
  bool finish(LPSolution& sol) {
    for (int attempt = 0; attempt < 5; ++attempt) {
      if (!refactor()) return false;
      compute_xB();
      if (!primal_feasible()) {
        const Loop l = dual_loop();
        if (l == Loop::Infeasible) {
          sol.status = LPStatus::Infeasible;
          return true;
        }
        if (l == Loop::Stalled) return false;
        continue;
      }
      const Vec y = duals(false);
      if (!dual_feasible(y)) {
        if (primal_loop(false) == Loop::Unbounded) {
          sol.status = LPStatus::Unbounded;
          return true;
        }
        continue;
      }
      sol.status = LPStatus::Optimal;
      sol.primal = Vec::Zero(n_);
      for (int i = 0; i < m_; ++i)
        if (!artificial(head_[i])) sol.primal[head_[i]] = std::max(xB_[i], 0.0);
      sol.objective = c_.dot(sol.primal) + offset_;
      sol.dual.resize(m_);
      for (int i = 0; i < m_; ++i) sol.dual[i] = sign_[i] * y[i];
      std::sort(dropped_.begin(), dropped_.end());
      dropped_.erase(std::unique(dropped_.begin(), dropped_.end()), dropped_.end());
      sol.dropped_rows = dropped_;
      return true;
    }
    return false;
  }
};

}  // namespace detail

/**
 * @brief Solves a standard-form LP with a two-phase revised simplex.
 *
 * Dantzig pricing with lowest-index ties; Bland's rule takes over after a run of
 * degenerate pivots. The optimal dual is the basic solution B^{-T} c_B, i.e. a
 * vertex of the dual polyhedron. When @p warm is given and fits, the solve
 * starts from it (dual simplex if only the right-hand side moved) and falls back
 * to a cold start otherwise. @p basis_out receives the optimal basis.
 */
inline LPSolution solve_lp(const StandardLP& lp, const LPBasis* warm = nullptr,
                           LPBasis* basis_out = nullptr, const SimplexOptions& opt = {}) {
  if (lp.cols() < 1 || lp.rows() < 1)
    throw Error(ErrorCode::DimensionMismatch, "LP needs at least one row and one column");
  if (lp.cost.size() != lp.cols() || lp.eq_rhs.size() != lp.rows())
    throw Error(ErrorCode::DimensionMismatch, "cost/rhs sizes do not match the constraint matrix");
  detail::RevisedSimplex simplex(lp, opt);
  return simplex.solve(warm, basis_out);
}

// ---------------------------------------------------------------------------
// General form and canonicalization

enum class RowSense { Equal, LessEqual, GreaterEqual };

/// min cost'x  s.t.  matrix x (sense) rhs,  lower <= x <= upper  (upper may be +inf).
struct GeneralLP {
  Vec cost;
  Vec lower;
  Vec upper;
  SpMat matrix;
  std::vector<RowSense> sense;
  Vec rhs;
};

/// Inverse map from a standard-form solution back to the general variables.
struct VarMap {
  int n_original = 0;
  int n_general_rows = 0;
  int n_standard_cols = 0;
  Vec shift;                      // x = y.head(n_original) + shift
  std::vector<int> slack_column;  // per general row; -1 for equalities
  std::vector<int> upper_row;     // per original variable; -1 without a finite upper bound

  Vec recover(const Vec& y) const {
    if (y.size() != n_standard_cols)
      throw Error(ErrorCode::MapMismatch, "solution length does not match the variable map");
    return y.head(n_original) + shift;
  }
};

/**
 * Shifts every variable to a zero lower bound, appends a slack (surplus) per
 * inequality row and one bound row per finite upper bound. General rows keep
 * their index in the standard form; bound rows follow them.
 */
inline std::pair<StandardLP, VarMap> canonicalize(const GeneralLP& g) {
  const int n = static_cast<int>(g.cost.size());
  const int rows = static_cast<int>(g.matrix.rows());
  if (g.lower.size() != n || g.upper.size() != n || g.matrix.cols() != n ||
      g.rhs.size() != rows || static_cast<int>(g.sense.size()) != rows)
    throw Error(ErrorCode::DimensionMismatch, "inconsistent general LP dimensions");
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(g.lower[j]))
      throw Error(ErrorCode::UnboundedVariable, "variable " + std::to_string(j) + " has no finite lower bound");
    if (g.upper[j] < g.lower[j])
      throw Error(ErrorCode::InvalidParams, "variable " + std::to_string(j) + " has upper < lower");
  }

  VarMap map;
  map.n_original = n;
  map.n_general_rows = rows;
  map.shift = g.lower;
  map.slack_column.assign(rows, -1);
  map.upper_row.assign(n, -1);

  int col = n;
  for (int i = 0; i < rows; ++i)
    if (g.sense[i] != RowSense::Equal) map.slack_column[i] = col++;
  int row = rows;
  for (int j = 0; j < n; ++j)
    if (std::isfinite(g.upper[j])) map.upper_row[j] = row++;
  const int n_bound_rows = row - rows;
  col += n_bound_rows;
  map.n_standard_cols = col;

  std::vector<Triplet> trips;
  trips.reserve(g.matrix.nonZeros() + rows + 2 * n_bound_rows);
  for (int j = 0; j < n; ++j)
    for (SpMat::InnerIterator it(g.matrix, j); it; ++it) trips.emplace_back(it.row(), j, it.value());
  for (int i = 0; i < rows; ++i) {
    if (map.slack_column[i] < 0) continue;
    trips.emplace_back(i, map.slack_column[i], g.sense[i] == RowSense::LessEqual ? 1.0 : -1.0);
  }
  int bound_slack = col - n_bound_rows;
  for (int j = 0; j < n; ++j) {
    if (map.upper_row[j] < 0) continue;
    trips.emplace_back(map.upper_row[j], j, 1.0);
    trips.emplace_back(map.upper_row[j], bound_slack++, 1.0);
  }

  StandardLP lp;
  lp.eq_matrix.resize(row, col);
  lp.eq_matrix.setFromTriplets(trips.begin(), trips.end());
  lp.eq_matrix.makeCompressed();
  lp.eq_rhs.resize(row);
  lp.eq_rhs.head(rows) = g.rhs - g.matrix * g.lower;
  for (int j = 0; j < n; ++j)
    if (map.upper_row[j] >= 0) lp.eq_rhs[map.upper_row[j]] = g.upper[j] - g.lower[j];
  lp.cost = Vec::Zero(col);
  lp.cost.head(n) = g.cost;
  lp.objective_offset = g.cost.dot(g.lower);
  return {std::move(lp), std::move(map)};
}

inline SpMat sparse_from_dense(const Eigen::MatrixXd& dense) { return dense.sparseView(); }

}  // namespace rhmpc
