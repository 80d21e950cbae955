#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "rhmpc/lp.hpp"
#include "rhmpc/realization.hpp"

namespace rhmpc {

/// Coupling (design) variables w = (x0, eta). Encoded as [x0..., eta].
struct Targets {
  Vec x0;
  double eta = 0.0;

  Vec encode() const {
    Vec w(x0.size() + 1);
    w.head(x0.size()) = x0;
    w[x0.size()] = eta;
    return w;
  }

  static Targets decode(const Vec& w) {
    if (w.size() < 1) throw Error(ErrorCode::DimensionMismatch, "empty target vector");
    return Targets{w.head(w.size() - 1), w[w.size() - 1]};
  }

  friend bool operator==(const Targets& a, const Targets& b) { return a.x0 == b.x0 && a.eta == b.eta; }
};

/// Box on the encoded targets.
struct TargetBox {
  Vec lower;
  Vec upper;

  int dim() const { return static_cast<int>(lower.size()); }
  Vec center() const { return 0.5 * (lower + upper); }
  bool contains(const Vec& w, double tol = 1e-9) const {
    if (w.size() != lower.size()) return false;
    for (int i = 0; i < dim(); ++i)
      if (w[i] < lower[i] - tol || w[i] > upper[i] + tol) return false;
    return true;
  }
  void validate() const {
    if (lower.size() != upper.size() || lower.size() == 0)
      throw Error(ErrorCode::DimensionMismatch, "target box bounds differ in size");
    for (int i = 0; i < dim(); ++i)
      if (!(std::isfinite(lower[i]) && std::isfinite(upper[i]) && lower[i] <= upper[i]))
        throw Error(ErrorCode::InvalidParams, "target box must be finite and nonempty");
  }
};

/// Standard-form pieces of one period subproblem that depend on the realization.
struct StageData {
  SpMat recourse;  // W
  Vec rhs;         // r (before subtracting T w)
  Vec cost;        // c
  double offset = 0.0;
};

/**
 * @brief Period recourse subproblem  h(w, d) = offset + min c'y  s.t.  W y = r - T w, y >= 0.
 *
 * The coupling matrix T is fixed; W, r and c are produced per realization by
 * @c data_builder. Row indices refer to the standard form.
 */
struct StageTemplate {
  SpMat coupling;   // T, rows x n_w
  Vec design_cost;  // c_w; g(w) = c_w' w is kept out of h
  VarMap var_map;
  std::vector<int> initial_state_rows;   // rows tying x_{xi,0} to x0, one per state component
  std::vector<int> terminal_state_rows;  // rows tying x_{xi,N} to x0
  std::vector<int> elastic_columns;      // penalised slack columns
  std::function<StageData(const PeriodRealization&)> data_builder;

  int n_w() const { return static_cast<int>(coupling.cols()); }
  int rows() const { return static_cast<int>(coupling.rows()); }
  int n_x() const { return n_w() - 1; }

  StageData data(const PeriodRealization& d) const {
    StageData s = data_builder(d);
    if (s.recourse.rows() != rows() || s.rhs.size() != rows() || s.cost.size() != s.recourse.cols())
      throw Error(ErrorCode::DimensionMismatch, "stage data does not match the template");
    return s;
  }
};

struct StageResult {
  double cost_h = 0.0;
  Vec dual_vertex;
  Vec primal;        // standard-form y
  Vec trajectories;  // original (general-form) variables
  double slack_activation = 0.0;
  LPBasis basis;
};

inline StandardLP build_stage(const StageTemplate& tpl, const Vec& w, const StageData& data) {
  if (w.size() != tpl.n_w()) throw Error(ErrorCode::DimensionMismatch, "target dimension mismatch");
  StandardLP lp;
  lp.eq_matrix = data.recourse;
  lp.eq_rhs = data.rhs - tpl.coupling * w;
  lp.cost = data.cost;
  lp.objective_offset = data.offset;
  return lp;
}

inline StandardLP build_stage(const StageTemplate& tpl, const Targets& w, const PeriodRealization& d) {
  return build_stage(tpl, w.encode(), tpl.data(d));
}

inline StageResult solve_stage(const StageTemplate& tpl, const Vec& w, const StageData& data,
                               const LPBasis* warm = nullptr) {
  const StandardLP lp = build_stage(tpl, w, data);
  StageResult res;
  const LPSolution sol = solve_lp(lp, warm, &res.basis);
  if (sol.status == LPStatus::Infeasible)
    throw Error(ErrorCode::StageInfeasible, "period subproblem infeasible at the given targets");
  if (sol.status != LPStatus::Optimal)
    throw Error(ErrorCode::SolverFailure, std::string("period subproblem ") + to_string(sol.status));
  res.cost_h = sol.objective;
  res.dual_vertex = sol.dual;
  res.primal = sol.primal;
  res.trajectories = tpl.var_map.recover(sol.primal);
  for (int j : tpl.elastic_columns) res.slack_activation += sol.primal[j];
  return res;
}

inline StageResult solve_stage(const StageTemplate& tpl, const Targets& w, const PeriodRealization& d,
                               const LPBasis* warm = nullptr) {
  return solve_stage(tpl, w.encode(), tpl.data(d), warm);
}

/// Value of a dual vector at (w, d): offset + pi'(r - T w). A lower bound on h when pi is dual feasible.
inline double dual_value(const StageTemplate& tpl, const StageData& data, const Vec& pi, const Vec& w) {
  return data.offset + pi.dot(data.rhs - tpl.coupling * w);
}

/// Largest violation of W'pi <= c; nonpositive means pi is dual feasible for this data.
inline double dual_violation(const StageData& data, const Vec& pi) {
  const Vec reduced = data.cost - data.recourse.transpose() * pi;
  return reduced.size() ? -reduced.minCoeff() : 0.0;
}

/**
 * Basic dual solution of another realization's data for a given basis: solves
 * B'pi = c_B with B taken from @p data's columns (an index >= cols marks the
 * unit column of an artificial at zero cost). Returns nothing when B is
 * singular or pi violates W'pi <= c by more than @p tol.
 */
inline std::optional<Vec> basis_dual(const StageData& data, const LPBasis& basis, double tol) {
  const int rows = static_cast<int>(data.recourse.rows()), cols = static_cast<int>(data.recourse.cols());
  if (static_cast<int>(basis.basic.size()) != rows) return std::nullopt;
  std::vector<Triplet> trips;
  Vec cb(rows);
  for (int i = 0; i < rows; ++i) {
    const int j = basis.basic[i];
    if (j >= cols) {
      trips.emplace_back(j - cols, i, 1.0);
      cb[i] = 0.0;
    } else {
      for (SpMat::InnerIterator it(data.recourse, j); it; ++it) trips.emplace_back(it.row(), i, it.value());
      cb[i] = data.cost[j];
    }
  }
  SpMat B(rows, rows);
  B.setFromTriplets(trips.begin(), trips.end());
  B.makeCompressed();
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(B);
  if (lu.info() != Eigen::Success) return std::nullopt;
  Vec pi = lu.transpose().solve(cb);
  if (lu.info() != Eigen::Success || !pi.allFinite()) return std::nullopt;
  if ((B.transpose() * pi - cb).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, cb.cwiseAbs().maxCoeff()))
    return std::nullopt;
  if (dual_violation(data, pi) > tol) return std::nullopt;
  return pi;
}

/**
 * min over w in the box of h(w, d): the same subproblem with w as extra
 * columns (shifted to the box's lower corner, with bound rows).
 */
inline std::pair<double, Vec> stage_floor(const StageTemplate& tpl, const StageData& data, const TargetBox& box) {
  box.validate();
  const int rows = tpl.rows(), ny = static_cast<int>(data.recourse.cols()), nw = tpl.n_w();
  std::vector<Triplet> trips;
  trips.reserve(data.recourse.nonZeros() + tpl.coupling.nonZeros() + 2 * nw);
  for (int j = 0; j < ny; ++j)
    for (SpMat::InnerIterator it(data.recourse, j); it; ++it) trips.emplace_back(it.row(), j, it.value());
  for (int k = 0; k < nw; ++k) {
    for (SpMat::InnerIterator it(tpl.coupling, k); it; ++it) trips.emplace_back(it.row(), ny + k, it.value());
    trips.emplace_back(rows + k, ny + k, 1.0);
    trips.emplace_back(rows + k, ny + nw + k, 1.0);
  }
  StandardLP lp;
  lp.eq_matrix.resize(rows + nw, ny + 2 * nw);
  lp.eq_matrix.setFromTriplets(trips.begin(), trips.end());
  lp.eq_rhs.resize(rows + nw);
  lp.eq_rhs.head(rows) = data.rhs - tpl.coupling * box.lower;
  lp.eq_rhs.tail(nw) = box.upper - box.lower;
  lp.cost = Vec::Zero(ny + 2 * nw);
  lp.cost.head(ny) = data.cost;
  lp.objective_offset = data.offset;
  const LPSolution sol = solve_lp(lp);
  if (sol.status != LPStatus::Optimal)
    throw Error(ErrorCode::StageInfeasible, "no target in the box admits a feasible recourse");
  return {sol.objective, box.lower + sol.primal.segment(ny, nw)};
}

}  // namespace rhmpc
