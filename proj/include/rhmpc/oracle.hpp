#pragma once

#include <unordered_map>
#include <vector>

#include "rhmpc/scenario.hpp"
#include "rhmpc/stage.hpp"

namespace rhmpc {

struct OracleOptions {
  int max_periods = 40;  // history length cap for the monolithic solves
};

struct SaaResult {
  Vec w;
  double cost = 0.0;
  int blocks = 0;  // distinct realizations in the extensive form
};

struct NonperiodicResult {
  double cost = 0.0;
  Vec initial_state;
  Vec final_state;
  double eta = 0.0;
};

namespace detail {

inline void check_history(const std::vector<PeriodRealization>& history, const OracleOptions& opt) {
  if (history.empty()) throw Error(ErrorCode::InvalidParams, "oracle needs a nonempty history");
  if (static_cast<int>(history.size()) > opt.max_periods)
    throw Error(ErrorCode::SizeCapExceeded, "history of " + std::to_string(history.size()) +
                                                " periods exceeds the oracle cap of " + std::to_string(opt.max_periods));
}

inline void append_block(std::vector<Triplet>& trips, const SpMat& m, int row0, int col0) {
  for (int j = 0; j < m.cols(); ++j)
    for (SpMat::InnerIterator it(m, j); it; ++it) trips.emplace_back(row0 + it.row(), col0 + j, it.value());
}

}  // namespace detail

/**
 * Sample average approximation min_w c_w'w + (1/m) sum h(w, d_xi) as one
 * block-angular LP. Identical realizations share a block weighted by their
 * multiplicity; the blocks couple only through the w columns.
 */
inline SaaResult solve_saa(const StageTemplate& tpl, const std::vector<PeriodRealization>& history,
                           const TargetBox& box, const OracleOptions& opt = {}) {
  detail::check_history(history, opt);
  box.validate();
  if (box.dim() != tpl.n_w()) throw Error(ErrorCode::DimensionMismatch, "target box / template mismatch");

  std::vector<StageData> blocks;
  std::vector<int> counts;
  std::unordered_map<PeriodRealization, int, RealizationHash> index;
  for (const auto& d : history) {
    auto [it, fresh] = index.emplace(d, static_cast<int>(blocks.size()));
    if (fresh) {
      blocks.push_back(tpl.data(d));
      counts.push_back(0);
    }
    ++counts[it->second];
  }
  const int K = static_cast<int>(blocks.size()), rows = tpl.rows(), nw = tpl.n_w();
  const double m = static_cast<double>(history.size());
  int ny = 0;
  std::vector<int> col0(K);
  for (int k = 0; k < K; ++k) col0[k] = ny, ny += static_cast<int>(blocks[k].recourse.cols());
  const int wcol = ny, scol = ny + nw, brow = K * rows;

  std::vector<Triplet> trips;
  StandardLP lp;
  lp.eq_rhs.resize(brow + nw);
  lp.cost = Vec::Zero(ny + 2 * nw);
  lp.objective_offset = tpl.design_cost.dot(box.lower);
  const Vec Tl = tpl.coupling * box.lower;
  for (int k = 0; k < K; ++k) {
    const double weight = counts[k] / m;
    detail::append_block(trips, blocks[k].recourse, k * rows, col0[k]);
    detail::append_block(trips, tpl.coupling, k * rows, wcol);
    lp.eq_rhs.segment(k * rows, rows) = blocks[k].rhs - Tl;
    lp.cost.segment(col0[k], blocks[k].recourse.cols()) = weight * blocks[k].cost;
    lp.objective_offset += weight * blocks[k].offset;
  }
  for (int i = 0; i < nw; ++i) {
    trips.emplace_back(brow + i, wcol + i, 1.0);
    trips.emplace_back(brow + i, scol + i, 1.0);
    lp.eq_rhs[brow + i] = box.upper[i] - box.lower[i];
  }
  lp.cost.segment(wcol, nw) = tpl.design_cost;
  lp.eq_matrix.resize(brow + nw, ny + 2 * nw);
  lp.eq_matrix.setFromTriplets(trips.begin(), trips.end());
  lp.eq_matrix.makeCompressed();

  const LPSolution sol = solve_lp(lp);
  if (sol.status == LPStatus::Infeasible) throw Error(ErrorCode::StageInfeasible, "SAA problem infeasible");
  if (sol.status != LPStatus::Optimal) throw Error(ErrorCode::SolverFailure, std::string("SAA ") + to_string(sol.status));
  return SaaResult{box.lower + sol.primal.segment(wcol, nw), sol.objective, K};
}

/**
 * Long-horizon problem over the history in order: period xi starts where
 * period xi-1 ended (state z_xi) instead of returning to a common x0. The peak
 * target eta stays shared. With @p initial_state_free the first and last
 * states are independent decisions; otherwise the last state must equal the
 * first. Costs are averaged over periods like the SAA so the two compare directly.
 */
inline NonperiodicResult solve_nonperiodic(const StageTemplate& tpl, const std::vector<PeriodRealization>& history,
                                           const TargetBox& box, bool initial_state_free = true,
                                           const OracleOptions& opt = {}) {
  detail::check_history(history, opt);
  box.validate();
  const int nx = tpl.n_x(), nw = tpl.n_w(), rows = tpl.rows();
  if (box.dim() != nw) throw Error(ErrorCode::DimensionMismatch, "target box / template mismatch");
  if (static_cast<int>(tpl.initial_state_rows.size()) != nx || static_cast<int>(tpl.terminal_state_rows.size()) != nx)
    throw Error(ErrorCode::MapMismatch, "template does not name its boundary-state rows");

  // Split T's state columns into initial-row and terminal-row parts.
  std::vector<Triplet> t_init, t_term, t_eta;
  for (int k = 0; k < nw; ++k)
    for (SpMat::InnerIterator it(tpl.coupling, k); it; ++it) {
      const int r = static_cast<int>(it.row());
      if (k == nx) {
        t_eta.emplace_back(r, 0, it.value());
      } else if (r == tpl.initial_state_rows[k]) {
        t_init.emplace_back(r, k, it.value());
      } else if (r == tpl.terminal_state_rows[k]) {
        t_term.emplace_back(r, k, it.value());
      } else {
        throw Error(ErrorCode::MapMismatch, "state target couples outside the boundary rows");
      }
    }

  const int m = static_cast<int>(history.size());
  const int n_states = initial_state_free ? m + 1 : m;
  std::vector<StageData> data;
  data.reserve(m);
  int ny = 0;
  std::vector<int> col0(m);
  for (int xi = 0; xi < m; ++xi) {
    data.push_back(tpl.data(history[xi]));
    col0[xi] = ny;
    ny += static_cast<int>(data.back().recourse.cols());
  }
  // Columns: y blocks, states z_0..z_{n_states-1} (nx each), eta, then bound slacks.
  const int zcol = ny, ecol = ny + n_states * nx, n_bounded = n_states * nx + 1, scol = ecol + 1;
  const int brow = m * rows;
  auto state_col = [&](int s, int k) { return zcol + (s % n_states) * nx + k; };
  auto lower_of = [&](int bounded) { return bounded < n_states * nx ? box.lower[bounded % nx] : box.lower[nx]; };
  auto upper_of = [&](int bounded) { return bounded < n_states * nx ? box.upper[bounded % nx] : box.upper[nx]; };

  StandardLP lp;
  lp.eq_rhs.resize(brow + n_bounded);
  lp.cost = Vec::Zero(scol + n_bounded);
  lp.objective_offset = 0.0;
  std::vector<Triplet> trips;
  for (int xi = 0; xi < m; ++xi) {
    const int r0 = xi * rows;
    detail::append_block(trips, data[xi].recourse, r0, col0[xi]);
    Vec rhs = data[xi].rhs;
    for (const auto& t : t_init) {
      trips.emplace_back(r0 + t.row(), state_col(xi, t.col()), t.value());
      rhs[t.row()] -= t.value() * box.lower[t.col()];
    }
    for (const auto& t : t_term) {
      trips.emplace_back(r0 + t.row(), state_col(xi + 1, t.col()), t.value());
      rhs[t.row()] -= t.value() * box.lower[t.col()];
    }
    for (const auto& t : t_eta) {
      trips.emplace_back(r0 + t.row(), ecol, t.value());
      rhs[t.row()] -= t.value() * box.lower[nx];
    }
    lp.eq_rhs.segment(r0, rows) = rhs;
    lp.cost.segment(col0[xi], data[xi].recourse.cols()) = data[xi].cost / m;
    lp.objective_offset += data[xi].offset / m;
  }
  for (int b = 0; b < n_bounded; ++b) {
    trips.emplace_back(brow + b, zcol + b, 1.0);
    trips.emplace_back(brow + b, scol + b, 1.0);
    lp.eq_rhs[brow + b] = upper_of(b) - lower_of(b);
  }
  // Design cost applies to (z_0, eta).
  for (int k = 0; k < nx; ++k) lp.cost[state_col(0, k)] = tpl.design_cost[k];
  lp.cost[ecol] = tpl.design_cost[nx];
  lp.objective_offset += tpl.design_cost.dot(box.lower);
  lp.eq_matrix.resize(brow + n_bounded, scol + n_bounded);
  lp.eq_matrix.setFromTriplets(trips.begin(), trips.end());
  lp.eq_matrix.makeCompressed();

  const LPSolution sol = solve_lp(lp);
  if (sol.status == LPStatus::Infeasible) throw Error(ErrorCode::StageInfeasible, "long-horizon problem infeasible");
  if (sol.status != LPStatus::Optimal)
    throw Error(ErrorCode::SolverFailure, std::string("long-horizon problem ") + to_string(sol.status));
  NonperiodicResult out;
  out.cost = sol.objective;
  out.initial_state = box.lower.head(nx) + sol.primal.segment(state_col(0, 0), nx);
  out.final_state = box.lower.head(nx) + sol.primal.segment(state_col(m, 0), nx);
  out.eta = box.lower[nx] + sol.primal[ecol];
  return out;
}

/// Exact expectation over a finite-support pool: c_w'w + sum_k p_k h(w, d_k).
inline double reference_cost(const StageTemplate& tpl, const ScenarioPool& pool, const Vec& w) {
  pool.validate();
  double s = tpl.design_cost.dot(w);
  for (int k = 0; k < pool.size(); ++k)
    if (pool.weights[k] > 0) s += pool.weights[k] * solve_stage(tpl, w, tpl.data(pool.support[k])).cost_h;
  return s;
}

inline double reference_cost(const StageTemplate& tpl, const ScenarioPool& pool, const Targets& w) {
  return reference_cost(tpl, pool, w.encode());
}

/// Every pool template once, weighted by its probability, as an SAA history surrogate.
inline SaaResult solve_pool_saa(const StageTemplate& tpl, const ScenarioPool& pool, const TargetBox& box) {
  pool.validate();
  // Exact expectation: equal weights let the pool itself be the history.
  const double w0 = pool.weights[0];
  bool uniform = true;
  for (int k = 1; k < pool.size(); ++k) uniform = uniform && pool.weights[k] == w0;
  if (!uniform) throw Error(ErrorCode::InvalidParams, "pool SAA needs uniform weights");
  OracleOptions opt;
  opt.max_periods = std::max(opt.max_periods, pool.size());
  return solve_saa(tpl, pool.support, box, opt);
}

}  // namespace rhmpc
