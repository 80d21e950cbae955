#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "rhmpc/battery.hpp"
#include "rhmpc/cuts.hpp"
#include "rhmpc/oracle.hpp"

namespace rhmpc {

struct ControllerOptions {
  CutEngineOptions cuts;
  /// The running cost phi_m(w_m) is evaluated every period up to this m, then every eval_every-th period.
  int eval_full_until = 100;
  int eval_every = 5;
};

/// Per-period gap metrics.
struct GapRecord {
  int period = 0;
  Targets targets;  // w_m, the targets applied during period m
  double stage_cost = 0.0;           // h(w_m, d_m)
  double slack_activation = 0.0;     // peak slack used in period m
  double running_cost = std::numeric_limits<double>::quiet_NaN();  // phi_m(w_m), NaN when not evaluated
  double lower_bound = 0.0;          // cut lower bound at w_m
  double master_value = 0.0;         // cut lower bound at w_{m+1}
  double eps = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> epsbar;
  Targets next_targets;
};

/// Relative gap (upper - lower) / |upper|; the magnitude keeps the sign of the gap when costs are negative.
inline double relative_gap(double upper, double lower) { return (upper - lower) / std::abs(upper); }

/// Overall gap against a long-run reference cost at the same targets.
inline double overall_gap(double reference_cost, double lower_bound) {
  return relative_gap(reference_cost, lower_bound);
}

/**
 * Controller state between periods: the targets for the coming period, the
 * cutting-plane engine (vertex store, cuts, history) and the accumulated
 * realized cost.
 */
struct HierarchyState {
  int period_m = 1;
  Vec targets_w;
  CutEngine engine;
  double realized_cost_accum = 0.0;
  ControllerOptions options;

  HierarchyState(StageTemplate tpl, TargetBox box, Vec initial_targets, ControllerOptions opt = {})
      : targets_w(std::move(initial_targets)), engine(std::move(tpl), std::move(box), opt.cuts), options(opt) {
    if (targets_w.size() != engine.box().dim())
      throw Error(ErrorCode::DimensionMismatch, "initial targets have the wrong dimension");
    if (!engine.box().contains(targets_w)) throw Error(ErrorCode::InvalidParams, "initial targets outside the box");
    if (opt.eval_every < 1) throw Error(ErrorCode::InvalidParams, "eval_every must be >= 1");
  }

  /// Starts at the centre of the box.
  HierarchyState(StageTemplate tpl, TargetBox box, ControllerOptions opt = {})
      : HierarchyState(std::move(tpl), box, box.center(), opt) {}

  const std::vector<Cut>& cuts() const { return engine.cuts(); }
  const VertexStore& vertex_store() const { return engine.store(); }
  Targets targets() const { return Targets::decode(targets_w); }

  bool evaluates_running_cost(int m) const {
    return m <= options.eval_full_until || m % options.eval_every == 0;
  }
};

/// Low-level policy for the coming period: the stage LP on forecast data with the targets fixed.
inline StageResult intra_period_mpc(const StageTemplate& tpl, const Vec& w_next, const PeriodRealization& forecast,
                                    const LPBasis* warm = nullptr) {
  return solve_stage(tpl, w_next, tpl.data(forecast), warm);
}

inline BatteryTrajectory intra_period_mpc(const StageTemplate& tpl, const BatteryParams& params, const Vec& w_next,
                                          const PeriodRealization& forecast) {
  return decode_trajectory(intra_period_mpc(tpl, w_next, forecast), params, forecast);
}

/**
 * Closes period m with its realized data: solves S_m at (w_m, d_m), stores the
 * dual vertex, rescales the live cuts and adds the cut at w_m, solves the
 * master for w_{m+1}, and reports phi_m(w_m) against the cut bound at w_m.
 */
inline GapRecord step_period(HierarchyState& state, const PeriodRealization& realized) {
  CutEngine& engine = state.engine;
  const Vec w = state.targets_w;
  GapRecord rec;
  rec.period = state.period_m;
  rec.targets = Targets::decode(w);

  const StageResult s = engine.solve(realized, w);
  rec.stage_cost = s.cost_h;
  rec.slack_activation = s.slack_activation;
  state.realized_cost_accum += s.cost_h + engine.stage_template().design_cost.dot(w);

  engine.add_solution(s);
  engine.observe(realized);
  engine.add_cut(w);
  const MasterSolution next = engine.solve_master(w);

  rec.lower_bound = engine.lower_bound_at(w);
  rec.master_value = next.value;
  if (state.evaluates_running_cost(rec.period)) {
    rec.running_cost = engine.sample_average_cost(w);
    rec.eps = relative_gap(rec.running_cost, rec.lower_bound);
  }
  rec.next_targets = Targets::decode(next.w);
  state.targets_w = next.w;
  ++state.period_m;
  return rec;
}

/// Initial targets from the SAA of a bundle of forecast periods.
inline Vec initial_targets_from_forecasts(const StageTemplate& tpl, const std::vector<PeriodRealization>& forecasts,
                                          const TargetBox& box, const OracleOptions& opt = {}) {
  return solve_saa(tpl, forecasts, box, opt).w;
}

inline constexpr const char* kMetricsCsvHeader = "period,E0_target,peak_target,running_cost,lower_bound,eps,epsbar";

namespace detail {
inline std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}
}  // namespace detail

inline void write_metrics_row(std::ostream& out, const GapRecord& r) {
  out << r.period << "," << detail::csv_number(r.targets.x0[0]) << "," << detail::csv_number(r.targets.eta) << ","
      << detail::csv_number(r.running_cost) << "," << detail::csv_number(r.lower_bound) << ","
      << detail::csv_number(r.eps) << "," << (r.epsbar ? detail::csv_number(*r.epsbar) : "") << "\n";
}

}  // namespace rhmpc
