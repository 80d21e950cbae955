#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rhmpc/config.hpp"
#include "rhmpc/stage.hpp"

namespace rhmpc {

/// Battery and tariff parameters. kW / kWh / hours / $ throughout.
struct BatteryParams {
  double capacity = 500.0;         // E-bar, kWh
  double discharge_power = 1000.0; // P-bar, kW
  double charge_power = 1000.0;    // P-under, kW
  double fr_reserve = 0.25;        // rho, kWh of headroom per kW of FR capacity
  double ramp_limit = 500.0;       // dP-bar, kW/h
  double demand_charge = 0.5;      // pi^D, $/kW per period-averaged horizon
  int period_length = 24;          // n, hours
  /// Penalty on peak slack; negative means 1e3 * demand_charge.
  double elastic_penalty = -1.0;
  bool elastic = true;

  double penalty() const { return elastic_penalty >= 0 ? elastic_penalty : 1e3 * demand_charge; }

  void validate() const {
    const double vals[] = {capacity, discharge_power, charge_power, fr_reserve, ramp_limit, demand_charge};
    for (double v : vals)
      if (!(v >= 0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidParams, "battery parameters must be finite and nonnegative");
    if (capacity <= 0) throw Error(ErrorCode::InvalidParams, "capacity must be positive");
    if (period_length < 1) throw Error(ErrorCode::InvalidParams, "period_length must be >= 1");
  }

  static BatteryParams from_config(const KeyValueConfig& kv) {
    BatteryParams p;
    p.capacity = kv.get_double("capacity", p.capacity);
    p.discharge_power = kv.get_double("discharge_power", p.discharge_power);
    p.charge_power = kv.get_double("charge_power", p.charge_power);
    p.fr_reserve = kv.get_double("fr_reserve", p.fr_reserve);
    p.ramp_limit = kv.get_double("ramp_limit", p.ramp_limit);
    p.demand_charge = kv.get_double("demand_charge", p.demand_charge);
    p.period_length = static_cast<int>(kv.get_int("period_length", p.period_length));
    p.elastic_penalty = kv.get_double("elastic_penalty", p.elastic_penalty);
    p.elastic = kv.get_bool("elastic", p.elastic);
    p.validate();
    return p;
  }

  static BatteryParams load(const std::string& path) { return from_config(KeyValueConfig::load(path)); }
};

/**
 * Column and row indices of the battery period model.
 *
 * Columns (general form): P_t, F_t, E_t, then peak slack s_t when elastic,
 * each for t = 0..n. d_t = L_t - P_t + a_t F_t is substituted out.
 *
 * Rows: energy balance (t < n), E_0 = x0, E_n = x0, then six rows per t in
 * 0..n (P+F <= Pbar, P-F >= -Punder, E-rhoF >= 0, E+rhoF <= Ebar,
 * -P+aF-s <= D-L, P+F <= L), then four rows per t < n (E_{t+1}-rhoF_t >= 0,
 * E_{t+1}+rhoF_t <= Ebar, ramp up, ramp down). F <= Pbar becomes one bound
 * row per t after canonicalization. E <= Ebar and P <= Pbar are implied.
 */
struct BatteryLayout {
  int n = 24;
  bool elastic = true;

  int samples() const { return n + 1; }
  int P(int t) const { return t; }
  int F(int t) const { return samples() + t; }
  int E(int t) const { return 2 * samples() + t; }
  int S(int t) const { return 3 * samples() + t; }
  int n_vars() const { return (elastic ? 4 : 3) * samples(); }

  int balance(int t) const { return t; }
  int initial() const { return n; }
  int terminal() const { return n + 1; }
  int per_t(int t, int k) const { return n + 2 + 6 * t + k; }
  int per_step(int t, int k) const { return n + 2 + 6 * samples() + 4 * t + k; }
  int n_general_rows() const { return n + 2 + 6 * samples() + 4 * n; }

  enum PerT { CapUp = 0, CapDown, SocLow, SocHigh, Peak, LoadCap };
  enum PerStep { NextLow = 0, NextHigh, RampUp, RampDown };
};

struct BatteryTrajectory {
  Vec P;           // net discharge, kW
  Vec F;           // FR capacity, kW
  Vec E;           // state of charge, kWh
  Vec d_util;      // utility draw, kW
  Vec peak_slack;  // kW above the peak target
};

namespace detail {

inline GeneralLP battery_general_lp(const BatteryParams& p, const BatteryLayout& L, const PeriodRealization* d) {
  const int n = L.n, N = L.samples();
  GeneralLP g;
  g.cost = Vec::Zero(L.n_vars());
  g.lower = Vec::Zero(L.n_vars());
  g.upper = Vec::Constant(L.n_vars(), kInf);
  for (int t = 0; t < N; ++t) {
    g.lower[L.P(t)] = -p.charge_power;
    g.upper[L.F(t)] = p.discharge_power;
  }
  const int rows = L.n_general_rows();
  g.sense.assign(rows, RowSense::LessEqual);
  g.rhs = Vec::Zero(rows);
  std::vector<Triplet> trips;
  trips.reserve(16 * N);
  auto alpha = [&](int t) { return d ? d->fr_request[t] : 0.0; };
  const double rho = p.fr_reserve;

  for (int t = 0; t < n; ++t) {
    const int r = L.balance(t);
    g.sense[r] = RowSense::Equal;
    trips.emplace_back(r, L.E(t + 1), 1.0);
    trips.emplace_back(r, L.E(t), -1.0);
    trips.emplace_back(r, L.P(t), 1.0);
    if (alpha(t) != 0.0) trips.emplace_back(r, L.F(t), -alpha(t));
  }
  g.sense[L.initial()] = RowSense::Equal;
  trips.emplace_back(L.initial(), L.E(0), 1.0);
  g.sense[L.terminal()] = RowSense::Equal;
  trips.emplace_back(L.terminal(), L.E(n), 1.0);

  for (int t = 0; t < N; ++t) {
    int r = L.per_t(t, BatteryLayout::CapUp);
    trips.emplace_back(r, L.P(t), 1.0);
    trips.emplace_back(r, L.F(t), 1.0);
    g.rhs[r] = p.discharge_power;

    r = L.per_t(t, BatteryLayout::CapDown);
    g.sense[r] = RowSense::GreaterEqual;
    trips.emplace_back(r, L.P(t), 1.0);
    trips.emplace_back(r, L.F(t), -1.0);
    g.rhs[r] = -p.charge_power;

    r = L.per_t(t, BatteryLayout::SocLow);
    g.sense[r] = RowSense::GreaterEqual;
    trips.emplace_back(r, L.E(t), 1.0);
    if (rho != 0.0) trips.emplace_back(r, L.F(t), -rho);

    r = L.per_t(t, BatteryLayout::SocHigh);
    trips.emplace_back(r, L.E(t), 1.0);
    if (rho != 0.0) trips.emplace_back(r, L.F(t), rho);
    g.rhs[r] = p.capacity;

    r = L.per_t(t, BatteryLayout::Peak);
    trips.emplace_back(r, L.P(t), -1.0);
    if (alpha(t) != 0.0) trips.emplace_back(r, L.F(t), alpha(t));
    if (L.elastic) trips.emplace_back(r, L.S(t), -1.0);
    g.rhs[r] = d ? -d->load[t] : 0.0;

    r = L.per_t(t, BatteryLayout::LoadCap);
    trips.emplace_back(r, L.P(t), 1.0);
    trips.emplace_back(r, L.F(t), 1.0);
    g.rhs[r] = d ? d->load[t] : 0.0;
  }
  for (int t = 0; t < n; ++t) {
    int r = L.per_step(t, BatteryLayout::NextLow);
    g.sense[r] = RowSense::GreaterEqual;
    trips.emplace_back(r, L.E(t + 1), 1.0);
    if (rho != 0.0) trips.emplace_back(r, L.F(t), -rho);

    r = L.per_step(t, BatteryLayout::NextHigh);
    trips.emplace_back(r, L.E(t + 1), 1.0);
    if (rho != 0.0) trips.emplace_back(r, L.F(t), rho);
    g.rhs[r] = p.capacity;

    r = L.per_step(t, BatteryLayout::RampUp);
    trips.emplace_back(r, L.P(t + 1), 1.0);
    trips.emplace_back(r, L.P(t), -1.0);
    g.rhs[r] = p.ramp_limit;

    r = L.per_step(t, BatteryLayout::RampDown);
    g.sense[r] = RowSense::GreaterEqual;
    trips.emplace_back(r, L.P(t + 1), 1.0);
    trips.emplace_back(r, L.P(t), -1.0);
    g.rhs[r] = -p.ramp_limit;
  }
  g.matrix.resize(rows, L.n_vars());
  g.matrix.setFromTriplets(trips.begin(), trips.end());
  g.matrix.makeCompressed();

  if (d) {
    for (int t = 0; t < N; ++t) {
      g.cost[L.P(t)] = -d->energy_price[t];
      g.cost[L.F(t)] = d->energy_price[t] * d->fr_request[t] - d->fr_price[t];
      if (L.elastic) g.cost[L.S(t)] = p.penalty();
    }
  }
  return g;
}

}  // namespace detail

/// Stage template of the battery / frequency-regulation market model. Targets are w = (E0, D).
inline StageTemplate build_battery_template(const BatteryParams& params) {
  params.validate();
  const BatteryLayout layout{params.period_length, params.elastic};
  const auto [skeleton, map] = canonicalize(detail::battery_general_lp(params, layout, nullptr));

  StageTemplate tpl;
  tpl.var_map = map;
  std::vector<Triplet> t_trips;
  t_trips.emplace_back(layout.initial(), 0, -1.0);
  t_trips.emplace_back(layout.terminal(), 0, -1.0);
  for (int t = 0; t < layout.samples(); ++t) t_trips.emplace_back(layout.per_t(t, BatteryLayout::Peak), 1, -1.0);
  tpl.coupling.resize(skeleton.rows(), 2);
  tpl.coupling.setFromTriplets(t_trips.begin(), t_trips.end());
  tpl.design_cost = Vec(2);
  tpl.design_cost << 0.0, params.demand_charge;
  tpl.initial_state_rows = {layout.initial()};
  tpl.terminal_state_rows = {layout.terminal()};
  if (layout.elastic)
    for (int t = 0; t < layout.samples(); ++t) tpl.elastic_columns.push_back(layout.S(t));

  tpl.data_builder = [params, layout](const PeriodRealization& d) {
    if (d.samples() != layout.samples())
      throw Error(ErrorCode::DimensionMismatch, "realization has " + std::to_string(d.samples()) +
                                                    " samples, model expects " + std::to_string(layout.samples()));
    auto [lp, unused] = canonicalize(detail::battery_general_lp(params, layout, &d));
    (void)unused;
    return StageData{std::move(lp.eq_matrix), std::move(lp.eq_rhs), std::move(lp.cost), lp.objective_offset};
  };
  return tpl;
}

/// Default target box: E0 in [0, Ebar], D in [0, max_load + Punder].
inline TargetBox default_target_box(const BatteryParams& p, double max_load) {
  TargetBox box;
  box.lower = Vec::Zero(2);
  box.upper = Vec(2);
  box.upper << p.capacity, max_load + p.charge_power;
  return box;
}

inline BatteryTrajectory decode_trajectory(const StageResult& result, const BatteryParams& params,
                                           const PeriodRealization& d) {
  const BatteryLayout L{params.period_length, params.elastic};
  if (result.trajectories.size() != L.n_vars() || d.samples() != L.samples())
    throw Error(ErrorCode::MapMismatch, "stage result does not come from this battery template");
  const int N = L.samples();
  BatteryTrajectory tr;
  tr.P = result.trajectories.segment(L.P(0), N);
  tr.F = result.trajectories.segment(L.F(0), N);
  tr.E = result.trajectories.segment(L.E(0), N);
  tr.peak_slack = L.elastic ? Vec(result.trajectories.segment(L.S(0), N)) : Vec(Vec::Zero(N));
  tr.d_util = d.load - tr.P + d.fr_request.cwiseProduct(tr.F);
  return tr;
}

}  // namespace rhmpc
