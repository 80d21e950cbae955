#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rhmpc/config.hpp"
#include "rhmpc/controller.hpp"
#include "rhmpc/svg.hpp"

namespace rhmpc::cli {

namespace fs = std::filesystem;

/// Every key a run configuration accepts. Battery keys may also come from a separate file.
inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "battery_config", "capacity", "discharge_power", "charge_power", "fr_reserve", "ramp_limit", "demand_charge",
      "period_length", "elastic_penalty", "elastic", "scenario_source", "scenario_path", "templates", "pool_seed",
      "horizon", "sigma", "seed", "out", "box_e0_min", "box_e0_max", "box_peak_min", "box_peak_max", "floor_mode",
      "share_bases", "eval_full_until", "eval_every", "trajectory_periods", "initial_targets", "forecast_bundle",
      "oracle_cap", "nonperiodic", "initial_state_free", "svg"};
  return keys;
}

/// Fully resolved run configuration.
struct RunConfig {
  KeyValueConfig kv;
  BatteryParams battery;
  std::string scenario_source = "synthetic";
  std::string scenario_path;
  SyntheticSpec synthetic;
  int horizon = 150;
  double sigma = 0.1;
  std::uint64_t seed = 1;
  std::string out = "out";
  ControllerOptions controller;
  int trajectory_periods = 7;
  std::string initial_targets = "center";
  int forecast_bundle = 7;
  int oracle_cap = 40;
  bool nonperiodic = true;
  bool initial_state_free = true;
  bool svg = true;
  std::optional<double> box_e0_min, box_e0_max, box_peak_min, box_peak_max;
};

inline FloorMode parse_floor_mode(const std::string& s) {
  if (s == "anchored") return FloorMode::AnchoredPlane;
  if (s == "box_minimum") return FloorMode::BoxMinimum;
  if (s == "zero") return FloorMode::Zero;
  throw Error(ErrorCode::ConfigError, "floor_mode must be anchored, box_minimum or zero, got '" + s + "'");
}

inline std::string floor_mode_name(FloorMode m) {
  switch (m) {
    case FloorMode::AnchoredPlane: return "anchored";
    case FloorMode::BoxMinimum: return "box_minimum";
    case FloorMode::Zero: return "zero";
  }
  return "anchored";
}

/**
 * Layers the configuration: battery file, then the main file (relative paths
 * resolved against its directory), then `key=value` overrides in order.
 */
inline RunConfig resolve_config(const std::string& config_path, const std::vector<std::pair<std::string, std::string>>& overrides) {
  KeyValueConfig kv;
  fs::path base = fs::current_path();
  if (!config_path.empty()) {
    kv = KeyValueConfig::load(config_path);
    base = fs::absolute(fs::path(config_path)).parent_path();
  }
  for (const auto& [k, v] : overrides) kv.set(k, v);
  for (const auto& [k, v] : kv.values())
    if (!known_keys().count(k)) throw Error(ErrorCode::ConfigError, "unknown configuration key '" + k + "'");

  auto resolve_path = [&](const std::string& key) {
    if (!kv.has(key) || kv.get_string(key, "").empty()) return;
    fs::path p(kv.get_string(key, ""));
    if (p.is_relative()) p = base / p;
    kv.set(key, p.lexically_normal().string());
  };
  resolve_path("battery_config");
  resolve_path("scenario_path");

  KeyValueConfig merged;
  if (!kv.get_string("battery_config", "").empty()) merged = KeyValueConfig::load(kv.get_string("battery_config", ""));
  for (const auto& [k, v] : merged.values())
    if (!known_keys().count(k)) throw Error(ErrorCode::ConfigError, "unknown battery key '" + k + "'");
  for (const auto& [k, v] : kv.values()) merged.set(k, v);

  RunConfig rc;
  rc.battery = BatteryParams::from_config(merged);
  rc.scenario_source = merged.get_string("scenario_source", rc.scenario_source);
  if (rc.scenario_source != "synthetic" && rc.scenario_source != "pool" && rc.scenario_source != "csv")
    throw Error(ErrorCode::ConfigError, "scenario_source must be synthetic, pool or csv");
  rc.scenario_path = merged.get_string("scenario_path", "");
  if (rc.scenario_source != "synthetic" && rc.scenario_path.empty())
    throw Error(ErrorCode::ConfigError, "scenario_source '" + rc.scenario_source + "' needs scenario_path");
  const long seed = merged.get_int("seed", 1);
  if (seed < 0) throw Error(ErrorCode::ConfigError, "seed must be >= 0");
  rc.seed = static_cast<std::uint64_t>(seed);
  rc.synthetic.period_length = rc.battery.period_length;
  rc.synthetic.templates = static_cast<int>(merged.get_int("templates", rc.synthetic.templates));
  rc.synthetic.seed = static_cast<std::uint64_t>(merged.get_int("pool_seed", seed));
  rc.horizon = static_cast<int>(merged.get_int("horizon", rc.horizon));
  if (rc.horizon < 1) throw Error(ErrorCode::ConfigError, "horizon must be >= 1");
  rc.sigma = merged.get_double("sigma", rc.sigma);
  if (!(rc.sigma >= 0)) throw Error(ErrorCode::ConfigError, "sigma must be >= 0");
  rc.out = merged.get_string("out", rc.out);
  rc.controller.cuts.floor = parse_floor_mode(merged.get_string("floor_mode", "anchored"));
  rc.controller.cuts.share_bases = merged.get_bool("share_bases", rc.controller.cuts.share_bases);
  rc.controller.eval_full_until = static_cast<int>(merged.get_int("eval_full_until", rc.controller.eval_full_until));
  rc.controller.eval_every = static_cast<int>(merged.get_int("eval_every", rc.controller.eval_every));
  if (rc.controller.eval_every < 1) throw Error(ErrorCode::ConfigError, "eval_every must be >= 1");
  rc.trajectory_periods = static_cast<int>(merged.get_int("trajectory_periods", rc.trajectory_periods));
  rc.initial_targets = merged.get_string("initial_targets", rc.initial_targets);
  if (rc.initial_targets != "center" && rc.initial_targets != "forecast")
    throw Error(ErrorCode::ConfigError, "initial_targets must be center or forecast");
  rc.forecast_bundle = static_cast<int>(merged.get_int("forecast_bundle", rc.forecast_bundle));
  if (rc.forecast_bundle < 1) throw Error(ErrorCode::ConfigError, "forecast_bundle must be >= 1");
  rc.oracle_cap = static_cast<int>(merged.get_int("oracle_cap", rc.oracle_cap));
  rc.nonperiodic = merged.get_bool("nonperiodic", rc.nonperiodic);
  rc.initial_state_free = merged.get_bool("initial_state_free", rc.initial_state_free);
  rc.svg = merged.get_bool("svg", rc.svg);
  auto opt_double = [&](const char* key) -> std::optional<double> {
    if (!merged.has(key)) return std::nullopt;
    return merged.get_double(key, 0.0);
  };
  rc.box_e0_min = opt_double("box_e0_min");
  rc.box_e0_max = opt_double("box_e0_max");
  rc.box_peak_min = opt_double("box_peak_min");
  rc.box_peak_max = opt_double("box_peak_max");

  // The resolved file records every effective value, defaults included.
  merged.set("battery_config", merged.get_string("battery_config", ""));
  merged.set("capacity", detail::csv_number(rc.battery.capacity));
  merged.set("discharge_power", detail::csv_number(rc.battery.discharge_power));
  merged.set("charge_power", detail::csv_number(rc.battery.charge_power));
  merged.set("fr_reserve", detail::csv_number(rc.battery.fr_reserve));
  merged.set("ramp_limit", detail::csv_number(rc.battery.ramp_limit));
  merged.set("demand_charge", detail::csv_number(rc.battery.demand_charge));
  merged.set("period_length", std::to_string(rc.battery.period_length));
  merged.set("elastic_penalty", detail::csv_number(rc.battery.penalty()));
  merged.set("elastic", rc.battery.elastic ? "true" : "false");
  merged.set("scenario_source", rc.scenario_source);
  merged.set("scenario_path", rc.scenario_path);
  merged.set("templates", std::to_string(rc.synthetic.templates));
  merged.set("pool_seed", std::to_string(rc.synthetic.seed));
  merged.set("horizon", std::to_string(rc.horizon));
  merged.set("sigma", detail::csv_number(rc.sigma));
  merged.set("seed", std::to_string(rc.seed));
  merged.set("out", rc.out);
  merged.set("floor_mode", floor_mode_name(rc.controller.cuts.floor));
  merged.set("share_bases", rc.controller.cuts.share_bases ? "true" : "false");
  merged.set("eval_full_until", std::to_string(rc.controller.eval_full_until));
  merged.set("eval_every", std::to_string(rc.controller.eval_every));
  merged.set("trajectory_periods", std::to_string(rc.trajectory_periods));
  merged.set("initial_targets", rc.initial_targets);
  merged.set("forecast_bundle", std::to_string(rc.forecast_bundle));
  merged.set("oracle_cap", std::to_string(rc.oracle_cap));
  merged.set("nonperiodic", rc.nonperiodic ? "true" : "false");
  merged.set("initial_state_free", rc.initial_state_free ? "true" : "false");
  merged.set("svg", rc.svg ? "true" : "false");
  rc.kv = merged;
  return rc;
}

/// Scenario pool and the realized period sequence of a run.
struct ScenarioSetup {
  ScenarioPool pool;
  std::vector<PeriodRealization> sequence;
};

inline constexpr std::uint64_t kSequenceStream = 0x5e9;

inline ScenarioSetup load_scenarios(const RunConfig& rc) {
  ScenarioSetup s;
  if (rc.scenario_source == "csv") {
    s.sequence = load_csv(rc.scenario_path, rc.battery.period_length);
    if (static_cast<int>(s.sequence.size()) < rc.horizon)
      throw Error(ErrorCode::ConfigError, "horizon " + std::to_string(rc.horizon) + " exceeds the " +
                                              std::to_string(s.sequence.size()) + " days in " + rc.scenario_path);
    s.sequence.resize(rc.horizon);
    s.pool.support = s.sequence;
    s.pool.weights = Vec::Constant(rc.horizon, 1.0 / rc.horizon);
    s.pool.seed = rc.seed;
    s.pool.validate();
    return s;
  }
  s.pool = rc.scenario_source == "pool" ? load_pool(rc.scenario_path) : make_synthetic_pool(rc.synthetic);
  s.pool.validate();
  if (s.pool.support.front().samples() != rc.battery.period_length + 1)
    throw Error(ErrorCode::ConfigError, "scenario period length does not match period_length");
  RngStream rng(rc.seed, kSequenceStream);
  s.sequence = sample_sequence(s.pool, rng, rc.horizon);
  return s;
}

inline TargetBox target_box(const RunConfig& rc, const ScenarioPool& pool) {
  TargetBox box = default_target_box(rc.battery, pool.max_load());
  if (rc.box_e0_min) box.lower[0] = *rc.box_e0_min;
  if (rc.box_e0_max) box.upper[0] = *rc.box_e0_max;
  if (rc.box_peak_min) box.lower[1] = *rc.box_peak_min;
  if (rc.box_peak_max) box.upper[1] = *rc.box_peak_max;
  try {
    box.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, std::string("target box: ") + e.what());
  }
  return box;
}

inline fs::path prepare_out(const RunConfig& rc) {
  fs::path out(rc.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorCode::ConfigError, "cannot create output directory '" + rc.out + "': " + ec.message());
  return out;
}

inline std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw Error(ErrorCode::ConfigError, "cannot write '" + p.string() + "'");
  return f;
}

inline void write_resolved(const RunConfig& rc, const fs::path& dir) { open_out(dir / "config.resolved") << rc.kv.dump(); }

inline nlohmann::json targets_json(const Vec& w) { return {{"E0", w[0]}, {"peak", w[1]}}; }

/// Writes pool.json and scenarios.csv (the realized sequence) to the output directory.
inline int cmd_gen_data(const RunConfig& rc, std::ostream& log) {
  const ScenarioSetup s = load_scenarios(rc);
  const fs::path dir = prepare_out(rc);
  save_pool((dir / "pool.json").string(), s.pool);
  save_csv((dir / "scenarios.csv").string(), s.sequence);
  write_resolved(rc, dir);
  log << "wrote " << s.pool.size() << " templates and " << s.sequence.size() << " periods to " << dir.string() << "\n";
  return 0;
}

/**
 * Runs the hierarchical scheme over the configured horizon. Each period the
 * intra-period MPC plans on the forecast with the current targets, then the
 * realized data closes the period and updates the targets.
 */
inline int cmd_run(const RunConfig& rc, std::ostream& log) {
  const ScenarioSetup s = load_scenarios(rc);
  const StageTemplate tpl = build_battery_template(rc.battery);
  const TargetBox box = target_box(rc, s.pool);
  const ForecastModel forecaster{rc.sigma, rc.seed};
  const fs::path dir = prepare_out(rc);
  write_resolved(rc, dir);

  Vec w1 = box.center();
  if (rc.initial_targets == "forecast") {
    std::vector<PeriodRealization> bundle;
    for (int m = 1; m <= std::min(rc.forecast_bundle, rc.horizon); ++m)
      bundle.push_back(make_forecast(forecaster, s.sequence[m - 1], m));
    OracleOptions oo;
    oo.max_periods = std::max(oo.max_periods, static_cast<int>(bundle.size()));
    w1 = initial_targets_from_forecasts(tpl, bundle, box, oo);
  }
  HierarchyState st(tpl, box, w1, rc.controller);

  std::ofstream metrics = open_out(dir / "metrics.csv"), targets = open_out(dir / "targets.csv"),
                traj = open_out(dir / "trajectories.csv"), cuts = open_out(dir / "cuts.jsonl");
  metrics << kMetricsCsvHeader << "\n";
  targets << "period,E0_target,peak_target,forecast_cost,stage_cost,slack_activation\n";
  traj << "period,hour,P,F,E,d_util,peak_slack,load_forecast,energy_price_forecast,fr_price_forecast,fr_request_forecast\n";

  std::vector<double> periods, e0, peak, eps;
  GapRecord last;
  for (int m = 1; m <= rc.horizon; ++m) {
    const PeriodRealization forecast = make_forecast(forecaster, s.sequence[m - 1], m);
    const StageResult plan = intra_period_mpc(tpl, st.targets_w, forecast);
    if (m <= rc.trajectory_periods) {
      const BatteryTrajectory tr = decode_trajectory(plan, rc.battery, forecast);
      for (int t = 0; t < tr.P.size(); ++t)
        traj << m << "," << t << "," << detail::csv_number(tr.P[t]) << "," << detail::csv_number(tr.F[t]) << ","
             << detail::csv_number(tr.E[t]) << "," << detail::csv_number(tr.d_util[t]) << ","
             << detail::csv_number(tr.peak_slack[t]) << "," << detail::csv_number(forecast.load[t]) << ","
             << detail::csv_number(forecast.energy_price[t]) << "," << detail::csv_number(forecast.fr_price[t]) << ","
             << detail::csv_number(forecast.fr_request[t]) << "\n";
    }
    last = step_period(st, s.sequence[m - 1]);
    write_metrics_row(metrics, last);
    targets << m << "," << detail::csv_number(last.targets.x0[0]) << "," << detail::csv_number(last.targets.eta) << ","
            << detail::csv_number(plan.cost_h) << "," << detail::csv_number(last.stage_cost) << ","
            << detail::csv_number(last.slack_activation) << "\n";
    write_cut_record(cuts, m, st.engine.effective_cut(static_cast<int>(st.cuts().size()) - 1));
    periods.push_back(m);
    e0.push_back(last.targets.x0[0]);
    peak.push_back(last.targets.eta);
    eps.push_back(last.eps);
  }

  nlohmann::json summary;
  summary["periods"] = rc.horizon;
  summary["realized_cost_total"] = st.realized_cost_accum;
  summary["realized_cost_per_period"] = st.realized_cost_accum / rc.horizon;
  summary["final_targets"] = targets_json(last.next_targets.encode());
  summary["final_lower_bound"] = last.master_value;
  summary["vertices"] = st.vertex_store().size();
  open_out(dir / "summary.json") << summary.dump(1) << "\n";

  if (rc.svg) {
    LineChart c1("State-of-charge target", "period", "E0 target (kWh)");
    c1.add({"E0 target", periods, e0});
    c1.save((dir / "targets_E0.svg").string());
    LineChart c2("Peak target", "period", "peak target (kW)");
    c2.add({"peak target", periods, peak});
    c2.save((dir / "targets_peak.svg").string());
    LineChart c3("Current gap", "period", "eps");
    c3.add({"eps", periods, eps});
    c3.save((dir / "eps.svg").string());
  }
  log << "ran " << rc.horizon << " periods; realized cost per period " << detail::csv_number(st.realized_cost_accum / rc.horizon)
      << "; final targets E0=" << detail::csv_number(last.next_targets.x0[0])
      << " peak=" << detail::csv_number(last.next_targets.eta) << "\n";
  return 0;
}

/// Periodic SAA and, when enabled, the long-horizon problem over the first horizon periods.
inline int cmd_oracle(const RunConfig& rc, std::ostream& log) {
  const ScenarioSetup s = load_scenarios(rc);
  const StageTemplate tpl = build_battery_template(rc.battery);
  const TargetBox box = target_box(rc, s.pool);
  OracleOptions oo;
  oo.max_periods = rc.oracle_cap;
  const SaaResult saa = solve_saa(tpl, s.sequence, box, oo);
  const fs::path dir = prepare_out(rc);
  write_resolved(rc, dir);
  nlohmann::json js;
  js["periods"] = rc.horizon;
  js["targets"] = targets_json(saa.w);
  js["cost"] = saa.cost;
  js["blocks"] = saa.blocks;
  open_out(dir / "saa.json") << js.dump(1) << "\n";
  log << "periodic (SAA) cost " << detail::csv_number(saa.cost) << " at E0=" << detail::csv_number(saa.w[0])
      << " peak=" << detail::csv_number(saa.w[1]) << "\n";
  if (rc.nonperiodic) {
    const NonperiodicResult np = solve_nonperiodic(tpl, s.sequence, box, rc.initial_state_free, oo);
    nlohmann::json jn;
    jn["periods"] = rc.horizon;
    jn["cost"] = np.cost;
    jn["initial_state_free"] = rc.initial_state_free;
    jn["initial_state"] = np.initial_state[0];
    jn["final_state"] = np.final_state[0];
    jn["peak"] = np.eta;
    open_out(dir / "nonperiodic.json") << jn.dump(1) << "\n";
    const bool ordered = np.cost <= saa.cost + 1e-6;
    log << "nonperiodic cost " << detail::csv_number(np.cost) << "; periodic - nonperiodic = "
        << detail::csv_number(saa.cost - np.cost) << "; ordering check " << (ordered ? "passed" : "FAILED") << "\n";
  }
  return 0;
}

namespace detail {
inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}
}  // namespace detail

/**
 * Overall gap of a finished run: the exact expectation over the run's pool at
 * each period's targets against the period's lower bound. Fills the epsbar
 * column of metrics.csv and writes gap.csv and gap.svg.
 */
inline int cmd_gap(const fs::path& run_dir, std::ostream& log) {
  const fs::path metrics_path = run_dir / "metrics.csv", cfg_path = run_dir / "config.resolved";
  for (const auto& p : {metrics_path, cfg_path, run_dir / "cuts.jsonl"})
    if (!fs::exists(p)) throw Error(ErrorCode::ConfigError, "run directory lacks " + p.filename().string());
  const RunConfig rc = resolve_config(cfg_path.string(), {});
  const ScenarioSetup s = load_scenarios(rc);
  const StageTemplate tpl = build_battery_template(rc.battery);

  std::ifstream in(metrics_path);
  std::string header, line;
  std::getline(in, header);
  if (header != kMetricsCsvHeader) throw Error(ErrorCode::SchemaError, metrics_path.string() + ": unexpected header");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line))
    if (!line.empty()) {
      auto f = detail::split_csv(line);
      if (f.size() != 7) throw Error(ErrorCode::SchemaError, metrics_path.string() + ": expected 7 columns");
      rows.push_back(std::move(f));
    }
  in.close();

  std::ostringstream metrics_out, gap_out;
  metrics_out << kMetricsCsvHeader << "\n";
  gap_out << "period,lower_bound,reference_cost,epsbar\n";
  std::vector<double> periods, epsbar, eps;
  for (auto& f : rows) {
    Vec w(2);
    w << std::stod(f[1]), std::stod(f[2]);
    const double lb = std::stod(f[4]);
    const double ref = reference_cost(tpl, s.pool, w);
    const double g = overall_gap(ref, lb);
    f[6] = rhmpc::detail::csv_number(g);
    for (size_t i = 0; i < f.size(); ++i) metrics_out << (i ? "," : "") << f[i];
    metrics_out << "\n";
    gap_out << f[0] << "," << f[4] << "," << rhmpc::detail::csv_number(ref) << "," << f[6] << "\n";
    periods.push_back(std::stod(f[0]));
    epsbar.push_back(g);
    eps.push_back(f[5].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(f[5]));
  }
  open_out(metrics_path) << metrics_out.str();
  open_out(run_dir / "gap.csv") << gap_out.str();
  LineChart chart("Optimality gaps", "period", "relative gap");
  chart.add({"eps (current)", periods, eps});
  chart.add({"epsbar (overall)", periods, epsbar});
  chart.save((run_dir / "gap.svg").string());
  log << "gap: " << rows.size() << " periods";
  if (!epsbar.empty()) log << "; final epsbar " << rhmpc::detail::csv_number(epsbar.back());
  log << "\n";
  return 0;
}

/// Exit code for a library error: 1 for configuration and data problems, 2 for solver failures.
inline int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::ConfigError:
    case ErrorCode::SchemaError:
    case ErrorCode::ValueError:
    case ErrorCode::InvalidParams:
    case ErrorCode::SizeCapExceeded:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::MapMismatch:
      return 1;
    default:
      return 2;
  }
}

/// Entry point shared by the executable and the tests.
inline int main(int argc, const char* const* argv, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Retroactive hierarchical MPC for periodic systems"};
  app.require_subcommand(1);
  std::string config_path, run_dir;
  std::vector<std::string> sets;
  std::optional<long> seed, horizon;
  std::optional<double> sigma;
  std::optional<std::string> out;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value configuration file");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--horizon", horizon, "number of periods");
    sub->add_option("--sigma", sigma, "forecast noise level");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--set", sets, "override any configuration key (key=value), repeatable");
  };
  CLI::App* gen = app.add_subcommand("gen-data", "write the scenario pool and realized sequence");
  CLI::App* run = app.add_subcommand("run", "run the hierarchical controller");
  CLI::App* oracle = app.add_subcommand("oracle", "solve the periodic SAA and long-horizon problems");
  CLI::App* gap = app.add_subcommand("gap", "compute the overall gap of a finished run");
  common(gen);
  common(run);
  common(oracle);
  gap->add_option("--out,--run-dir", run_dir, "run output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    log << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      log << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (gap->parsed()) return cmd_gap(run_dir, log);
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, "--set expects key=value, got '" + s + "'");
      overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    if (seed) overrides.emplace_back("seed", std::to_string(*seed));
    if (horizon) overrides.emplace_back("horizon", std::to_string(*horizon));
    if (sigma) overrides.emplace_back("sigma", rhmpc::detail::csv_number(*sigma));
    if (out) overrides.emplace_back("out", *out);
    const RunConfig rc = resolve_config(config_path, overrides);
    if (gen->parsed()) return cmd_gen_data(rc, log);
    if (run->parsed()) return cmd_run(rc, log);
    return cmd_oracle(rc, log);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace rhmpc::cli
