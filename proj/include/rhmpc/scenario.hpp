#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rhmpc/realization.hpp"
#include "rhmpc/rng.hpp"

namespace rhmpc {

/// Finite-support distribution of period realizations.
struct ScenarioPool {
  std::vector<PeriodRealization> support;
  Vec weights;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(support.size()); }

  void validate() const {
    if (support.empty()) throw Error(ErrorCode::ValueError, "scenario pool needs at least one template");
    if (weights.size() != size()) throw Error(ErrorCode::DimensionMismatch, "one weight per template required");
    if (weights.minCoeff() < 0.0) throw Error(ErrorCode::ValueError, "negative scenario weight");
    if (std::abs(weights.sum() - 1.0) > 1e-9) throw Error(ErrorCode::ValueError, "scenario weights must sum to 1");
    for (const auto& d : support) {
      d.validate();
      if (d.samples() != support.front().samples())
        throw Error(ErrorCode::DimensionMismatch, "templates differ in length");
    }
  }

  double max_load() const {
    double m = 0.0;
    for (const auto& d : support) m = std::max(m, d.load.maxCoeff());
    return m;
  }
};

/// Index drawn from the pool's weights, then the template itself.
inline int sample_index(const ScenarioPool& pool, RngStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (int k = 0; k < pool.size(); ++k) {
    acc += pool.weights[k];
    if (u < acc) return k;
  }
  return pool.size() - 1;
}

inline const PeriodRealization& sample_period(const ScenarioPool& pool, RngStream& rng) {
  return pool.support[sample_index(pool, rng)];
}

inline std::vector<PeriodRealization> sample_sequence(const ScenarioPool& pool, RngStream& rng, int count) {
  std::vector<PeriodRealization> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(sample_period(pool, rng));
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic pool

/// Shape parameters of the synthetic daily templates.
struct SyntheticSpec {
  int period_length = 24;
  int templates = 5;
  std::uint64_t seed = 1;
  double base_load = 2000.0;      // kW
  double load_swing = 0.25;       // relative daily sinusoid amplitude
  double peak_bump = 0.35;        // relative afternoon bump
  double energy_price_day = 0.06; // $/kWh, 8:00-20:00
  double energy_price_night = 0.03;
  double fr_price = 0.03;         // $/kW
  double fr_request_low = 0.1;
  double fr_request_high = 0.4;
};

/**
 * K templates from one daily shape: load is a sinusoid plus an afternoon bump,
 * energy price is two-tier day/night, FR price is flat with noise. Each
 * template scales the shape by its own factors and draws its own hourly FR
 * request fractions. Sample n repeats hour 0 so every template is daily-periodic.
 */
inline ScenarioPool make_synthetic_pool(const SyntheticSpec& spec) {
  if (spec.templates < 1 || spec.period_length < 1)
    throw Error(ErrorCode::InvalidParams, "synthetic pool needs templates >= 1 and period_length >= 1");
  const int n = spec.period_length, N = n + 1;
  ScenarioPool pool;
  pool.seed = spec.seed;
  RngStream root(spec.seed, 0x5eed);
  for (int k = 0; k < spec.templates; ++k) {
    RngStream rng = root.split(static_cast<std::uint64_t>(k));
    const double load_scale = rng.uniform(0.85, 1.15);
    const double bump_scale = rng.uniform(0.6, 1.4);
    const double price_scale = rng.uniform(0.8, 1.2);
    const double fr_scale = rng.uniform(0.7, 1.3);
    std::vector<double> load(n), pe(n), pf(n), alpha(n);
    for (int h = 0; h < n; ++h) {
      const double hour = 24.0 * h / n;
      const double wave = std::sin(2.0 * std::numbers::pi * (hour - 9.0) / 24.0);
      const double bump = std::exp(-0.5 * std::pow((hour - 15.0) / 2.0, 2));
      load[h] = spec.base_load * load_scale *
                (1.0 + spec.load_swing * wave + spec.peak_bump * bump_scale * bump) * rng.uniform(0.97, 1.03);
      const bool day = hour >= 8.0 && hour < 20.0;
      pe[h] = (day ? spec.energy_price_day : spec.energy_price_night) * price_scale * rng.uniform(0.9, 1.1);
      pf[h] = spec.fr_price * fr_scale * rng.uniform(0.8, 1.2);
      alpha[h] = rng.uniform(spec.fr_request_low, spec.fr_request_high);
    }
    PeriodRealization d{Vec(N), Vec(N), Vec(N), Vec(N)};
    for (int t = 0; t < N; ++t) {
      const int h = t % n;
      d.energy_price[t] = pe[h];
      d.fr_price[t] = pf[h];
      d.load[t] = load[h];
      d.fr_request[t] = alpha[h];
    }
    pool.support.push_back(std::move(d));
  }
  pool.weights = Vec::Constant(spec.templates, 1.0 / spec.templates);
  pool.validate();
  return pool;
}

// ---------------------------------------------------------------------------
// Forecasts

struct ForecastModel {
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

/**
 * Multiplies every price, load and FR-request entry by an independent
 * lognormal(0, sigma) factor; FR requests are clamped to [0, 1]. The noise for
 * a period comes from its own stream, so forecasts do not depend on call order.
 */
inline PeriodRealization make_forecast(const ForecastModel& model, const PeriodRealization& truth,
                                       std::uint64_t period_index) {
  if (model.noise_sigma < 0) throw Error(ErrorCode::InvalidParams, "forecast sigma must be >= 0");
  if (model.noise_sigma == 0.0) return truth;
  RngStream rng(model.seed, 0xf0ca57ULL + period_index);
  PeriodRealization f = truth;
  auto perturb = [&](Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] *= std::exp(model.noise_sigma * rng.normal());
  };
  perturb(f.energy_price);
  perturb(f.fr_price);
  perturb(f.load);
  perturb(f.fr_request);
  f.fr_request = f.fr_request.cwiseMax(0.0).cwiseMin(1.0);
  return f;
}

// ---------------------------------------------------------------------------
// CSV: header `hour,energy_price,fr_price,load,fr_request`, n rows per day.

inline constexpr const char* kScenarioCsvHeader = "hour,energy_price,fr_price,load,fr_request";

namespace detail {
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_field(const std::string& s, int row, const char* column) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::SchemaError,
                "row " + std::to_string(row) + ", column '" + column + "': not a number: '" + s + "'");
  }
}
}  // namespace detail

/**
 * Parses consecutive days of hourly data. Day k supplies samples 0..n-1 and
 * sample n is hour 0 of day k+1; the last day wraps to its own hour 0.
 */
inline std::vector<PeriodRealization> read_scenario_csv(std::istream& in, int period_length,
                                                        const std::string& source = "<csv>") {
  if (period_length < 1) throw Error(ErrorCode::InvalidParams, "period_length must be >= 1");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::SchemaError, source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kScenarioCsvHeader)
    throw Error(ErrorCode::SchemaError, source + ": header must be '" + kScenarioCsvHeader + "'");
  static const char* columns[] = {"hour", "energy_price", "fr_price", "load", "fr_request"};
  std::vector<std::array<double, 5>> rows;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<double, 5> vals{};
    std::stringstream ss(line);
    std::string field;
    int col = 0;
    while (std::getline(ss, field, ',')) {
      if (col >= 5) break;
      vals[col] = detail::parse_field(field, row, columns[col]);
      ++col;
    }
    if (col != 5 || ss.rdbuf()->in_avail() > 0 || std::count(line.begin(), line.end(), ',') != 4)
      throw Error(ErrorCode::SchemaError, source + ": row " + std::to_string(row) + ": expected 5 columns");
    const int expected_hour = static_cast<int>(rows.size()) % period_length;
    if (vals[0] != expected_hour)
      throw Error(ErrorCode::SchemaError, source + ": row " + std::to_string(row) + ", column 'hour': expected " +
                                              std::to_string(expected_hour));
    if (vals[1] < 0 || vals[2] < 0)
      throw Error(ErrorCode::ValueError, source + ": row " + std::to_string(row) + ": negative price");
    if (vals[3] < 0)
      throw Error(ErrorCode::ValueError, source + ": row " + std::to_string(row) + ", column 'load': negative load");
    if (vals[4] < 0 || vals[4] > 1)
      throw Error(ErrorCode::ValueError,
                  source + ": row " + std::to_string(row) + ", column 'fr_request': outside [0,1]");
    rows.push_back(vals);
  }
  if (rows.empty()) throw Error(ErrorCode::SchemaError, source + ": no data rows");
  if (rows.size() % period_length != 0)
    throw Error(ErrorCode::SchemaError, source + ": " + std::to_string(rows.size()) +
                                            " data rows is not a whole number of " + std::to_string(period_length) +
                                            "-hour periods");
  const int days = static_cast<int>(rows.size()) / period_length;
  const int N = period_length + 1;
  std::vector<PeriodRealization> out;
  out.reserve(days);
  for (int k = 0; k < days; ++k) {
    PeriodRealization d{Vec(N), Vec(N), Vec(N), Vec(N)};
    for (int t = 0; t < N; ++t) {
      const size_t idx = t < period_length ? static_cast<size_t>(k * period_length + t)
                                           : static_cast<size_t>(k + 1 < days ? (k + 1) * period_length : k * period_length);
      d.energy_price[t] = rows[idx][1];
      d.fr_price[t] = rows[idx][2];
      d.load[t] = rows[idx][3];
      d.fr_request[t] = rows[idx][4];
    }
    out.push_back(std::move(d));
  }
  return out;
}

inline std::vector<PeriodRealization> load_csv(const std::string& path, int period_length) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::SchemaError, "cannot open '" + path + "'");
  return read_scenario_csv(in, period_length, path);
}

/// Writes samples 0..n-1 of each period; sample n is implied by the next day.
inline void write_scenario_csv(std::ostream& out, const std::vector<PeriodRealization>& periods) {
  out << kScenarioCsvHeader << "\n";
  for (const auto& d : periods) {
    const int n = d.samples() - 1;
    for (int t = 0; t < n; ++t) {
      out << t << "," << detail::format_double(d.energy_price[t]) << "," << detail::format_double(d.fr_price[t]) << ","
          << detail::format_double(d.load[t]) << "," << detail::format_double(d.fr_request[t]) << "\n";
    }
  }
}

inline void save_csv(const std::string& path, const std::vector<PeriodRealization>& periods) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::SchemaError, "cannot write '" + path + "'");
  write_scenario_csv(out, periods);
}

// ---------------------------------------------------------------------------
// Pool JSON: {"templates": [{energy_price, fr_price, load, fr_request}], "weights": [...], "seed": s}

namespace detail {
inline nlohmann::json to_json_array(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }
inline Vec from_json_array(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) throw Error(ErrorCode::SchemaError, std::string("missing array '") + key + "'");
  const auto v = j[key].get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}
}  // namespace detail

inline nlohmann::json pool_to_json(const ScenarioPool& pool) {
  nlohmann::json j;
  j["templates"] = nlohmann::json::array();
  for (const auto& d : pool.support) {
    j["templates"].push_back({{"energy_price", detail::to_json_array(d.energy_price)},
                              {"fr_price", detail::to_json_array(d.fr_price)},
                              {"load", detail::to_json_array(d.load)},
                              {"fr_request", detail::to_json_array(d.fr_request)}});
  }
  j["weights"] = detail::to_json_array(pool.weights);
  j["seed"] = pool.seed;
  return j;
}

inline ScenarioPool pool_from_json(const nlohmann::json& j) {
  if (!j.contains("templates") || !j["templates"].is_array())
    throw Error(ErrorCode::SchemaError, "pool JSON needs a 'templates' array");
  ScenarioPool pool;
  for (const auto& t : j["templates"]) {
    pool.support.push_back(PeriodRealization{detail::from_json_array(t, "energy_price"),
                                             detail::from_json_array(t, "fr_price"),
                                             detail::from_json_array(t, "load"),
                                             detail::from_json_array(t, "fr_request")});
  }
  pool.weights = detail::from_json_array(j, "weights");
  pool.seed = j.value("seed", std::uint64_t{0});
  pool.validate();
  return pool;
}

inline void save_pool(const std::string& path, const ScenarioPool& pool) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::SchemaError, "cannot write '" + path + "'");
  out << pool_to_json(pool).dump(1) << "\n";
}

inline ScenarioPool load_pool(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::SchemaError, "cannot open '" + path + "'");
  try {
    return pool_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, path + ": " + e.what());
  }
}

}  // namespace rhmpc
