#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rhmpc/scenario.hpp"

using namespace rhmpc;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an rhmpc::Error";
  return ErrorCode::SolverFailure;
}

std::string hourly_csv(int rows, double load = 1000.0) {
  std::ostringstream s;
  s << kScenarioCsvHeader << "\n";
  for (int i = 0; i < rows; ++i) s << (i % 24) << ",0.05,0.02," << load + i << ",0.25\n";
  return s.str();
}

}  // namespace

TEST(ScenarioPool, SyntheticPoolIsValidAndPeriodic) {
  SyntheticSpec spec;
  spec.templates = 5;
  const auto pool = make_synthetic_pool(spec);
  EXPECT_EQ(pool.size(), 5);
  for (const auto& d : pool.support) {
    EXPECT_EQ(d.samples(), 25);
    EXPECT_EQ(d.load[24], d.load[0]);
    EXPECT_GE(d.fr_request.minCoeff(), 0.1);
    EXPECT_LE(d.fr_request.maxCoeff(), 0.4);
    EXPECT_GT(d.load.minCoeff(), 1000.0);
    EXPECT_LT(d.load.maxCoeff(), 4000.0);
  }
  EXPECT_FALSE(pool.support[0] == pool.support[1]);
  const auto again = make_synthetic_pool(spec);
  for (int k = 0; k < 5; ++k) EXPECT_TRUE(pool.support[k] == again.support[k]);
}

TEST(ScenarioPool, SingleTemplateIsAlwaysDrawn) {
  SyntheticSpec spec;
  spec.templates = 1;
  const auto pool = make_synthetic_pool(spec);
  RngStream rng(9);
  for (int i = 0; i < 100; ++i) EXPECT_TRUE(sample_period(pool, rng) == pool.support[0]);
}

TEST(ScenarioPool, UniformDrawFrequenciesWithinThreeSigma) {
  SyntheticSpec spec;
  spec.templates = 5;
  const auto pool = make_synthetic_pool(spec);
  RngStream rng(2024, 3);
  const int draws = 100000;
  std::vector<int> counts(5, 0);
  for (int i = 0; i < draws; ++i) ++counts[sample_index(pool, rng)];
  const double sigma = std::sqrt(draws * 0.2 * 0.8);
  for (int c : counts) EXPECT_LE(std::abs(c - 0.2 * draws), 3 * sigma);
}

TEST(ScenarioPool, FixedSeedGivesIdenticalSequences) {
  const auto pool = make_synthetic_pool(SyntheticSpec{});
  RngStream a(42, 1), b(42, 1);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(sample_index(pool, a), sample_index(pool, b));
}

TEST(ScenarioPool, ValidationRejectsBadWeights) {
  auto pool = make_synthetic_pool(SyntheticSpec{});
  pool.weights[0] += 0.1;
  EXPECT_EQ(code_of([&] { pool.validate(); }), ErrorCode::ValueError);
  pool.weights.resize(2);
  EXPECT_EQ(code_of([&] { pool.validate(); }), ErrorCode::DimensionMismatch);
}

TEST(Forecast, ZeroSigmaIsTruth) {
  const auto d = make_synthetic_pool(SyntheticSpec{}).support[0];
  EXPECT_TRUE(make_forecast(ForecastModel{0.0, 3}, d, 7) == d);
}

TEST(Forecast, LognormalFactorMeanMatchesMoment) {
  const auto pool = make_synthetic_pool(SyntheticSpec{});
  const ForecastModel model{0.1, 99};
  double sum = 0.0;
  int count = 0;
  for (int period = 0; count < 10000; ++period) {
    const auto& truth = pool.support[period % pool.size()];
    const auto f = make_forecast(model, truth, period);
    for (int t = 0; t < truth.samples(); ++t) {
      sum += f.load[t] / truth.load[t];
      sum += f.energy_price[t] / truth.energy_price[t];
      count += 2;
      EXPECT_GT(f.load[t], 0.0);
      EXPECT_GE(f.fr_request[t], 0.0);
      EXPECT_LE(f.fr_request[t], 1.0);
    }
  }
  const double expected = std::exp(0.5 * 0.1 * 0.1);
  EXPECT_NEAR(sum / count, expected, 0.02 * expected);
}

TEST(Forecast, DependsOnPeriodNotCallOrder) {
  const auto d = make_synthetic_pool(SyntheticSpec{}).support[0];
  const ForecastModel model{0.2, 5};
  const auto a = make_forecast(model, d, 3);
  make_forecast(model, d, 4);
  EXPECT_TRUE(make_forecast(model, d, 3) == a);
  EXPECT_FALSE(make_forecast(model, d, 4) == a);
}

TEST(ScenarioCsv, FortyEightRowsGiveTwoPeriods) {
  std::istringstream in(hourly_csv(48));
  const auto periods = read_scenario_csv(in, 24);
  ASSERT_EQ(periods.size(), 2u);
  EXPECT_EQ(periods[0].samples(), 25);
  EXPECT_EQ(periods[0].load[23], 1023.0);
  EXPECT_EQ(periods[0].load[24], 1024.0);  // hour 0 of day 2
  EXPECT_EQ(periods[1].load[0], 1024.0);
  EXPECT_EQ(periods[1].load[24], 1024.0);  // last day wraps to its own hour 0
}

TEST(ScenarioCsv, RejectsMalformedFiles) {
  {
    std::istringstream in("");
    EXPECT_EQ(code_of([&] { read_scenario_csv(in, 24); }), ErrorCode::SchemaError);
  }
  {
    std::istringstream in("hour,price\n0,1\n");
    EXPECT_EQ(code_of([&] { read_scenario_csv(in, 24); }), ErrorCode::SchemaError);
  }
  {
    std::istringstream in(hourly_csv(30));
    EXPECT_EQ(code_of([&] { read_scenario_csv(in, 24); }), ErrorCode::SchemaError);
  }
  {
    std::string text = hourly_csv(24);
    text += "0,0.05,0.02,1000\n";
    std::istringstream in(text);
    EXPECT_EQ(code_of([&] { read_scenario_csv(in, 24); }), ErrorCode::SchemaError);
  }
  {
    std::istringstream in(hourly_csv(24, -500.0));
    try {
      read_scenario_csv(in, 24);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ValueError);
      EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
      EXPECT_NE(std::string(e.what()).find("load"), std::string::npos);
    }
  }
  {
    std::string text = std::string(kScenarioCsvHeader) + "\n0,0.05,0.02,1000,1.5\n";
    std::istringstream in(text);
    EXPECT_EQ(code_of([&] { read_scenario_csv(in, 1); }), ErrorCode::ValueError);
  }
  {
    std::string text = std::string(kScenarioCsvHeader) + "\n0,abc,0.02,1000,0.5\n";
    std::istringstream in(text);
    EXPECT_EQ(code_of([&] { read_scenario_csv(in, 1); }), ErrorCode::SchemaError);
  }
}

TEST(ScenarioCsv, RoundTripOfConsecutiveDays) {
  SyntheticSpec spec;
  spec.templates = 4;
  const auto pool = make_synthetic_pool(spec);
  RngStream rng(8);
  const auto days = sample_sequence(pool, rng, 6);
  std::stringstream buf;
  write_scenario_csv(buf, days);
  const auto back = read_scenario_csv(buf, 24);
  ASSERT_EQ(back.size(), days.size());
  for (size_t k = 0; k < days.size(); ++k) {
    for (int t = 0; t < 24; ++t) {
      EXPECT_NEAR(back[k].load[t], days[k].load[t], 1e-12 * days[k].load[t]);
      EXPECT_NEAR(back[k].energy_price[t], days[k].energy_price[t], 1e-12 * days[k].energy_price[t]);
      EXPECT_NEAR(back[k].fr_price[t], days[k].fr_price[t], 1e-12 * days[k].fr_price[t]);
      EXPECT_NEAR(back[k].fr_request[t], days[k].fr_request[t], 1e-12 * days[k].fr_request[t]);
    }
  }
}

TEST(ScenarioPoolJson, RoundTripIsExact) {
  const auto pool = make_synthetic_pool(SyntheticSpec{});
  const auto path = std::filesystem::temp_directory_path() / "rhmpc_pool_roundtrip.json";
  save_pool(path.string(), pool);
  const auto back = load_pool(path.string());
  std::filesystem::remove(path);
  ASSERT_EQ(back.size(), pool.size());
  for (int k = 0; k < pool.size(); ++k) EXPECT_TRUE(back.support[k] == pool.support[k]);
  EXPECT_EQ(back.weights, pool.weights);
  EXPECT_EQ(back.seed, pool.seed);
}

TEST(ScenarioPoolJson, MissingFieldsAreSchemaErrors) {
  EXPECT_EQ(code_of([] { pool_from_json(nlohmann::json::parse(R"({"weights":[1]})")); }), ErrorCode::SchemaError);
  EXPECT_EQ(code_of([] { load_pool("/nonexistent/pool.json"); }), ErrorCode::SchemaError);
}
