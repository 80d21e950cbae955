#include <gtest/gtest.h>

#include <chrono>

#include "brute_force_lp.hpp"
#include "rhmpc/battery.hpp"
#include "rhmpc/scenario.hpp"

using namespace rhmpc;

namespace {

ScenarioPool small_pool(int n, int K = 3, std::uint64_t seed = 7) {
  SyntheticSpec spec;
  spec.period_length = n;
  spec.templates = K;
  spec.seed = seed;
  return make_synthetic_pool(spec);
}

BatteryParams params_for(int n) {
  BatteryParams p;
  p.period_length = n;
  return p;
}

Vec target(double x0, double eta) {
  Vec w(2);
  w << x0, eta;
  return w;
}

}  // namespace

TEST(BatteryModel, StructuralCountsForDailyHorizon) {
  const auto tpl = build_battery_template(params_for(24));
  EXPECT_EQ(tpl.var_map.n_original, 100);
  EXPECT_EQ(tpl.rows(), 297);
  EXPECT_EQ(tpl.var_map.n_standard_cols, 371);
  EXPECT_EQ(tpl.n_w(), 2);
  const auto pool = small_pool(24, 1);
  const StageData data = tpl.data(pool.support[0]);
  EXPECT_EQ(data.recourse.rows(), 297);
  EXPECT_EQ(data.recourse.cols(), 371);
}

TEST(BatteryModel, CouplingOnlyTouchesBoundaryAndPeakRows) {
  const BatteryParams p = params_for(24);
  const auto tpl = build_battery_template(p);
  const BatteryLayout L{24, true};
  EXPECT_EQ(tpl.coupling.nonZeros(), 2 + 25);
  for (SpMat::InnerIterator it(tpl.coupling, 0); it; ++it)
    EXPECT_TRUE(it.row() == L.initial() || it.row() == L.terminal());
  int peak_rows = 0;
  for (SpMat::InnerIterator it(tpl.coupling, 1); it; ++it) {
    const int local = it.row() - L.per_t(0, 0);
    EXPECT_EQ(local % 6, BatteryLayout::Peak);
    ++peak_rows;
  }
  EXPECT_EQ(peak_rows, 25);
}

TEST(BatteryModel, ZeroPricesWithPeakAboveLoadCostNothing) {
  const auto tpl = build_battery_template(params_for(24));
  auto d = small_pool(24, 1).support[0];
  d.energy_price.setZero();
  d.fr_price.setZero();
  const auto res = solve_stage(tpl, target(250.0, d.load.maxCoeff()), tpl.data(d));
  EXPECT_NEAR(res.cost_h, 0.0, 1e-9);
  EXPECT_NEAR(res.slack_activation, 0.0, 1e-9);
}

TEST(BatteryModel, TinyHorizonMatchesVertexEnumeration) {
  const BatteryParams p = params_for(1);
  const auto tpl = build_battery_template(p);
  const auto pool = small_pool(1, 3, 11);
  RngStream rng(3, 1);
  for (const auto& d : pool.support) {
    const StageData data = tpl.data(d);
    for (int trial = 0; trial < 4; ++trial) {
      const Vec w = target(rng.uniform(0, p.capacity), rng.uniform(0, d.load.maxCoeff() + 500));
      const StandardLP lp = build_stage(tpl, w, data);
      const auto ref = rhmpc::testing::brute_force_lp(Eigen::MatrixXd(lp.eq_matrix), lp.eq_rhs, lp.cost);
      ASSERT_EQ(ref.status, LPStatus::Optimal);
      const auto res = solve_stage(tpl, w, data);
      EXPECT_NEAR(res.cost_h, ref.objective + lp.objective_offset, 1e-7 * (1 + std::abs(ref.objective)));
    }
  }
}

TEST(BatteryModel, TrajectoriesSatisfyThePhysicalModel) {
  const BatteryParams p = params_for(24);
  const auto tpl = build_battery_template(p);
  const auto pool = small_pool(24, 3);
  const double tol = 1e-6;
  for (const auto& d : pool.support) {
    const double D = 0.9 * d.load.maxCoeff();
    const auto res = solve_stage(tpl, target(200.0, D), tpl.data(d));
    const auto tr = decode_trajectory(res, p, d);
    EXPECT_NEAR(tr.E[0], 200.0, tol);
    EXPECT_NEAR(tr.E[24], 200.0, tol);
    double cost = 0.0;
    for (int t = 0; t <= 24; ++t) {
      EXPECT_LE(tr.P[t] + tr.F[t], p.discharge_power + tol);
      EXPECT_GE(tr.P[t] - tr.F[t], -p.charge_power - tol);
      EXPECT_GE(tr.F[t], -tol);
      EXPECT_LE(tr.F[t], p.discharge_power + tol);
      EXPECT_GE(tr.E[t] - p.fr_reserve * tr.F[t], -tol);
      EXPECT_LE(tr.E[t] + p.fr_reserve * tr.F[t], p.capacity + tol);
      EXPECT_GE(tr.d_util[t], -tol);
      EXPECT_LE(tr.d_util[t], D + tr.peak_slack[t] + tol);
      EXPECT_GE(tr.peak_slack[t], -tol);
      if (t < 24) {
        EXPECT_NEAR(tr.E[t + 1], tr.E[t] - tr.P[t] + d.fr_request[t] * tr.F[t], tol);
        EXPECT_LE(std::abs(tr.P[t + 1] - tr.P[t]), p.ramp_limit + tol);
        EXPECT_GE(tr.E[t + 1] - p.fr_reserve * tr.F[t], -tol);
        EXPECT_LE(tr.E[t + 1] + p.fr_reserve * tr.F[t], p.capacity + tol);
      }
      cost += d.energy_price[t] * (tr.d_util[t] - d.load[t]) - d.fr_price[t] * tr.F[t] + p.penalty() * tr.peak_slack[t];
    }
    EXPECT_NEAR(cost, res.cost_h, 1e-7 * (1 + std::abs(cost)));
  }
}

TEST(BatteryModel, RecourseIsConvexAndDualVerticesBoundIt) {
  const BatteryParams p = params_for(24);
  const auto tpl = build_battery_template(p);
  const auto pool = small_pool(24, 2);
  const TargetBox box = default_target_box(p, pool.max_load());
  RngStream rng(5, 2);
  for (const auto& d : pool.support) {
    const StageData data = tpl.data(d);
    for (int trial = 0; trial < 10; ++trial) {
      const Vec a = target(rng.uniform(0, p.capacity), rng.uniform(0.6, 1.2) * d.load.maxCoeff());
      const Vec b = target(rng.uniform(0, p.capacity), rng.uniform(0.6, 1.2) * d.load.maxCoeff());
      const auto ra = solve_stage(tpl, a, data);
      const auto rb = solve_stage(tpl, b, data);
      const auto rm = solve_stage(tpl, Vec(0.5 * (a + b)), data);
      const double scale = 1 + std::abs(ra.cost_h) + std::abs(rb.cost_h);
      EXPECT_LE(rm.cost_h, 0.5 * (ra.cost_h + rb.cost_h) + 1e-8 * scale);
      EXPECT_LE(dual_violation(data, ra.dual_vertex), 1e-7);
      EXPECT_NEAR(dual_value(tpl, data, ra.dual_vertex, a), ra.cost_h, 1e-7 * scale);
      EXPECT_LE(dual_value(tpl, data, ra.dual_vertex, b), rb.cost_h + 1e-7 * scale);
    }
    const auto [floor, argmin] = stage_floor(tpl, data, box);
    EXPECT_TRUE(box.contains(argmin, 1e-7));
    EXPECT_NEAR(solve_stage(tpl, argmin, data).cost_h, floor, 1e-7 * (1 + std::abs(floor)));
    for (int trial = 0; trial < 10; ++trial) {
      const Vec w = target(rng.uniform(0, p.capacity), rng.uniform(box.lower[1], box.upper[1]));
      EXPECT_LE(floor, solve_stage(tpl, w, data).cost_h + 1e-7 * (1 + std::abs(floor)));
    }
  }
}

TEST(BatteryModel, RightHandSideIsAffineInTargets) {
  const auto tpl = build_battery_template(params_for(24));
  const StageData data = tpl.data(small_pool(24, 1).support[0]);
  const Vec a = target(100, 2000), b = target(300, 2600);
  const Vec ra = build_stage(tpl, a, data).eq_rhs, rb = build_stage(tpl, b, data).eq_rhs;
  const Vec rm = build_stage(tpl, Vec(0.25 * a + 0.75 * b), data).eq_rhs;
  EXPECT_LE((rm - (0.25 * ra + 0.75 * rb)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(BatteryModel, SolvesAreDeterministicAndWarmStartsAgree) {
  const auto tpl = build_battery_template(params_for(24));
  const auto pool = small_pool(24, 2);
  const StageData data = tpl.data(pool.support[0]);
  const auto r1 = solve_stage(tpl, target(120, 2500), data);
  const auto r2 = solve_stage(tpl, target(120, 2500), data);
  EXPECT_EQ(r1.cost_h, r2.cost_h);
  EXPECT_EQ(r1.dual_vertex, r2.dual_vertex);
  const auto warm = solve_stage(tpl, target(180, 2400), data, &r1.basis);
  const auto cold = solve_stage(tpl, target(180, 2400), data);
  EXPECT_NEAR(warm.cost_h, cold.cost_h, 1e-7 * (1 + std::abs(cold.cost_h)));
}

TEST(BatteryModel, RejectsMismatchedRealization) {
  const auto tpl = build_battery_template(params_for(24));
  const auto d = small_pool(12, 1).support[0];
  EXPECT_THROW(
      {
        try {
          tpl.data(d);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
          throw;
        }
      },
      Error);
  BatteryParams bad;
  bad.capacity = -1;
  EXPECT_THROW(build_battery_template(bad), Error);
}

TEST(BatteryModel, DailySolveTiming) {
  const auto tpl = build_battery_template(params_for(24));
  const auto pool = small_pool(24, 5);
  const auto start = std::chrono::steady_clock::now();
  int solves = 0;
  LPBasis basis;
  for (int rep = 0; rep < 4; ++rep)
    for (const auto& d : pool.support) {
      const StageData data = tpl.data(d);
      solve_stage(tpl, target(100 + 50 * rep, 2200 + 100 * rep), data);
      ++solves;
    }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("cold daily solves: %.2f ms each\n", 1e3 * secs / solves);
  SUCCEED();
}
