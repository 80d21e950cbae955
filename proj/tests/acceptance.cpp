// Acceptance report: one PASS/FAIL line per criterion, with the measured values.
// Exits 0 when every check ran to completion; the lines carry the verdicts.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "brute_force_lp.hpp"
#include "rhmpc/cli.hpp"

using namespace rhmpc;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Report {
  std::map<int, std::string> lines;
  int passed = 0;

  void line(int id, bool ok, const std::string& detail) {
    passed += ok;
    char head[64];
    std::snprintf(head, sizeof head, "criterion %2d: %s  ", id, ok ? "PASS" : "FAIL");
    lines[id] = head + detail;
    std::fprintf(stderr, "%s\n", lines[id].c_str());
  }

  std::string text() const {
    std::string out;
    for (const auto& [id, l] : lines) out += l + "\n";
    out += "summary: " + std::to_string(passed) + "/" + std::to_string(lines.size()) + " criteria pass\n";
    return out;
  }
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Battery {
  BatteryParams params;
  StageTemplate tpl;
  ScenarioPool pool;
  TargetBox box;

  Battery(int templates, std::uint64_t seed) {
    tpl = build_battery_template(params);
    SyntheticSpec spec;
    spec.templates = templates;
    spec.seed = seed;
    pool = make_synthetic_pool(spec);
    box = default_target_box(params, pool.max_load());
  }

  std::vector<PeriodRealization> sequence(std::uint64_t seed, int periods) const {
    RngStream rng(seed, cli::kSequenceStream);
    return sample_sequence(pool, rng, periods);
  }

  Vec random_w(RngStream& rng) const {
    Vec w(box.dim());
    for (int i = 0; i < box.dim(); ++i) w[i] = rng.uniform(box.lower[i], box.upper[i]);
    return w;
  }
};

/// phi_m(w) by fresh stage solves, one per distinct realization weighted by its count.
double fresh_phi(const StageTemplate& tpl, const std::vector<PeriodRealization>& hist, const Vec& w) {
  std::unordered_map<PeriodRealization, int, RealizationHash> counts;
  std::vector<const PeriodRealization*> order;
  for (const auto& d : hist)
    if (counts[d]++ == 0) order.push_back(&d);
  double s = 0.0;
  for (const auto* d : order) s += counts[*d] * solve_stage(tpl, w, tpl.data(*d)).cost_h;
  return tpl.design_cost.dot(w) + s / hist.size();
}

// 1. LP solver against basis enumeration.
void criterion_lp(Report& rep) {
  const auto t0 = Clock::now();
  RngStream rng(500500);
  int mismatches = 0, optimal = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 8), m = 1 + static_cast<int>(rng.uniform() * 4);
    auto draw = [&] { return static_cast<double>(static_cast<int>(rng.uniform() * 11.0) - 5); };
    Eigen::MatrixXd A(m, n);
    Eigen::VectorXd b(m), c(n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = draw();
    for (int i = 0; i < m; ++i) b[i] = draw();
    for (int j = 0; j < n; ++j) c[j] = draw();
    StandardLP lp;
    lp.eq_matrix = sparse_from_dense(A);
    lp.eq_rhs = b;
    lp.cost = c;
    const LPSolution s = solve_lp(lp);
    const auto o = rhmpc::testing::brute_force_lp(A, b, c);
    if (s.status != o.status) {
      ++mismatches;
      continue;
    }
    if (s.status == LPStatus::Optimal) {
      ++optimal;
      const double err = std::abs(s.objective - o.objective);
      worst = std::max(worst, err);
      if (err > 1e-8) ++mismatches;
    }
  }
  const double secs = seconds_since(t0);
  rep.line(1, mismatches == 0 && secs < 10,
           fmt("500 random LPs (%d optimal), %d status/objective mismatches, max |obj diff| %.2e, %.2f s", optimal,
               mismatches, worst, secs));
}

// 2-4. Cut validity, rescaled-cut validity and monotone h_m on one K=5, 50-period run.
void criteria_cuts(Report& rep) {
  const auto t0 = Clock::now();
  const Battery b(5, 5);
  const auto seq = b.sequence(5, 50);
  HierarchyState st(b.tpl, b.box);
  RngStream wrng(2, 0xacc);

  struct Pair {
    Vec w;
    const PeriodRealization* d;
    double h;
    double last;
  };
  std::vector<Pair> pairs;
  for (int i = 0; i < 20; ++i) {
    const Vec w = b.random_w(wrng);
    const auto* d = &b.pool.support[i % b.pool.size()];
    pairs.push_back({w, d, solve_stage(b.tpl, w, b.tpl.data(*d)).cost_h, -std::numeric_limits<double>::infinity()});
  }

  int violations2 = 0, checks2 = 0, violations3 = 0, checks3 = 0, violations4 = 0;
  double worst2 = -1e300, worst3 = -1e300;
  std::vector<PeriodRealization> hist;
  for (int m = 1; m <= 50; ++m) {
    hist.push_back(seq[m - 1]);
    step_period(st, seq[m - 1]);
    const MasterProblem mp = st.engine.master();
    for (int k = 0; k < 20; ++k) {
      const Vec w = b.random_w(wrng);
      const double phi = fresh_phi(b.tpl, hist, w), tol = 1e-6 * (1 + std::abs(phi));
      for (const auto& c : mp.cuts) {
        const double excess = mp.cut_value(c, w) - phi;
        ++checks2;
        worst2 = std::max(worst2, excess / (1 + std::abs(phi)));
        if (excess > tol) ++violations2;
        const int age = m - c.birth_period;
        if (k < 10 && (age == 1 || age == 5 || age == 20)) {
          ++checks3;
          worst3 = std::max(worst3, excess / (1 + std::abs(phi)));
          if (excess > tol) ++violations3;
        }
      }
    }
    for (auto& p : pairs) {
      const double hm = st.engine.recourse_lower_bound(*p.d, p.w);
      const double tol = 1e-8 * std::max(1.0, std::abs(p.h));
      if (hm < p.last - tol || hm > p.h + tol) ++violations4;
      p.last = hm;
    }
  }
  const double secs = seconds_since(t0);
  rep.line(2, violations2 == 0 && secs < 120,
           fmt("%d cut checks over 50 periods x 20 w, %d violations, max (cut - phi)/(1+|phi|) %.2e, %.1f s", checks2,
               violations2, worst2, secs));
  rep.line(3, violations3 == 0 && checks3 > 0,
           fmt("%d checks of cuts aged 1, 5 and 20 periods at 10 w, %d violations, max rel excess %.2e", checks3,
               violations3, worst3));
  rep.line(4, violations4 == 0, fmt("20 (w, d) pairs over 50 periods, %d monotonicity or upper-bound violations", violations4));
}

// 5, 6 and 9 share the K=3 150-period fixture; 7 uses oracle fixtures.
void criteria_convergence(Report& rep) {
  const auto t0 = Clock::now();
  const Battery b(3, 3);
  const auto seq = b.sequence(3, 150);
  const SaaResult star = solve_pool_saa(b.tpl, b.pool, b.box);
  const double ref_star = reference_cost(b.tpl, b.pool, star.w);
  ControllerOptions opt;
  opt.eval_full_until = 150;
  HierarchyState st(b.tpl, b.box, opt);
  std::map<int, double> rel;
  double max_eps60 = -1e300, min_eps = 1e300;
  int sandwich_bad = 0, sandwich_bad_literal = 0;
  std::vector<Vec> ws;
  std::vector<PeriodRealization> hist;
  for (int m = 1; m <= 150; ++m) {
    hist.push_back(seq[m - 1]);
    const GapRecord r = step_period(st, seq[m - 1]);
    ws.push_back(r.targets.encode());
    min_eps = std::min(min_eps, r.eps);
    if (m == 10 || m == 20 || m == 40)
      rel[m] = (reference_cost(b.tpl, b.pool, r.targets) - ref_star) / std::abs(ref_star);
    if (m >= 60) max_eps60 = std::max(max_eps60, r.eps);
    if (m <= 40) {
      const double saa = solve_saa(b.tpl, hist, b.box).cost, tol = 1e-6 * std::abs(saa);
      if (r.master_value > saa + tol || saa > r.running_cost + tol) ++sandwich_bad;
      if (r.lower_bound > saa + tol) ++sandwich_bad_literal;
    }
  }
  const double secs = seconds_since(t0);
  const bool ok5 = rel[10] <= 5e-3 && rel[20] <= 5e-3 && rel[40] <= 5e-3 && max_eps60 < 1e-2 && secs < 300;
  rep.line(5, ok5,
           fmt("K=3 seed 3: excess over the full-support optimum %.3e / %.3e / %.3e at m=10/20/40 (limit 5e-3); "
               "max eps for m>=60 %.3e; %.1f s",
               rel[10], rel[20], rel[40], max_eps60, secs));
  rep.line(6, sandwich_bad == 0,
           fmt("m<=40: %d violations of min cut model <= SAA_m <= phi_m(w_m); cut bound at w_m above SAA_m in %d periods",
               sandwich_bad, sandwich_bad_literal));
  double dev = 0.0;
  for (int m = 120; m < 150; ++m) dev = std::max(dev, (ws[m] - ws.back()).cwiseAbs().maxCoeff());
  rep.line(9, dev <= 1e-6,
           fmt("max |w_m - w_150| over the final 30 periods %.3e (E0 %.4f, peak %.4f); min eps %.2e", dev,
               ws.back()[0], ws.back()[1], min_eps));
}

void criterion_periodicity(Report& rep) {
  int bad = 0, fixtures = 0;
  double worst = -1e300;
  auto check = [&](const Battery& b, const std::vector<PeriodRealization>& hist) {
    const double p = solve_saa(b.tpl, hist, b.box).cost;
    const double o = solve_nonperiodic(b.tpl, hist, b.box, true).cost;
    ++fixtures;
    worst = std::max(worst, o - p);
    if (o > p + 1e-6) ++bad;
  };
  const Battery b3(3, 3), b5(5, 5);
  for (const auto& d : b3.pool.support) check(b3, {d});
  check(b3, b3.sequence(3, 10));
  check(b5, b5.sequence(5, 20));
  check(b5, b5.sequence(5, 40));
  int eq_bad = 0;
  double eq_worst = 0.0;
  for (const auto& d : b5.pool.support) {
    const std::vector<PeriodRealization> same(8, d);
    const double p = solve_saa(b5.tpl, same, b5.box).cost;
    const double o = solve_nonperiodic(b5.tpl, same, b5.box, false).cost;
    const double rel = std::abs(o - p) / std::abs(p);
    eq_worst = std::max(eq_worst, rel);
    if (rel > 1e-6) ++eq_bad;
  }
  rep.line(7, bad == 0 && eq_bad == 0,
           fmt("O_m <= P_m + 1e-6 on %d fixtures (max O-P %.2e); identical-data equality on 5 templates "
               "(max rel diff %.2e)",
               fixtures, worst, eq_worst));
}

void criterion_perfect_information(Report& rep) {
  const Battery b(5, 5);
  const auto seq = b.sequence(5, 150);
  ControllerOptions opt;
  opt.eval_full_until = 0;
  opt.eval_every = 1000;
  HierarchyState st(b.tpl, b.box, opt);
  const ForecastModel fm{0.1, 5};
  double forecast_cost = 0.0, tail = 0.0;
  for (int m = 1; m <= 150; ++m) {
    forecast_cost += intra_period_mpc(b.tpl, st.targets_w, make_forecast(fm, seq[m - 1], m)).cost_h;
    const double before = st.realized_cost_accum;
    step_period(st, seq[m - 1]);
    if (m > 50) tail += st.realized_cost_accum - before;
  }
  OracleOptions oo;
  oo.max_periods = 150;
  const double oracle = solve_saa(b.tpl, seq, b.box, oo).cost;
  const double realized = st.realized_cost_accum / 150;
  const double ratio = (realized - oracle) / std::abs(oracle);
  rep.line(8, ratio <= 0.10,
           fmt("K=5 sigma=0.1: realized %.2f vs perfect-information %.2f per period, excess %.2f%% (limit 10%%); "
               "periods 51-150 alone: excess %.2f%%",
               realized, oracle, 100 * ratio, 100 * (tail / 100 - oracle) / std::abs(oracle)));
}

void criterion_throughput(Report& rep) {
  const auto t0 = Clock::now();
  const Battery b(5, 10);
  const auto seq = b.sequence(10, 300);
  ControllerOptions opt;
  opt.eval_full_until = 0;
  opt.eval_every = 5;
  HierarchyState st(b.tpl, b.box, opt);
  const ForecastModel fm{0.1, 10};
  double last_eps = std::numeric_limits<double>::quiet_NaN();
  for (int m = 1; m <= 300; ++m) {
    intra_period_mpc(b.tpl, st.targets_w, make_forecast(fm, seq[m - 1], m));
    const GapRecord r = step_period(st, seq[m - 1]);
    if (!std::isnan(r.eps)) last_eps = r.eps;
  }
  const double secs = seconds_since(t0);
  rep.line(10, secs < 600, fmt("n=24, m=300, phi_m every 5th period: %.1f s (limit 600 s), final eps %.2e", secs, last_eps));
}

}  // namespace

int main(int argc, char** argv) {
  Report rep;
  criterion_lp(rep);
  criteria_cuts(rep);
  criteria_convergence(rep);
  criterion_periodicity(rep);
  criterion_perfect_information(rep);
  criterion_throughput(rep);
  const std::string text = rep.text();
  std::fputs(text.c_str(), stdout);
  if (argc > 1) std::ofstream(argv[1]) << text;
  return 0;
}
