#pragma once

#include <algorithm>
#include <limits>
#include <memory>
#include <ostream>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "rhmpc/stage.hpp"

namespace rhmpc {

/// Dual vertices collected from period subproblems, in insertion order.
class VertexStore {
 public:
  explicit VertexStore(double dedup_tol = 1e-10) : dedup_tol_(dedup_tol) {}

  /// Index of @p pi in the store, inserting it unless a stored vertex lies within dedup_tol (inf norm).
  int insert(const Vec& pi) {
    for (int i = 0; i < size(); ++i)
      if (vertices_[i].size() == pi.size() && (vertices_[i] - pi).cwiseAbs().maxCoeff() <= dedup_tol_) return i;
    vertices_.push_back(pi);
    return size() - 1;
  }

  int size() const { return static_cast<int>(vertices_.size()); }
  bool empty() const { return vertices_.empty(); }
  const Vec& operator[](int i) const { return vertices_[i]; }
  const std::vector<Vec>& vertices() const { return vertices_; }
  double dedup_tol() const { return dedup_tol_; }

 private:
  double dedup_tol_;
  std::vector<Vec> vertices_;
};

/**
 * Affine minorant of the recourse part of the sample average: alpha + beta'w.
 * The master adds the design cost c_w'w and the common recourse floor.
 */
struct Cut {
  double alpha = 0.0;
  Vec beta;
  int birth_period = 0;

  double value(const Vec& w) const { return alpha + beta.dot(w); }
};

/**
 * Lower bound f(., d) <= h(., d) subtracted from each realization's recourse
 * before cuts are rescaled. Rescaling a cut by (m-1)/m keeps it valid only if
 * the rescaled quantity is nonnegative, which h itself need not be.
 */
enum class FloorMode {
  AnchoredPlane,  // affine: the best stored vertex plane at the latest target, re-anchored every period
  BoxMinimum,     // constant: min over the target box of h(., d)
  Zero,           // none; valid only when h >= 0
};

struct MasterProblem {
  std::vector<Cut> cuts;
  Vec design_cost;
  TargetBox box;
  double floor = 0.0;  // affine term common to every cut: floor + floor_slope'w
  Vec floor_slope;     // empty means zero

  double common_term(const Vec& w) const { return floor + (floor_slope.size() ? floor_slope.dot(w) : 0.0); }
  double cut_value(const Cut& c, const Vec& w) const { return common_term(w) + c.alpha + (design_cost + c.beta).dot(w); }
  Vec slope(const Cut& c) const {
    Vec s = design_cost + c.beta;
    if (floor_slope.size()) s += floor_slope;
    return s;
  }
};

struct MasterSolution {
  Vec w;
  double value = 0.0;
  int active_cut = -1;
};

/// max over cuts of floor + alpha + (c_w + beta)'w.
inline double lower_bound_at(const MasterProblem& master, const Vec& w) {
  if (master.cuts.empty()) throw Error(ErrorCode::EmptyCuts, "lower bound needs at least one cut");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : master.cuts) best = std::max(best, master.cut_value(c, w));
  return best;
}

inline double lower_bound_at(const MasterProblem& master, const Targets& w) { return lower_bound_at(master, w.encode()); }

/**
 * Epigraph LP  min theta  s.t.  theta >= cut_j(w),  w in box.
 * theta gets the finite lower bound max_j min_box cut_j, which every feasible
 * theta satisfies, so that the canonical form has no free variable.
 */
inline MasterSolution solve_master(const MasterProblem& master) {
  if (master.cuts.empty()) throw Error(ErrorCode::EmptyCuts, "master problem needs at least one cut");
  master.box.validate();
  const int nw = master.box.dim();
  if (master.design_cost.size() != nw || (master.floor_slope.size() && master.floor_slope.size() != nw))
    throw Error(ErrorCode::DimensionMismatch, "design cost / box mismatch");
  const int ncut = static_cast<int>(master.cuts.size());

  double theta_floor = -std::numeric_limits<double>::infinity();
  for (const auto& c : master.cuts) {
    if (c.beta.size() != nw) throw Error(ErrorCode::DimensionMismatch, "cut slope has the wrong dimension");
    const Vec slope = master.slope(c);
    double lo = master.floor + c.alpha;
    for (int i = 0; i < nw; ++i) lo += std::min(slope[i] * master.box.lower[i], slope[i] * master.box.upper[i]);
    theta_floor = std::max(theta_floor, lo);
  }

  GeneralLP g;
  g.cost = Vec::Zero(nw + 1);
  g.cost[nw] = 1.0;
  g.lower.resize(nw + 1);
  g.upper.resize(nw + 1);
  g.lower.head(nw) = master.box.lower;
  g.upper.head(nw) = master.box.upper;
  g.lower[nw] = theta_floor;
  g.upper[nw] = kInf;
  g.sense.assign(ncut, RowSense::LessEqual);
  g.rhs.resize(ncut);
  std::vector<Triplet> trips;
  trips.reserve(ncut * (nw + 1));
  for (int j = 0; j < ncut; ++j) {
    const Vec slope = master.slope(master.cuts[j]);
    for (int i = 0; i < nw; ++i)
      if (slope[i] != 0.0) trips.emplace_back(j, i, slope[i]);
    trips.emplace_back(j, nw, -1.0);
    g.rhs[j] = -(master.floor + master.cuts[j].alpha);
  }
  g.matrix.resize(ncut, nw + 1);
  g.matrix.setFromTriplets(trips.begin(), trips.end());

  const auto [lp, map] = canonicalize(g);
  const LPSolution sol = solve_lp(lp);
  if (sol.status != LPStatus::Optimal)
    throw Error(ErrorCode::MasterInfeasible, std::string("master problem ") + to_string(sol.status));
  const Vec x = map.recover(sol.primal);
  MasterSolution out;
  out.w = master.box.lower.cwiseMax(x.head(nw)).cwiseMin(master.box.upper);
  double best = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < ncut; ++j) {
    const double v = master.cut_value(master.cuts[j], out.w);
    if (v > best) best = v, out.active_cut = j;
  }
  out.value = best;
  return out;
}

/**
 * Master solve that keeps @p incumbent when it attains the optimal value
 * within @p tol relative, so that ties among minimizers do not move the targets.
 */
inline MasterSolution solve_master(const MasterProblem& master, const Vec& incumbent, double tol = 1e-9) {
  MasterSolution out = solve_master(master);
  if (!master.box.contains(incumbent, 0.0)) return out;
  const double at = lower_bound_at(master, incumbent);
  if (at > out.value + tol * std::max(1.0, std::abs(out.value))) return out;
  out.w = incumbent;
  out.value = at;
  out.active_cut = 0;
  for (int j = 1; j < static_cast<int>(master.cuts.size()); ++j)
    if (master.cut_value(master.cuts[j], incumbent) > master.cut_value(master.cuts[out.active_cut], incumbent))
      out.active_cut = j;
  return out;
}

/// Multiplies every cut by (m-1)/m: cuts valid for the (m-1)-sample average become valid for the m-sample one.
inline void rescale_cuts(std::vector<Cut>& cuts, int m) {
  if (m < 1) throw Error(ErrorCode::InvalidParams, "period index must be >= 1");
  const double f = static_cast<double>(m - 1) / m;
  for (auto& c : cuts) {
    c.alpha *= f;
    c.beta *= f;
  }
}

/**
 * Distinct realizations seen so far, with cached stage data, recourse floor,
 * warm-start basis, and per-vertex quantities (dual feasibility and offset + pi'r).
 * Finite-support draws are bit-identical, so each support point is solved and
 * priced once.
 */
class RealizationBank {
 public:
  struct Entry {
    PeriodRealization realization;
    StageData data;
    int count = 0;
    double floor = 0.0;  // f(w) = floor + floor_slope'w
    Vec floor_slope;
    LPBasis warm;
    std::vector<char> eligible;  // per store vertex: W'pi <= c within tolerance
    std::vector<double> pi_r;    // per store vertex: offset + pi'r
    double dual_tol = 0.0;
  };

  RealizationBank(const StageTemplate& tpl, const TargetBox& box, FloorMode mode, double dual_feas_tol = 1e-8)
      : tpl_(&tpl), box_(box), mode_(mode), dual_feas_tol_(dual_feas_tol) {}

  /// Id of @p d, creating its entry (stage data and floor) on first sight.
  int intern(const PeriodRealization& d) {
    auto it = index_.find(d);
    if (it != index_.end()) return it->second;
    Entry e;
    e.realization = d;
    e.data = tpl_->data(d);
    e.dual_tol = dual_feas_tol_ * std::max(1.0, e.data.cost.cwiseAbs().maxCoeff());
    e.floor_slope = Vec::Zero(tpl_->n_w());
    if (mode_ == FloorMode::BoxMinimum) e.floor = stage_floor(*tpl_, e.data, box_).first;
    const int id = static_cast<int>(entries_.size());
    entries_.push_back(std::move(e));
    index_.emplace(d, id);
    return id;
  }

  /// Extends the per-vertex caches to cover every vertex in @p store.
  void sync(const VertexStore& store) {
    while (static_cast<int>(tpi_.size()) < store.size())
      tpi_.push_back(tpl_->coupling.transpose() * store[static_cast<int>(tpi_.size())]);
    for (auto& e : entries_) {
      for (int v = static_cast<int>(e.eligible.size()); v < store.size(); ++v) {
        e.eligible.push_back(dual_violation(e.data, store[v]) <= e.dual_tol ? 1 : 0);
        e.pi_r.push_back(e.data.offset + store[v].dot(e.data.rhs));
      }
    }
  }

  /**
   * h_m(w, d): largest value offset + pi'(r - Tw) over dual-feasible stored
   * vertices, with the vertex index (ties: lowest index). Returns (-inf, -1)
   * when no stored vertex is dual feasible for this realization.
   */
  std::pair<double, int> best_vertex(int id, const Vec& w) const {
    const Entry& e = entries_[id];
    double best = -std::numeric_limits<double>::infinity();
    int arg = -1;
    for (int v = 0; v < static_cast<int>(e.eligible.size()); ++v) {
      if (!e.eligible[v]) continue;
      const double val = e.pi_r[v] - tpi_[v].dot(w);
      if (val > best) best = val, arg = v;
    }
    return {best, arg};
  }

  /// Stage solve at w, warm-started from the entry's previous basis.
  StageResult solve(int id, const Vec& w, bool warm_start = true) {
    Entry& e = entries_[id];
    StageResult r = solve_stage(*tpl_, w, e.data, warm_start && !e.warm.empty() ? &e.warm : nullptr);
    if (warm_start) e.warm = r.basis;
    return r;
  }

  void add_count(int id) { ++entries_[id].count; }

  /// Value at w of the plane of store vertex v for realization id: offset + pi'(r - Tw).
  double plane_value(int id, int v, const Vec& w) const { return entries_[id].pi_r[v] - tpi_[v].dot(w); }

  double floor_value(int id, const Vec& w) const { return entries_[id].floor + entries_[id].floor_slope.dot(w); }

  /// Replaces the floor of realization id by the plane of vertex v and returns (old - new) as (constant, slope).
  std::pair<double, Vec> anchor_floor(int id, int v) {
    Entry& e = entries_[id];
    std::pair<double, Vec> shift{e.floor - e.pi_r[v], e.floor_slope + tpi_[v]};
    e.floor = e.pi_r[v];
    e.floor_slope = -tpi_[v];
    return shift;
  }
  int size() const { return static_cast<int>(entries_.size()); }
  const Entry& operator[](int id) const { return entries_[id]; }
  const Vec& coupling_dual(int v) const { return tpi_[v]; }
  FloorMode mode() const { return mode_; }
  const StageTemplate& stage_template() const { return *tpl_; }

 private:
  const StageTemplate* tpl_;
  TargetBox box_;
  FloorMode mode_;
  double dual_feas_tol_;
  std::vector<Entry> entries_;
  std::unordered_map<PeriodRealization, int, RealizationHash> index_;
  std::vector<Vec> tpi_;  // T'pi per store vertex
};

namespace detail {

/**
 * Cut at w from realization counts: for each distinct realization the best
 * stored dual-feasible vertex at w, averaged with weights count/m. Terms are
 * measured above the realization's floor; a term whose best vertex lies below
 * the floor at w is replaced by 0 (the floor itself).
 */
inline Cut generate_cut_from_bank(const RealizationBank& bank, const std::vector<int>& counts, const Vec& w,
                                  int birth_period) {
  int m = 0;
  for (int c : counts) m += c;
  if (m < 1) throw Error(ErrorCode::InvalidParams, "cut generation needs a nonempty history");
  Cut cut;
  cut.beta = Vec::Zero(w.size());
  cut.birth_period = birth_period;
  for (int id = 0; id < static_cast<int>(counts.size()); ++id) {
    if (counts[id] == 0) continue;
    const auto& e = bank[id];
    const auto [value, v] = bank.best_vertex(id, w);
    if (v < 0 && bank.mode() == FloorMode::Zero)
      throw Error(ErrorCode::EmptyStore, "no stored vertex is dual feasible for an observed realization");
    if (v < 0 || (bank.mode() != FloorMode::Zero && value <= bank.floor_value(id, w))) continue;
    const double weight = static_cast<double>(counts[id]) / m;
    cut.alpha += weight * (e.pi_r[v] - e.floor);
    cut.beta -= weight * (bank.coupling_dual(v) + e.floor_slope);
  }
  return cut;
}

}  // namespace detail

/**
 * Cut at w_m from the full history: for each observed realization the stored
 * vertex maximizing pi'(r - T w_m) among those dual feasible for it (ties:
 * lowest index), averaged over the history. No floor shift is applied, so the
 * result is alpha = (1/m) sum (offset + pi'r), beta = -(1/m) sum T'pi.
 */
inline Cut generate_cut(const VertexStore& store, const std::vector<PeriodRealization>& history, const Vec& w,
                        const StageTemplate& tpl, int birth_period = -1) {
  if (store.empty()) throw Error(ErrorCode::EmptyStore, "vertex store is empty");
  if (history.empty()) throw Error(ErrorCode::InvalidParams, "history is empty");
  if (w.size() != tpl.n_w()) throw Error(ErrorCode::DimensionMismatch, "target dimension mismatch");
  TargetBox unused{w, w};
  RealizationBank bank(tpl, unused, FloorMode::Zero);
  std::vector<int> counts;
  for (const auto& d : history) {
    const int id = bank.intern(d);
    if (id >= static_cast<int>(counts.size())) counts.resize(id + 1, 0);
    ++counts[id];
  }
  bank.sync(store);
  return detail::generate_cut_from_bank(bank, counts, w, birth_period < 0 ? static_cast<int>(history.size()) : birth_period);
}

inline Cut generate_cut(const VertexStore& store, const std::vector<PeriodRealization>& history, const Targets& w,
                        const StageTemplate& tpl) {
  return generate_cut(store, history, w.encode(), tpl);
}

struct CutEngineOptions {
  double dedup_tol = 1e-10;
  double dual_feas_tol = 1e-8;  // relative to max(1, |c|_inf)
  FloorMode floor = FloorMode::AnchoredPlane;
  bool warm_start = true;
  /// Also store, for every distinct realization seen, the dual solution of the new optimal basis when it is dual feasible there.
  bool share_bases = false;
};

/**
 * Incremental cutting-plane state: vertex store, realization history (as
 * counts over distinct realizations), live cuts and the master problem.
 */
class CutEngine {
 public:
  CutEngine(StageTemplate tpl, TargetBox box, CutEngineOptions opt = {})
      : tpl_(std::make_unique<StageTemplate>(std::move(tpl))),
        box_(std::move(box)),
        opt_(opt),
        store_(opt.dedup_tol),
        bank_(std::make_unique<RealizationBank>(*tpl_, box_, opt.floor, opt.dual_feas_tol)) {
    box_.validate();
    if (box_.dim() != tpl_->n_w()) throw Error(ErrorCode::DimensionMismatch, "target box / template mismatch");
  }

  /// Period count m (observed realizations).
  int periods() const { return periods_; }
  const VertexStore& store() const { return store_; }
  const std::vector<Cut>& cuts() const { return cuts_; }
  const TargetBox& box() const { return box_; }
  const StageTemplate& stage_template() const { return *tpl_; }
  const RealizationBank& bank() const { return *bank_; }
  const std::vector<int>& history_ids() const { return history_; }

  int intern(const PeriodRealization& d) {
    const int id = bank_->intern(d);
    if (id >= static_cast<int>(counts_.size())) counts_.resize(id + 1, 0);
    return id;
  }

  /// Solves S at (w, d), warm-started per realization.
  StageResult solve(const PeriodRealization& d, const Vec& w) { return bank_->solve(intern(d), w, opt_.warm_start); }

  int add_vertex(const Vec& pi) {
    const int v = store_.insert(pi);
    bank_->sync(store_);
    return v;
  }

  /**
   * Stores the dual vertex of a period solve. With share_bases, the same basis
   * is priced under every other distinct realization and each dual-feasible
   * result is stored too (the vertex set of a fixed W and c, generalized to
   * realization-dependent W and c).
   */
  int add_solution(const StageResult& res) {
    const int v = store_.insert(res.dual_vertex);
    if (opt_.share_bases && !res.basis.empty()) {
      for (int id = 0; id < bank_->size(); ++id) {
        const auto& e = (*bank_)[id];
        if (auto pi = basis_dual(e.data, res.basis, e.dual_tol)) store_.insert(*pi);
      }
    }
    bank_->sync(store_);
    return v;
  }

  /// Appends d to the history (period m += 1).
  void observe(const PeriodRealization& d) {
    const int id = intern(d);
    ++counts_[id];
    bank_->add_count(id);
    history_.push_back(id);
    ++periods_;
    bank_->sync(store_);
  }

  /**
   * Rescales live cuts to the current m and adds the cut generated at w. With
   * anchored floors, every observed realization's floor first moves to its
   * best vertex plane at w, and live cuts are rebased by the floor change of
   * the periods they cover.
   */
  const Cut& add_cut(const Vec& w) {
    if (store_.empty()) throw Error(ErrorCode::EmptyStore, "vertex store is empty");
    if (periods_ < 1) throw Error(ErrorCode::InvalidParams, "no realization observed");
    if (!cuts_.empty()) rescale_cuts(cuts_, periods_);
    if (opt_.floor == FloorMode::AnchoredPlane) {
      for (int id = 0; id < static_cast<int>(counts_.size()); ++id) {
        if (counts_[id] == 0) continue;
        const int v = bank_->best_vertex(id, w).second;
        if (v < 0) throw Error(ErrorCode::EmptyStore, "no stored vertex is dual feasible for an observed realization");
        const auto [d_alpha, d_beta] = bank_->anchor_floor(id, v);
        for (size_t j = 0; j < cuts_.size(); ++j) {
          const auto& born = birth_counts_[j];
          if (id >= static_cast<int>(born.size()) || born[id] == 0) continue;
          const double f = static_cast<double>(born[id]) / periods_;
          cuts_[j].alpha += f * d_alpha;
          cuts_[j].beta += f * d_beta;
        }
      }
    }
    cuts_.push_back(detail::generate_cut_from_bank(*bank_, counts_, w, periods_));
    birth_counts_.push_back(counts_);
    return cuts_.back();
  }

  /// (1/m) sum of recourse floors over the history, as (constant, slope).
  std::pair<double, Vec> floor_average() const {
    std::pair<double, Vec> out{0.0, Vec::Zero(tpl_->n_w())};
    if (periods_ == 0) return out;
    for (int id = 0; id < static_cast<int>(counts_.size()); ++id) {
      out.first += counts_[id] * (*bank_)[id].floor;
      out.second += counts_[id] * (*bank_)[id].floor_slope;
    }
    out.first /= periods_;
    out.second /= periods_;
    return out;
  }

  MasterProblem master() const {
    auto [c, s] = floor_average();
    return MasterProblem{cuts_, tpl_->design_cost, box_, c, std::move(s)};
  }

  MasterSolution solve_master() const { return rhmpc::solve_master(master()); }

  MasterSolution solve_master(const Vec& incumbent, double tol = 1e-9) const {
    return rhmpc::solve_master(master(), incumbent, tol);
  }

  double lower_bound_at(const Vec& w) const { return rhmpc::lower_bound_at(master(), w); }

  /// Cut j with the current floor folded in, so that lower_bound_at = max_j alpha + (c_w + beta)'w.
  Cut effective_cut(int j) const {
    Cut c = cuts_.at(j);
    const auto [f, s] = floor_average();
    c.alpha += f;
    c.beta += s;
    return c;
  }

  /// h_m(w, d): best stored dual-feasible vertex bound; -inf when none applies.
  double recourse_lower_bound(const PeriodRealization& d, const Vec& w) {
    const int id = intern(d);
    bank_->sync(store_);
    return bank_->best_vertex(id, w).first;
  }

  /// phi_m(w) = c_w'w + (1/m) sum h(w, d_xi), one stage solve per distinct realization.
  double sample_average_cost(const Vec& w) {
    if (periods_ == 0) throw Error(ErrorCode::InvalidParams, "no realization observed");
    double s = 0.0;
    for (int id = 0; id < static_cast<int>(counts_.size()); ++id)
      if (counts_[id] > 0) s += counts_[id] * bank_->solve(id, w, opt_.warm_start).cost_h;
    return tpl_->design_cost.dot(w) + s / periods_;
  }

 private:
  std::unique_ptr<StageTemplate> tpl_;
  TargetBox box_;
  CutEngineOptions opt_;
  VertexStore store_;
  std::unique_ptr<RealizationBank> bank_;
  std::vector<Cut> cuts_;
  std::vector<int> counts_;
  std::vector<std::vector<int>> birth_counts_;  // realization counts when each cut was generated
  std::vector<int> history_;
  int periods_ = 0;
};

/// One JSON line per cut: {period, alpha, beta, birth_period}.
inline void write_cut_record(std::ostream& out, int period, const Cut& cut) {
  nlohmann::json j;
  j["period"] = period;
  j["alpha"] = cut.alpha;
  j["beta"] = std::vector<double>(cut.beta.data(), cut.beta.data() + cut.beta.size());
  j["birth_period"] = cut.birth_period;
  out << j.dump() << "\n";
}

}  // namespace rhmpc
