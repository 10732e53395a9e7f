#pragma once

// Outer-approximation drivers. One code path serves both variants; they
// differ only in the scaling applied to constraint cuts at feasible points
// (rho from compute_pi for the new method, 1 for the classic one).
//
// Master over (x, y, theta):
//   min theta  s.t.  pool cuts,  x in X,  y in Y integer,  theta <= UBD - eps_cut

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "oakit/cutgen.hpp"
#include "oakit/errors.hpp"
#include "oakit/log.hpp"
#include "oakit/lp.hpp"
#include "oakit/milp.hpp"
#include "oakit/model.hpp"
#include "oakit/nlp.hpp"

namespace oakit {

enum class OaStatus { optimal, infeasible, iteration_limit };

inline const char* to_string(OaStatus s) {
  switch (s) {
    case OaStatus::optimal: return "optimal";
    case OaStatus::infeasible: return "infeasible";
    case OaStatus::iteration_limit: return "iteration-limit";
  }
  return "?";
}

struct IterationRecord {
  int k = 0;
  IntPoint y;
  Classification classification = Classification::feasible_integer;
  /// f(x_k, y_k) when feasible, total slack when infeasible.
  double subproblem_value = 0.0;
  double rho = 1.0;
  double ubd = kInf;
  double lbd = -kInf;
  double time_s = 0.0;

  std::vector<double> x;
  std::vector<double> g_values;
  std::vector<std::size_t> J;
  double Pi = 0.0;
  double max_g_J = 0.0;
  double kkt_residual = 0.0;
  bool master_solved = false;
  /// Master optimum (x part, then y part) that proposed the next integer point.
  std::vector<double> master_x;
  std::vector<double> master_y;
  std::string note;
};

struct OaState {
  int k = 0;
  std::vector<IntPoint> T;
  std::vector<IntPoint> S;
  double ubd = kInf;
  double lbd = -kInf;
  std::optional<Point> incumbent;
  std::vector<CutBlock> cuts;
  std::vector<IterationRecord> trace;
  /// Integer point to visit at the next iterate() call.
  std::optional<IntPoint> next_y;
  bool done = false;
  OaStatus status = OaStatus::iteration_limit;
  int masters = 0;
  std::string message;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  bool visited(const IntPoint& y) const {
    return std::find(T.begin(), T.end(), y) != T.end() || std::find(S.begin(), S.end(), y) != S.end();
  }
};

struct OaResult {
  OaStatus status = OaStatus::iteration_limit;
  std::optional<Point> incumbent;
  double objective = kInf;
  double lbd = -kInf;
  double gap = kInf;
  int iterations = 0;
  int masters = 0;
  std::vector<IterationRecord> trace;
  std::vector<CutBlock> cuts;
  std::string message;
};

/// Cuts produced at one integer point, together with the quantities logged for it.
struct PointCuts {
  SubproblemResult sub;
  KktCertificate cert;
  std::vector<CutBlock> cuts;
  std::optional<RhoComputation> rho;
  double value = 0.0;
  std::vector<double> x;
  std::vector<double> g;
  std::string note;
};

/// Classifies y, recovers multipliers and builds the corresponding cut block.
inline PointCuts generate_point_cuts(const MinlpProblem& P, const IntPoint& y, const SolverConfig& cfg, int k) {
  PointCuts pc;
  pc.sub = classify_and_solve(P, y, cfg);
  if (pc.sub.nlp) {
    const NlpResult& nlp = *pc.sub.nlp;
    pc.x = nlp.x;
    pc.g = nlp.g_values;
    pc.value = nlp.objective;
    const ActivePartition part = active_partition(pc.g, cfg.tol_act);
    pc.cert = fit_kkt_feasible(P, pc.x, y, part, cfg);
    double rho = 1.0;
    if (cfg.variant == Variant::new_oa && !cfg.force_unit_rho && !part.inactive.empty()) {
      pc.rho = compute_pi(P, pc.cert, pc.x, y, part.inactive, cfg);
      rho = pc.rho->rho;
    }
    pc.cuts = build_feasible_cuts(pc.value, pc.cert, rho, pc.x, y);
  } else {
    pc.x = pc.sub.feas.x;
    pc.g = pc.sub.feas.g_values;
    pc.value = pc.sub.feas.total;
    const ActivePartition part = active_partition(pc.g, cfg.tol_act);
    pc.cert = fit_kkt_infeasible(P, pc.x, y, part, cfg);
    pc.cuts = build_infeasible_cuts(pc.cert, pc.g, pc.x, y);
  }
  for (auto& c : pc.cuts) c.iteration = k;
  if (pc.cert.residual > cfg.tol_kkt) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "stationarity residual %.3g above tol_kkt; cuts kept (valid by convexity)",
                  pc.cert.residual);
    pc.note = buf;
    if (cfg.strict_kkt)
      throw KktError("stationarity residual " + std::to_string(pc.cert.residual) + " at y=(" + to_string(y) + ")",
                     pc.cert.residual);
    diag::info("y=(%s): %s", to_string(y).c_str(), buf);
  }
  return pc;
}

/// Master MILP for the given cut pool. Column layout: x, then y, then theta.
inline MilpProblem assemble_master(const std::vector<CutBlock>& cuts, double ubd, const MinlpProblem& P,
                                   const SolverConfig& cfg) {
  const std::size_t n = P.n, p = P.p, th = n + p;
  MilpProblem mp;
  mp.lp = LpProblem(n + p + 1);
  mp.lp.c[th] = 1.0;
  bool has_objective_cut = false;
  for (const auto& c : cuts) {
    std::vector<double> a(n + p + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) a[j] = c.ax[j];
    for (std::size_t j = 0; j < p; ++j) a[n + j] = c.ay[j];
    a[th] = c.theta_coef;
    mp.lp.add_row(std::move(a), c.rhs);
    if (c.kind == CutBlock::Kind::objective) has_objective_cut = true;
  }
  if (std::isfinite(ubd)) {
    std::vector<double> a(n + p + 1, 0.0);
    a[th] = 1.0;
    mp.lp.add_row(std::move(a), ubd - cfg.eps_cut);
  }
  add_polyhedron(mp.lp, P.X, 0);
  add_polyhedron(mp.lp, P.Y, n);
  mp.lp.lower[th] = has_objective_cut ? -kInf : cfg.theta_floor;
  mp.lp.upper[th] = kInf;
  for (std::size_t j = 0; j < p; ++j) mp.integer_vars.push_back(n + j);
  return mp;
}

inline MilpProblem assemble_master(const OaState& state, const MinlpProblem& P, const SolverConfig& cfg) {
  return assemble_master(state.cuts, state.ubd, P, cfg);
}

namespace detail {

inline bool gap_closed(double ubd, double lbd, const SolverConfig& cfg) {
  if (!std::isfinite(ubd) || !std::isfinite(lbd)) return false;
  const double gap = ubd - lbd;
  return gap <= cfg.eps_abs || gap / (std::fabs(ubd) + 1e-10) <= cfg.eps_rel;
}

inline double elapsed(const OaState& s) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - s.start).count();
}

}  // namespace detail

/// One pass of the main loop: subproblem at state.next_y, cuts, master.
inline OaState iterate(OaState state, const MinlpProblem& P, const SolverConfig& cfg) {
  if (state.done) return state;
  if (!state.next_y) throw ModelError("iterate called without an integer point");
  const IntPoint y = *state.next_y;
  state.next_y.reset();
  ++state.k;

  IterationRecord rec;
  rec.k = state.k;
  rec.y = y;

  PointCuts pc;
  try {
    pc = generate_point_cuts(P, y, cfg, state.k);
  } catch (const Error& e) {
    rec.note = std::string("subproblem failed: ") + e.what();
    rec.ubd = state.ubd;
    rec.lbd = state.lbd;
    rec.time_s = detail::elapsed(state);
    state.trace.push_back(rec);
    throw;
  }
  rec.classification = pc.sub.classification();
  rec.subproblem_value = pc.value;
  rec.x = pc.x;
  rec.g_values = pc.g;
  rec.kkt_residual = pc.cert.residual;
  rec.note = pc.note;
  if (rec.classification == Classification::feasible_integer) {
    state.T.push_back(y);
    if (pc.rho) {
      rec.rho = pc.rho->rho;
      rec.J = pc.rho->J;
      rec.Pi = pc.rho->Pi;
      rec.max_g_J = pc.rho->max_g_J;
    }
    if (pc.value < state.ubd) {
      state.ubd = pc.value;
      state.incumbent = Point{pc.x, to_real(y)};
    }
  } else {
    state.S.push_back(y);
  }
  state.cuts.insert(state.cuts.end(), pc.cuts.begin(), pc.cuts.end());

  const MilpProblem mp = assemble_master(state, P, cfg);
  MilpOptions mopt;
  mopt.node_limit = cfg.node_limit;
  const MilpSolution ms = solve_milp(mp, mopt);
  ++state.masters;
  rec.master_solved = true;
  if (ms.status == MilpStatus::unbounded) throw NumericError("master MILP unbounded");
  if (ms.status == MilpStatus::infeasible) {
    state.done = true;
    if (std::isfinite(state.ubd)) {
      state.lbd = state.ubd;
      state.status = OaStatus::optimal;
    } else {
      state.status = OaStatus::infeasible;
    }
    state.message = "master infeasible";
  } else {
    state.lbd = std::max(state.lbd, ms.value);
    rec.master_x.assign(ms.z.begin(), ms.z.begin() + static_cast<std::ptrdiff_t>(P.n));
    rec.master_y.assign(ms.z.begin() + static_cast<std::ptrdiff_t>(P.n), ms.z.begin() + static_cast<std::ptrdiff_t>(P.n + P.p));
    IntPoint ny(P.p);
    for (std::size_t j = 0; j < P.p; ++j) ny[j] = std::llround(ms.z[P.n + j]);
    if (detail::gap_closed(state.ubd, state.lbd, cfg)) {
      state.done = true;
      state.status = OaStatus::optimal;
      state.message = "gap closed";
    } else if (state.visited(ny)) {
      // Only reachable through subproblem inexactness; the pool cannot progress.
      state.done = true;
      state.status = OaStatus::iteration_limit;
      state.message = "master proposed visited y=(" + to_string(ny) + ")";
      if (!rec.note.empty()) rec.note += "; ";
      rec.note += state.message;
      diag::error("%s", state.message.c_str());
    } else {
      state.next_y = ny;
    }
  }
  rec.ubd = state.ubd;
  rec.lbd = state.lbd;
  rec.time_s = detail::elapsed(state);
  diag::info("k=%d y=(%s) %s value=%.8g rho=%.6g UBD=%.8g LBD=%.8g", rec.k, to_string(y).c_str(),
            to_string(rec.classification), rec.subproblem_value, rec.rho, rec.ubd, rec.lbd);
  state.trace.push_back(std::move(rec));
  return state;
}

inline OaResult make_result(const OaState& s) {
  OaResult r;
  r.status = s.status;
  r.incumbent = s.incumbent;
  r.objective = s.ubd;
  r.lbd = s.lbd;
  r.gap = (std::isfinite(s.ubd) && std::isfinite(s.lbd)) ? s.ubd - s.lbd : kInf;
  r.iterations = s.k;
  r.masters = s.masters;
  r.trace = s.trace;
  r.cuts = s.cuts;
  r.message = s.message;
  return r;
}

namespace detail {

inline bool lattice_empty(const Polyhedron& Y, const SolverConfig& cfg) {
  MilpProblem mp;
  mp.lp = LpProblem(Y.dim());
  add_polyhedron(mp.lp, Y, 0);
  for (std::size_t j = 0; j < Y.dim(); ++j) mp.integer_vars.push_back(j);
  MilpOptions opt;
  opt.node_limit = cfg.node_limit;
  return solve_milp(mp, opt).status == MilpStatus::infeasible;
}

}  // namespace detail

/// Runs the selected variant from y0 until a termination test fires.
inline OaResult solve(const MinlpProblem& P, const IntPoint& y0, const SolverConfig& cfg = {}) {
  require_valid(P);
  OaState state;
  if (detail::lattice_empty(P.Y, cfg)) {
    state.done = true;
    state.status = OaStatus::infeasible;
    state.message = "Y has no integer points";
    return make_result(state);
  }
  if (y0.size() != P.p) throw ModelError("y0 has length " + std::to_string(y0.size()) + ", expected " +
                                         std::to_string(P.p));
  if (!P.Y.contains(to_real(y0), 1e-9)) throw ModelError("y0 = (" + to_string(y0) + ") is not in Y");
  state.next_y = y0;
  while (!state.done && state.k < cfg.max_iter) state = iterate(std::move(state), P, cfg);
  if (!state.done) {
    state.status = OaStatus::iteration_limit;
    state.message = "iteration limit " + std::to_string(cfg.max_iter) + " reached";
  }
  return make_result(state);
}

/// Reference optimum by enumerating Y ∩ Z^p.
inline OaResult brute_force_solve(const MinlpProblem& P, const SolverConfig& cfg = {}) {
  require_valid(P);
  OaState state;
  for (const IntPoint& y : enumerate_integer_points(P.Y, cfg.enum_cap)) {
    const SubproblemResult sub = classify_and_solve(P, y, cfg);
    IterationRecord rec;
    rec.k = ++state.k;
    rec.y = y;
    rec.classification = sub.classification();
    if (sub.nlp) {
      state.T.push_back(y);
      rec.subproblem_value = sub.nlp->objective;
      rec.x = sub.nlp->x;
      rec.g_values = sub.nlp->g_values;
      if (sub.nlp->objective < state.ubd) {
        state.ubd = sub.nlp->objective;
        state.incumbent = Point{sub.nlp->x, to_real(y)};
      }
    } else {
      state.S.push_back(y);
      rec.subproblem_value = sub.feas.total;
      rec.x = sub.feas.x;
      rec.g_values = sub.feas.g_values;
    }
    rec.ubd = state.ubd;
    rec.time_s = detail::elapsed(state);
    state.trace.push_back(std::move(rec));
  }
  state.done = true;
  state.status = state.incumbent ? OaStatus::optimal : OaStatus::infeasible;
  state.lbd = state.ubd;
  state.message = "enumerated " + std::to_string(state.k) + " integer points";
  return make_result(state);
}

struct FullMasterCheck {
  MilpStatus status = MilpStatus::infeasible;
  double value = kInf;
  std::vector<CutBlock> cuts;
  std::vector<IntPoint> T;
  std::vector<IntPoint> S;
};

/// Master built from cuts at every integer point, with no incumbent row.
/// Its optimal value equals the MINLP optimum when the cuts are exact.
inline FullMasterCheck full_master(const MinlpProblem& P, const SolverConfig& cfg = {}) {
  FullMasterCheck out;
  int k = 0;
  for (const IntPoint& y : enumerate_integer_points(P.Y, cfg.enum_cap)) {
    PointCuts pc = generate_point_cuts(P, y, cfg, ++k);
    (pc.sub.nlp ? out.T : out.S).push_back(y);
    out.cuts.insert(out.cuts.end(), pc.cuts.begin(), pc.cuts.end());
  }
  MilpOptions opt;
  opt.node_limit = cfg.node_limit;
  const MilpSolution ms = solve_milp(assemble_master(out.cuts, kInf, P, cfg), opt);
  out.status = ms.status;
  out.value = ms.value;
  return out;
}

}  // namespace oakit
