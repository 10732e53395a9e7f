#pragma once

// Kelley cutting planes for the fixed-y subproblems
//
//   NLP(y):  min_x f(x, y)          s.t. g_i(x, y) <= 0,   x in X
//   F(y):    min_{x,u} sum_i u_i    s.t. g_i(x, y) <= u_i, u >= 0, x in X
//
// F(y) is solved first; y is feasible iff its optimal total slack is at most
// tol_feas, and only then is NLP(y) solved.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "oakit/errors.hpp"
#include "oakit/expr.hpp"
#include "oakit/log.hpp"
#include "oakit/lp.hpp"
#include "oakit/model.hpp"

namespace oakit {

/// phi(x, y) <= w[epigraph] when epigraph is set, phi(x, y) <= 0 otherwise.
struct KelleyTerm {
  Expr expr;
  std::optional<std::size_t> epigraph;
};

/// min aux_cost' w over x in X, aux bounds, epigraph terms.
struct KelleyProblem {
  std::vector<KelleyTerm> terms;
  std::vector<double> aux_cost;
  std::vector<double> aux_lower;
  std::vector<double> aux_upper;
  Polyhedron X;
  std::vector<double> y;
  /// Return as soon as the true value at an iterate is at most this.
  double stop_at = -kInf;
  /// Give up (KelleyResult::stalled) after this many consecutive LP values
  /// at or below stop_at without the true value following. 0 disables.
  int stall_limit = 0;
};

struct KelleyResult {
  bool infeasible = false;
  std::vector<double> x;
  std::vector<double> aux;
  /// Objective of the last LP (a lower bound on the true optimum).
  double lp_value = 0.0;
  /// sum_k aux_cost_k * max over attached terms of phi, at x.
  double true_value = 0.0;
  double gap = 0.0;
  double max_violation = 0.0;
  int iterations = 0;
  bool stalled = false;
  std::vector<double> lp_values;
  std::vector<std::vector<double>> iterates;
};

namespace detail {

inline Point fixed_y_point(const std::vector<double>& x, const std::vector<double>& y) { return Point{x, y}; }

}  // namespace detail

/// Generic Kelley loop. Converged when every epigraph term satisfies
/// phi - w <= tol and every plain term satisfies phi <= feas_tol.
inline KelleyResult kelley_minimize(const KelleyProblem& kp, double tol, double feas_tol, int cap) {
  const std::size_t n = kp.X.dim();
  const std::size_t na = kp.aux_cost.size();
  LpProblem lp(n + na);
  for (std::size_t k = 0; k < na; ++k) {
    lp.c[n + k] = kp.aux_cost[k];
    lp.lower[n + k] = kp.aux_lower[k];
    lp.upper[n + k] = kp.aux_upper[k];
  }
  add_polyhedron(lp, kp.X, 0);

  auto add_cut = [&](const KelleyTerm& t, const std::vector<double>& xk) {
    const auto [v, sg] = eval_subgrad(t.expr, detail::fixed_y_point(xk, kp.y));
    std::vector<double> a(n + na, 0.0);
    double rhs = -v;
    for (std::size_t j = 0; j < n; ++j) {
      a[j] = sg.alpha[j];
      rhs += sg.alpha[j] * xk[j];
    }
    if (t.epigraph) a[n + *t.epigraph] = -1.0;
    lp.add_row(std::move(a), rhs);
  };

  std::vector<double> x0(n);
  for (std::size_t j = 0; j < n; ++j) x0[j] = 0.5 * (kp.X.lower[j] + kp.X.upper[j]);
  for (const auto& t : kp.terms) add_cut(t, x0);

  KelleyResult res;
  double best_violation = kInf;
  int flat_lps = 0;
  std::vector<double> best_x = x0;
  for (int it = 1; it <= cap; ++it) {
    const LpSolution sol = lp.num_rows() > 2 * lp.num_vars() ? solve_lp_dual_form(lp) : solve_lp(lp);
    res.iterations = it;
    if (sol.status == LpStatus::infeasible) {
      res.infeasible = true;
      res.x = best_x;
      return res;
    }
    if (sol.status != LpStatus::optimal) throw NumericError("Kelley LP unbounded; aux variables need bounds or cuts");
    std::vector<double> x(sol.z.begin(), sol.z.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<double> w(sol.z.begin() + static_cast<std::ptrdiff_t>(n), sol.z.end());
    res.lp_values.push_back(sol.value);
    res.iterates.push_back(x);

    const Point pt = detail::fixed_y_point(x, kp.y);
    bool converged = true;
    double worst = 0.0;
    std::vector<double> aux_true(na, -kInf);
    std::vector<bool> need(kp.terms.size(), false);
    for (std::size_t k = 0; k < kp.terms.size(); ++k) {
      const double v = eval(kp.terms[k].expr, pt);
      if (kp.terms[k].epigraph) {
        const std::size_t e = *kp.terms[k].epigraph;
        aux_true[e] = std::max(aux_true[e], v);
        const double d = v - w[e];
        if (d > tol) converged = false;
        if (d > 1e-14 * (1.0 + std::fabs(v))) need[k] = true;
      } else {
        worst = std::max(worst, v);
        if (v > feas_tol) converged = false;
        if (v > 0.0) need[k] = true;
      }
    }
    double true_value = 0.0;
    for (std::size_t k = 0; k < na; ++k) true_value += kp.aux_cost[k] * std::max(aux_true[k], kp.aux_lower[k]);

    if (worst < best_violation) {
      best_violation = worst;
      best_x = x;
    }
    res.x = x;
    res.aux = w;
    res.lp_value = sol.value;
    res.true_value = true_value;
    res.gap = true_value - sol.value;
    res.max_violation = worst;
    if (converged || true_value <= kp.stop_at) return res;
    flat_lps = sol.value <= kp.stop_at ? flat_lps + 1 : 0;
    if (kp.stall_limit > 0 && flat_lps >= kp.stall_limit) {
      res.stalled = true;
      return res;
    }
    if (it % 50 == 0)
      diag::debug("Kelley it=%d rows=%zu lp=%.12g true=%.12g viol=%.3g pivots=%zu", it, lp.num_rows(), sol.value,
                  true_value, worst, sol.pivots);
    // Same LP optimum after cutting at it: the LP has reached its precision floor.
    if (res.iterates.size() >= 2) {
      const auto& prev = res.iterates[res.iterates.size() - 2];
      double diff = 0.0;
      for (std::size_t j = 0; j < n; ++j) diff = std::max(diff, std::fabs(prev[j] - x[j]) / (1.0 + std::fabs(x[j])));
      if (diff <= 1e-13 && worst <= feas_tol) return res;
    }
    for (std::size_t k = 0; k < kp.terms.size(); ++k)
      if (need[k]) add_cut(kp.terms[k], x);
  }
  throw ConvergenceError("Kelley iteration cap of " + std::to_string(cap) + " reached", best_x);
}

struct NlpResult {
  std::vector<double> x;
  double objective = 0.0;
  std::vector<double> g_values;
  int iterations = 0;
  double gap = 0.0;
  std::vector<double> lp_values;
};

enum class Classification { feasible_integer, infeasible_integer };

inline const char* to_string(Classification c) {
  return c == Classification::feasible_integer ? "feasible" : "infeasible";
}

struct FeasResult {
  std::vector<double> x;
  /// u_i = max(g_i(x, y), 0)
  std::vector<double> slack;
  double total = 0.0;
  std::vector<double> g_values;
  Classification classification = Classification::feasible_integer;
  int iterations = 0;
  /// The cut LP sat at zero without localizing x; membership is undecided.
  bool stalled = false;
};

inline std::vector<double> constraint_values(const MinlpProblem& P, const Point& pt) {
  std::vector<double> g(P.m());
  for (std::size_t i = 0; i < P.m(); ++i) g[i] = eval(P.constraints[i], pt);
  return g;
}

namespace detail {

// Stationarity of the Lagrangian over the free coordinates plus the equality residual of the active set.
struct ActiveSetModel {
  std::vector<std::size_t> free;
  std::vector<std::size_t> active;  // < m: constraint index, otherwise m + row of X
  std::vector<double> grad_f;
  std::vector<std::vector<double>> grad_c;  // full-length gradients of active rows
  std::vector<double> c;                    // active constraint values
};

inline bool build_active_set(const Expr& f, const std::vector<Expr>& gs, const std::vector<double>& y,
                             const Polyhedron& X, const std::vector<double>& x, ActiveSetModel& am) {
  const std::size_t n = x.size(), m = gs.size();
  const Point pt{x, y};
  if (kink_active(f, pt, 1e-9)) return false;
  am = ActiveSetModel{};
  for (std::size_t j = 0; j < n; ++j) {
    const double tl = 1e-12 * (1.0 + std::fabs(X.lower[j])), tu = 1e-12 * (1.0 + std::fabs(X.upper[j]));
    if (x[j] - X.lower[j] > tl && X.upper[j] - x[j] > tu) am.free.push_back(j);
  }
  am.grad_f = subgrad(f, pt).alpha;
  for (std::size_t i = 0; i < m; ++i) {
    const auto [v, sg] = eval_subgrad(gs[i], pt);
    if (v < -1e-6) continue;
    if (kink_active(gs[i], pt, 1e-9)) return false;
    am.active.push_back(i);
    am.grad_c.push_back(sg.alpha);
    am.c.push_back(v);
  }
  for (std::size_t r = 0; r < X.A.size(); ++r) {
    double v = -X.b[r];
    for (std::size_t j = 0; j < n; ++j) v += X.A[r][j] * x[j];
    if (v < -1e-9 * (1.0 + std::fabs(X.b[r]))) continue;
    am.active.push_back(m + r);
    am.grad_c.push_back(X.A[r]);
    am.c.push_back(v);
  }
  return am.active.size() <= am.free.size();
}

inline double stationarity_norm(const ActiveSetModel& am, const std::vector<double>& lambda) {
  double r = 0.0;
  for (std::size_t j : am.free) {
    double v = am.grad_f[j];
    for (std::size_t a = 0; a < am.active.size(); ++a) v += lambda[a] * am.grad_c[a][j];
    r = std::max(r, std::fabs(v));
  }
  for (double v : am.c) r = std::max(r, std::fabs(v));
  return r;
}

/// Safeguarded Newton refinement of a Kelley point on its active set. Kelley
/// leaves gradient errors of order sqrt(tol), which the linearizations built
/// at x inherit; a few Newton steps on grad L = 0, g_A = 0 remove them. Hessians
/// are central differences of the subgradient oracle. A step is kept only if x
/// stays feasible, the multipliers stay nonnegative, f stays between the Kelley
/// lower bound and its current value, and the stationarity norm drops.
inline void polish_active_set(const Expr& f, const std::vector<Expr>& gs, const std::vector<double>& y,
                              const Polyhedron& X, double lower_bound, double feas_tol, std::vector<double>& x) {
  const std::size_t n = x.size(), m = gs.size();
  double fx = eval(f, Point{x, y});
  for (int it = 0; it < 8; ++it) {
    ActiveSetModel am;
    if (!build_active_set(f, gs, y, X, x, am) || am.free.empty()) return;
    const std::size_t nf = am.free.size(), na = am.active.size();

    // Least-squares multipliers give the reference residual.
    std::vector<double> lambda(na, 0.0);
    if (na > 0) {
      std::vector<std::vector<double>> JJ(na, std::vector<double>(na, 0.0));
      std::vector<double> rhs(na, 0.0);
      for (std::size_t a = 0; a < na; ++a) {
        for (std::size_t b = 0; b < na; ++b)
          for (std::size_t j : am.free) JJ[a][b] += am.grad_c[a][j] * am.grad_c[b][j];
        for (std::size_t j : am.free) rhs[a] -= am.grad_c[a][j] * am.grad_f[j];
      }
      const auto l = solve_dense(JJ, rhs);
      if (!l) return;
      lambda = *l;
    }
    const double r0 = stationarity_norm(am, lambda);
    if (r0 <= 1e-14) return;

    // Hessian of the Lagrangian on the free block.
    std::vector<std::vector<double>> H(nf, std::vector<double>(nf, 0.0));
    for (std::size_t q = 0; q < nf; ++q) {
      const std::size_t k = am.free[q];
      const double h = 1e-6 * (1.0 + std::fabs(x[k]));
      std::vector<double> xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      auto lag_grad = [&](const std::vector<double>& z) {
        const Point pz{z, y};
        std::vector<double> g = subgrad(f, pz).alpha;
        for (std::size_t a = 0; a < na; ++a) {
          if (am.active[a] >= m || lambda[a] == 0.0) continue;
          const auto ga = subgrad(gs[am.active[a]], pz).alpha;
          for (std::size_t j = 0; j < n; ++j) g[j] += lambda[a] * ga[j];
        }
        return g;
      };
      const auto gp = lag_grad(xp), gm = lag_grad(xm);
      for (std::size_t p = 0; p < nf; ++p) {
        const double v = (gp[am.free[p]] - gm[am.free[p]]) / (2.0 * h);
        if (!std::isfinite(v)) return;
        H[p][q] = v;
      }
    }
    for (std::size_t p = 0; p < nf; ++p)
      for (std::size_t q = p + 1; q < nf; ++q) H[p][q] = H[q][p] = 0.5 * (H[p][q] + H[q][p]);

    std::vector<std::vector<double>> K(nf + na, std::vector<double>(nf + na, 0.0));
    std::vector<double> rhs(nf + na, 0.0);
    for (std::size_t p = 0; p < nf; ++p) {
      for (std::size_t q = 0; q < nf; ++q) K[p][q] = H[p][q];
      for (std::size_t a = 0; a < na; ++a) K[p][nf + a] = K[nf + a][p] = am.grad_c[a][am.free[p]];
      rhs[p] = -am.grad_f[am.free[p]];
    }
    for (std::size_t a = 0; a < na; ++a) rhs[nf + a] = -am.c[a];
    const auto sol = solve_dense(K, rhs);
    if (!sol) return;

    std::vector<double> xn = x;
    for (std::size_t p = 0; p < nf; ++p) xn[am.free[p]] += (*sol)[p];
    std::vector<double> ln(sol->begin() + static_cast<std::ptrdiff_t>(nf), sol->end());
    for (double l : ln)
      if (l < -1e-12) return;
    if (!X.contains(xn, 1e-12)) return;
    const Point pn{xn, y};
    for (const auto& g : gs)
      if (!(eval(g, pn) <= feas_tol)) return;
    const double fn = eval(f, pn);
    const double ftol = 1e-9 * (1.0 + std::fabs(fx));
    if (!(fn <= fx + ftol && fn >= lower_bound - ftol)) return;

    ActiveSetModel an;
    if (!build_active_set(f, gs, y, X, xn, an) || an.active != am.active || an.free != am.free) return;
    if (stationarity_norm(an, ln) >= r0) return;
    x = xn;
    fx = fn;
  }
}

}  // namespace detail

/// NLP(y): minimizes the objective over X subject to the constraints at fixed y.
/// Returns std::nullopt when the cut LP becomes infeasible.
inline std::optional<NlpResult> kelley_solve(const Expr& objective, const std::vector<Expr>& constraints,
                                             const std::vector<double>& y, const Polyhedron& X, double tol,
                                             double feas_tol, int cap) {
  KelleyProblem kp;
  kp.X = X;
  kp.y = y;
  kp.aux_cost = {1.0};
  kp.aux_lower = {-kInf};
  kp.aux_upper = {kInf};
  kp.terms.push_back({objective, 0});
  for (const auto& g : constraints) kp.terms.push_back({g, std::nullopt});
  const KelleyResult kr = kelley_minimize(kp, tol, feas_tol, cap);
  if (kr.infeasible) return std::nullopt;
  NlpResult r;
  r.x = kr.x;
  detail::polish_active_set(objective, constraints, y, X, kr.lp_value, feas_tol, r.x);
  const Point pt{kr.x, y};
  r.objective = eval(objective, pt);
  for (const auto& g : constraints) r.g_values.push_back(eval(g, pt));
  r.iterations = kr.iterations;
  r.gap = kr.gap;
  r.lp_values = kr.lp_values;
  return r;
}

inline void fill_slacks(FeasResult& fr, const std::vector<Expr>& constraints, const std::vector<double>& y,
                        double tol_feas) {
  const Point pt{fr.x, y};
  fr.g_values.clear();
  fr.slack.clear();
  fr.total = 0.0;
  for (const auto& g : constraints) {
    const double v = eval(g, pt);
    fr.g_values.push_back(v);
    fr.slack.push_back(std::max(v, 0.0));
    fr.total += std::max(v, 0.0);
  }
  fr.classification = fr.total <= tol_feas ? Classification::feasible_integer : Classification::infeasible_integer;
}

/// F(y) in lifted form. With stall_limit > 0 the solve may end undecided
/// (FeasResult::stalled) when the LP bound stays at zero.
inline FeasResult kelley_feasibility(const std::vector<Expr>& constraints, const std::vector<double>& y,
                                     const Polyhedron& X, double tol, int cap, double tol_feas,
                                     int stall_limit = 0) {
  FeasResult fr;
  const std::size_t m = constraints.size();
  if (m == 0) {
    fr.x.resize(X.dim());
    for (std::size_t j = 0; j < X.dim(); ++j) fr.x[j] = 0.5 * (X.lower[j] + X.upper[j]);
    fr.iterations = 0;
    return fr;
  }
  KelleyProblem kp;
  kp.X = X;
  kp.y = y;
  kp.aux_cost.assign(m, 1.0);
  kp.aux_lower.assign(m, 0.0);
  kp.aux_upper.assign(m, kInf);
  for (std::size_t i = 0; i < m; ++i) kp.terms.push_back({constraints[i], i});
  // A zero-valued LP has degenerate optima; any vertex with small true slack settles membership.
  kp.stop_at = 0.5 * tol_feas;
  kp.stall_limit = stall_limit;
  const KelleyResult kr = kelley_minimize(kp, tol, tol, cap);
  if (kr.infeasible) throw ModelError("feasibility LP infeasible: X is empty");
  fr.x = kr.x;
  fr.iterations = kr.iterations;
  fill_slacks(fr, constraints, y, tol_feas);
  fr.stalled = kr.stalled && fr.classification == Classification::infeasible_integer;
  return fr;
}

struct SubproblemResult {
  FeasResult feas;
  std::optional<NlpResult> nlp;
  Classification classification() const { return feas.classification; }
};

/// Decides T / S membership of y and solves NLP(y) when y is in T.
inline SubproblemResult classify_and_solve(const MinlpProblem& P, const IntPoint& y, const SolverConfig& cfg) {
  const std::vector<double> yr = to_real(y);
  SubproblemResult out;
  out.feas = kelley_feasibility(P.constraints, yr, P.X, cfg.kelley_tol, cfg.kelley_cap, cfg.tol_feas, 20);
  if (out.feas.stalled) {
    // NLP(y) either returns a point that settles membership or empties its cut LP.
    out.nlp = kelley_solve(P.objective, P.constraints, yr, P.X, cfg.kelley_tol, cfg.kelley_feas_tol, cfg.kelley_cap);
    if (out.nlp) {
      const int it = out.feas.iterations;
      out.feas.x = out.nlp->x;
      fill_slacks(out.feas, P.constraints, yr, cfg.tol_feas);
      out.feas.iterations = it;
      out.feas.stalled = false;
      if (out.feas.classification == Classification::feasible_integer) return out;
      out.nlp.reset();
    }
    out.feas = kelley_feasibility(P.constraints, yr, P.X, cfg.kelley_tol, cfg.kelley_cap, cfg.tol_feas);
    out.feas.classification = Classification::infeasible_integer;
    diag::debug("y=(%s) infeasible after NLP hand-off, total slack %.6g", to_string(y).c_str(), out.feas.total);
    return out;
  }
  if (out.feas.classification == Classification::infeasible_integer) {
    diag::debug("y=(%s) infeasible, total slack %.6g", to_string(y).c_str(), out.feas.total);
    return out;
  }
  out.nlp = kelley_solve(P.objective, P.constraints, yr, P.X, cfg.kelley_tol, cfg.kelley_feas_tol, cfg.kelley_cap);
  if (!out.nlp) {
    // F(y) reached tol_feas but the exact constraint cuts admit no x.
    out.feas.classification = Classification::infeasible_integer;
    diag::info("y=(%s) reclassified infeasible: NLP cut system empty", to_string(y).c_str());
    return out;
  }
  diag::debug("y=(%s) feasible, f=%.10g after %d Kelley LPs", to_string(y).c_str(), out.nlp->objective,
             out.nlp->iterations);
  return out;
}

}  // namespace oakit
