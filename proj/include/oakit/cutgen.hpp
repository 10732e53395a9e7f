#pragma once

// Cut generation at subproblem solutions.
//
// Multipliers are recovered by an LP that minimizes the l1 stationarity
// residual over lambda and over the multipliers mu of the rows and bounds of X
// active at x (the normal cone of a polyhedron is spanned by those normals).
// The subgradients themselves come from subgrad() at the point.
//
// Feasible point (x_j, y_j), scaling rho > 0:
//   f_j + (alpha, beta)'(x - x_j, y - y_j) <= theta
//   g_i + rho (xi_i, eta_i)'(x - x_j, y - y_j) <= 0        for every i
// Infeasible point (x_l, y_l):
//   g_i + (xi_i, eta_i)'(x - x_l, y - y_l) <= 0             for every i

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "oakit/errors.hpp"
#include "oakit/expr.hpp"
#include "oakit/log.hpp"
#include "oakit/lp.hpp"
#include "oakit/milp.hpp"
#include "oakit/model.hpp"

namespace oakit {

struct ActivePartition {
  std::vector<std::size_t> active;    // |g_i| <= tol
  std::vector<std::size_t> inactive;  // complement of active
  std::vector<std::size_t> below;     // g_i < -tol
  std::vector<std::size_t> above;     // g_i > tol
};

inline ActivePartition active_partition(const std::vector<double>& g, double tol_act) {
  ActivePartition part;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::fabs(g[i]) <= tol_act) {
      part.active.push_back(i);
      continue;
    }
    part.inactive.push_back(i);
    (g[i] < 0.0 ? part.below : part.above).push_back(i);
  }
  return part;
}

struct NormalTerm {
  enum class Kind { row, lower_bound, upper_bound };
  Kind kind = Kind::row;
  std::size_t index = 0;
  std::vector<double> normal;
  double multiplier = 0.0;
};

struct KktCertificate {
  bool feasible_case = true;
  double f_value = 0.0;
  std::vector<double> g_values;
  Subgradient objective;                 // (alpha, beta)
  std::vector<Subgradient> constraints;  // (xi_i, eta_i)
  std::vector<double> lambda;
  std::vector<NormalTerm> normals;  // active rows and bounds of X with their mu
  ActivePartition partition;
  double residual = 0.0;
};

namespace detail {

inline std::vector<NormalTerm> active_normals(const Polyhedron& X, const std::vector<double>& x, double tol) {
  std::vector<NormalTerm> out;
  const std::size_t n = X.dim();
  for (std::size_t r = 0; r < X.A.size(); ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += X.A[r][j] * x[j];
    if (s - X.b[r] >= -tol) out.push_back({NormalTerm::Kind::row, r, X.A[r], 0.0});
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (x[j] - X.lower[j] <= tol) {
      std::vector<double> e(n, 0.0);
      e[j] = -1.0;
      out.push_back({NormalTerm::Kind::lower_bound, j, std::move(e), 0.0});
    }
    if (X.upper[j] - x[j] <= tol) {
      std::vector<double> e(n, 0.0);
      e[j] = 1.0;
      out.push_back({NormalTerm::Kind::upper_bound, j, std::move(e), 0.0});
    }
  }
  return out;
}

// min || base + sum_{i in free} lambda_i xi_i + sum_r mu_r a_r ||_1
// with lambda in [0, lambda_cap] and mu >= 0. Fills cert.lambda (free part), normals and residual.
inline void fit_multipliers(KktCertificate& cert, const std::vector<double>& base,
                            const std::vector<std::size_t>& free_idx, double lambda_cap) {
  const std::size_t n = base.size();
  const std::size_t nl = free_idx.size();
  const std::size_t nm = cert.normals.size();
  if (n == 0) {
    cert.residual = 0.0;
    return;
  }
  LpProblem lp(nl + nm + 2 * n);
  for (std::size_t k = 0; k < nl; ++k) lp.upper[k] = lambda_cap;
  for (std::size_t d = 0; d < n; ++d) {
    lp.c[nl + nm + d] = 1.0;
    lp.c[nl + nm + n + d] = 1.0;
  }
  for (std::size_t d = 0; d < n; ++d) {
    std::vector<double> a(lp.num_vars(), 0.0);
    for (std::size_t k = 0; k < nl; ++k) a[k] = cert.constraints[free_idx[k]].alpha[d];
    for (std::size_t r = 0; r < nm; ++r) a[nl + r] = cert.normals[r].normal[d];
    a[nl + nm + d] = -1.0;
    a[nl + nm + n + d] = 1.0;
    lp.add_eq_row(a, -base[d]);
  }
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::optimal) throw NumericError("multiplier LP failed");
  for (std::size_t k = 0; k < nl; ++k) cert.lambda[free_idx[k]] = sol.z[k];
  for (std::size_t r = 0; r < nm; ++r) cert.normals[r].multiplier = sol.z[nl + r];
  // Recompute the residual directly rather than trusting the LP value.
  std::vector<double> res = base;
  for (std::size_t k = 0; k < nl; ++k)
    for (std::size_t d = 0; d < n; ++d) res[d] += sol.z[k] * cert.constraints[free_idx[k]].alpha[d];
  for (std::size_t r = 0; r < nm; ++r)
    for (std::size_t d = 0; d < n; ++d) res[d] += sol.z[nl + r] * cert.normals[r].normal[d];
  double s = 0.0;
  for (double v : res) s += std::fabs(v);
  cert.residual = s;
}

inline void fill_subgradients(KktCertificate& cert, const MinlpProblem& P, const Point& pt) {
  cert.constraints.clear();
  cert.g_values.clear();
  for (const auto& g : P.constraints) {
    auto [v, sg] = eval_subgrad(g, pt);
    cert.g_values.push_back(v);
    cert.constraints.push_back(std::move(sg));
  }
}

}  // namespace detail

/// Stationarity certificate at a solution of NLP(y_j); never throws on a large residual.
inline KktCertificate fit_kkt_feasible(const MinlpProblem& P, const std::vector<double>& x_j, const IntPoint& y_j,
                                       const ActivePartition& part, const SolverConfig& cfg) {
  const Point pt{x_j, to_real(y_j)};
  KktCertificate cert;
  cert.feasible_case = true;
  auto [fv, fsg] = eval_subgrad(P.objective, pt);
  cert.f_value = fv;
  cert.objective = std::move(fsg);
  detail::fill_subgradients(cert, P, pt);
  cert.partition = part;
  cert.lambda.assign(P.m(), 0.0);
  cert.normals = detail::active_normals(P.X, x_j, cfg.tol_act);
  detail::fit_multipliers(cert, cert.objective.alpha, part.active, kInf);
  return cert;
}

/// Throws KktError when the residual exceeds cfg.tol_kkt.
inline KktCertificate extract_kkt_feasible(const MinlpProblem& P, const std::vector<double>& x_j,
                                           const IntPoint& y_j, const ActivePartition& part,
                                           const SolverConfig& cfg) {
  KktCertificate cert = fit_kkt_feasible(P, x_j, y_j, part, cfg);
  if (cert.residual > cfg.tol_kkt)
    throw KktError("stationarity residual " + std::to_string(cert.residual) + " exceeds tolerance at y=(" +
                       to_string(y_j) + ")",
                   cert.residual);
  return cert;
}

/// Certificate at a solution of F(y_l): lambda = 0 below, 1 above, [0, 1] on the active set.
inline KktCertificate fit_kkt_infeasible(const MinlpProblem& P, const std::vector<double>& x_l, const IntPoint& y_l,
                                         const ActivePartition& part, const SolverConfig& cfg) {
  const Point pt{x_l, to_real(y_l)};
  KktCertificate cert;
  cert.feasible_case = false;
  cert.f_value = eval(P.objective, pt);
  detail::fill_subgradients(cert, P, pt);
  cert.partition = part;
  cert.lambda.assign(P.m(), 0.0);
  std::vector<double> base(P.n, 0.0);
  for (std::size_t i : part.above) {
    cert.lambda[i] = 1.0;
    for (std::size_t d = 0; d < P.n; ++d) base[d] += cert.constraints[i].alpha[d];
  }
  cert.normals = detail::active_normals(P.X, x_l, cfg.tol_act);
  detail::fit_multipliers(cert, base, part.active, 1.0);
  return cert;
}

inline KktCertificate extract_kkt_infeasible(const MinlpProblem& P, const std::vector<double>& x_l,
                                             const IntPoint& y_l, const ActivePartition& part,
                                             const SolverConfig& cfg) {
  KktCertificate cert = fit_kkt_infeasible(P, x_l, y_l, part, cfg);
  if (cert.residual > cfg.tol_kkt)
    throw KktError("infeasibility stationarity residual " + std::to_string(cert.residual) +
                       " exceeds tolerance at y=(" + to_string(y_l) + ")",
                   cert.residual);
  return cert;
}

struct RhoComputation {
  std::vector<std::size_t> J;
  std::vector<double> upsilon;  // one per entry of J
  double Pi = 0.0;
  double max_g_J = 0.0;  // max_{i in J} g_i, 0 when J is empty
  double rho = 1.0;
};

/// rho = -max_{i in J} g_i / Pi when J is nonempty and Pi > 0, else 1.
inline double compute_rho(const std::vector<double>& g, const std::vector<std::size_t>& J, double Pi) {
  if (J.empty() || !(Pi > 0.0)) return 1.0;
  double mx = -kInf;
  for (std::size_t i : J) mx = std::max(mx, g[i]);
  const double rho = -mx / Pi;
  return rho > 0.0 ? rho : 1.0;
}

/// Linear growth of one linearization over X x (Y ∩ Z^p), by MILP.
inline double max_linear_growth(const MinlpProblem& P, const Subgradient& sg, const std::vector<double>& x0,
                                const IntPoint& y0, const SolverConfig& cfg) {
  MilpProblem mp;
  mp.lp = LpProblem(P.n + P.p);
  double offset = 0.0;
  for (std::size_t j = 0; j < P.n; ++j) {
    mp.lp.c[j] = -sg.alpha[j];
    offset -= sg.alpha[j] * x0[j];
  }
  for (std::size_t j = 0; j < P.p; ++j) {
    mp.lp.c[P.n + j] = -sg.beta[j];
    offset -= sg.beta[j] * static_cast<double>(y0[j]);
    mp.integer_vars.push_back(P.n + j);
  }
  add_polyhedron(mp.lp, P.X, 0);
  add_polyhedron(mp.lp, P.Y, P.n);
  MilpOptions opt;
  opt.node_limit = cfg.node_limit;
  const MilpSolution sol = solve_milp(mp, opt);
  if (sol.status == MilpStatus::infeasible) throw ModelError("X x (Y ∩ Z^p) is empty");
  if (sol.status == MilpStatus::unbounded) throw ModelError("linear growth unbounded: X or Y not bounded");
  return -sol.value + offset;
}

/// Upsilon_i for every i in J and Pi = max Upsilon_i; rho from compute_rho.
inline RhoComputation compute_pi(const MinlpProblem& P, const KktCertificate& cert, const std::vector<double>& x_j,
                                 const IntPoint& y_j, const std::vector<std::size_t>& J, const SolverConfig& cfg) {
  RhoComputation rc;
  rc.J = J;
  rc.Pi = J.empty() ? 0.0 : -kInf;
  for (std::size_t i : J) {
    const double u = max_linear_growth(P, cert.constraints[i], x_j, y_j, cfg);
    rc.upsilon.push_back(u);
    rc.Pi = std::max(rc.Pi, u);
  }
  rc.max_g_J = 0.0;
  if (!J.empty()) {
    rc.max_g_J = -kInf;
    for (std::size_t i : J) rc.max_g_J = std::max(rc.max_g_J, cert.g_values[i]);
  }
  rc.rho = compute_rho(cert.g_values, J, rc.Pi);
  return rc;
}

struct CutBlock {
  enum class Kind { objective, feasible_constraint, infeasibility };
  Kind kind = Kind::objective;
  /// ax'x + ay'y + theta_coef * theta <= rhs
  std::vector<double> ax;
  std::vector<double> ay;
  double theta_coef = 0.0;
  double rhs = 0.0;
  // provenance
  int iteration = 0;
  IntPoint point;
  int constraint = -1;  // -1 for the objective cut
  double rho = 1.0;
};

inline const char* to_string(CutBlock::Kind k) {
  switch (k) {
    case CutBlock::Kind::objective: return "objective";
    case CutBlock::Kind::feasible_constraint: return "feasible-constraint";
    case CutBlock::Kind::infeasibility: return "infeasibility";
  }
  return "?";
}

/// lhs - rhs of the cut at (x, y, theta); <= 0 means satisfied.
inline double cut_excess(const CutBlock& c, const std::vector<double>& x, const std::vector<double>& y,
                         double theta = 0.0) {
  double s = c.theta_coef * theta - c.rhs;
  for (std::size_t j = 0; j < x.size(); ++j) s += c.ax[j] * x[j];
  for (std::size_t j = 0; j < y.size(); ++j) s += c.ay[j] * y[j];
  return s;
}

namespace detail {

inline CutBlock linearization_cut(CutBlock::Kind kind, double value, const Subgradient& sg, double scale,
                                  const std::vector<double>& x0, const IntPoint& y0) {
  CutBlock c;
  c.kind = kind;
  c.ax.resize(x0.size());
  c.ay.resize(y0.size());
  double rhs = -value;
  for (std::size_t j = 0; j < x0.size(); ++j) {
    c.ax[j] = scale * sg.alpha[j];
    rhs += c.ax[j] * x0[j];
  }
  for (std::size_t j = 0; j < y0.size(); ++j) {
    c.ay[j] = scale * sg.beta[j];
    rhs += c.ay[j] * static_cast<double>(y0[j]);
  }
  c.rhs = rhs;
  c.point = y0;
  c.rho = scale;
  return c;
}

}  // namespace detail

/// One objective cut plus one rho-scaled cut per constraint (active ones included).
inline std::vector<CutBlock> build_feasible_cuts(double f_value, const KktCertificate& cert, double rho,
                                                 const std::vector<double>& x_j, const IntPoint& y_j) {
  std::vector<CutBlock> cuts;
  CutBlock obj = detail::linearization_cut(CutBlock::Kind::objective, f_value, cert.objective, 1.0, x_j, y_j);
  obj.theta_coef = -1.0;
  obj.rho = rho;
  cuts.push_back(std::move(obj));
  for (std::size_t i = 0; i < cert.constraints.size(); ++i) {
    CutBlock c = detail::linearization_cut(CutBlock::Kind::feasible_constraint, cert.g_values[i],
                                           cert.constraints[i], rho, x_j, y_j);
    c.constraint = static_cast<int>(i);
    cuts.push_back(std::move(c));
  }
  return cuts;
}

/// True if the cut reads 0'(x, y) <= negative, i.e. excludes everything.
inline bool is_void_cut(const CutBlock& c) {
  for (double v : c.ax)
    if (v != 0.0) return false;
  for (double v : c.ay)
    if (v != 0.0) return false;
  return c.theta_coef == 0.0 && c.rhs < 0.0;
}

/// Unscaled linearizations of every constraint at (x_l, y_l).
inline std::vector<CutBlock> build_infeasible_cuts(const KktCertificate& cert, const std::vector<double>& g_values,
                                                   const std::vector<double>& x_l, const IntPoint& y_l) {
  std::vector<CutBlock> cuts;
  for (std::size_t i = 0; i < cert.constraints.size(); ++i) {
    CutBlock c = detail::linearization_cut(CutBlock::Kind::infeasibility, g_values[i], cert.constraints[i], 1.0,
                                           x_l, y_l);
    c.constraint = static_cast<int>(i);
    if (is_void_cut(c))
      diag::error("constraint %zu has a zero subgradient at infeasible y=(%s); its cut excludes every point", i,
                 to_string(y_l).c_str());
    cuts.push_back(std::move(c));
  }
  return cuts;
}

/// Is there x in X (and theta <= theta_max, if given) satisfying every cut at the fixed y?
inline bool admits_y(const std::vector<CutBlock>& cuts, const Polyhedron& X, const std::vector<double>& y,
                     std::optional<double> theta_max = std::nullopt) {
  const std::size_t n = X.dim();
  LpProblem lp(n + 1);
  add_polyhedron(lp, X, 0);
  lp.lower[n] = -kInf;
  lp.upper[n] = theta_max ? *theta_max : kInf;
  for (const auto& c : cuts) {
    std::vector<double> a(n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) a[j] = c.ax[j];
    a[n] = c.theta_coef;
    double rhs = c.rhs;
    for (std::size_t j = 0; j < y.size(); ++j) rhs -= c.ay[j] * y[j];
    lp.add_row(std::move(a), rhs);
  }
  return solve_lp(lp).status != LpStatus::infeasible;
}

/// Checks that x_j solves LP(r, y_j) with value f(x_j, y_j) to within 1e-5.
/// Constraints in the active set are linearized with g_i taken as exactly 0.
inline bool validate_lp_r(const MinlpProblem& P, const std::vector<double>& x_j, const IntPoint& /*y_j*/,
                          const KktCertificate& cert, double r) {
  const std::size_t n = P.n;
  LpProblem lp(n);
  add_polyhedron(lp, P.X, 0);
  double c0 = cert.f_value;
  for (std::size_t j = 0; j < n; ++j) {
    lp.c[j] = cert.objective.alpha[j];
    c0 -= cert.objective.alpha[j] * x_j[j];
  }
  std::vector<bool> active(P.m(), false);
  for (std::size_t i : cert.partition.active) active[i] = true;
  for (std::size_t i = 0; i < P.m(); ++i) {
    std::vector<double> a(n);
    double rhs = active[i] ? 0.0 : -cert.g_values[i];
    for (std::size_t j = 0; j < n; ++j) {
      a[j] = r * cert.constraints[i].alpha[j];
      rhs += a[j] * x_j[j];
    }
    lp.add_row(std::move(a), rhs);
  }
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::optimal) return false;
  return std::fabs(sol.value + c0 - cert.f_value) <= 1e-5;
}

}  // namespace oakit
