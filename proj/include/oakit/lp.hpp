#pragma once

// Dense two-phase primal simplex for
//
//   min c'z  s.t.  A z <= b,  lower <= z <= upper
//
// Bounds may be infinite. Pricing is Dantzig's rule; after a run of
// degenerate pivots it switches to Bland's rule for the rest of the phase,
// which rules out cycling. Row duals are read off the slack reduced costs;
// bound multipliers follow from the reduced costs of the original columns.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "oakit/errors.hpp"

namespace oakit {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct LpProblem {
  std::vector<double> c;
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  std::vector<double> lower;
  std::vector<double> upper;

  LpProblem() = default;
  /// n variables, objective zero, bounds [0, +inf).
  explicit LpProblem(std::size_t n) : c(n, 0.0), lower(n, 0.0), upper(n, kInf) {}

  std::size_t num_vars() const { return c.size(); }
  std::size_t num_rows() const { return rows.size(); }

  /// a'z <= b
  void add_row(std::vector<double> a, double b) {
    rows.push_back(std::move(a));
    rhs.push_back(b);
  }
  /// a'z >= b, stored as -a'z <= -b
  void add_ge_row(std::vector<double> a, double b) {
    for (double& v : a) v = -v;
    add_row(std::move(a), -b);
  }
  /// a'z == b, stored as a row pair
  void add_eq_row(const std::vector<double>& a, double b) {
    add_row(a, b);
    add_ge_row(a, b);
  }
};

enum class LpStatus { optimal, infeasible, unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "?";
}

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> z;
  double value = 0.0;
  /// y_i >= 0 for every row; c + A'y - lower_duals + upper_duals = 0.
  std::vector<double> row_duals;
  std::vector<double> lower_duals;
  std::vector<double> upper_duals;
  /// -b'y + lower'lower_duals - upper'upper_duals
  double dual_value = 0.0;
  std::size_t pivots = 0;
};

namespace detail {

struct ColumnMap {
  // z_j = shift + sum sign_k * w_{col_k}
  double shift = 0.0;
  std::size_t col = 0;
  double sign = 1.0;
  bool split = false;  // free variable: z = w_col - w_{col+1}
};

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), a_(rows * (cols + 1), 0.0), basis_(rows, 0) {}

  double& at(std::size_t i, std::size_t j) { return a_[i * (n_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return a_[i * (n_ + 1) + j]; }
  double& rhs(std::size_t i) { return at(i, n_); }
  double rhs(std::size_t i) const { return at(i, n_); }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t r, std::size_t e, std::vector<double>& cost_row, double& cost_rhs) {
    const double p = at(r, e);
    for (std::size_t j = 0; j <= n_; ++j) at(r, j) /= p;
    at(r, e) = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = at(i, e);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) {
        double v = at(i, j) - f * at(r, j);
        at(i, j) = std::fabs(v) < 1e-13 ? 0.0 : v;
      }
      at(i, e) = 0.0;
    }
    const double f = cost_row[e];
    if (f != 0.0) {
      for (std::size_t j = 0; j < n_; ++j) cost_row[j] -= f * at(r, j);
      cost_rhs -= f * rhs(r);
      cost_row[e] = 0.0;
    }
    basis_[r] = e;
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<double> a_;
  std::vector<std::size_t> basis_;
};

enum class PhaseResult { optimal, unbounded };

// Minimizes the cost row over the current basis. Columns >= allowed_cols never enter.
inline PhaseResult run_phase(Tableau& t, std::vector<double>& cost, double& cost_rhs, std::size_t allowed_cols,
                             std::size_t& pivots, std::size_t pivot_limit, double price_tol) {
  constexpr double kPivTol = 1e-9;
  std::size_t degenerate_run = 0;
  bool bland = false;
  for (;;) {
    if (pivots > pivot_limit) throw NumericError("simplex pivot limit exceeded");
    std::size_t enter = allowed_cols;
    double best = -price_tol;
    for (std::size_t j = 0; j < allowed_cols; ++j) {
      if (cost[j] < best) {
        enter = j;
        if (bland) break;
        best = cost[j];
      }
    }
    if (enter == allowed_cols) return PhaseResult::optimal;

    std::size_t leave = t.rows();
    double ratio = kInf;
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const double a = t.at(i, enter);
      if (a <= kPivTol) continue;
      const double r = std::max(t.rhs(i), 0.0) / a;
      if (leave == t.rows() || r < ratio - 1e-12) {
        leave = i;
        ratio = r;
      } else if (r <= ratio + 1e-12 && t.basis()[i] < t.basis()[leave]) {
        leave = i;
        ratio = std::min(ratio, r);
      }
    }
    if (leave == t.rows()) return PhaseResult::unbounded;
    degenerate_run = ratio <= 1e-12 ? degenerate_run + 1 : 0;
    if (degenerate_run > 50) bland = true;
    t.pivot(leave, enter, cost, cost_rhs);
    ++pivots;
  }
}

}  // namespace detail

/// Solves the LP. Throws NumericError only if the pivot guard trips.
/// price_tol is the reduced-cost threshold for entering columns.
inline LpSolution solve_lp(const LpProblem& lp, double price_tol = 1e-9) {
  const std::size_t n = lp.num_vars();
  LpSolution sol;
  if (lp.lower.size() != n || lp.upper.size() != n || lp.rhs.size() != lp.rows.size())
    throw ModelError("LpProblem dimensions are inconsistent");
  for (const auto& r : lp.rows)
    if (r.size() != n) throw ModelError("LpProblem row length differs from variable count");
  for (std::size_t j = 0; j < n; ++j) {
    if (lp.lower[j] > lp.upper[j]) {
      sol.status = LpStatus::infeasible;
      return sol;
    }
  }

  // Column transformation to w >= 0.
  std::vector<detail::ColumnMap> map(n);
  std::size_t w = 0;
  std::vector<std::size_t> bound_rows;  // original vars that get an explicit w <= u - l row
  for (std::size_t j = 0; j < n; ++j) {
    const double l = lp.lower[j], u = lp.upper[j];
    auto& cm = map[j];
    cm.col = w;
    if (std::isfinite(l)) {
      cm.shift = l;
      cm.sign = 1.0;
      ++w;
      if (std::isfinite(u)) bound_rows.push_back(j);
    } else if (std::isfinite(u)) {
      cm.shift = u;
      cm.sign = -1.0;
      ++w;
    } else {
      cm.split = true;
      w += 2;
    }
  }

  const std::size_t mu = lp.num_rows();
  const std::size_t m = mu + bound_rows.size();
  std::vector<std::vector<double>> arow(m, std::vector<double>(w, 0.0));
  std::vector<double> brow(m, 0.0);
  for (std::size_t i = 0; i < mu; ++i) {
    double b = lp.rhs[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double a = lp.rows[i][j];
      if (a == 0.0) continue;
      const auto& cm = map[j];
      if (cm.split) {
        arow[i][cm.col] += a;
        arow[i][cm.col + 1] -= a;
      } else {
        arow[i][cm.col] += a * cm.sign;
        b -= a * cm.shift;
      }
    }
    brow[i] = b;
  }
  for (std::size_t k = 0; k < bound_rows.size(); ++k) {
    const std::size_t j = bound_rows[k];
    arow[mu + k][map[j].col] = 1.0;
    brow[mu + k] = lp.upper[j] - lp.lower[j];
  }
  std::vector<double> cw(w, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& cm = map[j];
    if (cm.split) {
      cw[cm.col] += lp.c[j];
      cw[cm.col + 1] -= lp.c[j];
    } else {
      cw[cm.col] += lp.c[j] * cm.sign;
    }
  }

  // Layout: [w | slacks | artificials]
  std::vector<std::size_t> art_rows;
  for (std::size_t i = 0; i < m; ++i)
    if (brow[i] < 0.0) art_rows.push_back(i);
  const std::size_t slack0 = w;
  const std::size_t art0 = w + m;
  const std::size_t cols = w + m + art_rows.size();
  detail::Tableau t(m, cols);
  {
    std::size_t a = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double s = brow[i] < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < w; ++j) t.at(i, j) = s * arow[i][j];
      t.at(i, slack0 + i) = s;
      t.rhs(i) = s * brow[i];
      if (s < 0.0) {
        t.at(i, art0 + a) = 1.0;
        t.basis()[i] = art0 + a;
        ++a;
      } else {
        t.basis()[i] = slack0 + i;
      }
    }
  }

  const std::size_t pivot_limit = 50 * (m + cols) + 1000;
  std::size_t pivots = 0;

  if (!art_rows.empty()) {
    std::vector<double> cost(cols, 0.0);
    double cost_rhs = 0.0;
    for (std::size_t k = 0; k < art_rows.size(); ++k) cost[art0 + k] = 1.0;
    for (std::size_t i : art_rows) {
      for (std::size_t j = 0; j < cols; ++j) cost[j] -= t.at(i, j);
      cost_rhs -= t.rhs(i);
    }
    detail::run_phase(t, cost, cost_rhs, cols, pivots, pivot_limit, price_tol);
    double bscale = 1.0;
    for (double b : brow) bscale = std::max(bscale, std::fabs(b));
    if (-cost_rhs > 1e-9 * bscale) {
      sol.status = LpStatus::infeasible;
      sol.pivots = pivots;
      return sol;
    }
    // Drive remaining artificials out of the basis.
    std::vector<double> dummy(cols, 0.0);
    double dummy_rhs = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (t.basis()[i] < art0) continue;
      std::size_t best = art0;
      double bestv = 1e-9;
      for (std::size_t j = 0; j < art0; ++j) {
        if (std::fabs(t.at(i, j)) > bestv) {
          bestv = std::fabs(t.at(i, j));
          best = j;
        }
      }
      if (best == art0) throw NumericError("rank-deficient row after phase one");
      t.pivot(i, best, dummy, dummy_rhs);
      ++pivots;
    }
  }

  std::vector<double> cost(cols, 0.0);
  double cost_rhs = 0.0;
  for (std::size_t j = 0; j < w; ++j) cost[j] = cw[j];
  for (std::size_t i = 0; i < m; ++i) {
    const double cb = cost[t.basis()[i]];
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j < cols; ++j) cost[j] -= cb * t.at(i, j);
    cost_rhs -= cb * t.rhs(i);
  }
  // Basic columns must carry zero reduced cost exactly.
  for (std::size_t i = 0; i < m; ++i) cost[t.basis()[i]] = 0.0;

  const auto res = detail::run_phase(t, cost, cost_rhs, art0, pivots, pivot_limit, price_tol);
  sol.pivots = pivots;
  if (res == detail::PhaseResult::unbounded) {
    sol.status = LpStatus::unbounded;
    return sol;
  }

  std::vector<double> wv(w, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (t.basis()[i] < w) wv[t.basis()[i]] = std::max(t.rhs(i), 0.0);
  sol.status = LpStatus::optimal;
  sol.z.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& cm = map[j];
    double z = cm.split ? wv[cm.col] - wv[cm.col + 1] : cm.shift + cm.sign * wv[cm.col];
    z = std::clamp(z, lp.lower[j], lp.upper[j]);
    sol.z[j] = z;
  }
  sol.value = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.value += lp.c[j] * sol.z[j];

  sol.row_duals.assign(mu, 0.0);
  for (std::size_t i = 0; i < mu; ++i) sol.row_duals[i] = std::max(cost[slack0 + i], 0.0);
  sol.lower_duals.assign(n, 0.0);
  sol.upper_duals.assign(n, 0.0);
  double dual = 0.0;
  for (std::size_t i = 0; i < mu; ++i) dual -= lp.rhs[i] * sol.row_duals[i];
  for (std::size_t j = 0; j < n; ++j) {
    double r = lp.c[j];
    for (std::size_t i = 0; i < mu; ++i) r += sol.row_duals[i] * lp.rows[i][j];
    if (r > 0.0 && std::isfinite(lp.lower[j])) {
      sol.lower_duals[j] = r;
      dual += r * lp.lower[j];
    } else if (r < 0.0 && std::isfinite(lp.upper[j])) {
      sol.upper_duals[j] = -r;
      dual += r * lp.upper[j];
    }
  }
  sol.dual_value = dual;
  return sol;
}

namespace detail {

/// Square solve by Gaussian elimination with partial pivoting; nullopt when singular.
inline std::optional<std::vector<double>> solve_dense(std::vector<std::vector<double>> A, std::vector<double> b) {
  const std::size_t n = b.size();
  double scale = 0.0;
  for (const auto& r : A)
    for (double v : r) scale = std::max(scale, std::fabs(v));
  if (scale == 0.0) return n == 0 ? std::optional<std::vector<double>>(std::vector<double>{}) : std::nullopt;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t i = c + 1; i < n; ++i)
      if (std::fabs(A[i][c]) > std::fabs(A[piv][c])) piv = i;
    if (std::fabs(A[piv][c]) <= 1e-13 * scale) return std::nullopt;
    std::swap(A[c], A[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t i = c + 1; i < n; ++i) {
      const double f = A[i][c] / A[c][c];
      if (f == 0.0) continue;
      for (std::size_t j = c; j < n; ++j) A[i][j] -= f * A[c][j];
      b[i] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t c = n; c-- > 0;) {
    double v = b[c];
    for (std::size_t j = c + 1; j < n; ++j) v -= A[c][j] * x[j];
    x[c] = v / A[c][c];
  }
  return x;
}

}  // namespace detail

/// Same contract as solve_lp, computed by solving the dual
///
///   min h'lam  s.t.  G'lam = -c,  lam >= 0
///
/// where G z <= h stacks the rows and the finite bounds. The dual tableau has
/// 2 * num_vars rows, so this pays off when rows far outnumber variables.
inline LpSolution solve_lp_dual_form(const LpProblem& lp) {
  const std::size_t n = lp.num_vars();
  if (lp.lower.size() != n || lp.upper.size() != n || lp.rhs.size() != lp.rows.size())
    throw ModelError("LpProblem dimensions are inconsistent");
  for (std::size_t j = 0; j < n; ++j)
    if (lp.lower[j] > lp.upper[j]) return LpSolution{};

  const std::size_t mu = lp.num_rows();
  std::vector<std::size_t> up, lo;
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isfinite(lp.upper[j])) up.push_back(j);
    if (std::isfinite(lp.lower[j])) lo.push_back(j);
  }
  const std::size_t K = mu + up.size() + lo.size();
  LpProblem D(K);
  for (std::size_t i = 0; i < mu; ++i) D.c[i] = lp.rhs[i];
  for (std::size_t k = 0; k < up.size(); ++k) D.c[mu + k] = lp.upper[up[k]];
  for (std::size_t k = 0; k < lo.size(); ++k) D.c[mu + up.size() + k] = -lp.lower[lo[k]];
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> col(K, 0.0);
    for (std::size_t i = 0; i < mu; ++i) {
      if (lp.rows[i].size() != n) throw ModelError("LpProblem row length differs from variable count");
      col[i] = lp.rows[i][j];
    }
    for (std::size_t k = 0; k < up.size(); ++k)
      if (up[k] == j) col[mu + k] = 1.0;
    for (std::size_t k = 0; k < lo.size(); ++k)
      if (lo[k] == j) col[mu + up.size() + k] = -1.0;
    D.add_eq_row(col, -lp.c[j]);
  }

  // Reduced costs of D are primal slacks, so its pricing threshold is a primal feasibility tolerance.
  const LpSolution d = solve_lp(D, 1e-13);
  LpSolution sol;
  sol.pivots = d.pivots;
  if (d.status == LpStatus::unbounded) return sol;
  // Primal infeasible or unbounded; let the primal method decide.
  if (d.status == LpStatus::infeasible) return solve_lp(lp);

  sol.status = LpStatus::optimal;
  sol.z.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    sol.z[j] = std::clamp(d.row_duals[2 * j + 1] - d.row_duals[2 * j], lp.lower[j], lp.upper[j]);

  // z read off reduced costs carries the pricing tolerance; snap it to the
  // vertex of its tightest constraints when that vertex is feasible and no worse.
  {
    auto grow = [&](std::size_t k, std::vector<double>& g) -> double {
      g.assign(n, 0.0);
      if (k < mu) {
        g = lp.rows[k];
        return lp.rhs[k];
      }
      if (k < mu + up.size()) {
        g[up[k - mu]] = 1.0;
        return lp.upper[up[k - mu]];
      }
      g[lo[k - mu - up.size()]] = -1.0;
      return -lp.lower[lo[k - mu - up.size()]];
    };
    std::vector<double> g;
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t k = 0; k < K; ++k) {
      const double h = grow(k, g);
      double a = 0.0;
      for (std::size_t j = 0; j < n; ++j) a += g[j] * sol.z[j];
      const double slack = std::fabs(h - a) / (1.0 + std::fabs(h));
      if (slack <= 1e-6) order.push_back({d.z[k] > 0.0 ? slack : 1.0 + slack, k});
    }
    std::sort(order.begin(), order.end());
    std::vector<std::vector<double>> basis, sys;
    std::vector<double> rhs;
    for (const auto& [key, k] : order) {
      if (sys.size() == n) break;
      const double h = grow(k, g);
      std::vector<double> r = g;
      for (const auto& q : basis) {
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += q[j] * r[j];
        for (std::size_t j = 0; j < n; ++j) r[j] -= dot * q[j];
      }
      double nr = 0.0, ng = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        nr += r[j] * r[j];
        ng += g[j] * g[j];
      }
      if (nr <= 1e-16 * ng || ng == 0.0) continue;
      for (double& v : r) v /= std::sqrt(nr);
      basis.push_back(std::move(r));
      sys.push_back(g);
      rhs.push_back(h);
    }
    if (sys.size() == n && n > 0) {
      const auto zz = detail::solve_dense(sys, rhs);
      if (zz) {
        bool ok = true;
        for (std::size_t k = 0; k < K && ok; ++k) {
          const double h = grow(k, g);
          double a = 0.0;
          for (std::size_t j = 0; j < n; ++j) a += g[j] * (*zz)[j];
          ok = a <= h + 1e-11 * (1.0 + std::fabs(h));
        }
        double cz = 0.0, cs = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          cz += lp.c[j] * (*zz)[j];
          cs += lp.c[j] * sol.z[j];
        }
        if (ok && cz <= cs + 1e-9 * (1.0 + std::fabs(cs)))
          for (std::size_t j = 0; j < n; ++j) sol.z[j] = std::clamp((*zz)[j], lp.lower[j], lp.upper[j]);
      }
    }
  }
  sol.value = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.value += lp.c[j] * sol.z[j];
  sol.row_duals.assign(d.z.begin(), d.z.begin() + static_cast<std::ptrdiff_t>(mu));
  sol.lower_duals.assign(n, 0.0);
  sol.upper_duals.assign(n, 0.0);
  for (std::size_t k = 0; k < up.size(); ++k) sol.upper_duals[up[k]] += d.z[mu + k];
  for (std::size_t k = 0; k < lo.size(); ++k) sol.lower_duals[lo[k]] += d.z[mu + up.size() + k];
  sol.dual_value = -d.value;
  return sol;
}

}  // namespace oakit
