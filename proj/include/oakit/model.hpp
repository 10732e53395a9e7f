#pragma once

// Problem container for
//
//   min f(x, y)  s.t.  g_i(x, y) <= 0,  x in X,  y in Y, y integer
//
// with X = {x : A x <= b, l <= x <= u} and Y likewise.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "oakit/errors.hpp"
#include "oakit/expr.hpp"
#include "oakit/lp.hpp"

namespace oakit {

using IntPoint = std::vector<long long>;

inline std::vector<double> to_real(const IntPoint& y) { return std::vector<double>(y.begin(), y.end()); }

inline std::string to_string(const IntPoint& y, char sep = ',') {
  std::string s;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(y[i]);
  }
  return s;
}

struct Polyhedron {
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  std::vector<double> lower;
  std::vector<double> upper;

  Polyhedron() = default;
  Polyhedron(std::vector<double> lo, std::vector<double> up) : lower(std::move(lo)), upper(std::move(up)) {}

  std::size_t dim() const { return lower.size(); }
  void add_row(std::vector<double> a, double rhs) {
    A.push_back(std::move(a));
    b.push_back(rhs);
  }
  bool bounded() const {
    for (std::size_t j = 0; j < dim(); ++j)
      if (!std::isfinite(lower[j]) || !std::isfinite(upper[j])) return false;
    return true;
  }
  bool contains(const std::vector<double>& v, double tol) const {
    for (std::size_t j = 0; j < dim(); ++j)
      if (v[j] < lower[j] - tol || v[j] > upper[j] + tol) return false;
    for (std::size_t r = 0; r < A.size(); ++r) {
      double s = 0.0;
      for (std::size_t j = 0; j < dim(); ++j) s += A[r][j] * v[j];
      if (s > b[r] + tol) return false;
    }
    return true;
  }
};

struct MinlpProblem {
  std::string name;
  std::size_t n = 0;
  std::size_t p = 0;
  Expr objective;
  std::vector<Expr> constraints;
  Polyhedron X;
  Polyhedron Y;
  std::optional<double> known_optimum;

  std::size_t m() const { return constraints.size(); }
};

enum class Variant { classic_oa, new_oa };

inline const char* to_string(Variant v) { return v == Variant::new_oa ? "new-oa" : "classic-oa"; }

struct SolverConfig {
  double eps_abs = 1e-5;
  double eps_rel = 1e-3;
  int max_iter = 900;
  double tol_feas = 1e-6;
  double tol_act = 1e-6;
  double eps_cut = 1e-6;
  Variant variant = Variant::new_oa;

  double tol_kkt = 1e-4;
  double kelley_tol = 1e-11;
  double kelley_feas_tol = 1e-10;
  int kelley_cap = 500;
  double theta_floor = -1e9;
  std::size_t enum_cap = 1'000'000;
  std::size_t node_limit = 1'000'000;
  /// Abort the run when no multipliers reach tol_kkt instead of keeping the cuts.
  bool strict_kkt = false;
  /// Test hook: use rho = 1 in the new-OA driver.
  bool force_unit_rho = false;
};

struct ValidationReport {
  std::vector<std::string> violations;
  std::vector<std::string> warnings;
  bool ok() const { return violations.empty(); }
};

namespace detail {

inline void check_polyhedron(const Polyhedron& P, std::size_t dim, const char* name, ValidationReport& rep) {
  if (P.lower.size() != dim || P.upper.size() != dim) {
    rep.violations.push_back(std::string(name) + ": bound vectors must have length " + std::to_string(dim));
    return;
  }
  if (P.A.size() != P.b.size()) rep.violations.push_back(std::string(name) + ": row count of A differs from b");
  for (const auto& r : P.A)
    if (r.size() != dim) rep.violations.push_back(std::string(name) + ": row length differs from dimension");
  for (std::size_t j = 0; j < dim; ++j)
    if (P.lower[j] > P.upper[j])
      rep.violations.push_back(std::string(name) + ": lower > upper at component " + std::to_string(j));
}

// Visits box corners, or a fixed pseudo-random sample when there are too many.
template <typename F>
void for_box_samples(const Polyhedron& X, const Polyhedron& Y, F&& visit) {
  const std::size_t d = X.dim() + Y.dim();
  auto lo = [&](std::size_t k) { return k < X.dim() ? X.lower[k] : Y.lower[k - X.dim()]; };
  auto hi = [&](std::size_t k) { return k < X.dim() ? X.upper[k] : Y.upper[k - X.dim()]; };
  auto emit = [&](const std::vector<double>& z) {
    Point pt;
    pt.x.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(X.dim()));
    pt.y.assign(z.begin() + static_cast<std::ptrdiff_t>(X.dim()), z.end());
    visit(pt);
  };
  std::vector<double> z(d);
  if (d <= 12) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
      for (std::size_t k = 0; k < d; ++k) z[k] = (mask >> k) & 1u ? hi(k) : lo(k);
      emit(z);
    }
  } else {
    std::mt19937_64 rng(12345);
    for (int s = 0; s < 4096; ++s) {
      for (std::size_t k = 0; k < d; ++k) z[k] = (rng() & 1u) ? hi(k) : lo(k);
      emit(z);
    }
  }
  for (std::size_t k = 0; k < d; ++k) z[k] = 0.5 * (lo(k) + hi(k));
  emit(z);
}

}  // namespace detail

/// Reports structural violations; never throws.
inline ValidationReport validate(const MinlpProblem& P) {
  ValidationReport rep;
  detail::check_polyhedron(P.X, P.n, "X", rep);
  detail::check_polyhedron(P.Y, P.p, "Y", rep);
  if (!rep.ok()) return rep;
  if (!P.X.bounded()) rep.violations.push_back("X unbounded: every x component needs finite bounds");
  if (!P.Y.bounded()) rep.violations.push_back("Y ∩ Z^p not finite: every y component needs finite bounds");
  if (P.objective.empty()) rep.violations.push_back("objective missing");

  auto check_expr = [&](const Expr& e, const std::string& what) {
    const VarExtent ext = var_extent(e);
    if (ext.x > P.n) rep.violations.push_back(what + ": x index out of range");
    if (ext.y > P.p) rep.violations.push_back(what + ": y index out of range");
  };
  if (!P.objective.empty()) check_expr(P.objective, "objective");
  for (std::size_t i = 0; i < P.m(); ++i) check_expr(P.constraints[i], "constraint " + std::to_string(i));
  if (!rep.ok()) return rep;

  // Domain guards at box corners.
  std::vector<Expr> all{P.objective};
  all.insert(all.end(), P.constraints.begin(), P.constraints.end());
  bool domain_ok = true;
  detail::for_box_samples(P.X, P.Y, [&](const Point& pt) {
    if (!domain_ok) return;
    for (std::size_t k = 0; k < all.size(); ++k) {
      try {
        (void)eval(all[k], pt);
      } catch (const DomainError& e) {
        rep.violations.push_back(std::string(k == 0 ? "objective" : "constraint " + std::to_string(k - 1)) +
                                 ": domain-guard failure at box corner: " + e.what());
        domain_ok = false;
        return;
      }
    }
  });
  if (!domain_ok) return rep;

  // Midpoint convexity spot check (warning only).
  std::mt19937_64 rng(2024);
  auto sample = [&](const Polyhedron& B) {
    std::vector<double> v(B.dim());
    for (std::size_t j = 0; j < B.dim(); ++j)
      v[j] = std::uniform_real_distribution<double>(B.lower[j], B.upper[j])(rng);
    return v;
  };
  for (std::size_t k = 0; k < all.size(); ++k) {
    for (int s = 0; s < 64; ++s) {
      Point a{sample(P.X), sample(P.Y)}, b{sample(P.X), sample(P.Y)}, mid;
      mid.x.resize(P.n);
      mid.y.resize(P.p);
      for (std::size_t j = 0; j < P.n; ++j) mid.x[j] = 0.5 * (a.x[j] + b.x[j]);
      for (std::size_t j = 0; j < P.p; ++j) mid.y[j] = 0.5 * (a.y[j] + b.y[j]);
      try {
        const double fa = eval(all[k], a), fb = eval(all[k], b), fm = eval(all[k], mid);
        if (fm > 0.5 * (fa + fb) + 1e-9 * (1.0 + std::fabs(fa) + std::fabs(fb))) {
          rep.warnings.push_back(std::string(k == 0 ? "objective" : "constraint " + std::to_string(k - 1)) +
                                 ": midpoint convexity check failed");
          break;
        }
      } catch (const DomainError&) {
        break;
      }
    }
  }
  return rep;
}

/// Throws ModelError listing every violation.
inline void require_valid(const MinlpProblem& P) {
  const ValidationReport rep = validate(P);
  if (rep.ok()) return;
  std::string msg = "invalid model";
  for (const auto& v : rep.violations) msg += "; " + v;
  throw ModelError(msg);
}

/// Lattice points of Y in ascending lexicographic order.
inline std::vector<IntPoint> enumerate_integer_points(const Polyhedron& Y, std::size_t cap = 1'000'000) {
  const std::size_t p = Y.dim();
  std::vector<IntPoint> out;
  if (!Y.bounded()) throw ResourceError("Y ∩ Z^p not finite");
  IntPoint lo(p), hi(p);
  double total = 1.0;
  for (std::size_t j = 0; j < p; ++j) {
    lo[j] = static_cast<long long>(std::ceil(Y.lower[j] - 1e-9));
    hi[j] = static_cast<long long>(std::floor(Y.upper[j] + 1e-9));
    if (lo[j] > hi[j]) return out;
    total *= static_cast<double>(hi[j] - lo[j] + 1);
  }
  if (total > static_cast<double>(cap)) throw ResourceError("integer enumeration exceeds cap");
  if (p == 0) {
    out.emplace_back();
    return out;
  }
  IntPoint cur = lo;
  for (;;) {
    if (Y.contains(to_real(cur), 1e-9)) out.push_back(cur);
    std::size_t k = p;
    while (k > 0) {
      --k;
      if (cur[k] < hi[k]) {
        ++cur[k];
        for (std::size_t r = k + 1; r < p; ++r) cur[r] = lo[r];
        break;
      }
      if (k == 0) return out;
    }
  }
}

/// Membership in the feasible set of the MINLP, all tests within tol.
inline bool is_feasible_point(const MinlpProblem& P, const Point& pt, double tol) {
  if (pt.x.size() != P.n || pt.y.size() != P.p) throw ModelError("point dimensions do not match the problem");
  for (double v : pt.y)
    if (std::fabs(v - std::round(v)) > tol) return false;
  if (!P.X.contains(pt.x, tol) || !P.Y.contains(pt.y, tol)) return false;
  for (const auto& g : P.constraints) {
    try {
      if (eval(g, pt) > tol) return false;
    } catch (const DomainError&) {
      return false;
    }
  }
  return true;
}

/// Appends the polyhedron's rows and bounds onto columns [offset, offset + dim) of an LP.
inline void add_polyhedron(LpProblem& lp, const Polyhedron& P, std::size_t offset) {
  for (std::size_t r = 0; r < P.A.size(); ++r) {
    std::vector<double> a(lp.num_vars(), 0.0);
    for (std::size_t j = 0; j < P.dim(); ++j) a[offset + j] = P.A[r][j];
    lp.add_row(std::move(a), P.b[r]);
  }
  for (std::size_t j = 0; j < P.dim(); ++j) {
    lp.lower[offset + j] = P.lower[j];
    lp.upper[offset + j] = P.upper[j];
  }
}

}  // namespace oakit
