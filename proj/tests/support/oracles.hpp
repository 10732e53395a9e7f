#pragma once

// Independent reference computations used by the tests.

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "oakit.hpp"

namespace oakit::fixtures {

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

#ifdef OAKIT_DATA_DIR
inline MinlpProblem load_instance(const std::string& name) {
  return io::parse_model(read_text(std::string(OAKIT_DATA_DIR) + "/" + name + ".json"));
}
#endif

inline MinlpProblem example31() {
  const Expr x = var_x(0), y = var_y(0);
  MinlpProblem P;
  P.name = "example31";
  P.n = 1;
  P.p = 1;
  P.objective = pow(x, 2) / 10.0 - y / 4.5 + 2.0 + 0.001 * pow(y, 2);
  P.constraints = {pow(x, 2) / 20.0 + y - 20.0, pow(x - 1.0, 2) / 40.0 - y + 4.0,
                   0.275 * pow(y, 1.5) - 10.0 * sqrt(x + 0.1)};
  P.X = Polyhedron({0.0}, {20.0});
  P.Y = Polyhedron({0.0}, {20.0});
  return P;
}

/// Minimum of a 2-variable LP with finite bounds by enumerating all pairwise
/// intersections of rows and bound lines. nullopt when infeasible.
inline std::optional<double> lp_vertex_oracle(const LpProblem& lp) {
  std::vector<std::vector<double>> A = lp.rows;
  std::vector<double> b = lp.rhs;
  for (std::size_t j = 0; j < 2; ++j) {
    std::vector<double> lo(2, 0.0), hi(2, 0.0);
    lo[j] = -1.0;
    hi[j] = 1.0;
    A.push_back(lo);
    b.push_back(-lp.lower[j]);
    A.push_back(hi);
    b.push_back(lp.upper[j]);
  }
  std::optional<double> best;
  for (std::size_t r = 0; r < A.size(); ++r) {
    for (std::size_t s = r + 1; s < A.size(); ++s) {
      const double det = A[r][0] * A[s][1] - A[r][1] * A[s][0];
      if (std::fabs(det) < 1e-12) continue;
      const double z0 = (b[r] * A[s][1] - A[r][1] * b[s]) / det;
      const double z1 = (A[r][0] * b[s] - b[r] * A[s][0]) / det;
      bool ok = true;
      for (std::size_t k = 0; k < A.size() && ok; ++k) ok = A[k][0] * z0 + A[k][1] * z1 <= b[k] + 1e-9;
      if (!ok) continue;
      const double v = lp.c[0] * z0 + lp.c[1] * z1;
      if (!best || v < *best) best = v;
    }
  }
  return best;
}

/// MILP optimum by enumerating every integer assignment and solving the LP in the rest.
inline std::optional<double> milp_enumeration_oracle(const MilpProblem& mp) {
  std::vector<long long> lo, hi;
  for (std::size_t j : mp.integer_vars) {
    lo.push_back(static_cast<long long>(std::ceil(mp.lp.lower[j] - 1e-9)));
    hi.push_back(static_cast<long long>(std::floor(mp.lp.upper[j] + 1e-9)));
  }
  const std::size_t q = lo.size();
  std::vector<long long> cur = lo;
  std::optional<double> best;
  for (;;) {
    LpProblem lp = mp.lp;
    for (std::size_t k = 0; k < q; ++k) lp.lower[mp.integer_vars[k]] = lp.upper[mp.integer_vars[k]] =
        static_cast<double>(cur[k]);
    const LpSolution s = solve_lp(lp);
    if (s.status == LpStatus::optimal && (!best || s.value < *best)) best = s.value;
    std::size_t k = q;
    while (k > 0) {
      --k;
      if (cur[k] < hi[k]) {
        ++cur[k];
        for (std::size_t r = k + 1; r < q; ++r) cur[r] = lo[r];
        break;
      }
      if (k == 0) return best;
    }
    if (q == 0) return best;
  }
}

/// Minimum of phi over a uniform grid of `steps` intervals on [a, b].
inline std::pair<double, double> grid_min_1d(const std::function<double(double)>& phi, double a, double b,
                                             int steps) {
  double bx = a, bv = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps; ++i) {
    const double t = a + (b - a) * i / steps;
    const double v = phi(t);
    if (v < bv) {
      bv = v;
      bx = t;
    }
  }
  return {bx, bv};
}

/// Bisection for a root of a monotone function on [a, b].
inline double bisect(const std::function<double(double)>& h, double a, double b) {
  double ha = h(a);
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b), hm = h(m);
    if ((hm > 0) == (ha > 0)) {
      a = m;
      ha = hm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace oakit::fixtures
