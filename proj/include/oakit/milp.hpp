#pragma once

// Exact branch and bound over solve_lp: best-bound node selection, branching
// on the most fractional variable (lowest index on ties), down child first.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <string>
#include <vector>

#include "oakit/errors.hpp"
#include "oakit/lp.hpp"

namespace oakit {

struct MilpProblem {
  LpProblem lp;
  std::vector<std::size_t> integer_vars;
};

enum class MilpStatus { optimal, infeasible, unbounded };

inline const char* to_string(MilpStatus s) {
  switch (s) {
    case MilpStatus::optimal: return "optimal";
    case MilpStatus::infeasible: return "infeasible";
    case MilpStatus::unbounded: return "unbounded";
  }
  return "?";
}

struct MilpSolution {
  MilpStatus status = MilpStatus::infeasible;
  std::vector<double> z;
  double value = kInf;
  double best_bound = -kInf;
  std::size_t nodes = 0;
};

struct MilpOptions {
  double integrality_tol = 1e-6;
  std::size_t node_limit = 1'000'000;
};

namespace detail {
struct BbNode {
  double bound;
  std::size_t id;
  std::vector<double> lower;
  std::vector<double> upper;
};
struct BbNodeCmp {
  bool operator()(const BbNode& a, const BbNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};
}  // namespace detail

inline MilpSolution solve_milp(const MilpProblem& mp, const MilpOptions& opt = {}) {
  const std::size_t n = mp.lp.num_vars();
  for (std::size_t j : mp.integer_vars) {
    if (j >= n) throw ModelError("integer variable index out of range");
    if (!std::isfinite(mp.lp.lower[j]) || !std::isfinite(mp.lp.upper[j]))
      throw ModelError("integer variable " + std::to_string(j) + " needs finite bounds");
  }

  MilpSolution best;
  std::priority_queue<detail::BbNode, std::vector<detail::BbNode>, detail::BbNodeCmp> open;
  std::size_t next_id = 0;
  {
    detail::BbNode root{-kInf, next_id++, mp.lp.lower, mp.lp.upper};
    for (std::size_t j : mp.integer_vars) {
      root.lower[j] = std::ceil(root.lower[j] - opt.integrality_tol);
      root.upper[j] = std::floor(root.upper[j] + opt.integrality_tol);
    }
    open.push(std::move(root));
  }

  LpProblem work = mp.lp;
  auto prune_level = [&]() { return best.value - 1e-9 * (1.0 + std::fabs(best.value)); };

  while (!open.empty()) {
    detail::BbNode node = open.top();
    open.pop();
    if (best.status == MilpStatus::optimal && node.bound >= prune_level()) continue;
    if (++best.nodes > opt.node_limit) throw ResourceError("branch-and-bound node limit exceeded");

    work.lower = node.lower;
    work.upper = node.upper;
    const LpSolution rel = solve_lp(work);
    if (rel.status == LpStatus::infeasible) continue;
    if (rel.status == LpStatus::unbounded) {
      best.status = MilpStatus::unbounded;
      best.value = -kInf;
      best.best_bound = -kInf;
      return best;
    }
    if (best.status == MilpStatus::optimal && rel.value >= prune_level()) continue;

    std::size_t branch = n;
    double best_frac = -1.0;
    for (std::size_t j : mp.integer_vars) {
      const double v = rel.z[j];
      const double f = v - std::floor(v);
      const double dist = std::min(f, 1.0 - f);
      if (dist <= opt.integrality_tol) continue;
      if (dist > best_frac + 1e-12 || (std::fabs(dist - best_frac) <= 1e-12 && j < branch)) {
        best_frac = dist;
        branch = j;
      }
    }
    if (branch == n) {
      best.status = MilpStatus::optimal;
      best.value = rel.value;
      best.z = rel.z;
      for (std::size_t j : mp.integer_vars) best.z[j] = std::round(best.z[j]);
      continue;
    }
    const double v = rel.z[branch];
    detail::BbNode down{rel.value, next_id++, node.lower, node.upper};
    down.upper[branch] = std::floor(v);
    detail::BbNode up{rel.value, next_id++, std::move(node.lower), std::move(node.upper)};
    up.lower[branch] = std::ceil(v);
    open.push(std::move(down));
    open.push(std::move(up));
  }
  best.best_bound = best.status == MilpStatus::optimal ? best.value : kInf;
  return best;
}

}  // namespace oakit
