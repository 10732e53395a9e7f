#pragma once

// Seeded generator of small convex MINLP test instances (see docs/random_instances.md).

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "oakit/expr.hpp"
#include "oakit/model.hpp"

namespace oakit::fixtures {

struct RandomInstanceOptions {
  std::size_t max_n = 3;
  std::size_t max_p = 2;
  std::size_t max_points = 25;
};

inline MinlpProblem random_instance(std::uint64_t seed, const RandomInstanceOptions& opt = {}) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto pick = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };

  MinlpProblem P;
  P.name = "random-" + std::to_string(seed);
  P.n = static_cast<std::size_t>(pick(1, static_cast<int>(opt.max_n)));
  P.p = static_cast<std::size_t>(pick(1, static_cast<int>(opt.max_p)));

  // Y = box with at most max_points lattice points.
  std::vector<double> ylo(P.p), yhi(P.p);
  std::size_t points = 1;
  for (std::size_t j = 0; j < P.p; ++j) {
    const std::size_t room = opt.max_points / points;
    const int width = pick(1, static_cast<int>(std::min<std::size_t>(room, P.p == 1 ? 25 : 5))) - 1;
    ylo[j] = pick(-2, 1);
    yhi[j] = ylo[j] + width;
    points *= static_cast<std::size_t>(width + 1);
  }
  P.Y = Polyhedron(ylo, yhi);
  P.X = Polyhedron(std::vector<double>(P.n, -2.0), std::vector<double>(P.n, 3.0));
  if (P.n >= 2 && pick(0, 1)) {
    std::vector<double> a(P.n, 1.0);
    P.X.add_row(a, 4.0);
  }

  auto y_center = [&](std::size_t j) { return uni(ylo[j] - 1.0, yhi[j] + 1.0); };

  // Objective: separable convex terms in x and y plus a linear coupling.
  std::vector<Expr> terms;
  for (std::size_t j = 0; j < P.n; ++j) {
    const Expr xj = var_x(j) - uni(-1.5, 2.5);
    switch (pick(0, 2)) {
      case 0: terms.push_back(uni(0.3, 2.0) * pow(xj, 2)); break;
      case 1: terms.push_back(uni(0.05, 0.5) * pow(xj, 4) + uni(0.1, 1.0) * pow(xj, 2)); break;
      default: terms.push_back(uni(0.2, 1.0) * exp(0.5 * xj) + uni(0.2, 1.0) * pow(xj, 2)); break;
    }
  }
  for (std::size_t j = 0; j < P.p; ++j) terms.push_back(uni(0.1, 1.0) * pow(var_y(j) - y_center(j), 2));
  for (std::size_t j = 0; j < P.n; ++j) terms.push_back(uni(-0.5, 0.5) * var_x(j));
  for (std::size_t j = 0; j < P.p; ++j) terms.push_back(uni(-0.5, 0.5) * var_y(j));
  P.objective = sum(terms);

  // Constraints: a ball in (x, y) that cuts off part of the lattice, plus optional extras.
  const int m = pick(1, 3);
  for (int i = 0; i < m; ++i) {
    std::vector<Expr> g;
    const int kind = i == 0 ? 0 : pick(0, 2);
    if (kind == 0) {
      double r2 = 0.0;
      for (std::size_t j = 0; j < P.n; ++j) g.push_back(uni(0.5, 1.5) * pow(var_x(j) - uni(-1.0, 2.0), 2));
      for (std::size_t j = 0; j < P.p; ++j) {
        const double c = y_center(j), w = uni(0.2, 1.0);
        g.push_back(w * pow(var_y(j) - c, 2));
        r2 += w * std::pow(0.6 * (yhi[j] - ylo[j]) + 0.5, 2);
      }
      g.push_back(constant(-(r2 + uni(0.5, 2.0))));
    } else if (kind == 1) {
      for (std::size_t j = 0; j < P.n; ++j) g.push_back(uni(-1.0, 1.0) * var_x(j));
      for (std::size_t j = 0; j < P.p; ++j) g.push_back(uni(-1.0, 1.0) * var_y(j));
      g.push_back(constant(-uni(0.5, 3.0)));
    } else {
      const std::size_t j = static_cast<std::size_t>(pick(0, static_cast<int>(P.n) - 1));
      g.push_back(exp(uni(0.3, 0.8) * var_x(j)));
      for (std::size_t k = 0; k < P.p; ++k) g.push_back(uni(-0.5, 0.5) * var_y(k));
      g.push_back(constant(-uni(2.0, 6.0)));
    }
    P.constraints.push_back(sum(g));
  }
  return P;
}

}  // namespace oakit::fixtures
