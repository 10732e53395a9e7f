// Builds the small 1+1 variable test problem in code and solves it with both variants.

#include <cstdio>

#include "oakit.hpp"

int main() {
  using namespace oakit;
  const Expr x = var_x(0), y = var_y(0);

  MinlpProblem P;
  P.name = "example31";
  P.n = 1;
  P.p = 1;
  P.objective = pow(x, 2) / 10.0 - y / 4.5 + 2.0 + 0.001 * pow(y, 2);
  P.constraints = {
      pow(x, 2) / 20.0 + y - 20.0,
      pow(x - 1.0, 2) / 40.0 - y + 4.0,
      0.275 * pow(y, 1.5) - 10.0 * sqrt(x + 0.1),
  };
  P.X = Polyhedron({0.0}, {20.0});
  P.Y = Polyhedron({0.0}, {20.0});

  for (Variant v : {Variant::new_oa, Variant::classic_oa}) {
    SolverConfig cfg;
    cfg.variant = v;
    const OaResult r = solve(P, {4}, cfg);
    std::printf("%-10s %s after %d iterations: f = %.4f at x = %.4f, y = %.0f\n", to_string(v), to_string(r.status),
                r.iterations, r.objective, r.incumbent->x[0], r.incumbent->y[0]);
    for (const auto& rec : r.trace)
      std::printf("  k=%d y=%lld %-10s value=%9.5f rho=%.4f UBD=%9.5f LBD=%9.5f\n", rec.k, rec.y[0],
                  to_string(rec.classification), rec.subproblem_value, rec.rho, rec.ubd, rec.lbd);
  }
}
