#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oakit/oa.hpp"
#include "support/oracles.hpp"

using namespace oakit;

namespace {

SolverConfig with_variant(Variant v) {
  SolverConfig cfg;
  cfg.variant = v;
  return cfg;
}

void expect_no_repeat(const OaResult& r) {
  std::set<IntPoint> seen;
  for (const auto& rec : r.trace) EXPECT_TRUE(seen.insert(rec.y).second) << "repeated y=(" << to_string(rec.y) << ")";
}

// Two integer variables, a convex quadratic objective and a disc constraint.
MinlpProblem two_integer_quadratic() {
  MinlpProblem P;
  P.name = "quad2";
  P.n = 2;
  P.p = 2;
  P.objective = pow(var_x(0) - 1.2, 2) + pow(var_x(1) + 0.4, 2) + 0.5 * pow(var_y(0) - 1.6, 2) +
                0.3 * pow(var_y(1) - 0.7, 2) + 0.2 * var_x(0);
  P.constraints = {pow(var_x(0), 2) + pow(var_y(0), 2) + pow(var_y(1), 2) - 6.0, var_y(0) - 2.0 * var_x(1) - 2.5};
  P.X = Polyhedron({-2.0, -2.0}, {2.0, 2.0});
  P.Y = Polyhedron({-2.0, -2.0}, {3.0, 3.0});
  return P;
}

}  // namespace

TEST(Oa, MasterRowCount) {
  const MinlpProblem P = fixtures::example31();
  const SolverConfig cfg;
  std::vector<CutBlock> pool;
  int feasible = 0, infeasible = 0;
  for (long long y : {14LL, 10LL, 3LL}) {
    const PointCuts pc = generate_point_cuts(P, {y}, cfg, 1);
    (pc.sub.nlp ? feasible : infeasible) += 1;
    pool.insert(pool.end(), pc.cuts.begin(), pc.cuts.end());
  }
  ASSERT_EQ(feasible, 2);
  ASSERT_EQ(infeasible, 1);
  const MilpProblem mp = assemble_master(pool, -0.5, P, cfg);
  EXPECT_EQ(mp.lp.num_rows(), 2u * (1 + 3) + 1u * 3 + 1);
  EXPECT_EQ(mp.lp.num_vars(), 3u);
  EXPECT_EQ(mp.integer_vars, (std::vector<std::size_t>{1}));
  EXPECT_EQ(assemble_master(pool, kInf, P, cfg).lp.num_rows(), 11u);
}

TEST(Oa, EmptyPoolUsesThetaFloor) {
  const MinlpProblem P = fixtures::example31();
  const SolverConfig cfg;
  const MilpProblem mp = assemble_master({}, kInf, P, cfg);
  EXPECT_EQ(mp.lp.num_rows(), 0u);
  EXPECT_EQ(mp.lp.lower[2], cfg.theta_floor);
  const MilpSolution s = solve_milp(mp);
  ASSERT_EQ(s.status, MilpStatus::optimal);
  EXPECT_EQ(s.value, cfg.theta_floor);
}

TEST(Oa, FirstIterationFromY4) {
  const MinlpProblem P = fixtures::example31();
  for (Variant v : {Variant::new_oa, Variant::classic_oa}) {
    OaState s;
    s.next_y = IntPoint{4};
    s = iterate(std::move(s), P, with_variant(v));
    ASSERT_EQ(s.T, (std::vector<IntPoint>{{4}}));
    EXPECT_TRUE(s.S.empty());
    ASSERT_TRUE(s.incumbent);
    // Grid oracle for NLP(4).
    const auto [gx, gv] = fixtures::grid_min_1d(
        [&](double x) {
          const Point pt{{x}, {4.0}};
          return is_feasible_point(P, pt, 0.0) ? eval(P.objective, pt) : kInf;
        },
        0.0, 20.0, 200000);
    // The grid step is 1e-4, so the grid can only be slightly worse.
    EXPECT_LE(s.ubd, gv + 1e-9);
    EXPECT_GE(s.ubd, gv - 1e-4);
    EXPECT_NEAR(s.incumbent->x[0], gx, 1e-3);
    ASSERT_TRUE(s.next_y);
    EXPECT_NE(*s.next_y, IntPoint{4});
    EXPECT_LE(s.lbd, s.ubd);
    ASSERT_EQ(s.trace.size(), 1u);
    EXPECT_EQ(s.trace[0].k, 1);
    EXPECT_EQ(s.masters, 1);
  }
}

TEST(Oa, InfeasibleIterateKeepsUpperBound) {
  const MinlpProblem P = fixtures::example31();
  OaState s;
  s.next_y = IntPoint{14};
  s = iterate(std::move(s), P, SolverConfig{});
  const double ubd = s.ubd;
  s.done = false;
  s.next_y = IntPoint{3};
  s = iterate(std::move(s), P, SolverConfig{});
  EXPECT_EQ(s.ubd, ubd);
  EXPECT_EQ(s.S, (std::vector<IntPoint>{{3}}));
  EXPECT_EQ(s.trace.back().classification, Classification::infeasible_integer);
  EXPECT_EQ(s.trace.back().rho, 1.0);
}

TEST(Oa, MasterInfeasibleTerminatesOptimal) {
  MinlpProblem P;
  P.n = 1;
  P.p = 1;
  P.objective = pow(var_x(0) + 1.0, 2) + var_y(0);
  P.constraints = {var_x(0) - 0.5};
  P.X = Polyhedron({0.0}, {1.0});
  P.Y = Polyhedron({2.0}, {2.0});
  const OaResult r = solve(P, {2});
  EXPECT_EQ(r.status, OaStatus::optimal);
  EXPECT_EQ(r.message, "master infeasible");
  EXPECT_EQ(r.iterations, 1);
  EXPECT_NEAR(r.objective, 3.0, 1e-12);
  EXPECT_EQ(r.lbd, r.objective);
}

TEST(Oa, Example31BothVariants) {
  const MinlpProblem P = fixtures::example31();
  for (Variant v : {Variant::new_oa, Variant::classic_oa}) {
    const OaResult r = solve(P, {4}, with_variant(v));
    ASSERT_EQ(r.status, OaStatus::optimal) << to_string(v);
    ASSERT_TRUE(r.incumbent);
    EXPECT_EQ(r.incumbent->y[0], 14.0);
    EXPECT_NEAR(r.incumbent->x[0], 1.9752, 1e-3);
    EXPECT_NEAR(r.objective, -0.5249, 1e-3);
    expect_no_repeat(r);
    EXPECT_LE(r.masters, 21 + 1);
  }
  EXPECT_LE(solve(P, {4}, with_variant(Variant::new_oa)).iterations,
            solve(P, {4}, with_variant(Variant::classic_oa)).iterations);
}

TEST(Oa, EmptyLatticeIsInfeasible) {
  MinlpProblem P = fixtures::example31();
  P.Y = Polyhedron({0.2}, {0.8});
  const OaResult r = solve(P, {0});
  EXPECT_EQ(r.status, OaStatus::infeasible);
  EXPECT_EQ(r.iterations, 0);
}

TEST(Oa, StartOutsideYIsModelError) {
  const MinlpProblem P = fixtures::example31();
  EXPECT_THROW(solve(P, {21}), ModelError);
  EXPECT_THROW(solve(P, {1, 2}), ModelError);
}

TEST(Oa, ZeroIterationLimit) {
  const MinlpProblem P = fixtures::example31();
  SolverConfig cfg;
  cfg.max_iter = 0;
  const OaResult r = solve(P, {4}, cfg);
  EXPECT_EQ(r.status, OaStatus::iteration_limit);
  EXPECT_EQ(r.iterations, 0);
}

TEST(Oa, BruteForceExample31) {
  const OaResult r = brute_force_solve(fixtures::example31());
  ASSERT_EQ(r.status, OaStatus::optimal);
  EXPECT_EQ(r.incumbent->y[0], 14.0);
  EXPECT_NEAR(r.objective, -0.5249, 1e-3);
  EXPECT_EQ(r.iterations, 21);
}

TEST(Oa, AllInfeasibleInstance) {
  MinlpProblem P = fixtures::example31();
  P.constraints.push_back(25.0 - var_x(0));
  EXPECT_EQ(brute_force_solve(P).status, OaStatus::infeasible);
  const OaResult r = solve(P, {4});
  EXPECT_EQ(r.status, OaStatus::infeasible);
  expect_no_repeat(r);
}

TEST(Oa, TwoIntegerQuadraticMatchesOracle) {
  const MinlpProblem P = two_integer_quadratic();
  const OaResult ref = brute_force_solve(P);
  ASSERT_EQ(ref.status, OaStatus::optimal);
  for (Variant v : {Variant::new_oa, Variant::classic_oa}) {
    const OaResult r = solve(P, {0, 0}, with_variant(v));
    ASSERT_EQ(r.status, OaStatus::optimal);
    EXPECT_NEAR(r.objective, ref.objective, 1e-5);
    expect_no_repeat(r);
  }
}

TEST(Oa, FullMasterReproducesOptimum) {
  for (const MinlpProblem& P : {fixtures::example31(), two_integer_quadratic()}) {
    const OaResult ref = brute_force_solve(P);
    const FullMasterCheck fm = full_master(P);
    ASSERT_EQ(fm.status, MilpStatus::optimal);
    EXPECT_NEAR(fm.value, ref.objective, 1e-5);
    EXPECT_EQ(fm.T.size() + fm.S.size(), enumerate_integer_points(P.Y).size());
  }
}

TEST(Oa, BoundSandwichAndMonotoneBounds) {
  const MinlpProblem P = fixtures::example31();
  const double fstar = brute_force_solve(P).objective;
  for (Variant v : {Variant::new_oa, Variant::classic_oa})
    for (long long y0 : {0LL, 4LL, 9LL, 20LL}) {
      const OaResult r = solve(P, {y0}, with_variant(v));
      ASSERT_EQ(r.status, OaStatus::optimal);
      EXPECT_NEAR(r.objective, fstar, 1e-3 * std::fabs(fstar));
      for (std::size_t k = 0; k < r.trace.size(); ++k) {
        const auto& rec = r.trace[k];
        if (std::isfinite(rec.lbd)) {
          EXPECT_LE(rec.lbd, fstar + 1e-6);
        }
        if (std::isfinite(rec.ubd)) {
          EXPECT_GE(rec.ubd, fstar - 1e-6);
        }
        if (k > 0) {
          EXPECT_LE(rec.ubd, r.trace[k - 1].ubd);
          EXPECT_GE(rec.lbd, r.trace[k - 1].lbd);
        }
      }
      expect_no_repeat(r);
    }
}

TEST(Oa, VariantCoherenceWithUnitRho) {
  const MinlpProblem P = fixtures::example31();
  SolverConfig unit;
  unit.force_unit_rho = true;
  const OaResult a = solve(P, {4}, unit);
  const OaResult b = solve(P, {4}, with_variant(Variant::classic_oa));
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t k = 0; k < a.trace.size(); ++k) EXPECT_EQ(a.trace[k].y, b.trace[k].y);
  ASSERT_EQ(a.cuts.size(), b.cuts.size());
  for (std::size_t i = 0; i < a.cuts.size(); ++i) {
    EXPECT_EQ(a.cuts[i].ax, b.cuts[i].ax);
    EXPECT_EQ(a.cuts[i].ay, b.cuts[i].ay);
    EXPECT_EQ(a.cuts[i].rhs, b.cuts[i].rhs);
    EXPECT_EQ(a.cuts[i].theta_coef, b.cuts[i].theta_coef);
  }
}

TEST(Oa, FeasibleRecordsCarryRhoFormula) {
  const OaResult r = solve(fixtures::example31(), {4});
  for (const auto& rec : r.trace) {
    EXPECT_GT(rec.rho, 0.0);
    if (rec.classification != Classification::feasible_integer || rec.J.empty()) continue;
    if (rec.Pi > 0.0) {
      EXPECT_DOUBLE_EQ(rec.rho, -rec.max_g_J / rec.Pi);
    }
  }
}

TEST(Oa, IterateIsValueSemantic) {
  const MinlpProblem P = fixtures::example31();
  OaState s0;
  s0.next_y = IntPoint{4};
  const OaState s1 = iterate(s0, P, SolverConfig{});
  EXPECT_EQ(s0.k, 0);
  EXPECT_TRUE(s0.cuts.empty());
  EXPECT_EQ(s1.k, 1);
  EXPECT_EQ(iterate(s1, P, SolverConfig{}).k, 2);
}
