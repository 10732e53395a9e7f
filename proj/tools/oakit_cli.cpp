// oakit command-line front end.
//
//   oakit solve <model.json> [--variant new-oa|classic-oa] [--y0 v1,v2,...]
//               [--eps-abs e] [--eps-rel e] [--max-iter k] [--trace out.csv] [--plot out.svg]
//   oakit compare <model.json>
//   oakit oracle <model.json>
//   oakit plot-trace <trace.csv> -o out.svg
//
// Exit codes: 0 optimal, 2 infeasible, 3 iteration limit, 1 error.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oakit.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw oakit::Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw oakit::Error("cannot write " + path);
  out << text;
}

oakit::IntPoint parse_point(const std::string& s) {
  oakit::IntPoint y;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    std::size_t used = 0;
    const long long v = std::stoll(part, &used);
    if (used != part.size()) throw oakit::Error("bad integer \"" + part + "\" in --y0");
    y.push_back(v);
  }
  return y;
}

// Lowest lattice point of Y, used when --y0 is not given.
oakit::IntPoint default_start(const oakit::MinlpProblem& P) {
  oakit::MilpProblem mp;
  mp.lp = oakit::LpProblem(P.p);
  oakit::add_polyhedron(mp.lp, P.Y, 0);
  for (std::size_t j = 0; j < P.p; ++j) mp.integer_vars.push_back(j);
  const oakit::MilpSolution s = oakit::solve_milp(mp);
  oakit::IntPoint y(P.p, 0);
  if (s.status == oakit::MilpStatus::optimal)
    for (std::size_t j = 0; j < P.p; ++j) y[j] = std::llround(s.z[j]);
  return y;
}

int exit_code(oakit::OaStatus s) {
  switch (s) {
    case oakit::OaStatus::optimal: return 0;
    case oakit::OaStatus::infeasible: return 2;
    case oakit::OaStatus::iteration_limit: return 3;
  }
  return 1;
}

void print_result(const oakit::OaResult& r) {
  std::printf("status = %s\n", oakit::to_string(r.status));
  if (r.incumbent) {
    std::printf("f* = %.6f\n", r.objective);
    std::printf("objective = %.10g\n", r.objective);
    std::printf("y* = (");
    for (std::size_t j = 0; j < r.incumbent->y.size(); ++j)
      std::printf("%s%lld", j ? ", " : "", static_cast<long long>(std::llround(r.incumbent->y[j])));
    std::printf(")\nx* = (");
    for (std::size_t j = 0; j < r.incumbent->x.size(); ++j) std::printf("%s%.6f", j ? ", " : "", r.incumbent->x[j]);
    std::printf(")\n");
  }
  std::printf("iterations = %d\n", r.iterations);
  if (!r.message.empty()) std::printf("note = %s\n", r.message.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Outer-approximation solver for convex MINLP"};
  app.require_subcommand(1);

  std::string model_path, variant = "new-oa", y0_text, trace_path, plot_path;
  oakit::SolverConfig cfg;

  auto* solve = app.add_subcommand("solve", "Solve a model with one OA variant");
  solve->add_option("model", model_path, "Model JSON file")->required();
  solve->add_option("--variant", variant, "new-oa or classic-oa")->check(CLI::IsMember({"new-oa", "classic-oa"}));
  solve->add_option("--y0", y0_text, "Initial integer point, comma separated");
  solve->add_option("--eps-abs", cfg.eps_abs, "Absolute gap tolerance");
  solve->add_option("--eps-rel", cfg.eps_rel, "Relative gap tolerance");
  solve->add_option("--max-iter", cfg.max_iter, "Iteration limit")->check(CLI::NonNegativeNumber);
  solve->add_option("--trace", trace_path, "Write the iteration trace as CSV");
  solve->add_option("--plot", plot_path, "Write the bound profile as SVG");

  auto* compare = app.add_subcommand("compare", "Run both variants and tabulate iterations and time");
  compare->add_option("model", model_path, "Model JSON file")->required();
  compare->add_option("--y0", y0_text, "Initial integer point, comma separated");

  auto* oracle = app.add_subcommand("oracle", "Enumerate every integer point");
  oracle->add_option("model", model_path, "Model JSON file")->required();

  std::string csv_path, svg_out;
  auto* plot = app.add_subcommand("plot-trace", "Render a trace CSV as a bound profile");
  plot->add_option("trace", csv_path, "Trace CSV")->required();
  plot->add_option("-o,--output", svg_out, "SVG file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plot) {
      const auto rows = oakit::io::parse_trace_csv(read_file(csv_path));
      write_file(svg_out, oakit::svg::plot_bounds(rows));
      return 0;
    }

    const oakit::MinlpProblem P = oakit::io::parse_model(read_file(model_path));
    const oakit::IntPoint y0 = y0_text.empty() ? default_start(P) : parse_point(y0_text);

    if (*solve) {
      cfg.variant = variant == "classic-oa" ? oakit::Variant::classic_oa : oakit::Variant::new_oa;
      const oakit::OaResult r = oakit::solve(P, y0, cfg);
      print_result(r);
      if (!trace_path.empty()) write_file(trace_path, oakit::io::write_trace(r.trace, oakit::io::TraceFormat::csv));
      if (!plot_path.empty() && !r.trace.empty()) write_file(plot_path, oakit::svg::plot_bounds(r.trace));
      return exit_code(r.status);
    }

    if (*compare) {
      std::printf("%-12s %10s %12s %16s %s\n", "variant", "iterations", "time_s", "objective", "status");
      int code = 0;
      for (oakit::Variant v : {oakit::Variant::new_oa, oakit::Variant::classic_oa}) {
        cfg.variant = v;
        const auto t0 = std::chrono::steady_clock::now();
        const oakit::OaResult r = oakit::solve(P, y0, cfg);
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%-12s %10d %12.4f %16.8g %s\n", oakit::to_string(v), r.iterations, dt, r.objective,
                    oakit::to_string(r.status));
        code = std::max(code, exit_code(r.status));
      }
      return code;
    }

    if (*oracle) {
      const oakit::OaResult r = oakit::brute_force_solve(P, cfg);
      print_result(r);
      return exit_code(r.status);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "oakit: %s\n", e.what());
    return 1;
  }
  return 1;
}
