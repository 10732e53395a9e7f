#pragma once

// SVG 1.1 emitters: bound profiles over time and, for n = p = 1, the cut
// geometry of one iteration in the (x, y) plane.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oakit/cutgen.hpp"
#include "oakit/errors.hpp"
#include "oakit/model.hpp"
#include "oakit/oa.hpp"

namespace oakit::svg {

class PlotError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::string f(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string header(int w, int h) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         std::to_string(w) + "\" height=\"" + std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " +
         std::to_string(h) + "\">\n<rect x=\"0\" y=\"0\" width=\"" + std::to_string(w) + "\" height=\"" +
         std::to_string(h) + "\" fill=\"white\"/>\n";
}

inline std::string text(double x, double y, const std::string& s, const char* anchor = "middle", int size = 12) {
  return "<text x=\"" + f(x) + "\" y=\"" + f(y) + "\" font-family=\"sans-serif\" font-size=\"" +
         std::to_string(size) + "\" text-anchor=\"" + anchor + "\">" + escape(s) + "</text>\n";
}

struct Frame {
  double left = 70, right = 20, top = 30, bottom = 50;
  double w = 640, h = 420;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  double px(double v) const { return left + (v - x0) / (x1 - x0) * (w - left - right); }
  double py(double v) const { return h - bottom - (v - y0) / (y1 - y0) * (h - top - bottom); }
};

inline void widen(double& lo, double& hi) {
  if (!(hi > lo)) {
    const double pad = std::max(1.0, std::fabs(lo)) * 0.05;
    lo -= pad;
    hi += pad;
  } else {
    const double pad = (hi - lo) * 0.05;
    lo -= pad;
    hi += pad;
  }
}

inline std::string axes(const Frame& fr, const std::string& xlabel, const std::string& ylabel) {
  std::string s;
  s += "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
  s += "<line x1=\"" + f(fr.left) + "\" y1=\"" + f(fr.h - fr.bottom) + "\" x2=\"" + f(fr.w - fr.right) + "\" y2=\"" +
       f(fr.h - fr.bottom) + "\"/>\n";
  s += "<line x1=\"" + f(fr.left) + "\" y1=\"" + f(fr.top) + "\" x2=\"" + f(fr.left) + "\" y2=\"" +
       f(fr.h - fr.bottom) + "\"/>\n";
  s += "</g>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = fr.x0 + (fr.x1 - fr.x0) * t / 4.0, yv = fr.y0 + (fr.y1 - fr.y0) * t / 4.0;
    char bx[32], by[32];
    std::snprintf(bx, sizeof bx, "%.4g", xv);
    std::snprintf(by, sizeof by, "%.4g", yv);
    s += text(fr.px(xv), fr.h - fr.bottom + 16, bx, "middle", 10);
    s += text(fr.left - 6, fr.py(yv) + 4, by, "end", 10);
  }
  s += text(0.5 * (fr.left + fr.w - fr.right), fr.h - 12, xlabel);
  s += "<text x=\"16\" y=\"" + f(0.5 * (fr.top + fr.h - fr.bottom)) +
       "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       f(0.5 * (fr.top + fr.h - fr.bottom)) + ")\">" + escape(ylabel) + "</text>\n";
  return s;
}

}  // namespace detail

struct LabeledTrace {
  std::string label;
  std::vector<IterationRecord> rows;
};

/// UB and LB step curves over wall time, one pair per trace.
inline std::string plot_bounds(const std::vector<LabeledTrace>& traces) {
  if (traces.empty()) throw PlotError("no traces to plot");
  double t0 = kInf, t1 = -kInf, v0 = kInf, v1 = -kInf;
  for (const auto& tr : traces) {
    if (tr.rows.empty()) throw PlotError("trace \"" + tr.label + "\" has no rows");
    for (const auto& r : tr.rows) {
      t0 = std::min(t0, r.time_s);
      t1 = std::max(t1, r.time_s);
      for (double v : {r.ubd, r.lbd})
        if (std::isfinite(v)) {
          v0 = std::min(v0, v);
          v1 = std::max(v1, v);
        }
    }
  }
  if (!std::isfinite(v0)) v0 = v1 = 0.0;
  detail::Frame fr;
  fr.x0 = t0;
  fr.x1 = t1;
  fr.y0 = v0;
  fr.y1 = v1;
  detail::widen(fr.x0, fr.x1);
  detail::widen(fr.y0, fr.y1);

  static const char* colors[] = {"#c0392b", "#2471a3", "#d68910", "#229954"};
  std::string s = detail::header(static_cast<int>(fr.w), static_cast<int>(fr.h));
  s += detail::axes(fr, "time (s)", "objective bound");
  int legend_row = 0;
  for (std::size_t ti = 0; ti < traces.size(); ++ti) {
    const auto& tr = traces[ti];
    for (int which = 0; which < 2; ++which) {
      const char* color = colors[(2 * ti + static_cast<std::size_t>(which)) % 4];
      const std::string name = (tr.label.empty() ? "" : tr.label + " ") + (which == 0 ? "UB" : "LB");
      std::vector<std::pair<double, double>> pts;
      for (const auto& r : tr.rows) {
        const double v = which == 0 ? r.ubd : r.lbd;
        if (std::isfinite(v)) pts.emplace_back(fr.px(r.time_s), fr.py(v));
      }
      s += "<g class=\"curve\" data-name=\"" + detail::escape(name) + "\">\n";
      if (pts.size() >= 2) {
        std::string d;
        for (std::size_t i = 0; i < pts.size(); ++i) {
          if (i) d += " " + detail::f(pts[i].first) + "," + detail::f(pts[i - 1].second);
          d += " " + detail::f(pts[i].first) + "," + detail::f(pts[i].second);
        }
        s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\"" +
             (which == 1 ? " stroke-dasharray=\"6,3\"" : "") + " points=\"" + d.substr(1) + "\"/>\n";
      }
      for (const auto& p : pts)
        s += "<circle cx=\"" + detail::f(p.first) + "\" cy=\"" + detail::f(p.second) + "\" r=\"3\" fill=\"" + color +
             "\"/>\n";
      s += "</g>\n";
      const double ly = fr.top + 14.0 * legend_row++;
      s += "<line x1=\"" + detail::f(fr.w - 150) + "\" y1=\"" + detail::f(ly) + "\" x2=\"" + detail::f(fr.w - 125) +
           "\" y2=\"" + detail::f(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
      s += detail::text(fr.w - 120, ly + 4, name, "start", 11);
    }
  }
  s += "</svg>\n";
  return s;
}

inline std::string plot_bounds(const std::vector<IterationRecord>& trace) { return plot_bounds({{"", trace}}); }

struct GeometryOptions {
  int raster = 80;
  /// Continuous range drawn for y; defaults to the bounds of Y.
  std::optional<std::pair<double, double>> y_range;
};

/// Frame for iteration k: nonlinear feasible region, polyhedral outer approximation from the
/// constraint cuts of iterations <= k, cut lines, and master / subproblem iterate markers.
inline std::string plot_geometry_2d(const MinlpProblem& P, const std::vector<CutBlock>& cuts,
                                    const std::vector<IterationRecord>& trace, int k,
                                    const GeometryOptions& opt = {}) {
  if (P.n != 1 || P.p != 1) throw PlotError("geometry plot needs exactly one x and one y variable");
  detail::Frame fr;
  fr.x0 = P.X.lower[0];
  fr.x1 = P.X.upper[0];
  fr.y0 = opt.y_range ? opt.y_range->first : P.Y.lower[0];
  fr.y1 = opt.y_range ? opt.y_range->second : P.Y.upper[0];
  if (!(fr.x1 > fr.x0) || !(fr.y1 > fr.y0)) throw PlotError("degenerate plotting box");

  std::vector<const CutBlock*> active;
  for (const auto& c : cuts)
    if (c.iteration <= k && c.theta_coef == 0.0) active.push_back(&c);

  std::string s = detail::header(static_cast<int>(fr.w), static_cast<int>(fr.h));
  s += "<g class=\"frame\" data-k=\"" + std::to_string(k) + "\">\n";
  const int N = std::max(4, opt.raster);
  const double cw = (fr.w - fr.left - fr.right) / N, ch = (fr.h - fr.top - fr.bottom) / N;
  std::string dark, light;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const double xv = fr.x0 + (i + 0.5) * (fr.x1 - fr.x0) / N;
      const double yv = fr.y0 + (j + 0.5) * (fr.y1 - fr.y0) / N;
      const Point pt{{xv}, {yv}};
      bool nonlinear_ok = P.X.contains(pt.x, 0.0);
      for (const auto& g : P.constraints) {
        if (!nonlinear_ok) break;
        try {
          nonlinear_ok = eval(g, pt) <= 0.0;
        } catch (const DomainError&) {
          nonlinear_ok = false;
        }
      }
      bool outer_ok = P.X.contains(pt.x, 0.0);
      for (const CutBlock* c : active)
        if (outer_ok && cut_excess(*c, pt.x, pt.y) > 0.0) outer_ok = false;
      const std::string cell = "<rect x=\"" + detail::f(fr.left + i * cw) + "\" y=\"" +
                               detail::f(fr.top + (N - 1 - j) * ch) + "\" width=\"" + detail::f(cw + 0.2) +
                               "\" height=\"" + detail::f(ch + 0.2) + "\"/>\n";
      if (nonlinear_ok)
        dark += cell;
      else if (outer_ok)
        light += cell;
    }
  }
  if (!active.empty()) s += "<g class=\"outer-approximation\" fill=\"#d5d8dc\" stroke=\"none\">\n" + light + "</g>\n";
  s += "<g class=\"nonlinear-region\" fill=\"#5d6d7e\" stroke=\"none\">\n" + dark + "</g>\n";

  // Cut lines ax x + ay y = rhs clipped to the box.
  s += "<g class=\"cuts\" stroke-width=\"1.5\">\n";
  for (const CutBlock* c : active) {
    const double a = c->ax[0], b = c->ay[0], r = c->rhs;
    std::vector<std::pair<double, double>> hits;
    auto push = [&](double xv, double yv) {
      if (xv >= fr.x0 - 1e-9 && xv <= fr.x1 + 1e-9 && yv >= fr.y0 - 1e-9 && yv <= fr.y1 + 1e-9)
        hits.emplace_back(xv, yv);
    };
    if (b != 0.0) {
      push(fr.x0, (r - a * fr.x0) / b);
      push(fr.x1, (r - a * fr.x1) / b);
    }
    if (a != 0.0) {
      push((r - b * fr.y0) / a, fr.y0);
      push((r - b * fr.y1) / a, fr.y1);
    }
    if (hits.size() < 2) continue;
    const char* color = c->iteration == k ? (c->rho < 1.0 ? "#e74c3c" : "#8e44ad") : "#7f8c8d";
    char attrs[160];
    std::snprintf(attrs, sizeof attrs, " class=\"cut\" data-k=\"%d\" data-constraint=\"%d\" data-rho=\"%.6g\"",
                  c->iteration, c->constraint, c->rho);
    s += "<line" + std::string(attrs) + " x1=\"" + detail::f(fr.px(hits[0].first)) + "\" y1=\"" +
         detail::f(fr.py(hits[0].second)) + "\" x2=\"" + detail::f(fr.px(hits.back().first)) + "\" y2=\"" +
         detail::f(fr.py(hits.back().second)) + "\" stroke=\"" + color + "\"/>\n";
  }
  s += "</g>\n";

  s += "<g class=\"iterates\">\n";
  for (const auto& r : trace) {
    if (r.k > k) break;
    if (!r.x.empty() && r.classification == Classification::feasible_integer)
      s += "<circle class=\"nlp-point\" cx=\"" + detail::f(fr.px(r.x[0])) + "\" cy=\"" +
           detail::f(fr.py(static_cast<double>(r.y[0]))) + "\" r=\"4\" fill=\"#e74c3c\"/>\n";
    if (!r.master_x.empty())
      s += "<rect class=\"master-point\" x=\"" + detail::f(fr.px(r.master_x[0]) - 4) + "\" y=\"" +
           detail::f(fr.py(r.master_y[0]) - 4) + "\" width=\"8\" height=\"8\" fill=\"#2471a3\"/>\n";
  }
  s += "</g>\n</g>\n";
  s += detail::axes(fr, "x", "y");
  s += detail::text(fr.w / 2, 18, "iteration " + std::to_string(k));
  s += "</svg>\n";
  return s;
}

/// One frame per iteration of the trace.
inline std::vector<std::string> plot_geometry_frames(const MinlpProblem& P, const OaResult& res,
                                                     const GeometryOptions& opt = {}) {
  std::vector<std::string> frames;
  for (const auto& r : res.trace) frames.push_back(plot_geometry_2d(P, res.cuts, res.trace, r.k, opt));
  return frames;
}

}  // namespace oakit::svg
