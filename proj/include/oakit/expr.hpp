#pragma once

// Expression trees for convex functions of (x, y).
//
// An Expr is an immutable, shareable tree. eval() computes the value and
// subgrad() returns one element of the subdifferential: the gradient where
// the function is differentiable, and a fixed tie-break at kinks (slope 0 for
// |.| at 0, the mean of the attaining children for max).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "oakit/errors.hpp"

namespace oakit {

/// A point (x, y) with x continuous and y integer-valued in the problem.
struct Point {
  std::vector<double> x;
  std::vector<double> y;
};

enum class Op { constant, var_x, var_y, sum, scale, pow, sqrt, exp, log, abs, max };

inline const char* op_name(Op op) {
  switch (op) {
    case Op::constant: return "const";
    case Op::var_x: return "x";
    case Op::var_y: return "y";
    case Op::sum: return "sum";
    case Op::scale: return "scale";
    case Op::pow: return "pow";
    case Op::sqrt: return "sqrt";
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::abs: return "abs";
    case Op::max: return "max";
  }
  return "?";
}

class Expr;

namespace detail {
struct Node;
}

class Expr {
 public:
  Expr() = default;
  explicit Expr(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}

  const detail::Node& node() const { return *node_; }
  bool empty() const { return node_ == nullptr; }

  Op op() const;
  /// Constant value, scale factor or exponent, depending on op().
  double param() const;
  std::size_t index() const;
  const std::vector<Expr>& args() const;

 private:
  std::shared_ptr<const detail::Node> node_;
};

namespace detail {
struct Node {
  Op op = Op::constant;
  double param = 0.0;
  std::size_t index = 0;
  std::vector<Expr> args;
};

inline Expr make(Op op, double param, std::size_t index, std::vector<Expr> args) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->param = param;
  n->index = index;
  n->args = std::move(args);
  return Expr{std::move(n)};
}
}  // namespace detail

inline Op Expr::op() const { return node_->op; }
inline double Expr::param() const { return node_->param; }
inline std::size_t Expr::index() const { return node_->index; }
inline const std::vector<Expr>& Expr::args() const { return node_->args; }

// ---- builders -------------------------------------------------------------

inline Expr constant(double v) { return detail::make(Op::constant, v, 0, {}); }
inline Expr var_x(std::size_t i) { return detail::make(Op::var_x, 0.0, i, {}); }
inline Expr var_y(std::size_t i) { return detail::make(Op::var_y, 0.0, i, {}); }
inline Expr sum(std::vector<Expr> terms) { return detail::make(Op::sum, 0.0, 0, std::move(terms)); }
inline Expr scale(double c, const Expr& e) { return detail::make(Op::scale, c, 0, {e}); }
inline Expr pow(const Expr& base, double exponent) { return detail::make(Op::pow, exponent, 0, {base}); }
inline Expr sqrt(const Expr& e) { return detail::make(Op::sqrt, 0.0, 0, {e}); }
inline Expr exp(const Expr& e) { return detail::make(Op::exp, 0.0, 0, {e}); }
inline Expr log(const Expr& e) { return detail::make(Op::log, 0.0, 0, {e}); }
inline Expr abs(const Expr& e) { return detail::make(Op::abs, 0.0, 0, {e}); }
inline Expr max(std::vector<Expr> children) { return detail::make(Op::max, 0.0, 0, std::move(children)); }

inline Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}); }
inline Expr operator+(const Expr& a, double b) { return sum({a, constant(b)}); }
inline Expr operator+(double a, const Expr& b) { return sum({constant(a), b}); }
inline Expr operator-(const Expr& a) { return scale(-1.0, a); }
inline Expr operator-(const Expr& a, const Expr& b) { return sum({a, scale(-1.0, b)}); }
inline Expr operator-(const Expr& a, double b) { return sum({a, constant(-b)}); }
inline Expr operator-(double a, const Expr& b) { return sum({constant(a), scale(-1.0, b)}); }
inline Expr operator*(double c, const Expr& e) { return scale(c, e); }
inline Expr operator*(const Expr& e, double c) { return scale(c, e); }
inline Expr operator/(const Expr& e, double c) { return scale(1.0 / c, e); }

// ---- printing ---------------------------------------------------------------

inline void print(std::ostream& os, const Expr& e) {
  switch (e.op()) {
    case Op::constant: os << e.param(); return;
    case Op::var_x: os << "x" << e.index(); return;
    case Op::var_y: os << "y" << e.index(); return;
    case Op::scale:
      os << e.param() << "*";
      print(os, e.args()[0]);
      return;
    case Op::pow:
      os << "(";
      print(os, e.args()[0]);
      os << ")^" << e.param();
      return;
    case Op::sum: {
      os << "(";
      for (std::size_t i = 0; i < e.args().size(); ++i) {
        if (i) os << " + ";
        print(os, e.args()[i]);
      }
      os << ")";
      return;
    }
    default: {
      os << op_name(e.op()) << "(";
      for (std::size_t i = 0; i < e.args().size(); ++i) {
        if (i) os << ", ";
        print(os, e.args()[i]);
      }
      os << ")";
      return;
    }
  }
}

inline std::string to_string(const Expr& e) {
  std::ostringstream os;
  os.precision(10);
  print(os, e);
  return os.str();
}

// ---- evaluation -------------------------------------------------------------

namespace detail {

[[noreturn]] inline void domain_fail(const Expr& e, const std::string& why) {
  throw DomainError(std::string(op_name(e.op())) + " node '" + to_string(e) + "': " + why);
}

inline bool is_integer_exponent(double p) { return std::floor(p) == p; }

inline double eval_pow(const Expr& e, double b) {
  const double p = e.param();
  if (!is_integer_exponent(p) && b < 0.0) domain_fail(e, "negative base with non-integer exponent");
  if (p < 0.0 && b == 0.0) domain_fail(e, "zero base with negative exponent");
  return std::pow(b, p);
}

inline double eval_node(const Expr& e, const Point& pt) {
  switch (e.op()) {
    case Op::constant: return e.param();
    case Op::var_x:
      if (e.index() >= pt.x.size()) domain_fail(e, "x index out of range");
      return pt.x[e.index()];
    case Op::var_y:
      if (e.index() >= pt.y.size()) domain_fail(e, "y index out of range");
      return pt.y[e.index()];
    case Op::sum: {
      double s = 0.0;
      for (const auto& a : e.args()) s += eval_node(a, pt);
      return s;
    }
    case Op::scale: return e.param() * eval_node(e.args()[0], pt);
    case Op::pow: return eval_pow(e, eval_node(e.args()[0], pt));
    case Op::sqrt: {
      const double a = eval_node(e.args()[0], pt);
      if (a < 0.0) domain_fail(e, "negative argument " + std::to_string(a));
      return std::sqrt(a);
    }
    case Op::exp: return std::exp(eval_node(e.args()[0], pt));
    case Op::log: {
      const double a = eval_node(e.args()[0], pt);
      if (a <= 0.0) domain_fail(e, "non-positive argument " + std::to_string(a));
      return std::log(a);
    }
    case Op::abs: return std::fabs(eval_node(e.args()[0], pt));
    case Op::max: {
      if (e.args().empty()) domain_fail(e, "max of no children");
      double m = eval_node(e.args()[0], pt);
      for (std::size_t i = 1; i < e.args().size(); ++i) m = std::fmax(m, eval_node(e.args()[i], pt));
      return m;
    }
  }
  domain_fail(e, "unknown op");
}

struct ValueGrad {
  double value = 0.0;
  std::vector<double> grad;  // over (x, y) concatenated
};

inline void axpy(double a, const std::vector<double>& src, std::vector<double>& dst) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += a * src[i];
}

inline ValueGrad subgrad_node(const Expr& e, const Point& pt) {
  const std::size_t n = pt.x.size();
  ValueGrad out;
  out.grad.assign(n + pt.y.size(), 0.0);
  switch (e.op()) {
    case Op::constant: out.value = e.param(); return out;
    case Op::var_x:
      out.value = eval_node(e, pt);
      out.grad[e.index()] = 1.0;
      return out;
    case Op::var_y:
      out.value = eval_node(e, pt);
      out.grad[n + e.index()] = 1.0;
      return out;
    case Op::sum:
      for (const auto& a : e.args()) {
        ValueGrad c = subgrad_node(a, pt);
        out.value += c.value;
        axpy(1.0, c.grad, out.grad);
      }
      return out;
    case Op::scale: {
      ValueGrad c = subgrad_node(e.args()[0], pt);
      out.value = e.param() * c.value;
      axpy(e.param(), c.grad, out.grad);
      return out;
    }
    case Op::pow: {
      ValueGrad c = subgrad_node(e.args()[0], pt);
      const double p = e.param();
      out.value = eval_pow(e, c.value);
      if (p == 0.0) return out;
      if (p < 1.0 && c.value == 0.0) domain_fail(e, "unbounded derivative at zero base");
      axpy(p * std::pow(c.value, p - 1.0), c.grad, out.grad);
      return out;
    }
    case Op::sqrt: {
      ValueGrad c = subgrad_node(e.args()[0], pt);
      if (c.value < 0.0) domain_fail(e, "negative argument " + std::to_string(c.value));
      if (c.value == 0.0) domain_fail(e, "unbounded derivative at zero");
      out.value = std::sqrt(c.value);
      axpy(0.5 / out.value, c.grad, out.grad);
      return out;
    }
    case Op::exp: {
      ValueGrad c = subgrad_node(e.args()[0], pt);
      out.value = std::exp(c.value);
      axpy(out.value, c.grad, out.grad);
      return out;
    }
    case Op::log: {
      ValueGrad c = subgrad_node(e.args()[0], pt);
      if (c.value <= 0.0) domain_fail(e, "non-positive argument " + std::to_string(c.value));
      out.value = std::log(c.value);
      axpy(1.0 / c.value, c.grad, out.grad);
      return out;
    }
    case Op::abs: {
      ValueGrad c = subgrad_node(e.args()[0], pt);
      out.value = std::fabs(c.value);
      const double s = c.value > 0.0 ? 1.0 : (c.value < 0.0 ? -1.0 : 0.0);
      axpy(s, c.grad, out.grad);
      return out;
    }
    case Op::max: {
      if (e.args().empty()) domain_fail(e, "max of no children");
      std::vector<ValueGrad> kids;
      kids.reserve(e.args().size());
      for (const auto& a : e.args()) kids.push_back(subgrad_node(a, pt));
      double m = kids[0].value;
      for (const auto& k : kids) m = std::fmax(m, k.value);
      std::size_t ties = 0;
      for (const auto& k : kids) ties += (k.value == m);
      out.value = m;
      for (const auto& k : kids)
        if (k.value == m) axpy(1.0 / static_cast<double>(ties), k.grad, out.grad);
      return out;
    }
  }
  domain_fail(e, "unknown op");
}

}  // namespace detail

/// Exact recursive evaluation. Throws DomainError outside the domain.
inline double eval(const Expr& e, const Point& pt) {
  const double v = detail::eval_node(e, pt);
  if (!std::isfinite(v)) detail::domain_fail(e, "non-finite value");
  return v;
}

/// One subgradient split into its x part (alpha) and y part (beta).
struct Subgradient {
  std::vector<double> alpha;
  std::vector<double> beta;
};

inline Subgradient subgrad(const Expr& e, const Point& pt) {
  detail::ValueGrad vg = detail::subgrad_node(e, pt);
  Subgradient s;
  const auto n = static_cast<std::ptrdiff_t>(pt.x.size());
  s.alpha.assign(vg.grad.begin(), vg.grad.begin() + n);
  s.beta.assign(vg.grad.begin() + n, vg.grad.end());
  for (double v : vg.grad)
    if (!std::isfinite(v)) detail::domain_fail(e, "non-finite subgradient");
  return s;
}

/// Value and subgradient in one pass.
inline std::pair<double, Subgradient> eval_subgrad(const Expr& e, const Point& pt) {
  detail::ValueGrad vg = detail::subgrad_node(e, pt);
  Subgradient s;
  const auto n = static_cast<std::ptrdiff_t>(pt.x.size());
  s.alpha.assign(vg.grad.begin(), vg.grad.begin() + n);
  s.beta.assign(vg.grad.begin() + n, vg.grad.end());
  if (!std::isfinite(vg.value)) detail::domain_fail(e, "non-finite value");
  return {vg.value, std::move(s)};
}

/// True if some |.| argument or max tie lies within tol of a kink at pt.
inline bool kink_active(const Expr& e, const Point& pt, double tol) {
  for (const auto& a : e.args())
    if (kink_active(a, pt, tol)) return true;
  if (e.op() == Op::abs) return std::fabs(eval(e.args()[0], pt)) <= tol;
  if (e.op() == Op::max && e.args().size() > 1) {
    std::vector<double> v;
    for (const auto& a : e.args()) v.push_back(eval(a, pt));
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j)
        if (std::fabs(v[i] - v[j]) <= tol) return true;
  }
  return false;
}

/// Largest x / y index referenced plus one (0 if none).
struct VarExtent {
  std::size_t x = 0;
  std::size_t y = 0;
};

inline void var_extent(const Expr& e, VarExtent& ext) {
  if (e.op() == Op::var_x) ext.x = std::max(ext.x, e.index() + 1);
  if (e.op() == Op::var_y) ext.y = std::max(ext.y, e.index() + 1);
  for (const auto& a : e.args()) var_extent(a, ext);
}

inline VarExtent var_extent(const Expr& e) {
  VarExtent ext;
  var_extent(e, ext);
  return ext;
}

/// Structural equality (same tree shape, ops, parameters and indices).
inline bool same_tree(const Expr& a, const Expr& b) {
  if (a.op() != b.op() || a.param() != b.param() || a.index() != b.index()) return false;
  if (a.args().size() != b.args().size()) return false;
  for (std::size_t i = 0; i < a.args().size(); ++i)
    if (!same_tree(a.args()[i], b.args()[i])) return false;
  return true;
}

}  // namespace oakit
