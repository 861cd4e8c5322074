#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "delib/interval.hpp"
#include "json.hpp"

namespace delib {

enum class Op : std::uint8_t { Const, Var, Add, Sub, Mul, Neg };

struct ExprNode {
  Op op;
  double value = 0.0;
  std::size_t var = 0;
  std::shared_ptr<const ExprNode> a;
  std::shared_ptr<const ExprNode> b;
};

/// Immutable polynomial expression over indexed variables.
class Expr {
public:
  Expr() : Expr(0.0) {}
  Expr(double constant)  // NOLINT(google-explicit-constructor)
      : node_(std::make_shared<const ExprNode>(ExprNode{Op::Const, constant, 0, nullptr, nullptr})) {}

  static Expr variable(std::size_t index) {
    return Expr(std::make_shared<const ExprNode>(ExprNode{Op::Var, 0.0, index, nullptr, nullptr}));
  }

  const ExprNode& node() const { return *node_; }
  const std::shared_ptr<const ExprNode>& ptr() const { return node_; }

  bool is_const() const { return node_->op == Op::Const; }
  bool is_const(double v) const { return is_const() && node_->value == v; }

  friend Expr operator+(const Expr& x, const Expr& y) {
    if (x.is_const() && y.is_const()) return x.node_->value + y.node_->value;
    if (x.is_const(0.0)) return y;
    if (y.is_const(0.0)) return x;
    return binary(Op::Add, x, y);
  }
  friend Expr operator-(const Expr& x, const Expr& y) {
    if (x.is_const() && y.is_const()) return x.node_->value - y.node_->value;
    if (y.is_const(0.0)) return x;
    if (x.is_const(0.0)) return -y;
    return binary(Op::Sub, x, y);
  }
  friend Expr operator*(const Expr& x, const Expr& y) {
    if (x.is_const() && y.is_const()) return x.node_->value * y.node_->value;
    if (x.is_const(0.0) || y.is_const(0.0)) return 0.0;
    if (x.is_const(1.0)) return y;
    if (y.is_const(1.0)) return x;
    return binary(Op::Mul, x, y);
  }
  friend Expr operator-(const Expr& x) {
    if (x.is_const()) return -x.node_->value;
    return Expr(std::make_shared<const ExprNode>(ExprNode{Op::Neg, 0.0, 0, x.node_, nullptr}));
  }
  Expr& operator+=(const Expr& o) { return *this = *this + o; }
  Expr& operator-=(const Expr& o) { return *this = *this - o; }
  Expr& operator*=(const Expr& o) { return *this = *this * o; }

  double eval(std::span<const double> x) const { return eval_node(*node_, x); }
  Interval eval(std::span<const Interval> x) const { return eval_node(*node_, x); }

  Expr derivative(std::size_t var) const { return diff(node_, var); }

  int degree() const { return degree_of(*node_); }

  std::set<std::size_t> variables() const {
    std::set<std::size_t> out;
    collect(*node_, out);
    return out;
  }

  /// True when some variable occurs more than once in the expression tree.
  /// Without repetition the natural interval extension is exact up to rounding.
  bool has_repeated_variable() const {
    std::unordered_map<std::size_t, int> count;
    return repeats(*node_, count);
  }

  nlohmann::json to_json(const std::vector<std::string>& names) const { return json_of(*node_, names); }

  static Expr from_json(const nlohmann::json& j, const std::vector<std::string>& names) {
    if (j.is_number()) return j.get<double>();
    if (j.contains("const")) return j.at("const").get<double>();
    if (j.contains("var")) {
      const auto name = j.at("var").get<std::string>();
      for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return variable(i);
      throw std::invalid_argument("unknown variable in expression: " + name);
    }
    const auto op = j.at("op").get<std::string>();
    const auto& args = j.at("args");
    if (op == "neg") return -from_json(args.at(0), names);
    Expr l = from_json(args.at(0), names);
    Expr r = from_json(args.at(1), names);
    if (op == "add") return l + r;
    if (op == "sub") return l - r;
    if (op == "mul") return l * r;
    throw std::invalid_argument("unknown expression op: " + op);
  }

private:
  explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}

  static Expr binary(Op op, const Expr& x, const Expr& y) {
    return Expr(std::make_shared<const ExprNode>(ExprNode{op, 0.0, 0, x.node_, y.node_}));
  }

  template <class T>
  static T eval_node(const ExprNode& n, std::span<const T> x) {
    switch (n.op) {
      case Op::Const: return T(n.value);
      case Op::Var: return x[n.var];
      case Op::Add: return eval_node(*n.a, x) + eval_node(*n.b, x);
      case Op::Sub: return eval_node(*n.a, x) - eval_node(*n.b, x);
      case Op::Mul: return eval_node(*n.a, x) * eval_node(*n.b, x);
      case Op::Neg: return -eval_node(*n.a, x);
    }
    return T(0.0);
  }

  static Expr diff(const std::shared_ptr<const ExprNode>& n, std::size_t v) {
    switch (n->op) {
      case Op::Const: return 0.0;
      case Op::Var: return n->var == v ? 1.0 : 0.0;
      case Op::Add: return diff(n->a, v) + diff(n->b, v);
      case Op::Sub: return diff(n->a, v) - diff(n->b, v);
      case Op::Mul: return diff(n->a, v) * Expr(n->b) + Expr(n->a) * diff(n->b, v);
      case Op::Neg: return -diff(n->a, v);
    }
    return 0.0;
  }

  static int degree_of(const ExprNode& n) {
    switch (n.op) {
      case Op::Const: return 0;
      case Op::Var: return 1;
      case Op::Add:
      case Op::Sub: return std::max(degree_of(*n.a), degree_of(*n.b));
      case Op::Mul: return degree_of(*n.a) + degree_of(*n.b);
      case Op::Neg: return degree_of(*n.a);
    }
    return 0;
  }

  static void collect(const ExprNode& n, std::set<std::size_t>& out) {
    if (n.op == Op::Var) out.insert(n.var);
    if (n.a) collect(*n.a, out);
    if (n.b) collect(*n.b, out);
  }

  static bool repeats(const ExprNode& n, std::unordered_map<std::size_t, int>& count) {
    if (n.op == Op::Var) return ++count[n.var] > 1;
    if (n.a && repeats(*n.a, count)) return true;
    return n.b && repeats(*n.b, count);
  }

  static nlohmann::json json_of(const ExprNode& n, const std::vector<std::string>& names) {
    switch (n.op) {
      case Op::Const: return {{"const", n.value}};
      case Op::Var: return {{"var", n.var < names.size() ? names[n.var] : "x" + std::to_string(n.var)}};
      case Op::Neg: return {{"op", "neg"}, {"args", {json_of(*n.a, names)}}};
      default: break;
    }
    const char* name = n.op == Op::Add ? "add" : n.op == Op::Sub ? "sub" : "mul";
    return {{"op", name}, {"args", {json_of(*n.a, names), json_of(*n.b, names)}}};
  }

  std::shared_ptr<const ExprNode> node_;
};

/// Flattened expression DAG; children always precede parents and the root is last.
class Tape {
public:
  struct Node {
    Op op;
    double value;
    std::uint32_t var;
    std::uint32_t a;
    std::uint32_t b;
  };

  Tape() = default;
  explicit Tape(const Expr& e) {
    std::unordered_map<const ExprNode*, std::uint32_t> seen;
    flatten(e.ptr(), seen);
  }

  std::size_t size() const { return nodes_.size(); }

  double eval(std::span<const double> x) const {
    thread_local std::vector<double> v;
    v.resize(nodes_.size());
    forward(x, v);
    return v.back();
  }

  Interval eval(std::span<const Interval> box, std::vector<Interval>& v) const {
    v.resize(nodes_.size());
    forward(box, v);
    return v.back();
  }

  /// Forward-backward constraint propagation (HC4-revise): narrows `box` to
  /// the points where the expression can take a value in `range`. Returns
  /// false when that set is provably empty.
  bool revise(std::vector<Interval>& box, const Interval& range, std::vector<Interval>& v) const {
    v.resize(nodes_.size());
    forward(std::span<const Interval>(box), v);
    v.back() = intersect(v.back(), range);
    if (v.back().empty()) return false;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      const Node& n = nodes_[i];
      const Interval z = v[i];
      if (z.empty()) return false;
      switch (n.op) {
        case Op::Const:
          if (!z.contains(n.value)) return false;
          break;
        case Op::Var:
          box[n.var] = intersect(box[n.var], z);
          if (box[n.var].empty()) return false;
          break;
        case Op::Add:
          v[n.a] = intersect(v[n.a], z - v[n.b]);
          v[n.b] = intersect(v[n.b], z - v[n.a]);
          break;
        case Op::Sub:
          v[n.a] = intersect(v[n.a], z + v[n.b]);
          v[n.b] = intersect(v[n.b], v[n.a] - z);
          break;
        case Op::Mul:
          if (!v[n.b].contains_zero()) v[n.a] = intersect(v[n.a], z / v[n.b]);
          if (!v[n.a].contains_zero()) v[n.b] = intersect(v[n.b], z / v[n.a]);
          break;
        case Op::Neg:
          v[n.a] = intersect(v[n.a], -z);
          break;
      }
      if (n.op != Op::Const && n.op != Op::Var) {
        if (v[n.a].empty()) return false;
        if ((n.op != Op::Neg) && v[n.b].empty()) return false;
      }
    }
    return true;
  }

private:
  std::uint32_t flatten(const std::shared_ptr<const ExprNode>& n,
                        std::unordered_map<const ExprNode*, std::uint32_t>& seen) {
    if (auto it = seen.find(n.get()); it != seen.end()) return it->second;
    Node out{n->op, n->value, static_cast<std::uint32_t>(n->var), 0, 0};
    if (n->a) out.a = flatten(n->a, seen);
    if (n->b) out.b = flatten(n->b, seen);
    nodes_.push_back(out);
    const auto idx = static_cast<std::uint32_t>(nodes_.size() - 1);
    seen.emplace(n.get(), idx);
    return idx;
  }

  template <class T>
  void forward(std::span<const T> x, std::vector<T>& v) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      switch (n.op) {
        case Op::Const: v[i] = T(n.value); break;
        case Op::Var: v[i] = x[n.var]; break;
        case Op::Add: v[i] = v[n.a] + v[n.b]; break;
        case Op::Sub: v[i] = v[n.a] - v[n.b]; break;
        case Op::Mul:
          if constexpr (std::is_same_v<T, Interval>) {
            v[i] = n.a == n.b ? sqr(v[n.a]) : v[n.a] * v[n.b];
          } else {
            v[i] = v[n.a] * v[n.b];
          }
          break;
        case Op::Neg: v[i] = -v[n.a]; break;
      }
    }
  }

  std::vector<Node> nodes_;
};

}  // namespace delib
