#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "delib/expr.hpp"
#include "delib/interval.hpp"
#include "json.hpp"

namespace delib {

enum class Relation { GreaterEq, LessEq };

struct BoxVariable {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
};

struct BoxConstraint {
  Expr expr;
  Relation rel = Relation::GreaterEq;
  double rhs = 0.0;
  std::string label;
};

/// Maximize a polynomial over a box subject to polynomial inequalities.
class BoxProgram {
public:
  Expr add_variable(std::string name, double lower, double upper) {
    if (!(lower <= upper) || !std::isfinite(lower) || !std::isfinite(upper))
      throw std::invalid_argument("variable '" + name + "' needs finite bounds with lower <= upper");
    vars_.push_back({std::move(name), lower, upper});
    return Expr::variable(vars_.size() - 1);
  }

  Expr var(std::size_t i) const { return Expr::variable(i); }

  void set_objective(Expr e) { objective_ = std::move(e); }

  void add_constraint(Expr e, Relation rel, double rhs, std::string label = {}) {
    constraints_.push_back({std::move(e), rel, rhs, std::move(label)});
  }
  /// lhs >= rhs, stored as lhs - rhs >= 0.
  void add_ge(const Expr& lhs, const Expr& rhs, std::string label = {}) {
    add_constraint(lhs - rhs, Relation::GreaterEq, 0.0, std::move(label));
  }
  void add_le(const Expr& lhs, const Expr& rhs, std::string label = {}) {
    add_constraint(lhs - rhs, Relation::LessEq, 0.0, std::move(label));
  }

  const std::vector<BoxVariable>& variables() const { return vars_; }
  const Expr& objective() const { return objective_; }
  const std::vector<BoxConstraint>& constraints() const { return constraints_; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& v : vars_) out.push_back(v.name);
    return out;
  }

  /// Throws std::invalid_argument when an expression references an undeclared
  /// variable or exceeds degree 4.
  void validate() const {
    auto check = [&](const Expr& e, const std::string& what) {
      for (auto v : e.variables())
        if (v >= vars_.size()) throw std::invalid_argument(what + " references an undeclared variable");
      if (e.degree() > 4) throw std::invalid_argument(what + " has degree above 4");
    };
    check(objective_, "objective");
    for (const auto& c : constraints_) check(c.expr, "constraint '" + c.label + "'");
  }

  bool feasible(std::span<const double> x, double tol) const {
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (x[i] < vars_[i].lower || x[i] > vars_[i].upper) return false;
    for (const auto& c : constraints_) {
      const double g = c.expr.eval(x);
      if (c.rel == Relation::GreaterEq ? g < c.rhs - tol : g > c.rhs + tol) return false;
    }
    return true;
  }

  nlohmann::json to_json() const {
    const auto n = names();
    nlohmann::json vars = nlohmann::json::array();
    for (const auto& v : vars_) vars.push_back({{"name", v.name}, {"lower", v.lower}, {"upper", v.upper}});
    nlohmann::json cons = nlohmann::json::array();
    for (const auto& c : constraints_)
      cons.push_back({{"label", c.label},
                      {"expr", c.expr.to_json(n)},
                      {"relation", c.rel == Relation::GreaterEq ? ">=" : "<="},
                      {"rhs", c.rhs}});
    return {{"variables", vars}, {"objective", objective_.to_json(n)}, {"constraints", cons}};
  }

  static BoxProgram from_json(const nlohmann::json& j) {
    BoxProgram p;
    for (const auto& v : j.at("variables"))
      p.add_variable(v.at("name").get<std::string>(), v.at("lower").get<double>(), v.at("upper").get<double>());
    const auto n = p.names();
    p.set_objective(Expr::from_json(j.at("objective"), n));
    for (const auto& c : j.at("constraints")) {
      const auto rel = c.at("relation").get<std::string>();
      if (rel != ">=" && rel != "<=") throw std::invalid_argument("relation must be >= or <=");
      p.add_constraint(Expr::from_json(c.at("expr"), n), rel == ">=" ? Relation::GreaterEq : Relation::LessEq,
                       c.at("rhs").get<double>(), c.value("label", ""));
    }
    p.validate();
    return p;
  }

private:
  std::vector<BoxVariable> vars_;
  Expr objective_{0.0};
  std::vector<BoxConstraint> constraints_;
};

enum class SolveStatus { Certified, BudgetExhausted, Infeasible };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Certified: return "Certified";
    case SolveStatus::BudgetExhausted: return "BudgetExhausted";
    case SolveStatus::Infeasible: return "Infeasible";
  }
  return "?";
}

struct GlobalOptimum {
  std::vector<double> point;  // empty when no feasible point was found
  double value = -std::numeric_limits<double>::infinity();
  double bound = std::numeric_limits<double>::infinity();
  /// max(value, cutoff): the level the bound is certified against.
  double reference = -std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();  // bound - reference
  double tol = 0.0;
  std::uint64_t boxes_explored = 0;
  std::uint64_t pruned_infeasible = 0;
  std::uint64_t pruned_by_bound = 0;
  std::uint64_t unresolved = 0;
  SolveStatus status = SolveStatus::BudgetExhausted;

  bool has_incumbent() const { return !point.empty(); }

  nlohmann::json to_json(const std::vector<std::string>& names = {}) const {
    nlohmann::json pt = nlohmann::json::object();
    for (std::size_t i = 0; i < point.size(); ++i)
      pt[i < names.size() ? names[i] : "x" + std::to_string(i)] = point[i];
    auto num = [](double x) -> nlohmann::json { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
    return {{"status", to_string(status)},      {"value", num(value)},
            {"bound", num(bound)},              {"reference", num(reference)},
            {"gap", num(gap)},
            {"tol", tol},                       {"incumbent", pt},
            {"boxes_explored", boxes_explored}, {"pruned_infeasible", pruned_infeasible},
            {"pruned_by_bound", pruned_by_bound}, {"unresolved_boxes", unresolved}};
  }
};

/// One contraction step as seen by the spot-audit: every point of `before`
/// that is feasible with objective >= `cut` must lie in `after`.
struct AuditRecord {
  std::vector<Interval> before;
  std::vector<Interval> after;  // all-empty entries when pruned as infeasible
  double cut = -std::numeric_limits<double>::infinity();
  bool infeasible = false;
};

struct SolveOptions {
  double tol = 1e-4;
  std::uint64_t max_boxes = 10'000'000;
  double feasibility_tol = 1e-12;
  /// Candidate points tried as incumbents before branching starts.
  std::vector<std::vector<double>> hints;
  /// A value known to be attained elsewhere (e.g. by another case of a split
  /// program). Boxes that cannot beat it are discarded, the reported bound is
  /// never below it, and the search stops once bound <= max(value, cutoff) + tol.
  std::optional<double> cutoff;
  std::vector<AuditRecord>* audit = nullptr;
  std::size_t audit_limit = 2000;
};

namespace detail {

class BranchAndBound {
public:
  BranchAndBound(const BoxProgram& prog, const SolveOptions& opt) : prog_(prog), opt_(opt) {
    prog_.validate();
    n_ = prog.variables().size();
    objective_ = Tape(prog.objective());
    objective_repeated_ = prog.objective().has_repeated_variable();
    for (std::size_t i = 0; i < n_; ++i) gradient_.emplace_back(prog.objective().derivative(i));
    free_.assign(n_, true);
    for (const auto& c : prog.constraints()) {
      for (auto v : c.expr.variables()) free_[v] = false;
      constraint_tapes_.emplace_back(c.expr);
      ranges_.push_back(c.rel == Relation::GreaterEq ? Interval(c.rhs, std::numeric_limits<double>::infinity())
                                                     : Interval(-std::numeric_limits<double>::infinity(), c.rhs));
    }
  }

  GlobalOptimum run() {
    GlobalOptimum out;
    out.tol = opt_.tol;

    std::vector<Interval> root(n_);
    for (std::size_t i = 0; i < n_; ++i) root[i] = {prog_.variables()[i].lower, prog_.variables()[i].upper};

    for (const auto& h : opt_.hints)
      if (h.size() == n_) try_point(h);

    if (!contract(root)) {
      finish(out, -std::numeric_limits<double>::infinity());
      return out;
    }
    fix_monotone(root);
    try_point(midpoint(root));
    const double root_ub = upper_bound(root);
    std::priority_queue<Entry> queue;
    queue.push({root, root_ub, next_id_++});

    double unresolved_ub = -std::numeric_limits<double>::infinity();
    while (!queue.empty()) {
      const Entry& top = queue.top();
      if (top.ub <= prune_level()) {
        ++pruned_by_bound_;
        queue.pop();
        continue;
      }
      if (top.ub - prune_level() <= opt_.tol) break;
      if (explored_ >= opt_.max_boxes) break;
      Entry cur = top;
      queue.pop();

      const auto split = choose_split(cur.box);
      if (!split) {
        ++unresolved_;
        unresolved_ub = std::max(unresolved_ub, cur.ub);
        continue;
      }
      const double m = cur.box[*split].mid();
      std::vector<Interval> halves[2] = {cur.box, cur.box};
      halves[0][*split] = {cur.box[*split].lo(), m};
      halves[1][*split] = {m, cur.box[*split].hi()};
      for (auto& child : halves) {
        ++explored_;
        if (!contract(child)) continue;
        fix_monotone(child);
        const double ub = upper_bound(child);
        if (ub <= prune_level()) {
          ++pruned_by_bound_;
          continue;
        }
        try_point(midpoint(child));
        queue.push({std::move(child), ub, next_id_++});
      }
    }

    double open_ub = -std::numeric_limits<double>::infinity();
    if (!queue.empty()) open_ub = queue.top().ub;
    finish(out, std::max(open_ub, unresolved_ub));
    return out;
  }

private:
  struct Entry {
    std::vector<Interval> box;
    double ub;
    std::uint64_t id;
    bool operator<(const Entry& o) const {
      if (ub != o.ub) return ub < o.ub;
      return id > o.id;
    }
  };

  bool has_incumbent() const { return !inc_point_.empty(); }

  double prune_level() const {
    double level = has_incumbent() ? inc_value_ : -std::numeric_limits<double>::infinity();
    if (opt_.cutoff) level = std::max(level, *opt_.cutoff);
    return level;
  }

  void finish(GlobalOptimum& out, double open_ub) {
    out.boxes_explored = explored_;
    out.pruned_infeasible = pruned_infeasible_;
    out.pruned_by_bound = pruned_by_bound_;
    out.unresolved = unresolved_;
    double bound = open_ub;
    const double reference = prune_level();
    bound = std::max(bound, reference);
    out.bound = bound;
    out.reference = reference;
    if (has_incumbent()) {
      out.point = inc_point_;
      out.value = inc_value_;
    }
    if (reference == -std::numeric_limits<double>::infinity()) {
      out.status = bound == reference ? SolveStatus::Infeasible : SolveStatus::BudgetExhausted;
      return;
    }
    out.gap = bound - reference;
    out.status = out.gap <= opt_.tol ? SolveStatus::Certified : SolveStatus::BudgetExhausted;
  }

  std::vector<double> midpoint(const std::vector<Interval>& box) const {
    std::vector<double> x(n_);
    for (std::size_t i = 0; i < n_; ++i) x[i] = box[i].mid();
    return x;
  }

  std::optional<std::size_t> choose_split(const std::vector<Interval>& box) const {
    std::optional<std::size_t> best;
    double best_rel = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const auto& v = prog_.variables()[i];
      const double full = v.upper - v.lower;
      if (full <= 0.0) continue;
      const double rel = box[i].width() / full;
      if (rel > best_rel) {
        best_rel = rel;
        best = i;
      }
    }
    if (!best || best_rel < 1e-13) return std::nullopt;
    const double m = box[*best].mid();
    if (!(m > box[*best].lo() && m < box[*best].hi())) return std::nullopt;
    return best;
  }

  bool contract(std::vector<Interval>& box) {
    const bool auditing = opt_.audit && opt_.audit->size() < opt_.audit_limit;
    std::vector<Interval> before;
    if (auditing) before = box;
    const double cut = prune_level();
    const bool ok = contract_impl(box, cut);
    if (!ok) ++pruned_infeasible_;
    if (auditing) opt_.audit->push_back({std::move(before), ok ? box : std::vector<Interval>{}, cut, !ok});
    return ok;
  }

  bool contract_impl(std::vector<Interval>& box, double cut) {
    for (int round = 0; round < 8; ++round) {
      double before = 0.0;
      for (std::size_t i = 0; i < n_; ++i) before += relative_width(box, i);
      for (std::size_t c = 0; c < constraint_tapes_.size(); ++c) {
        if (!constraint_tapes_[c].revise(box, ranges_[c], scratch_)) return false;
        if (!centered_consistent(c, box)) return false;
      }
      if (std::isfinite(cut)) {
        if (!objective_.revise(box, Interval(cut, std::numeric_limits<double>::infinity()), scratch_))
          return false;
      }
      double after = 0.0;
      for (std::size_t i = 0; i < n_; ++i) after += relative_width(box, i);
      if (after > 0.9 * before) break;
    }
    return true;
  }

  // Mean-value enclosure of a constraint; detects infeasibility that the
  // natural extension misses because of repeated variables.
  bool centered_consistent(std::size_t c, const std::vector<Interval>& box) {
    if (!constraint_grad_built_) build_constraint_gradients();
    if (!repeated_[c]) return true;
    centered_mid(box);
    Interval enc = constraint_tapes_[c].eval(std::span<const Interval>(mid_), scratch_);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto& g = constraint_gradients_[c][i];
      if (!g) continue;
      enc = enc + g->eval(std::span<const Interval>(box), scratch_) * (box[i] - mid_[i]);
    }
    return !intersect(enc, ranges_[c]).empty();
  }

  void centered_mid(const std::vector<Interval>& box) {
    mid_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) mid_[i] = Interval(box[i].mid());
  }

  void build_constraint_gradients() {
    constraint_gradients_.resize(constraint_tapes_.size());
    repeated_.assign(constraint_tapes_.size(), false);
    for (std::size_t c = 0; c < prog_.constraints().size(); ++c) {
      const auto& e = prog_.constraints()[c].expr;
      repeated_[c] = e.has_repeated_variable();
      constraint_gradients_[c].resize(n_);
      if (!repeated_[c]) continue;
      const auto used = e.variables();
      for (std::size_t i = 0; i < n_; ++i)
        if (used.count(i)) constraint_gradients_[c][i] = Tape(e.derivative(i));
    }
    constraint_grad_built_ = true;
  }

  // A variable absent from every constraint, with an objective derivative of
  // constant sign over the box, can be pinned to the better endpoint.
  void fix_monotone(std::vector<Interval>& box) {
    for (std::size_t i = 0; i < n_; ++i) {
      if (!free_[i] || box[i].width() == 0.0) continue;
      const Interval g = gradient_[i].eval(std::span<const Interval>(box), scratch_);
      if (g.lo() >= 0.0) box[i] = Interval(box[i].hi());
      else if (g.hi() <= 0.0) box[i] = Interval(box[i].lo());
    }
  }

  double relative_width(const std::vector<Interval>& box, std::size_t i) const {
    const auto& v = prog_.variables()[i];
    const double full = v.upper - v.lower;
    return full > 0.0 ? box[i].width() / full : 0.0;
  }

  double upper_bound(const std::vector<Interval>& box) {
    const Interval natural = objective_.eval(std::span<const Interval>(box), scratch_);
    if (!objective_repeated_) return natural.hi();
    centered_mid(box);
    Interval centered = objective_.eval(std::span<const Interval>(mid_), scratch_);
    for (std::size_t i = 0; i < n_; ++i)
      centered = centered + gradient_[i].eval(std::span<const Interval>(box), scratch_) * (box[i] - mid_[i]);
    return std::min(natural.hi(), centered.hi());
  }

  void try_point(std::vector<double> x) {
    if (!prog_.feasible(x, opt_.feasibility_tol)) return;
    double f = objective_.eval(std::span<const double>(x));
    if (has_incumbent() && f <= inc_value_) return;
    refine(x, f);
    inc_point_ = std::move(x);
    inc_value_ = f;
  }

  // Projected coordinate ascent: move each coordinate in its ascent direction
  // as far as feasibility allows.
  void refine(std::vector<double>& x, double& f) {
    std::vector<double> g(n_);
    for (int sweep = 0; sweep < 50; ++sweep) {
      const double start = f;
      for (std::size_t i = 0; i < n_; ++i) {
        const double d = gradient_[i].eval(std::span<const double>(x));
        if (std::abs(d) < 1e-14) continue;
        const auto& v = prog_.variables()[i];
        const double room = d > 0 ? v.upper - x[i] : x[i] - v.lower;
        if (room <= 0.0) continue;
        const double dir = d > 0 ? 1.0 : -1.0;
        auto at = [&](double t) {
          auto y = x;
          y[i] = std::clamp(x[i] + dir * t, v.lower, v.upper);
          return y;
        };
        double lo = 0.0;
        double hi = room;
        auto y = at(hi);
        if (!prog_.feasible(y, opt_.feasibility_tol)) {
          for (int it = 0; it < 60; ++it) {
            const double t = 0.5 * (lo + hi);
            if (prog_.feasible(at(t), opt_.feasibility_tol)) lo = t;
            else hi = t;
          }
          y = at(lo);
        }
        const double fy = objective_.eval(std::span<const double>(y));
        if (fy > f) {
          x = std::move(y);
          f = fy;
        }
      }
      if (f - start <= 1e-15) break;
    }
  }

  const BoxProgram& prog_;
  const SolveOptions& opt_;
  std::size_t n_ = 0;
  Tape objective_;
  std::vector<Tape> gradient_;
  std::vector<Tape> constraint_tapes_;
  std::vector<Interval> ranges_;
  std::vector<std::vector<std::optional<Tape>>> constraint_gradients_;
  std::vector<bool> repeated_;
  std::vector<bool> free_;
  bool constraint_grad_built_ = false;
  bool objective_repeated_ = true;
  std::vector<Interval> mid_;
  std::vector<Interval> scratch_;

  std::vector<double> inc_point_;
  double inc_value_ = -std::numeric_limits<double>::infinity();
  std::uint64_t explored_ = 0;
  std::uint64_t pruned_infeasible_ = 0;
  std::uint64_t pruned_by_bound_ = 0;
  std::uint64_t unresolved_ = 0;
  std::uint64_t next_id_ = 0;
};

}  // namespace detail

/// Deterministic interval branch-and-bound. The returned bound is a rigorous
/// upper bound on the maximum over the feasible set.
inline GlobalOptimum solve_global(const BoxProgram& prog, const SolveOptions& opt) {
  return detail::BranchAndBound(prog, opt).run();
}

inline GlobalOptimum solve_global(const BoxProgram& prog, double tol = 1e-4, std::uint64_t max_boxes = 10'000'000) {
  SolveOptions opt;
  opt.tol = tol;
  opt.max_boxes = max_boxes;
  return solve_global(prog, opt);
}

/// Sound enclosure of `e` over `box` (natural interval extension).
inline Interval interval_eval(const Expr& e, std::span<const Interval> box) { return e.eval(box); }

}  // namespace delib
