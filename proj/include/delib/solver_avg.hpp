#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "delib/deliberation.hpp"
#include "delib/instances.hpp"
#include "delib/optimizer.hpp"
#include "delib/parallel.hpp"
#include "json.hpp"

namespace delib {

/// min(1/sqrt(k), 8.27/k * (1 + 2/k)).
inline double theta_upper_bound_closed_form(int k) {
  if (k < 1) throw InvalidConfig("k must be at least 1");
  return std::min(1.0 / std::sqrt(static_cast<double>(k)), 8.27 / k * (1.0 + 2.0 / k));
}

/// Mean of lb1_distribution(k): 1/(k+1) for odd k, 2/(3k) for even k.
inline double theta_lower_bound_closed_form(int k) {
  if (k < 2) throw InvalidConfig("k must be at least 2");
  return k % 2 == 1 ? 1.0 / (k + 1) : 2.0 / (3.0 * k);
}

struct CaseCertificate {
  int index = 0;
  GlobalOptimum optimum;
  std::vector<std::string> names;
  nlohmann::json derived = nlohmann::json::object();

  nlohmann::json to_json() const {
    auto j = optimum.to_json(names);
    j["case"] = index;
    if (!derived.empty()) j["derived"] = derived;
    return j;
  }
};

struct ThetaResult {
  int k = 0;
  /// Certified upper bound on theta_k (max over cases).
  double value = std::numeric_limits<double>::infinity();
  bool certified = false;
  double incumbent_value = -std::numeric_limits<double>::infinity();
  BiasDistribution incumbent;
  /// exact p_k(W,X) of the incumbent realized as a line instance.
  double incumbent_pk = 0.0;
  std::vector<CaseCertificate> cases;

  nlohmann::json to_json() const {
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : cases) cs.push_back(c.to_json());
    return {{"k", k},
            {"value", value},
            {"status", certified ? "Certified" : "BudgetExhausted"},
            {"incumbent_value", incumbent_value},
            {"incumbent_distribution", incumbent.to_json()},
            {"incumbent_pk", incumbent_pk},
            {"cases", cs}};
  }
};

namespace detail {

inline double verify_incumbent(const BiasDistribution& d, int k) {
  return exact_pk(line_instance_from_bias_distribution(d), ModelConfig::averaging(k), 0, 1).value;
}

}  // namespace detail

/// k = 2 program over D supported on {-1, 0, 1}: p = P[-1], q = P[0].
inline BoxProgram theta2_program() {
  BoxProgram prog;
  const Expr p = prog.add_variable("p", 0.0, 1.0);
  const Expr q = prog.add_variable("q", 0.0, 1.0);
  prog.set_objective(1.0 - 2.0 * p - q);
  prog.add_ge((p + q) * (p + q) + 2.0 * p * (1.0 - p - q), 0.5);
  prog.add_le(p + q, 1.0);
  return prog;
}

inline ThetaResult solve_theta2(double tol = 1e-4, std::uint64_t budget = 10'000'000) {
  const BoxProgram prog = theta2_program();
  SolveOptions opt;
  opt.tol = tol;
  opt.max_boxes = budget;
  CaseCertificate cert{0, solve_global(prog, opt), prog.names(), nlohmann::json::object()};
  ThetaResult r;
  r.k = 2;
  r.value = cert.optimum.bound;
  r.certified = cert.optimum.status == SolveStatus::Certified;
  if (cert.optimum.has_incumbent()) {
    const double p = cert.optimum.point[0];
    const double q = cert.optimum.point[1];
    r.incumbent_value = cert.optimum.value;
    r.incumbent = BiasDistribution({{-1.0, p}, {0.0, q}, {1.0, std::max(0.0, 1.0 - p - q)}});
    r.incumbent_pk = detail::verify_incumbent(r.incumbent, 2);
  }
  r.cases.push_back(std::move(cert));
  return r;
}

/// Objective of a k = 2 Copeland program in its unexpanded form, with
/// t = 1 - p - q - r - s.
inline double copeland_k2_objective(int case_index, double beta, double theta2, double B, double p, double q, double r,
                                    double s) {
  const double c = 2.0 / beta;
  const double t = 1.0 - p - q - r - s;
  const double head = (1.0 + c) * theta2 + p * (c * (B + 1.0) - 1.0) - t * (c * (B + 1.0) + 2.0 * B + 1.0);
  if (case_index == 1) return head + q * (c * (1.0 - B) - 1.0) - r - s * (c * (1.0 - B) + 1.0);
  return head + q * (c * (B - 1.0) - 1.0) - r * B - s * (c * (B - 1.0) + 2.0 * B - 1.0);
}

/// One of the two k = 2 Copeland programs. `case_index` 1 covers B in [0,1],
/// 2 covers B in [1,100]. Variables are B, p, q, r, t; s = 1 - p - q - r - t
/// is eliminated (kept non-negative by a constraint) and the objective is
/// expanded, which leaves each of p, q, r, t occurring once.
/// copeland_k2_objective is the unexpanded form. `theta2` enters through the
/// constant (1 + 2/beta) * theta2.
inline BoxProgram copeland_k2_program(int case_index, double beta, double theta2) {
  if (case_index != 1 && case_index != 2) throw InvalidConfig("case index must be 1 or 2");
  if (!(beta > 0.0)) throw InvalidConfig("beta must be positive");
  BoxProgram prog;
  const Expr B = case_index == 1 ? prog.add_variable("B", 0.0, 1.0) : prog.add_variable("B", 1.0, 100.0);
  const Expr p = prog.add_variable("p", 0.0, 1.0);
  const Expr q = prog.add_variable("q", 0.0, 1.0);
  const Expr r = prog.add_variable("r", 0.0, 1.0);
  const Expr t = prog.add_variable("t", 0.0, 1.0);
  const double c = 2.0 / beta;
  const double A = std::nextafter((1.0 + c) * theta2, std::numeric_limits<double>::infinity());
  if (case_index == 1)
    prog.set_objective(A - c - 1.0 + c * B + 2.0 * c * p + 2.0 * c * (1.0 - B) * q + c * (1.0 - B) * r -
                       2.0 * (c + 1.0) * B * t);
  else
    prog.set_objective(A + c * (1.0 - B) - 2.0 * B + 1.0 + (2.0 * (c + 1.0) * B - 2.0) * p +
                       2.0 * (c + 1.0) * (B - 1.0) * q + (c + 1.0) * (B - 1.0) * r - (2.0 * c + 2.0) * t);
  // (p+q)^2 + 2p(r+s) + 2qr with r + s = 1 - p - q - t.
  prog.add_le(2.0 * p - p * p + q * q - 2.0 * p * t + 2.0 * q * r, 0.5);
  prog.add_le(p + q + r + t, 1.0);
  return prog;
}

struct CopelandK2Result {
  double beta = 0.0;
  double theta2 = 0.0;
  std::array<CaseCertificate, 2> cases;
  /// Both case maxima are certified strictly negative.
  bool both_negative = false;

  nlohmann::json to_json() const {
    nlohmann::json j = {{"beta", beta}, {"theta2", theta2}, {"both_negative", both_negative},
                        {"case1", cases[0].to_json()}, {"case2", cases[1].to_json()}};
    if (both_negative) j["distortion_upper"] = 1.0 + beta;
    return j;
  }
};

/// Certifies the sign of both k = 2 Copeland programs at distortion 1 + beta.
/// theta2 defaults to a certified upper bound from solve_theta2.
inline CopelandK2Result solve_copeland_k2(double beta, double tol = 1e-5, std::uint64_t budget = 10'000'000,
                                          std::optional<double> theta2 = std::nullopt, unsigned threads = 2) {
  CopelandK2Result r;
  r.beta = beta;
  r.theta2 = theta2 ? *theta2 : solve_theta2(1e-10).value;
  parallel_for(2, threads, [&](std::size_t i) {
    const BoxProgram prog = copeland_k2_program(static_cast<int>(i) + 1, beta, r.theta2);
    SolveOptions opt;
    opt.tol = tol;
    opt.max_boxes = budget;
    CaseCertificate cert{static_cast<int>(i) + 1, solve_global(prog, opt), prog.names(), nlohmann::json::object()};
    if (cert.optimum.has_incumbent()) {
      const auto& x = cert.optimum.point;
      cert.derived["s"] = 1.0 - x[1] - x[2] - x[3] - x[4];
    }
    r.cases[i] = std::move(cert);
  });
  r.both_negative = r.cases[0].optimum.bound < 0.0 && r.cases[1].optimum.bound < 0.0;
  return r;
}

/// Variables of the k = 3 case programs: theta, c1..c3, p1..p3. D_i takes
/// a_i = theta + c_i p_i with probability 1 - p_i and b_i = a_i - c_i with
/// probability p_i, so every D_i has mean theta.
inline BoxProgram theta3_case_program(int case_index) {
  if (case_index < 1 || case_index > 8) throw InvalidConfig("case index must be in 1..8");
  BoxProgram prog;
  const Expr th = prog.add_variable("theta", -1.0, 1.0);
  std::array<Expr, 3> c;
  std::array<Expr, 3> p;
  for (int i = 0; i < 3; ++i) c[i] = prog.add_variable("c" + std::to_string(i + 1), 0.0, 2.0);
  for (int i = 0; i < 3; ++i) p[i] = prog.add_variable("p" + std::to_string(i + 1), 0.0, 1.0);
  prog.set_objective(th);
  for (int i = 0; i < 3; ++i) {
    prog.add_le(th + c[i] * p[i], 1.0);
    prog.add_ge(th + c[i] * p[i], -1.0);
    prog.add_ge(th - c[i] * (1.0 - p[i]), -1.0);
  }
  prog.add_ge(c[2], c[1]);
  prog.add_ge(c[1], c[0]);

  // sum_i a_i - sum_{i in R} c_i, written so every variable occurs once.
  auto excess = [&](std::initializer_list<int> R) {
    Expr e = 3.0 * th;
    for (int i = 0; i < 3; ++i) {
      bool in = false;
      for (int j : R) in = in || j == i + 1;
      e = in ? e - c[i] * (1.0 - p[i]) : e + c[i] * p[i];
    }
    return e;
  };
  const Expr &p1 = p[0], &p2 = p[1], &p3 = p[2];
  switch (case_index) {
    case 1:
      prog.add_le(excess({1, 2, 3}), 0.0);
      prog.add_ge(excess({2, 3}), 0.0);
      prog.add_ge(p1 * p2 * p3, 0.5);
      break;
    case 2:
      prog.add_le(excess({2, 3}), 0.0);
      prog.add_ge(excess({1, 3}), 0.0);
      prog.add_ge(p3 * p2, 0.5);
      break;
    case 3:
      prog.add_le(excess({1, 3}), 0.0);
      prog.add_ge(excess({3}), 0.0);
      prog.add_ge(excess({1, 2}), 0.0);
      prog.add_ge(p3 * p2 + p3 * p1 * (1.0 - p2), 0.5);
      break;
    case 4:
      prog.add_le(excess({3}), 0.0);
      prog.add_ge(excess({1, 2}), 0.0);
      prog.add_ge(p3, 0.5);
      break;
    case 5:
      prog.add_le(excess({1, 2}), 0.0);
      prog.add_ge(excess({3}), 0.0);
      prog.add_ge(p3 * p2 + p3 * (1.0 - p2) * p1 + (1.0 - p3) * p2 * p1, 0.5);
      break;
    case 6:
      prog.add_le(excess({1, 2}), 0.0);
      prog.add_le(excess({3}), 0.0);
      prog.add_ge(excess({2}), 0.0);
      prog.add_ge(1.0 - (1.0 - p3) * (1.0 - p1 * p2), 0.5);
      break;
    case 7:
      prog.add_le(excess({2}), 0.0);
      prog.add_ge(excess({1}), 0.0);
      prog.add_ge(1.0 - (1.0 - p3) * (1.0 - p2), 0.5);
      break;
    case 8:
      prog.add_le(excess({1}), 0.0);
      prog.add_ge(1.0 - (1.0 - p3) * (1.0 - p2) * (1.0 - p1), 0.5);
      break;
  }
  return prog;
}

/// Points with theta = 1/4 where each D_i is either constant or the lb1
/// two-point law {1, -1/2}.
inline std::vector<std::vector<double>> theta3_hints() {
  const std::array<std::array<double, 2>, 4> shapes{{{0.0, 0.0}, {0.0, 0.5}, {0.0, 1.0}, {1.5, 0.5}}};
  std::vector<std::vector<double>> out;
  for (const auto& s1 : shapes)
    for (const auto& s2 : shapes)
      for (const auto& s3 : shapes) out.push_back({0.25, s1[0], s2[0], s3[0], s1[1], s2[1], s3[1]});
  return out;
}

/// Certified bound on theta_3 from the eight case programs. The lb1 law
/// (mean 1/4) is first verified by exact enumeration; its mean is then used
/// as a cutoff, so each case reports a bound on max(case optimum, 1/4).
inline ThetaResult solve_theta3(double tol = 1e-4, std::uint64_t budget = 10'000'000, unsigned threads = default_threads()) {
  ThetaResult r;
  r.k = 3;
  r.incumbent = lb1_distribution(3);
  r.incumbent_pk = detail::verify_incumbent(r.incumbent, 3);
  const bool lb_ok = r.incumbent_pk >= 0.5 - 1e-12;
  r.incumbent_value = lb_ok ? r.incumbent.mean() : -std::numeric_limits<double>::infinity();

  r.cases.resize(8);
  parallel_for(8, threads, [&](std::size_t i) {
    const BoxProgram prog = theta3_case_program(static_cast<int>(i) + 1);
    SolveOptions opt;
    opt.tol = tol;
    opt.max_boxes = budget;
    opt.hints = theta3_hints();
    if (lb_ok) opt.cutoff = r.incumbent_value;
    CaseCertificate cert{static_cast<int>(i) + 1, solve_global(prog, opt), prog.names(), nlohmann::json::object()};
    if (cert.optimum.has_incumbent()) {
      const auto& x = cert.optimum.point;
      for (int j = 0; j < 3; ++j) {
        cert.derived["a" + std::to_string(j + 1)] = x[0] + x[1 + j] * x[4 + j];
        cert.derived["b" + std::to_string(j + 1)] = x[0] - x[1 + j] * (1.0 - x[4 + j]);
      }
    }
    r.cases[i] = std::move(cert);
  });
  r.value = -std::numeric_limits<double>::infinity();
  r.certified = true;
  for (const auto& c : r.cases) {
    r.value = std::max(r.value, c.optimum.bound);
    r.certified = r.certified && c.optimum.status == SolveStatus::Certified;
  }
  return r;
}

struct HeuristicTheta {
  int k = 0;
  double value = 0.0;
  double a = 0.0;
  double b = 0.0;
  double prob_a = 0.0;
  double verified_pk = 0.0;

  nlohmann::json to_json() const {
    return {{"k", k}, {"value", value}, {"certified", false}, {"support", {b, a}}, {"prob_high", prob_a},
            {"verified_pk", verified_pk}};
  }
};

/// NOT certified. Best two-point law {b, a} on a grid of step `step` whose
/// k-fold sum is <= 0 with probability at least 1/2. A lower estimate of
/// theta_k for k where no certified program is available.
inline HeuristicTheta theta_heuristic(int k, double step = 0.01) {
  if (k < 1) throw InvalidConfig("k must be at least 1");
  const int n = static_cast<int>(std::llround(1.0 / step));
  auto binom_cdf = [k](int j, double p) {
    double s = 0.0;
    for (int i = 0; i <= j; ++i)
      s += std::exp(std::lgamma(k + 1.0) - std::lgamma(i + 1.0) - std::lgamma(k - i + 1.0) + i * std::log(p) +
                    (k - i) * std::log1p(-p));
    return s;
  };
  HeuristicTheta best;
  best.k = k;
  best.value = -1.0;
  for (int ia = 1; ia <= n; ++ia) {
    const double a = ia * step;
    for (int ib = 0; ib <= n; ++ib) {
      const double b = -ib * step;
      int J = -1;
      for (int j = 0; j <= k; ++j)
        if (j * a + (k - j) * b <= kTieTolerance * k) J = j;
      if (J < 0) continue;
      double p = 1.0;
      if (J < k) {
        double lo = 0.0;
        double hi = 1.0;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (binom_cdf(J, mid) >= 0.5) lo = mid;
          else hi = mid;
        }
        p = lo;
      }
      const double mean = p * a + (1.0 - p) * b;
      if (mean > best.value) {
        best.value = mean;
        best.a = a;
        best.b = b;
        best.prob_a = p;
      }
    }
  }
  best.verified_pk = detail::verify_incumbent(BiasDistribution({{best.a, best.prob_a}, {best.b, 1.0 - best.prob_a}}), k);
  return best;
}

struct PipageCheck {
  double best_value = -1.0;
  std::vector<Atom> best_support;
  double best_on_pipage_support = -1.0;
  bool support_in_pipage_set = false;

  nlohmann::json to_json() const {
    nlohmann::json s = nlohmann::json::array();
    for (const auto& a : best_support) s.push_back({{"value", a.value}, {"prob", a.prob}});
    return {{"best_value", best_value}, {"best_support", s}, {"best_on_pipage_support", best_on_pipage_support},
            {"support_in_pipage_set", support_in_pipage_set}};
  }
};

/// Exhaustive k = 2 search over laws with at most three atoms on the grid
/// {-1, -1+step, ..., 1} and probabilities on a simplex grid of `prob_step`.
/// Compares the best law with the best one supported on {-1, 0, 1}.
inline PipageCheck pipage_grid_check(double step = 0.1, double prob_step = 0.01) {
  const int n = static_cast<int>(std::llround(2.0 / step));
  const int ps = static_cast<int>(std::llround(1.0 / prob_step));
  std::vector<double> grid(n + 1);
  for (int i = 0; i <= n; ++i) grid[i] = -1.0 + i * step;
  if (n % 2 == 0) grid[n / 2] = 0.0;
  auto pipage_point = [](double v) { return v == -1.0 || v == 0.0 || v == 1.0; };

  PipageCheck out;
  for (int i = 0; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j)
      for (int l = j + 1; l <= n; ++l) {
        const double v[3] = {grid[i], grid[j], grid[l]};
        bool ok[3][3];
        for (int x = 0; x < 3; ++x)
          for (int y = 0; y < 3; ++y) ok[x][y] = v[x] + v[y] <= kTieTolerance * 2;
        const bool pip = pipage_point(v[0]) && pipage_point(v[1]) && pipage_point(v[2]);
        for (int a = 0; a <= ps; ++a)
          for (int b = 0; a + b <= ps; ++b) {
            const double w[3] = {a * prob_step, b * prob_step, (ps - a - b) * prob_step};
            double pr = 0.0;
            for (int x = 0; x < 3; ++x)
              for (int y = 0; y < 3; ++y)
                if (ok[x][y]) pr += w[x] * w[y];
            if (pr < 0.5 - 1e-12) continue;
            const double mean = w[0] * v[0] + w[1] * v[1] + w[2] * v[2];
            if (mean > out.best_value + 1e-15) {
              out.best_value = mean;
              out.best_support.clear();
              for (int x = 0; x < 3; ++x)
                if (w[x] > 0.0) out.best_support.push_back({v[x], w[x]});
            }
            if (pip) out.best_on_pipage_support = std::max(out.best_on_pipage_support, mean);
          }
      }
  out.support_in_pipage_set = true;
  for (const auto& a : out.best_support) out.support_in_pipage_set = out.support_in_pipage_set && pipage_point(a.value);
  return out;
}

}  // namespace delib
