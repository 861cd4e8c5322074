#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "delib/bounds.hpp"
#include "delib/deliberation.hpp"
#include "delib/instances.hpp"
#include "delib/parallel.hpp"
#include "json.hpp"

namespace delib {

/// Left side of the relaxed Random-Choice constraint:
///   beta * sum_{l=1..k} C(k,l) a^l (1-a)^(k-l) * l g(w) / (l g(w) + k - l) + (1 - beta) * a.
/// The l = k term counts fully when g(w) > 0 and not at all when g(w) = 0.
inline double constraint_lhs(int k, double alpha, double omega, const BiasTransform& g, double beta) {
  const double gw = g(omega);
  double sum = 0.0;
  if (alpha >= 1.0) {
    sum = gw > 0.0 ? 1.0 : 0.0;
  } else if (alpha > 0.0) {
    const double la = std::log(alpha);
    const double lb = std::log1p(-alpha);
    const double lk = std::lgamma(k + 1.0);
    for (int l = 1; l <= k; ++l) {
      const double lw = lk - std::lgamma(l + 1.0) - std::lgamma(k - l + 1.0) + l * la + (k - l) * lb;
      if (lw < -745.0) continue;
      const double term = l == k ? (gw > 0.0 ? 1.0 : 0.0) : l * gw / (l * gw + (k - l));
      sum += std::exp(lw) * term;
    }
  }
  return beta * sum + (1.0 - beta) * alpha;
}

/// Smallest omega in [0,1] with constraint_lhs >= 1/2, to within tol; empty
/// when even omega = 1 is infeasible.
inline std::optional<double> min_feasible_omega(int k, double alpha, const BiasTransform& g, double beta,
                                                double tol = 1e-9) {
  if (constraint_lhs(k, alpha, 1.0, g, beta) < 0.5) return std::nullopt;
  if (constraint_lhs(k, alpha, 0.0, g, beta) >= 0.5) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (constraint_lhs(k, alpha, mid, g, beta) >= 0.5) hi = mid;
    else lo = mid;
  }
  return hi;
}

struct ZetaResult {
  int k = 1;
  BiasTransform g = BiasTransform::linear();
  double beta = 1.0;
  double zeta = 0.0;
  double grid_zeta = 0.0;
  double alpha = 0.0;
  double omega = 0.0;
  double distortion_upper = 1.0;
  double det_lb = 1.0;
  double rand_lb = 1.0;
  double alpha_step = 1e-3;
  double omega_tol = 1e-9;
  /// exact p_k of the two-point distribution {-omega w.p. alpha, 1 otherwise}.
  double realized_pk = 0.0;
  bool realized_feasible = false;

  nlohmann::json to_json() const {
    return {{"k", k},
            {"g", g.name()},
            {"beta", beta},
            {"zeta", zeta},
            {"grid_zeta", grid_zeta},
            {"alpha", alpha},
            {"omega", omega},
            {"distortion_upper", distortion_upper},
            {"det_lb", det_lb},
            {"rand_lb", rand_lb},
            {"alpha_step", alpha_step},
            {"omega_tol", omega_tol},
            {"realized_pk", realized_pk},
            {"realized_feasible", realized_feasible}};
  }
};

namespace detail {

inline double zeta_at(int k, double alpha, const BiasTransform& g, double beta, double tol) {
  const auto w = min_feasible_omega(k, alpha, g, beta, tol);
  if (!w) return -std::numeric_limits<double>::infinity();
  return (1.0 - alpha) - alpha * *w;
}

}  // namespace detail

/// Maximizes (1 - alpha) - alpha * omega over an alpha grid, omega being the
/// smallest feasible value for each alpha, then refines inside the best grid
/// cell by golden-section search.
inline ZetaResult zeta(int k, const BiasTransform& g = BiasTransform::linear(), double beta = 1.0,
                       double alpha_step = 1e-3, double omega_tol = 1e-9, unsigned threads = 1) {
  if (k < 1) throw InvalidConfig("k must be at least 1");
  if (!(alpha_step > 0.0 && alpha_step <= 0.5)) throw InvalidConfig("alpha step must lie in (0, 0.5]");
  const auto n = static_cast<std::size_t>(std::llround(1.0 / alpha_step));
  std::vector<double> values(n + 1);
  parallel_for(n + 1, threads, [&](std::size_t i) {
    values[i] = detail::zeta_at(k, std::min(1.0, i * alpha_step), g, beta, omega_tol);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i)
    if (values[i] > values[best]) best = i;

  ZetaResult r;
  r.k = k;
  r.g = g;
  r.beta = beta;
  r.alpha_step = alpha_step;
  r.omega_tol = omega_tol;
  r.alpha = std::min(1.0, best * alpha_step);
  r.zeta = r.grid_zeta = values[best];

  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::max(0.0, r.alpha - alpha_step);
  double b = std::min(1.0, r.alpha + alpha_step);
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = detail::zeta_at(k, x1, g, beta, omega_tol);
  double f2 = detail::zeta_at(k, x2, g, beta, omega_tol);
  for (int it = 0; it < 60 && b - a > 1e-12; ++it) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = detail::zeta_at(k, x1, g, beta, omega_tol);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = detail::zeta_at(k, x2, g, beta, omega_tol);
    }
  }
  const double xr = f1 >= f2 ? x1 : x2;
  const double fr = std::max(f1, f2);
  if (fr > r.zeta) {
    r.zeta = fr;
    r.alpha = xr;
  }
  r.omega = min_feasible_omega(k, r.alpha, g, beta, omega_tol).value_or(1.0);

  const double ratio = (1.0 + r.zeta) / (1.0 - r.zeta);
  r.distortion_upper = ratio * ratio;
  r.det_lb = std::min(3.0, ratio);
  r.rand_lb = std::min(2.0, 1.0 / (1.0 - r.zeta));

  const BiasDistribution two_point({{-r.omega, r.alpha}, {1.0, 1.0 - r.alpha}});
  const auto inst = line_instance_from_bias_distribution(two_point);
  r.realized_pk = exact_pk(inst, ModelConfig::random_choice(k, g, beta), 0, 1).value;
  r.realized_feasible = r.realized_pk >= 0.5 - 1e-9;
  return r;
}

inline std::vector<ZetaResult> sweep(int k_min, int k_max, const BiasTransform& g = BiasTransform::linear(),
                                     double beta = 1.0, double alpha_step = 1e-3, double omega_tol = 1e-9,
                                     unsigned threads = 1) {
  if (k_min < 1 || k_max < k_min) throw InvalidConfig("need 1 <= k_min <= k_max");
  std::vector<ZetaResult> rows(static_cast<std::size_t>(k_max - k_min + 1));
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    rows[i] = zeta(k_min + static_cast<int>(i), g, beta, alpha_step, omega_tol);
  });
  return rows;
}

inline std::string sweep_csv(const std::vector<ZetaResult>& rows) {
  std::ostringstream out;
  out.precision(10);
  out << "k,zeta,alpha,omega,distortion_upper,det_lb,rand_lb\n";
  for (const auto& r : rows)
    out << r.k << ',' << r.zeta << ',' << r.alpha << ',' << r.omega << ',' << r.distortion_upper << ',' << r.det_lb
        << ',' << r.rand_lb << '\n';
  return out.str();
}

/// Constant c in epsilon = c * delta used by the closed-form group size.
inline constexpr double kGroupSizeConstant = 1.0;

struct GroupSizeResult {
  double epsilon = 0.0;
  int k = 1;
  double distortion_upper = 1.0;
  double closed_form_k = 0.0;
  double c = kGroupSizeConstant;

  nlohmann::json to_json() const {
    return {{"epsilon", epsilon}, {"k", k}, {"distortion_upper", distortion_upper}, {"closed_form_k", closed_form_k}, {"c", c}};
  }
};

/// Smallest k whose distortion_upper is at most 1 + epsilon, located by
/// doubling then bisection; also reports ceil(4/d^2 * ln(2/d)) with d = epsilon/c.
inline GroupSizeResult group_size_for_epsilon(double epsilon, const BiasTransform& g = BiasTransform::linear(),
                                              double beta = 1.0, double c = kGroupSizeConstant, int k_cap = 4096) {
  if (!(epsilon > 0.0)) throw InvalidConfig("epsilon must be positive");
  auto ok = [&](int k) { return zeta(k, g, beta).distortion_upper <= 1.0 + epsilon; };
  int hi = 1;
  while (!ok(hi)) {
    if (hi >= k_cap) throw BudgetExceeded("no k <= " + std::to_string(k_cap) + " reaches the target");
    hi = std::min(k_cap, hi * 2);
  }
  int lo = hi / 2;  // infeasible (or 0)
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (ok(mid)) hi = mid;
    else lo = mid;
  }
  GroupSizeResult r;
  r.epsilon = epsilon;
  r.k = hi;
  r.distortion_upper = zeta(hi, g, beta).distortion_upper;
  r.c = c;
  const double d = epsilon / c;
  r.closed_form_k = std::ceil(4.0 / (d * d) * std::log(2.0 / d));
  return r;
}

}  // namespace delib
