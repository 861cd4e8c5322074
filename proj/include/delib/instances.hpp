#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "delib/errors.hpp"
#include "delib/metric.hpp"
#include "delib/rng.hpp"

namespace delib {

/// Two candidates W, X at distance 1 on a line; atom a sits at distance
/// (1+a)/2 from W and (1-a)/2 from X, so its bias is exactly a whenever
/// those halves are representable.
inline MetricInstance line_instance_from_bias_distribution(const BiasDistribution& d) {
  std::vector<Location> locs;
  for (std::size_t i = 0; i < d.size(); ++i) locs.push_back({"v" + std::to_string(i), d.atoms()[i].prob});
  MetricInstance inst({"W", "X"}, std::move(locs));
  inst.set_distance(0, 1, 1.0);
  const auto& atoms = d.atoms();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double a = atoms[i].value;
    inst.set_distance(inst.location_point(i), 0, (1.0 + a) / 2.0);
    inst.set_distance(inst.location_point(i), 1, (1.0 - a) / 2.0);
    for (std::size_t j = 0; j < i; ++j)
      inst.set_distance(inst.location_point(i), inst.location_point(j), std::abs(a - atoms[j].value) / 2.0);
  }
  return inst;
}

/// Hard distribution for the Averaging model: E = 1/(k+1) (odd k) or 2/(3k)
/// (even k) while a k-group still picks W with probability at least 1/2.
inline BiasDistribution lb1_distribution(int k) {
  if (k < 2) throw InvalidConfig("lb1 needs k >= 2");
  if (k % 2 == 1) return BiasDistribution({{1.0, 0.5}, {-1.0 + 2.0 / (k + 1), 0.5}});
  const double p = 0.5 + 1.0 / (3.0 * k);
  return BiasDistribution({{1.0, p}, {-1.0, 1.0 - p}});
}

inline MetricInstance lb1_instance(int k) { return line_instance_from_bias_distribution(lb1_distribution(k)); }

/// Extremal distribution for k = 2: mass 1/sqrt(2) at X, the rest at W.
inline MetricInstance theta2_extremal_instance() {
  const double p = 1.0 / std::sqrt(2.0);
  return line_instance_from_bias_distribution(BiasDistribution({{1.0, p}, {-1.0, 1.0 - p}}));
}

/// Three candidates W, X, Y with d(W,X) = d(X,Y) = 1 and d(W,Y) = 2, where a
/// k = 2 Averaging tournament is the strict cycle W > Y > X > W with margins
/// delta^2/2, so Copeland (declaration order W, X, Y) outputs W while X is
/// optimal. Voters: "xv" at distance delta from X, "yv" at Y, and a light
/// voter "z" of mass delta that breaks the exact ties of the line placement.
/// As delta -> 0 the distortion tends to 3 + sqrt(2).
inline MetricInstance copeland_k2_worst_case(double delta) {
  if (!(delta > 0.0 && delta < 0.01)) throw InvalidConfig("delta must lie in (0, 0.01)");
  const double z = delta;
  const double x = -z + std::sqrt(0.5 + z * z / 2.0);
  const double y = 1.0 - x - z;
  MetricInstance inst({"W", "X", "Y"}, {{"xv", x}, {"yv", y}, {"z", z}});
  inst.set_distance("W", "X", 1.0);
  inst.set_distance("X", "Y", 1.0);
  inst.set_distance("W", "Y", 2.0);
  inst.set_distance("xv", "X", delta);
  inst.set_distance("xv", "W", 1.0);
  inst.set_distance("xv", "Y", 1.0 + delta / 2.0);
  inst.set_distance("yv", "Y", 0.0);
  inst.set_distance("yv", "X", 1.0);
  inst.set_distance("yv", "W", 2.0);
  inst.set_distance("z", "W", 1.0);
  inst.set_distance("z", "Y", 1.5);
  inst.set_distance("z", "X", 1.9);
  inst.set_distance("xv", "yv", 1.0 + delta / 2.0);
  inst.set_distance("z", "xv", 1.9);
  inst.set_distance("z", "yv", 1.5);
  return inst;
}

/// n voters of mass 1/n at distance 1+delta from a common candidate "c", and
/// one candidate per k-subset S of voters at distance 1 from S and 3 from the
/// rest. Other distances: 2 between voters, between c and any c_S, and
/// between any two c_S.
inline MetricInstance example1_instance(int n, int k, double delta, std::size_t max_candidates = 20000) {
  if (k < 2 || n < k) throw InvalidConfig("example1 needs n >= k >= 2");
  if (!(delta > 0.0)) throw InvalidConfig("delta must be positive");
  double subsets = 1.0;
  for (int i = 1; i <= k; ++i) subsets = subsets * (n - k + i) / i;
  if (subsets + 1.0 > static_cast<double>(max_candidates))
    throw BudgetExceeded("example1 would need " + std::to_string(subsets + 1.0) + " candidates");

  std::vector<std::vector<int>> members;
  std::vector<int> cur(k);
  for (int i = 0; i < k; ++i) cur[i] = i;
  while (true) {
    members.push_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[i] == n - k + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  std::vector<std::string> cands{"c"};
  for (const auto& s : members) {
    std::string id = "c_";
    for (std::size_t i = 0; i < s.size(); ++i) id += (i ? "_" : "") + std::to_string(s[i]);
    cands.push_back(id);
  }
  std::vector<Location> locs;
  for (int v = 0; v < n; ++v) locs.push_back({"v" + std::to_string(v), 1.0 / n});
  MetricInstance inst(std::move(cands), std::move(locs));
  const std::size_t m = inst.m();
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) inst.set_distance(a, b, 2.0);
  for (int v = 0; v < n; ++v) {
    const std::size_t pv = inst.location_point(v);
    inst.set_distance(pv, 0, 1.0 + delta);
    for (int u = 0; u < v; ++u) inst.set_distance(pv, inst.location_point(u), 2.0);
  }
  for (std::size_t s = 0; s < members.size(); ++s) {
    std::vector<char> in(n, 0);
    for (int v : members[s]) in[v] = 1;
    for (int v = 0; v < n; ++v) inst.set_distance(inst.location_point(v), s + 1, in[v] ? 1.0 : 3.0);
  }
  return inst;
}

/// Random instance: candidates and voter locations uniform in [0,1]^dim with
/// Euclidean distances, masses drawn uniformly and normalized. For tests and
/// fuzzing only.
inline MetricInstance random_euclidean_instance(std::size_t m, std::size_t locations, std::size_t dim,
                                                std::uint64_t seed) {
  Stream rng(seed, 0);
  std::vector<std::string> cands;
  for (std::size_t c = 0; c < m; ++c) cands.push_back("c" + std::to_string(c));
  std::vector<Location> locs;
  double total = 0.0;
  for (std::size_t l = 0; l < locations; ++l) {
    const double w = 0.05 + rng.uniform();
    locs.push_back({"v" + std::to_string(l), w});
    total += w;
  }
  for (auto& l : locs) l.mass /= total;
  MetricInstance inst(std::move(cands), std::move(locs));
  const std::size_t n = inst.num_points();
  std::vector<std::vector<double>> pos(n, std::vector<double>(dim));
  for (auto& p : pos)
    for (auto& x : p) x = rng.uniform();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      double s = 0.0;
      for (std::size_t t = 0; t < dim; ++t) s += (pos[a][t] - pos[b][t]) * (pos[a][t] - pos[b][t]);
      inst.set_distance(a, b, std::sqrt(s));
    }
  return inst;
}

}  // namespace delib
