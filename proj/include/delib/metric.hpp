#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "delib/errors.hpp"
#include "json.hpp"

namespace delib {

struct Location {
  std::string id;
  double mass = 0.0;
};

/// Candidates and weighted voter locations in a finite metric space.
///
/// Points are indexed with candidates first (0..m-1) followed by locations
/// (m..m+n-1). Distances are stored as a dense symmetric table; setting one
/// orientation sets both.
class MetricInstance {
public:
  MetricInstance() = default;
  MetricInstance(std::vector<std::string> candidates, std::vector<Location> locations)
      : candidates_(std::move(candidates)), locations_(std::move(locations)) {
    const std::size_t n = num_points();
    dist_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& id = point_id(i);
      if (!index_.emplace(id, i).second) throw InvalidInstance("duplicate point id: " + id);
    }
  }

  std::size_t m() const { return candidates_.size(); }
  std::size_t num_locations() const { return locations_.size(); }
  std::size_t num_points() const { return candidates_.size() + locations_.size(); }

  const std::vector<std::string>& candidates() const { return candidates_; }
  const std::vector<Location>& locations() const { return locations_; }
  const std::string& candidate(std::size_t c) const { return candidates_.at(c); }
  double mass(std::size_t loc) const { return locations_[loc].mass; }

  const std::string& point_id(std::size_t p) const {
    return p < m() ? candidates_[p] : locations_[p - m()].id;
  }
  std::optional<std::size_t> find_point(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t candidate_index(const std::string& id) const {
    auto p = find_point(id);
    if (!p || *p >= m()) throw UnknownCandidate(id);
    return *p;
  }
  std::size_t location_point(std::size_t loc) const { return m() + loc; }

  double d(std::size_t p, std::size_t q) const { return dist_[p * num_points() + q]; }
  /// Distance from location `loc` to candidate `c`.
  double dlc(std::size_t loc, std::size_t c) const { return d(location_point(loc), c); }

  void set_distance(std::size_t p, std::size_t q, double v) {
    dist_[p * num_points() + q] = v;
    dist_[q * num_points() + p] = v;
  }
  void set_distance(const std::string& a, const std::string& b, double v) {
    auto p = find_point(a);
    auto q = find_point(b);
    if (!p) throw InvalidInstance("unknown point id: " + a);
    if (!q) throw InvalidInstance("unknown point id: " + b);
    set_distance(*p, *q, v);
  }
  void set_mass(std::size_t loc, double mass) { locations_.at(loc).mass = mass; }

  /// Rescales masses to sum to 1 when they already do so within `tol`.
  /// Sums within summation rounding of 1 are left untouched.
  void normalize_masses(double tol = 1e-9) {
    double total = 0.0;
    for (const auto& l : locations_) total += l.mass;
    if (std::abs(total - 1.0) > tol)
      throw InvalidInstance("location masses sum to " + std::to_string(total) + ", expected 1");
    const double rounding = 2.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(locations_.size());
    if (std::abs(total - 1.0) <= rounding) return;
    for (auto& l : locations_) l.mass /= total;
  }

  nlohmann::json to_json() const {
    nlohmann::json locs = nlohmann::json::array();
    for (const auto& l : locations_) locs.push_back({{"id", l.id}, {"mass", l.mass}});
    nlohmann::json dist = nlohmann::json::object();
    for (std::size_t p = 0; p < num_points(); ++p)
      for (std::size_t q = p + 1; q < num_points(); ++q) dist[point_id(p) + "|" + point_id(q)] = d(p, q);
    return {{"candidates", candidates_}, {"locations", locs}, {"distances", dist}};
  }

  static MetricInstance from_json(const nlohmann::json& j) {
    std::vector<std::string> cands = j.at("candidates").get<std::vector<std::string>>();
    std::vector<Location> locs;
    for (const auto& l : j.at("locations")) locs.push_back({l.at("id").get<std::string>(), l.at("mass").get<double>()});
    MetricInstance inst(std::move(cands), std::move(locs));
    std::vector<char> seen(inst.num_points() * inst.num_points(), 0);
    for (const auto& [key, value] : j.at("distances").items()) {
      const auto bar = key.find('|');
      if (bar == std::string::npos) throw InvalidInstance("distance key without '|': " + key);
      const auto a = inst.find_point(key.substr(0, bar));
      const auto b = inst.find_point(key.substr(bar + 1));
      if (!a || !b) throw InvalidInstance("distance key names an unknown point: " + key);
      const double v = value.get<double>();
      const std::size_t ab = *a * inst.num_points() + *b;
      const std::size_t ba = *b * inst.num_points() + *a;
      if (seen[ab] && inst.dist_[ab] != v) throw InvalidInstance("conflicting distances for " + key);
      seen[ab] = seen[ba] = 1;
      inst.set_distance(*a, *b, v);
    }
    inst.normalize_masses();
    return inst;
  }

  static MetricInstance load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInstance("cannot open instance file: " + path);
    return from_json(nlohmann::json::parse(in));
  }
  void save(const std::string& path) const {
    std::ofstream out(path);
    out << to_json().dump(2) << '\n';
  }

private:
  std::vector<std::string> candidates_;
  std::vector<Location> locations_;
  std::vector<double> dist_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Lists every violated instance invariant; empty when the instance is valid.
inline std::vector<std::string> validate(const MetricInstance& inst, double tol = 1e-12) {
  std::vector<std::string> out;
  if (inst.m() < 2) out.push_back("fewer than 2 candidates");
  if (inst.num_locations() == 0) out.push_back("no voter locations");
  double total = 0.0;
  for (const auto& l : inst.locations()) {
    if (!(l.mass >= 0.0)) out.push_back("negative mass at " + l.id);
    total += l.mass;
  }
  if (inst.num_locations() > 0 && std::abs(total - 1.0) > 1e-9)
    out.push_back("masses sum to " + std::to_string(total));
  const std::size_t n = inst.num_points();
  for (std::size_t p = 0; p < n; ++p) {
    if (inst.d(p, p) != 0.0) out.push_back("nonzero self distance at " + inst.point_id(p));
    for (std::size_t q = p + 1; q < n; ++q)
      if (!(inst.d(p, q) >= 0.0)) out.push_back("negative distance " + inst.point_id(p) + "|" + inst.point_id(q));
  }
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t z = x + 1; z < n; ++z)
      for (std::size_t y = 0; y < n; ++y) {
        if (y == x || y == z) continue;
        if (inst.d(x, z) > inst.d(x, y) + inst.d(y, z) + tol)
          out.push_back("triangle inequality violated: d(" + inst.point_id(x) + "," + inst.point_id(z) + ") > d(" +
                        inst.point_id(x) + "," + inst.point_id(y) + ") + d(" + inst.point_id(y) + "," +
                        inst.point_id(z) + ")");
      }
  return out;
}

struct Atom {
  double value;
  double prob;
  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finite distribution on [-1,1]; atoms are sorted and distinct.
class BiasDistribution {
public:
  BiasDistribution() = default;
  explicit BiasDistribution(std::vector<Atom> atoms) {
    std::map<double, double> merged;
    double total = 0.0;
    for (const auto& a : atoms) {
      if (!(a.value >= -1.0 && a.value <= 1.0)) throw InvalidInstance("bias atom outside [-1,1]");
      if (!(a.prob >= 0.0)) throw InvalidInstance("negative atom probability");
      if (a.prob == 0.0) continue;
      merged[a.value] += a.prob;
      total += a.prob;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidInstance("atom probabilities sum to " + std::to_string(total));
    for (const auto& [v, p] : merged) atoms_.push_back({v, p});
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }

  double mean() const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.prob * a.value;
    return s;
  }
  double variance() const {
    const double mu = mean();
    double s = 0.0;
    for (const auto& a : atoms_) s += a.prob * (a.value - mu) * (a.value - mu);
    return s;
  }
  BiasDistribution negated() const {
    std::vector<Atom> out;
    for (const auto& a : atoms_) out.push_back({-a.value, a.prob});
    return BiasDistribution(std::move(out));
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& a : atoms_) j.push_back({{"value", a.value}, {"prob", a.prob}});
    return j;
  }
  static BiasDistribution from_json(const nlohmann::json& j) {
    std::vector<Atom> atoms;
    for (const auto& a : j) atoms.push_back({a.at("value").get<double>(), a.at("prob").get<double>()});
    return BiasDistribution(std::move(atoms));
  }

  friend bool operator==(const BiasDistribution&, const BiasDistribution&) = default;

private:
  std::vector<Atom> atoms_;
};

/// (d(i,c1) - d(i,c2)) / d(c1,c2), clamped to [-1,1] against rounding.
inline double normalized_bias(const MetricInstance& inst, std::size_t loc, std::size_t c1, std::size_t c2) {
  const double base = inst.d(c1, c2);
  if (!(base > 0.0)) throw ZeroCandidateDistance(inst.candidate(c1), inst.candidate(c2));
  const double b = (inst.dlc(loc, c1) - inst.dlc(loc, c2)) / base;
  return std::clamp(b, -1.0, 1.0);
}

inline BiasDistribution bias_distribution(const MetricInstance& inst, std::size_t w, std::size_t x) {
  std::vector<Atom> atoms;
  atoms.reserve(inst.num_locations());
  for (std::size_t l = 0; l < inst.num_locations(); ++l) atoms.push_back({normalized_bias(inst, l, w, x), inst.mass(l)});
  return BiasDistribution(std::move(atoms));
}

inline double social_cost(const MetricInstance& inst, std::size_t c) {
  if (c >= inst.m()) throw UnknownCandidate(std::to_string(c));
  double s = 0.0;
  for (std::size_t l = 0; l < inst.num_locations(); ++l) s += inst.mass(l) * inst.dlc(l, c);
  return s;
}
inline double social_cost(const MetricInstance& inst, const std::string& c) {
  return social_cost(inst, inst.candidate_index(c));
}

inline std::pair<std::size_t, double> social_optimum(const MetricInstance& inst) {
  std::size_t best = 0;
  double cost = social_cost(inst, 0);
  for (std::size_t c = 1; c < inst.m(); ++c) {
    const double v = social_cost(inst, c);
    if (v < cost) {
      cost = v;
      best = c;
    }
  }
  return {best, cost};
}

inline double distortion_of(const MetricInstance& inst, std::size_t c) {
  const double opt = social_optimum(inst).second;
  if (!(opt > 0.0)) throw DegenerateOptimum();
  return social_cost(inst, c) / opt;
}

}  // namespace delib
