#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>

#include "delib/errors.hpp"
#include "json.hpp"

namespace delib {

inline void check_theta(double theta) {
  if (!(theta >= 0.0 && theta < 1.0)) throw ThetaOutOfRange(theta);
}

/// Copeland distortion guaranteed by a mean-bias bound theta: ((1+t)/(1-t))^2.
inline double copeland_distortion_from_theta(double theta) {
  check_theta(theta);
  const double r = (1.0 + theta) / (1.0 - theta);
  return r * r;
}

struct LowerBounds {
  double deterministic;
  double randomized;
};

/// Lower bounds for any rule aggregating group outputs: min(3, (1+t)/(1-t))
/// for deterministic and min(2, 1/(1-t)) for randomized rules.
inline LowerBounds lower_bounds_from_theta(double theta) {
  check_theta(theta);
  return {std::min(3.0, (1.0 + theta) / (1.0 - theta)), std::min(2.0, 1.0 / (1.0 - theta))};
}

/// Groups needed so every ordered pair's estimate is within epsilon with
/// probability 1 - delta: two-sided Hoeffding, union bound over m(m-1) pairs.
inline std::uint64_t sample_size_averaging(std::uint64_t m, double epsilon, double delta) {
  if (m < 2) throw InvalidConfig("m must be at least 2");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidConfig("epsilon must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidConfig("delta must lie in (0,1)");
  const double pairs = static_cast<double>(m) * static_cast<double>(m - 1);
  return static_cast<std::uint64_t>(std::ceil(std::log(pairs / delta) / (2.0 * epsilon * epsilon)));
}

struct MatchingSampleSize {
  std::uint64_t groups_per_matching;
  std::uint64_t matchings;
  std::uint64_t total;
};

/// Each matching is sampled with failure budget delta/m; a round-robin
/// schedule needs m-1 matchings (even m) or m (odd m).
inline MatchingSampleSize sample_size_random_choice(std::uint64_t m, double epsilon, double delta) {
  if (m < 2) throw InvalidConfig("m must be at least 2");
  const std::uint64_t per = sample_size_averaging(m, epsilon, delta / static_cast<double>(m));
  const std::uint64_t matchings = m % 2 == 0 ? m - 1 : m;
  return {per, matchings, per * matchings};
}

struct BoundReport {
  std::optional<double> theta;
  std::optional<double> copeland_upper;
  std::optional<LowerBounds> lower;
  std::optional<std::uint64_t> m;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::optional<std::uint64_t> samples_averaging;
  std::optional<MatchingSampleSize> samples_random_choice;

  static BoundReport from_theta(double theta) {
    BoundReport r;
    r.theta = theta;
    r.copeland_upper = copeland_distortion_from_theta(theta);
    r.lower = lower_bounds_from_theta(theta);
    return r;
  }
  static BoundReport from_samples(std::uint64_t m, double epsilon, double delta) {
    BoundReport r;
    r.m = m;
    r.epsilon = epsilon;
    r.delta = delta;
    r.samples_averaging = sample_size_averaging(m, epsilon, delta);
    r.samples_random_choice = sample_size_random_choice(m, epsilon, delta);
    return r;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    if (theta) j["theta"] = *theta;
    if (copeland_upper) j["copeland_upper"] = *copeland_upper;
    if (lower) {
      j["det_lb"] = lower->deterministic;
      j["rand_lb"] = lower->randomized;
    }
    if (m) j["m"] = *m;
    if (epsilon) j["epsilon"] = *epsilon;
    if (delta) j["delta"] = *delta;
    if (samples_averaging) j["samples_averaging"] = *samples_averaging;
    if (samples_random_choice)
      j["samples_random_choice"] = {{"groups_per_matching", samples_random_choice->groups_per_matching},
                                    {"matchings", samples_random_choice->matchings},
                                    {"total", samples_random_choice->total}};
    return j;
  }
};

}  // namespace delib
