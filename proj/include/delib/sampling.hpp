#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "delib/bounds.hpp"
#include "delib/deliberation.hpp"
#include "delib/metric.hpp"
#include "delib/parallel.hpp"
#include "delib/rng.hpp"
#include "delib/tournament.hpp"
#include "json.hpp"

namespace delib {

using Matching = std::vector<std::pair<std::size_t, std::size_t>>;

/// Circle-method 1-factorization of K_m. Even m gives m-1 perfect matchings;
/// odd m gives m matchings, each leaving one candidate out.
inline std::vector<Matching> round_robin_matchings(std::size_t m) {
  if (m < 2) throw InvalidConfig("round robin needs m >= 2");
  const std::size_t n = m % 2 == 0 ? m : m + 1;  // slot n-1 is the bye when m is odd
  std::vector<Matching> rounds;
  for (std::size_t r = 0; r + 1 < n; ++r) {
    Matching mt;
    auto slot = [&](std::size_t i) { return i == 0 ? n - 1 : (r + i - 1) % (n - 1); };
    for (std::size_t i = 0; i < n / 2; ++i) {
      std::size_t a = slot(i);
      std::size_t b = slot(n - 1 - i);
      if (a >= m || b >= m) continue;
      if (a > b) std::swap(a, b);
      mt.emplace_back(a, b);
    }
    std::sort(mt.begin(), mt.end());
    rounds.push_back(std::move(mt));
  }
  return rounds;
}

enum class SampleMode { RankingGroups, MatchingGroups };

inline const char* to_string(SampleMode m) { return m == SampleMode::RankingGroups ? "RankingGroups" : "MatchingGroups"; }

struct SampleRunConfig {
  MetricInstance instance;
  ModelConfig model;
  /// RankingGroups: total groups. MatchingGroups: groups per matching.
  std::uint64_t groups = 1;
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  SampleMode mode = SampleMode::RankingGroups;
  /// Error threshold for the fraction-within-epsilon statistic.
  double epsilon = 0.05;
  /// When set, each trial is compared with copeland_distortion_from_theta(theta_hat + 2 epsilon).
  std::optional<double> theta_hat;
  unsigned threads = 1;

  void validate() const {
    model.validate();
    if (trials < 1) throw InvalidConfig("trials must be at least 1");
    if (groups < 1) throw InvalidConfig("groups must be at least 1");
    if (mode == SampleMode::MatchingGroups && model.variant != Variant::RandomChoice)
      throw InvalidConfig("MatchingGroups requires the random_choice variant");
    if (mode == SampleMode::RankingGroups && model.variant != Variant::Averaging)
      throw InvalidConfig("RankingGroups requires the averaging variant");
  }

  std::uint64_t total_groups() const {
    if (mode == SampleMode::RankingGroups) return groups;
    return groups * round_robin_matchings(instance.m()).size();
  }

  nlohmann::json to_json() const {
    nlohmann::json j = {{"model", model.to_json()}, {"groups", groups},       {"total_groups", total_groups()},
                        {"trials", trials},         {"seed", seed},           {"mode", to_string(mode)},
                        {"epsilon", epsilon}};
    if (theta_hat) j["theta_hat"] = *theta_hat;
    return j;
  }
};

namespace detail {

/// Normalized biases of every location for every ordered pair, plus the
/// location CDF used to draw voters.
struct SamplingTables {
  std::size_t m = 0;
  std::vector<double> bias;  // [loc][i][j]
  std::vector<double> cdf;

  explicit SamplingTables(const MetricInstance& inst) : m(inst.m()) {
    const std::size_t L = inst.num_locations();
    bias.assign(L * m * m, 0.0);
    for (std::size_t l = 0; l < L; ++l)
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
          if (i != j) bias[(l * m + i) * m + j] = normalized_bias(inst, l, i, j);
    double acc = 0.0;
    for (std::size_t l = 0; l < L; ++l) cdf.push_back(acc += inst.mass(l));
    cdf.back() = 1.0;
  }

  double b(std::size_t loc, std::size_t i, std::size_t j) const { return bias[(loc * m + i) * m + j]; }

  void draw(Stream& rng, std::vector<std::size_t>& group) const {
    for (auto& g : group) {
      const auto l = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), rng.uniform()) - cdf.begin());
      g = std::min(l, cdf.size() - 1);
    }
  }
};

inline PMatrix simulate(const SampleRunConfig& cfg, const SamplingTables& tab, std::uint64_t trial) {
  const std::size_t m = tab.m;
  const auto k = static_cast<std::size_t>(cfg.model.k);
  std::vector<std::uint64_t> wins(m * m, 0);
  std::vector<std::uint64_t> seen(m * m, 0);
  std::vector<std::size_t> group(k);
  std::vector<double> biases(k);

  if (cfg.mode == SampleMode::RankingGroups) {
    for (std::uint64_t g = 0; g < cfg.groups; ++g) {
      Stream rng(cfg.seed, trial, g);
      tab.draw(rng, group);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          if (i == j) continue;
          for (std::size_t t = 0; t < k; ++t) biases[t] = tab.b(group[t], i, j);
          if (averaging_outcome(biases, cfg.model.tie_to_first) == 1) ++wins[i * m + j];
          ++seen[i * m + j];
        }
    }
  } else {
    const auto rounds = round_robin_matchings(m);
    for (std::size_t r = 0; r < rounds.size(); ++r)
      for (std::uint64_t g = 0; g < cfg.groups; ++g) {
        Stream rng(cfg.seed, trial, r * cfg.groups + g);
        tab.draw(rng, group);
        for (auto [i, j] : rounds[r]) {
          for (std::size_t t = 0; t < k; ++t) biases[t] = tab.b(group[t], i, j);
          const double p = random_choice_win_prob(biases, cfg.model.g, cfg.model.beta, cfg.model.all_zero_to_first);
          const bool first = p >= 1.0 || (p > 0.0 && rng.uniform() < p);
          if (first) ++wins[i * m + j];
          else ++wins[j * m + i];
          ++seen[i * m + j];
          ++seen[j * m + i];
        }
      }
  }

  PMatrix pm(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      if (seen[i * m + j] == 0) throw NoSamplesForPair(i, j);
      pm(i, j) = static_cast<double>(wins[i * m + j]) / static_cast<double>(seen[i * m + j]);
    }
  return pm;
}

}  // namespace detail

/// Empirical pairwise matrix from sampled groups. Trial t uses the streams
/// (seed, t, group), so results depend only on the config and t.
inline PMatrix simulate_estimated_pmatrix(const SampleRunConfig& cfg, std::uint64_t trial = 0) {
  cfg.validate();
  return detail::simulate(cfg, detail::SamplingTables(cfg.instance), trial);
}

struct TrialOutcome {
  std::uint64_t trial = 0;
  std::size_t winner = 0;
  double distortion = 1.0;
  double max_error = 0.0;
};

struct SampleRunReport {
  SampleRunConfig config;
  std::vector<TrialOutcome> trials;
  double mean_distortion = 0.0;
  double max_distortion = 0.0;
  double fraction_within_epsilon = 0.0;
  double exact_pipeline_distortion = 1.0;
  std::optional<double> soft_bound;
  std::uint64_t soft_violations = 0;

  nlohmann::json to_json() const {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& t : trials)
      per.push_back({{"trial", t.trial}, {"winner", config.instance.candidate(t.winner)}, {"distortion", t.distortion},
                     {"max_error", t.max_error}});
    nlohmann::json j = {{"config", config.to_json()},
                        {"mean_distortion", mean_distortion},
                        {"max_distortion", max_distortion},
                        {"fraction_within_epsilon", fraction_within_epsilon},
                        {"exact_pipeline_distortion", exact_pipeline_distortion},
                        {"trials", per}};
    if (soft_bound) {
      j["soft_bound"] = *soft_bound;
      j["soft_violations"] = soft_violations;
    }
    return j;
  }

  std::string trials_csv() const {
    std::ostringstream out;
    out.precision(12);
    out << "trial,winner,distortion,max_error\n";
    for (const auto& t : trials)
      out << t.trial << ',' << config.instance.candidate(t.winner) << ',' << t.distortion << ',' << t.max_error << '\n';
    return out.str();
  }
};

/// Runs cfg.trials independent simulations, elects the Copeland winner of
/// each estimated matrix, and compares with the exact matrix.
inline SampleRunReport empirical_distortion_trials(const SampleRunConfig& cfg) {
  cfg.validate();
  const detail::SamplingTables tab(cfg.instance);
  const PMatrix exact = build_pmatrix(cfg.instance, cfg.model, EstimationMode::exact_mode());
  SampleRunReport rep;
  rep.config = cfg;
  rep.trials.resize(cfg.trials);
  parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
    const PMatrix pm = detail::simulate(cfg, tab, t);
    const Tournament tour = build_tournament(pm, 0.0);
    TrialOutcome& o = rep.trials[t];
    o.trial = t;
    o.winner = copeland_winner(tour);
    o.distortion = distortion_of(cfg.instance, o.winner);
    for (std::size_t i = 0; i < pm.m(); ++i)
      for (std::size_t j = 0; j < pm.m(); ++j)
        if (i != j) o.max_error = std::max(o.max_error, std::abs(pm(i, j) - exact(i, j)));
  });
  std::uint64_t within = 0;
  double sum = 0.0;
  for (const auto& o : rep.trials) {
    sum += o.distortion;
    rep.max_distortion = std::max(rep.max_distortion, o.distortion);
    if (o.max_error <= cfg.epsilon) ++within;
  }
  rep.mean_distortion = sum / static_cast<double>(cfg.trials);
  rep.fraction_within_epsilon = static_cast<double>(within) / static_cast<double>(cfg.trials);
  const Tournament exact_t = build_tournament(exact, EstimationMode::exact_mode().default_tol());
  rep.exact_pipeline_distortion = distortion_of(cfg.instance, copeland_winner(exact_t));
  if (cfg.theta_hat && *cfg.theta_hat + 2.0 * cfg.epsilon < 1.0) {
    rep.soft_bound = copeland_distortion_from_theta(*cfg.theta_hat + 2.0 * cfg.epsilon);
    for (const auto& o : rep.trials)
      if (o.distortion > *rep.soft_bound + 1e-12) ++rep.soft_violations;
  }
  return rep;
}

}  // namespace delib
