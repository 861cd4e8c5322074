#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "delib/deliberation.hpp"
#include "delib/metric.hpp"
#include "delib/parallel.hpp"
#include "json.hpp"

namespace delib {

/// p(i, j) = probability that a random group choosing between candidates i
/// and j outputs i.
class PMatrix {
public:
  PMatrix() = default;
  explicit PMatrix(std::size_t m) : m_(m), p_(m * m, 0.0) {}

  std::size_t m() const { return m_; }
  double operator()(std::size_t i, std::size_t j) const { return p_[i * m_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return p_[i * m_ + j]; }

  std::string to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "row,col,p\n";
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < m_; ++j)
        if (i != j) out << i << ',' << j << ',' << (*this)(i, j) << '\n';
    return out.str();
  }
  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m_; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t j = 0; j < m_; ++j) row.push_back(i == j ? nlohmann::json(nullptr) : nlohmann::json((*this)(i, j)));
      rows.push_back(row);
    }
    return {{"m", m_}, {"p", rows}};
  }
  static PMatrix from_json(const nlohmann::json& j) {
    PMatrix pm(j.at("m").get<std::size_t>());
    const auto& rows = j.at("p");
    for (std::size_t i = 0; i < pm.m_; ++i)
      for (std::size_t k = 0; k < pm.m_; ++k)
        if (i != k) pm(i, k) = rows.at(i).at(k).get<double>();
    return pm;
  }

private:
  std::size_t m_ = 0;
  std::vector<double> p_;
};

struct EstimationMode {
  bool exact = true;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double budget = 2e6;

  static EstimationMode exact_mode() { return {}; }
  static EstimationMode monte_carlo(std::uint64_t trials, std::uint64_t seed, unsigned threads = 1) {
    return {false, trials, seed, threads, 2e6};
  }
  /// Dominance tolerance used with this mode.
  double default_tol() const { return exact ? 1e-9 : 0.0; }

  nlohmann::json to_json() const {
    if (exact) return {{"method", "Exact"}};
    return {{"method", "MonteCarlo"}, {"trials", trials}, {"seed", seed}};
  }
};

/// Fills both orientations of every pair. Monte-Carlo pairs use independent
/// streams derived from (seed, i, j).
inline PMatrix build_pmatrix(const MetricInstance& inst, const ModelConfig& model, const EstimationMode& mode) {
  const std::size_t m = inst.m();
  PMatrix pm(m);
  parallel_for(m * m, mode.exact ? mode.threads : 1, [&](std::size_t idx) {
    const std::size_t i = idx / m;
    const std::size_t j = idx % m;
    if (i == j) return;
    if (mode.exact) {
      pm(i, j) = exact_pk(inst, model, i, j, mode.budget).value;
    } else {
      const std::uint64_t pair_seed = Stream(mode.seed, i, j)();
      pm(i, j) = monte_carlo_pk(inst, model, i, j, mode.trials, pair_seed, mode.threads).value;
    }
  });
  return pm;
}

/// Dominance relation: i beats j when p(i,j) >= 1/2 - tol. A pair is a
/// half-point tie when both orientations are within tol of 1/2, or when the
/// two estimates disagree (both or neither orientation beats).
struct Tournament {
  std::size_t m = 0;
  std::vector<char> beats;
  std::vector<char> half;

  bool beat(std::size_t i, std::size_t j) const { return beats[i * m + j] != 0; }
  bool tie(std::size_t i, std::size_t j) const { return half[i * m + j] != 0; }
  /// Strict edges i -> j (ties excluded).
  std::vector<std::pair<std::size_t, std::size_t>> edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (i != j && beat(i, j) && !tie(i, j)) out.emplace_back(i, j);
    return out;
  }
  nlohmann::json to_json(const std::vector<std::string>& names = {}) const {
    auto name = [&](std::size_t i) -> nlohmann::json {
      if (i < names.size()) return names[i];
      return i;
    };
    nlohmann::json e = nlohmann::json::array();
    for (auto [i, j] : edges()) e.push_back({{"from", name(i)}, {"to", name(j)}});
    nlohmann::json t = nlohmann::json::array();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j)
        if (tie(i, j)) t.push_back({name(i), name(j)});
    return {{"m", m}, {"edges", e}, {"ties", t}};
  }
};

inline Tournament build_tournament(const PMatrix& pm, double tol) {
  Tournament t;
  t.m = pm.m();
  t.beats.assign(t.m * t.m, 0);
  t.half.assign(t.m * t.m, 0);
  for (std::size_t i = 0; i < t.m; ++i)
    for (std::size_t j = i + 1; j < t.m; ++j) {
      const bool ij = pm(i, j) >= 0.5 - tol;
      const bool ji = pm(j, i) >= 0.5 - tol;
      const bool near_half = std::abs(pm(i, j) - 0.5) <= tol && std::abs(pm(j, i) - 0.5) <= tol;
      if (near_half || ij == ji) {
        t.beats[i * t.m + j] = t.beats[j * t.m + i] = 1;
        t.half[i * t.m + j] = t.half[j * t.m + i] = 1;
      } else {
        t.beats[i * t.m + j] = ij;
        t.beats[j * t.m + i] = ji;
      }
    }
  return t;
}

inline std::vector<double> copeland_scores(const Tournament& t) {
  std::vector<double> s(t.m, 0.0);
  for (std::size_t i = 0; i < t.m; ++i)
    for (std::size_t j = 0; j < t.m; ++j) {
      if (i == j) continue;
      if (t.tie(i, j)) s[i] += 0.5;
      else if (t.beat(i, j)) s[i] += 1.0;
    }
  return s;
}

/// Highest Copeland score; ties go to the earliest declared candidate.
inline std::size_t copeland_winner(const Tournament& t) {
  const auto s = copeland_scores(t);
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i] > s[best]) best = i;
  return best;
}

/// True when w reaches every other candidate in at most two dominance steps.
/// Half-point ties count as dominance in both directions.
inline bool uncovered_check(const Tournament& t, std::size_t w) {
  for (std::size_t x = 0; x < t.m; ++x) {
    if (x == w || t.beat(w, x)) continue;
    bool reached = false;
    for (std::size_t y = 0; y < t.m && !reached; ++y)
      reached = y != w && y != x && t.beat(w, y) && t.beat(y, x);
    if (!reached) return false;
  }
  return true;
}

struct PipelineResult {
  std::size_t winner = 0;
  double distortion = 1.0;
  std::size_t optimum = 0;
  std::vector<double> scores;
  PMatrix pmatrix;
};

inline PipelineResult pipeline_distortion(const MetricInstance& inst, const ModelConfig& model,
                                          const EstimationMode& mode) {
  PipelineResult r;
  r.pmatrix = build_pmatrix(inst, model, mode);
  const Tournament t = build_tournament(r.pmatrix, mode.default_tol());
  r.scores = copeland_scores(t);
  r.winner = copeland_winner(t);
  r.optimum = social_optimum(inst).first;
  r.distortion = distortion_of(inst, r.winner);
  return r;
}

}  // namespace delib
