#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "delib/errors.hpp"
#include "delib/metric.hpp"
#include "delib/parallel.hpp"
#include "delib/rng.hpp"
#include "json.hpp"

namespace delib {

/// Concave, non-decreasing map of [0,1] onto [0,1] with g(0)=0, g(1)=1.
class BiasTransform {
public:
  enum class Kind { Linear, Sqrt, Power };

  static BiasTransform linear() { return BiasTransform(Kind::Linear, 1.0); }
  static BiasTransform sqrt() { return BiasTransform(Kind::Sqrt, 0.5); }
  static BiasTransform power(double e) {
    if (!(e > 0.0 && e <= 1.0)) throw InvalidConfig("power exponent must lie in (0,1]");
    return BiasTransform(Kind::Power, e);
  }

  Kind kind() const { return kind_; }
  double exponent() const { return exponent_; }

  double operator()(double x) const {
    switch (kind_) {
      case Kind::Linear: return x;
      case Kind::Sqrt: return std::sqrt(x);
      case Kind::Power: return std::pow(x, exponent_);
    }
    return x;
  }

  /// "linear", "sqrt", or "pow:E".
  std::string name() const {
    switch (kind_) {
      case Kind::Linear: return "linear";
      case Kind::Sqrt: return "sqrt";
      case Kind::Power: {
        nlohmann::json e = exponent_;
        return "pow:" + e.dump();
      }
    }
    return "linear";
  }
  static BiasTransform parse(const std::string& s) {
    if (s == "linear") return linear();
    if (s == "sqrt") return sqrt();
    if (s.rfind("pow:", 0) == 0) {
      double e = 0.0;
      try {
        e = std::stod(s.substr(4));
      } catch (const std::exception&) {
        throw InvalidConfig("bad power exponent in '" + s + "'");
      }
      return power(e);
    }
    throw InvalidConfig("unknown bias transform '" + s + "' (expected linear, sqrt, pow:E)");
  }

  friend bool operator==(const BiasTransform&, const BiasTransform&) = default;

private:
  BiasTransform(Kind k, double e) : kind_(k), exponent_(e) {}
  Kind kind_ = Kind::Linear;
  double exponent_ = 1.0;
};

enum class Variant { Averaging, RandomChoice };

struct ModelConfig {
  Variant variant = Variant::Averaging;
  int k = 1;
  BiasTransform g = BiasTransform::linear();
  double beta = 1.0;
  bool tie_to_first = true;
  bool all_zero_to_first = true;

  static ModelConfig averaging(int k) {
    ModelConfig c;
    c.k = k;
    return c;
  }
  static ModelConfig random_choice(int k, BiasTransform g = BiasTransform::linear(), double beta = 1.0) {
    ModelConfig c;
    c.variant = Variant::RandomChoice;
    c.k = k;
    c.g = g;
    c.beta = beta;
    return c;
  }

  void validate() const {
    if (k < 1) throw InvalidConfig("group size k must be at least 1");
    if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidConfig("beta must lie in [0,1]");
  }

  nlohmann::json to_json() const {
    return {{"variant", variant == Variant::Averaging ? "averaging" : "random_choice"},
            {"k", k},
            {"g", g.name()},
            {"beta", beta},
            {"tie_to_first", tie_to_first},
            {"all_zero_to_first", all_zero_to_first}};
  }
  static ModelConfig from_json(const nlohmann::json& j) {
    ModelConfig c;
    const auto v = j.value("variant", std::string("averaging"));
    if (v == "averaging") c.variant = Variant::Averaging;
    else if (v == "random_choice" || v == "random") c.variant = Variant::RandomChoice;
    else throw InvalidConfig("unknown variant '" + v + "'");
    c.k = j.at("k").get<int>();
    c.g = BiasTransform::parse(j.value("g", std::string("linear")));
    c.beta = j.value("beta", 1.0);
    c.tie_to_first = j.value("tie_to_first", true);
    c.all_zero_to_first = j.value("all_zero_to_first", true);
    c.validate();
    return c;
  }
};

/// Bias sums within this many units (times k) of zero are treated as ties.
inline constexpr double kTieTolerance = 1e-12;

inline bool is_tie(double sum, std::size_t k) { return std::abs(sum) <= kTieTolerance * static_cast<double>(k); }

/// 1 when the group's summed bias favors the first alternative, else 2.
inline int averaging_outcome(std::span<const double> biases, bool tie_to_first = true) {
  const double sum = std::accumulate(biases.begin(), biases.end(), 0.0);
  if (is_tie(sum, biases.size())) return tie_to_first ? 1 : 2;
  return sum < 0.0 ? 1 : 2;
}

namespace detail {

inline double random_choice_prob(double a, double b, double negatives, double k, double beta, bool all_zero_to_first) {
  const double share = a + b > 0.0 ? a / (a + b) : (all_zero_to_first ? 1.0 : 0.5);
  return beta * share + (1.0 - beta) * negatives / k;
}

}  // namespace detail

/// Probability that the group outputs the first alternative:
/// beta * A/(A+B) + (1-beta) * |S1|/k.
inline double random_choice_win_prob(std::span<const double> biases, const BiasTransform& g, double beta,
                                     bool all_zero_to_first = true) {
  double a = 0.0;
  double b = 0.0;
  double negatives = 0.0;
  for (double x : biases) {
    if (x < 0.0) {
      a += g(-x);
      negatives += 1.0;
    } else if (x > 0.0) {
      b += g(x);
    }
  }
  return detail::random_choice_prob(a, b, negatives, static_cast<double>(biases.size()), beta, all_zero_to_first);
}

enum class PkMethod { Exact, MonteCarlo };

struct PkResult {
  double value = 0.0;
  double std_error = 0.0;
  PkMethod method = PkMethod::Exact;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const {
    nlohmann::json j = {{"value", value}, {"stderr", std_error}, {"method", method == PkMethod::Exact ? "Exact" : "MonteCarlo"}};
    if (method == PkMethod::MonteCarlo) {
      j["trials"] = trials;
      j["seed"] = seed;
    }
    return j;
  }
};

/// Win probability of the first alternative for a group holding counts[j]
/// copies of atom j.
inline double group_win_prob(const BiasDistribution& d, std::span<const int> counts, const ModelConfig& model) {
  const auto& atoms = d.atoms();
  if (model.variant == Variant::Averaging) {
    double sum = 0.0;
    for (std::size_t j = 0; j < atoms.size(); ++j) sum += counts[j] * atoms[j].value;
    if (is_tie(sum, static_cast<std::size_t>(model.k))) return model.tie_to_first ? 1.0 : 0.0;
    return sum < 0.0 ? 1.0 : 0.0;
  }
  double a = 0.0;
  double b = 0.0;
  double negatives = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    const double v = atoms[j].value;
    if (v < 0.0) {
      a += counts[j] * model.g(-v);
      negatives += counts[j];
    } else if (v > 0.0) {
      b += counts[j] * model.g(v);
    }
  }
  return detail::random_choice_prob(a, b, negatives, model.k, model.beta, model.all_zero_to_first);
}

inline double multiset_count(std::size_t atoms, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * static_cast<double>(atoms - 1 + i) / i;
  return c;
}

/// Exact p_k for a bias distribution: sums over multisets of atoms with
/// multinomial weights.
inline double exact_pk(const BiasDistribution& d, const ModelConfig& model, double budget = 2e6) {
  model.validate();
  const std::size_t n = d.size();
  const int k = model.k;
  if (multiset_count(n, k) > budget)
    throw EnumerationBudgetExceeded("exact enumeration needs " + std::to_string(multiset_count(n, k)) +
                                    " multisets, budget is " + std::to_string(budget));
  std::vector<std::vector<double>> powers(n, std::vector<double>(k + 1, 1.0));
  for (std::size_t j = 0; j < n; ++j)
    for (int c = 1; c <= k; ++c) powers[j][c] = powers[j][c - 1] * d.atoms()[j].prob;
  std::vector<double> binom((k + 1) * (k + 1), 0.0);
  for (int r = 0; r <= k; ++r) {
    binom[r * (k + 1)] = 1.0;
    for (int c = 1; c <= r; ++c) binom[r * (k + 1) + c] = binom[(r - 1) * (k + 1) + c - 1] + binom[(r - 1) * (k + 1) + c];
  }
  std::vector<int> counts(n, 0);
  // Neumaier-compensated sum over the fixed enumeration order.
  double sum = 0.0;
  double comp = 0.0;
  auto add = [&](double x) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  };
  auto rec = [&](auto&& self, std::size_t j, int left, double weight) -> void {
    if (weight == 0.0) return;
    if (j + 1 == n) {
      counts[j] = left;
      const double w = weight * powers[j][left];
      if (w != 0.0) add(w * group_win_prob(d, counts, model));
      return;
    }
    for (int c = 0; c <= left; ++c) {
      counts[j] = c;
      self(self, j + 1, left - c, weight * binom[left * (k + 1) + c] * powers[j][c]);
    }
  };
  rec(rec, 0, k, 1.0);
  return std::clamp(sum + comp, 0.0, 1.0);
}

inline PkResult exact_pk(const MetricInstance& inst, const ModelConfig& model, std::size_t w, std::size_t x,
                         double budget = 2e6) {
  PkResult r;
  r.value = exact_pk(bias_distribution(inst, w, x), model, budget);
  return r;
}

/// Monte-Carlo estimate of p_k. Trial t draws its group from the stream
/// (seed, t), so the estimate is the same for any thread count.
inline PkResult monte_carlo_pk(const MetricInstance& inst, const ModelConfig& model, std::size_t w, std::size_t x,
                               std::uint64_t trials, std::uint64_t seed, unsigned threads = 1) {
  model.validate();
  if (trials == 0) throw InvalidConfig("trials must be at least 1");
  const BiasDistribution d = bias_distribution(inst, w, x);
  std::vector<double> cdf;
  double acc = 0.0;
  for (const auto& a : d.atoms()) cdf.push_back(acc += a.prob);
  cdf.back() = 1.0;
  const std::size_t n = d.size();
  const std::uint64_t chunks = std::min<std::uint64_t>(trials, 64);
  std::vector<std::uint64_t> wins(chunks, 0);
  parallel_for(chunks, threads, [&](std::size_t c) {
    std::vector<int> counts(n);
    const std::uint64_t begin = trials * c / chunks;
    const std::uint64_t end = trials * (c + 1) / chunks;
    std::uint64_t local = 0;
    for (std::uint64_t t = begin; t < end; ++t) {
      Stream rng(seed, t);
      std::fill(counts.begin(), counts.end(), 0);
      for (int i = 0; i < model.k; ++i) {
        const double u = rng.uniform();
        const auto j = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        ++counts[std::min(j, n - 1)];
      }
      const double p = group_win_prob(d, counts, model);
      if (p >= 1.0 || (p > 0.0 && rng.uniform() < p)) ++local;
    }
    wins[c] = local;
  });
  const std::uint64_t total = std::accumulate(wins.begin(), wins.end(), std::uint64_t{0});
  PkResult r;
  r.method = PkMethod::MonteCarlo;
  r.trials = trials;
  r.seed = seed;
  r.value = static_cast<double>(total) / static_cast<double>(trials);
  r.std_error = std::sqrt(r.value * (1.0 - r.value) / static_cast<double>(trials));
  return r;
}

}  // namespace delib
