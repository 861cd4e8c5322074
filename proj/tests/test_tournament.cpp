#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "delib/bounds.hpp"
#include "delib/instances.hpp"
#include "delib/tournament.hpp"

using namespace delib;

namespace {

PMatrix from_rows(std::vector<std::vector<double>> rows) {
  PMatrix pm(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.size(); ++j)
      if (i != j) pm(i, j) = rows[i][j];
  return pm;
}

PMatrix random_pmatrix(std::size_t m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PMatrix pm(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      double p = u(rng);
      if (u(rng) < 0.15) p = 0.5;
      pm(i, j) = p;
      pm(j, i) = 1.0 - p;
    }
  return pm;
}

MetricInstance permuted(const MetricInstance& inst, const std::vector<std::size_t>& perm) {
  std::vector<std::string> cands;
  for (auto p : perm) cands.push_back(inst.candidate(p));
  MetricInstance out(cands, inst.locations());
  auto src = [&](std::size_t q) { return q < inst.m() ? perm[q] : q; };
  for (std::size_t a = 0; a < inst.num_points(); ++a)
    for (std::size_t b = a + 1; b < inst.num_points(); ++b) out.set_distance(a, b, inst.d(src(a), src(b)));
  return out;
}

}  // namespace

TEST(BuildPMatrix, AllMassAtFirstCandidate) {
  const auto inst = line_instance_from_bias_distribution(BiasDistribution({{-1.0, 1.0}}));
  const auto pm = build_pmatrix(inst, ModelConfig::averaging(3), EstimationMode::exact_mode());
  EXPECT_EQ(pm(0, 1), 1.0);
}

TEST(BuildPMatrix, Lb1) {
  const auto pm = build_pmatrix(lb1_instance(3), ModelConfig::averaging(3), EstimationMode::exact_mode());
  EXPECT_DOUBLE_EQ(pm(0, 1), 0.5);
}

TEST(BuildPMatrix, WorstCaseInstanceConditions) {
  const double delta = 1e-3;
  const auto inst = copeland_k2_worst_case(delta);
  const auto pm = build_pmatrix(inst, ModelConfig::averaging(2), EstimationMode::exact_mode());
  const std::size_t W = 0, X = 1, Y = 2;
  EXPECT_GE(pm(W, Y), 0.5);
  EXPECT_GE(pm(Y, X), 0.5);
  EXPECT_LE(pm(Y, X) - 0.5, delta * delta);
  EXPECT_GE(pm(X, W), 0.5);
}

TEST(BuildPMatrix, ExactComplementAndMonteCarloAgreement) {
  const auto inst = random_euclidean_instance(4, 5, 2, 8);
  const auto model = ModelConfig::averaging(3);
  const auto ex = build_pmatrix(inst, model, EstimationMode::exact_mode());
  const auto mc = build_pmatrix(inst, model, EstimationMode::monte_carlo(40000, 5, 2));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      if (i == j) continue;
      EXPECT_NEAR(ex(i, j) + ex(j, i), 1.0, 1e-9);
      const double sigma = std::sqrt(ex(i, j) * (1.0 - ex(i, j)) / 40000.0);
      EXPECT_LE(std::abs(mc(i, j) - ex(i, j)), 4.0 * sigma + 1e-12);
    }
}

TEST(PMatrix, SerializationRoundTrip) {
  const auto pm = build_pmatrix(random_euclidean_instance(3, 4, 2, 1), ModelConfig::averaging(2),
                                EstimationMode::exact_mode());
  EXPECT_EQ(PMatrix::from_json(pm.to_json()).to_json(), pm.to_json());
  const auto csv = pm.to_csv();
  EXPECT_EQ(csv.rfind("row,col,p\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 6);
}

TEST(BuildTournament, ToleranceSemantics) {
  const double tol = 1e-9;
  const auto t = build_tournament(from_rows({{0, 0.6, 0.5, 0.5 - tol / 2}, {0.4, 0, 0.3, 0.2},
                                             {0.5, 0.7, 0, 0.9}, {0.5 + tol / 2, 0.8, 0.1, 0}}),
                                  tol);
  EXPECT_TRUE(t.beat(0, 1));
  EXPECT_FALSE(t.beat(1, 0));
  EXPECT_TRUE(t.tie(0, 2));
  EXPECT_TRUE(t.beat(0, 2) && t.beat(2, 0));
  EXPECT_TRUE(t.beat(0, 3));
  EXPECT_TRUE(t.tie(0, 3));
}

TEST(BuildTournament, InconsistentEstimatesBecomeTies) {
  const auto t = build_tournament(from_rows({{0, 0.55}, {0.52, 0}}), 0.0);
  EXPECT_TRUE(t.tie(0, 1));
  const auto s = copeland_scores(t);
  EXPECT_DOUBLE_EQ(s[0] + s[1], 1.0);
}

TEST(CopelandScores, Examples) {
  const auto cycle = build_tournament(from_rows({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}), 0.0);
  EXPECT_EQ(copeland_scores(cycle), (std::vector<double>{1, 1, 1}));
  EXPECT_EQ(copeland_winner(cycle), 0u);
  const auto dom = build_tournament(
      from_rows({{0, 1, 1, 1}, {0, 0, 1, 0}, {0, 0, 0, 1}, {0, 1, 0, 0}}), 0.0);
  EXPECT_EQ(copeland_scores(dom)[0], 3.0);
  EXPECT_EQ(copeland_winner(dom), 0u);
  const auto ties = build_tournament(from_rows({{0, .5, .5}, {.5, 0, .5}, {.5, .5, 0}}), 0.0);
  EXPECT_EQ(copeland_scores(ties), (std::vector<double>{1, 1, 1}));
  const auto later = build_tournament(from_rows({{0, 0, 1}, {1, 0, 0}, {0, 1, 0}}), 0.0);
  EXPECT_EQ(copeland_winner(later), 0u);
}

TEST(UncoveredCheck, Examples) {
  const auto transitive = build_tournament(from_rows({{0, 1, 1}, {0, 0, 1}, {0, 0, 0}}), 0.0);
  EXPECT_TRUE(uncovered_check(transitive, 0));
  EXPECT_FALSE(uncovered_check(transitive, 2));
  const auto two = build_tournament(from_rows({{0, 1}, {0, 0}}), 0.0);
  EXPECT_FALSE(uncovered_check(two, 1));
}

TEST(Copeland, WinnerIsUncoveredAndScoresSum) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 2 + trial % 11;
    const auto t = build_tournament(random_pmatrix(m, rng), 0.0);
    const auto s = copeland_scores(t);
    EXPECT_DOUBLE_EQ(std::accumulate(s.begin(), s.end(), 0.0), m * (m - 1) / 2.0);
    EXPECT_TRUE(uncovered_check(t, copeland_winner(t)));
  }
}

TEST(Tournament, JsonExport) {
  const auto t = build_tournament(from_rows({{0, 1, .5}, {0, 0, 1}, {.5, 0, 0}}), 0.0);
  const auto j = t.to_json({"a", "b", "c"});
  EXPECT_EQ(j["edges"].size(), 2u);
  EXPECT_EQ(j["ties"].size(), 1u);
}

TEST(Pipeline, OptimumDominatingEverythingGivesOne) {
  MetricInstance inst({"a", "b", "c"}, {{"v", 1.0}});
  inst.set_distance("a", "b", 1.0);
  inst.set_distance("a", "c", 1.0);
  inst.set_distance("b", "c", 1.0);
  inst.set_distance("v", "a", 0.1);
  inst.set_distance("v", "b", 1.0);
  inst.set_distance("v", "c", 1.0);
  const auto r = pipeline_distortion(inst, ModelConfig::averaging(3), EstimationMode::exact_mode());
  EXPECT_EQ(r.winner, 0u);
  EXPECT_DOUBLE_EQ(r.distortion, 1.0);
}

TEST(Pipeline, WorstCaseK2) {
  const auto r = pipeline_distortion(copeland_k2_worst_case(1e-3), ModelConfig::averaging(2),
                                     EstimationMode::exact_mode());
  const double target = 3.0 + std::sqrt(2.0);
  EXPECT_EQ(r.winner, 0u);
  EXPECT_EQ(r.optimum, 1u);
  EXPECT_LE(r.distortion, target);
  EXPECT_GE(r.distortion, target - 0.05);
}

TEST(Pipeline, RandomInstancesRespectThetaBounds) {
  const double bound2 = copeland_distortion_from_theta(std::sqrt(2.0) - 1.0 + 1e-4);
  const double bound3 = copeland_distortion_from_theta(0.2530);
  for (std::uint64_t s = 0; s < 150; ++s) {
    const auto inst = random_euclidean_instance(3 + s % 4, 4 + s % 4, 1 + s % 3, 500 + s);
    const auto r3 = pipeline_distortion(inst, ModelConfig::averaging(3), EstimationMode::exact_mode());
    EXPECT_LE(r3.distortion, 2.81);
    EXPECT_LE(r3.distortion, bound3);
    const auto r2 = pipeline_distortion(inst, ModelConfig::averaging(2), EstimationMode::exact_mode());
    EXPECT_LE(r2.distortion, std::min(bound2, 3.0 + std::sqrt(2.0)));
  }
}

TEST(Pipeline, RelabelingPermutesWinner) {
  std::mt19937_64 rng(4);
  for (std::uint64_t s = 0; s < 60; ++s) {
    const auto inst = random_euclidean_instance(5, 5, 2, 900 + s);
    const auto model = ModelConfig::averaging(3);
    const auto base = pipeline_distortion(inst, model, EstimationMode::exact_mode());
    const double top = *std::max_element(base.scores.begin(), base.scores.end());
    if (std::count(base.scores.begin(), base.scores.end(), top) != 1) continue;
    std::vector<std::size_t> perm(5);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto moved = pipeline_distortion(permuted(inst, perm), model, EstimationMode::exact_mode());
    EXPECT_EQ(perm[moved.winner], base.winner);
    EXPECT_DOUBLE_EQ(moved.distortion, base.distortion);
  }
}
