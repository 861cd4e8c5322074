#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "delib/instances.hpp"
#include "delib/metric.hpp"

using namespace delib;

namespace {

MetricInstance two_candidate_line(double voter_to_a) {
  MetricInstance inst({"a", "b"}, {{"v", 1.0}});
  inst.set_distance("a", "b", 1.0);
  inst.set_distance("v", "a", voter_to_a);
  inst.set_distance("v", "b", 1.0 - voter_to_a);
  return inst;
}

}  // namespace

TEST(Validate, LineMetricIsClean) { EXPECT_TRUE(validate(two_candidate_line(0.5)).empty()); }

TEST(Validate, TriangleViolationNamesThePoints) {
  MetricInstance inst({"a", "b", "c"}, {{"v", 1.0}});
  inst.set_distance("a", "b", 1.0);
  inst.set_distance("b", "c", 1.0);
  inst.set_distance("a", "c", 3.0);
  inst.set_distance("v", "a", 1.0);
  inst.set_distance("v", "b", 1.0);
  inst.set_distance("v", "c", 2.0);
  const auto issues = validate(inst);
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_NE(issues[0].find("a"), std::string::npos);
  EXPECT_NE(issues[0].find("b"), std::string::npos);
  EXPECT_NE(issues[0].find("c"), std::string::npos);
}

TEST(Validate, MassSumViolation) {
  MetricInstance inst({"a", "b"}, {{"u", 0.6}, {"v", 0.6}});
  inst.set_distance("a", "b", 1.0);
  for (const char* l : {"u", "v"}) {
    inst.set_distance(l, "a", 0.5);
    inst.set_distance(l, "b", 0.5);
  }
  const auto issues = validate(inst);
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_NE(issues[0].find("mass"), std::string::npos);
}

TEST(Validate, StructuralProblems) {
  MetricInstance one({"a"}, {{"v", 1.0}});
  EXPECT_FALSE(validate(one).empty());
  MetricInstance neg({"a", "b"}, {{"v", 1.0}});
  neg.set_distance("a", "b", -1.0);
  EXPECT_FALSE(validate(neg).empty());
}

TEST(NormalizedBias, Examples) {
  EXPECT_DOUBLE_EQ(normalized_bias(two_candidate_line(0.0), 0, 0, 1), -1.0);
  EXPECT_DOUBLE_EQ(normalized_bias(two_candidate_line(0.5), 0, 0, 1), 0.0);
  EXPECT_DOUBLE_EQ(normalized_bias(two_candidate_line(0.25), 0, 0, 1), -0.5);
}

TEST(NormalizedBias, ZeroCandidateDistanceThrows) {
  MetricInstance inst({"a", "b"}, {{"v", 1.0}});
  EXPECT_THROW(normalized_bias(inst, 0, 0, 1), ZeroCandidateDistance);
}

TEST(NormalizedBias, BoundedOnRandomInstances) {
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto inst = random_euclidean_instance(3, 4, 2, s);
    for (std::size_t l = 0; l < inst.num_locations(); ++l)
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
          if (i != j) {
            const double b = normalized_bias(inst, l, i, j);
            EXPECT_GE(b, -1.0);
            EXPECT_LE(b, 1.0);
          }
  }
}

TEST(BiasDistribution, MergesDuplicatesAndSorts) {
  const BiasDistribution d({{0.3, 0.4}, {0.3, 0.6}});
  ASSERT_EQ(d.size(), 1u);
  EXPECT_DOUBLE_EQ(d.atoms()[0].value, 0.3);
  EXPECT_DOUBLE_EQ(d.atoms()[0].prob, 1.0);
  const BiasDistribution e({{0.5, 0.5}, {-0.5, 0.25}, {0.0, 0.25}});
  EXPECT_LT(e.atoms()[0].value, e.atoms()[1].value);
  EXPECT_LT(e.atoms()[1].value, e.atoms()[2].value);
  EXPECT_DOUBLE_EQ(e.mean(), 0.125);
}

TEST(BiasDistribution, RejectsBadInput) {
  EXPECT_THROW(BiasDistribution({{0.0, 0.5}}), InvalidInstance);
  EXPECT_THROW(BiasDistribution({{1.5, 1.0}}), InvalidInstance);
}

TEST(BiasDistribution, SingleLocationAtW) {
  const auto d = bias_distribution(two_candidate_line(0.0), 0, 1);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d.atoms()[0].value, -1.0);
  EXPECT_EQ(d.atoms()[0].prob, 1.0);
}

TEST(BiasDistribution, Lb1OddInstance) {
  const auto d = bias_distribution(lb1_instance(3), 0, 1);
  EXPECT_EQ(d, BiasDistribution({{-0.5, 0.5}, {1.0, 0.5}}));
  EXPECT_DOUBLE_EQ(d.mean(), 0.25);
}

TEST(BiasDistribution, SwappingCandidatesNegates) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto inst = random_euclidean_instance(3, 5, 2, s);
    EXPECT_EQ(bias_distribution(inst, 0, 2).negated(), bias_distribution(inst, 2, 0));
  }
}

TEST(SocialCost, Examples) {
  EXPECT_DOUBLE_EQ(social_cost(two_candidate_line(0.0), "a"), 0.0);
  MetricInstance inst({"a", "b"}, {{"u", 0.5}, {"v", 0.5}});
  inst.set_distance("a", "b", 2.0);
  inst.set_distance("u", "a", 1.0);
  inst.set_distance("u", "b", 1.0);
  inst.set_distance("v", "a", 3.0);
  inst.set_distance("v", "b", 1.0);
  EXPECT_DOUBLE_EQ(social_cost(inst, "a"), 2.0);
  EXPECT_THROW(social_cost(inst, "zz"), UnknownCandidate);
  EXPECT_NEAR(social_cost(example1_instance(6, 2, 0.01), "c"), 1.01, 1e-12);
}

TEST(SocialOptimum, MatchesExhaustiveMinimumAndTieOrder) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto inst = random_euclidean_instance(5, 6, 2, s);
    const auto [best, cost] = social_optimum(inst);
    for (std::size_t c = 0; c < inst.m(); ++c) {
      EXPECT_LE(cost, social_cost(inst, c));
      if (c < best) EXPECT_LT(cost, social_cost(inst, c));
    }
  }
  const auto tie = two_candidate_line(0.5);
  EXPECT_EQ(social_optimum(tie).first, 0u);
}

TEST(Distortion, Examples) {
  const auto inst = random_euclidean_instance(4, 5, 2, 1);
  EXPECT_DOUBLE_EQ(distortion_of(inst, social_optimum(inst).first), 1.0);
  EXPECT_THROW(distortion_of(two_candidate_line(0.0), 1), DegenerateOptimum);
}

// SC(W)/SC(X) <= (1 + g)/(1 - g) with g >= 0 the mean bias of (W, X).
TEST(Distortion, MeanBiasRatioBound) {
  std::mt19937_64 rng(11);
  int checked = 0;
  for (std::uint64_t s = 0; checked < 500; ++s) {
    const auto inst = random_euclidean_instance(2 + s % 4, 2 + s % 7, 1 + s % 3, s);
    std::size_t w = rng() % inst.m();
    std::size_t x = rng() % inst.m();
    if (x == w) x = (x + 1) % inst.m();
    double g = bias_distribution(inst, w, x).mean();
    if (g < 0.0) {
      std::swap(w, x);
      g = -g;
    }
    if (!(g < 1.0)) continue;
    EXPECT_LE(social_cost(inst, w) / social_cost(inst, x), (1.0 + g) / (1.0 - g) * (1.0 + 1e-12));
    ++checked;
  }
}

// With g < 0 the ratio is below 1 but can exceed (1 + g)/(1 - g).
TEST(Distortion, MeanBiasRatioBoundNeedsNonNegativeMean) {
  MetricInstance inst({"w", "x"}, {{"a", 0.5}, {"b", 0.5}});
  inst.set_distance("w", "x", 1.0);
  inst.set_distance("a", "w", 0.0);
  inst.set_distance("a", "x", 1.0);
  inst.set_distance("b", "w", 2.0);
  inst.set_distance("b", "x", 2.0);
  inst.set_distance("a", "b", 2.0);
  EXPECT_TRUE(validate(inst).empty());
  const double g = bias_distribution(inst, 0, 1).mean();
  EXPECT_DOUBLE_EQ(g, -0.5);
  EXPECT_DOUBLE_EQ(social_cost(inst, 0) / social_cost(inst, 1), 2.0 / 3.0);
  EXPECT_GT(social_cost(inst, 0) / social_cost(inst, 1), (1.0 + g) / (1.0 - g));
}

TEST(MetricInstance, JsonRoundTrip) {
  const auto inst = random_euclidean_instance(3, 4, 2, 9);
  const auto back = MetricInstance::from_json(inst.to_json());
  EXPECT_EQ(back.to_json(), inst.to_json());
}

TEST(MetricInstance, LoaderRejectsUnknownIdsAndConflicts) {
  nlohmann::json j = {{"candidates", {"a", "b"}},
                      {"locations", {{{"id", "v"}, {"mass", 1.0}}}},
                      {"distances", {{"a|b", 1.0}, {"a|zz", 1.0}}}};
  EXPECT_THROW(MetricInstance::from_json(j), InvalidInstance);
  j["distances"] = {{"a|b", 1.0}, {"b|a", 2.0}};
  EXPECT_THROW(MetricInstance::from_json(j), InvalidInstance);
}

TEST(MetricInstance, LoaderNormalizesNearUnitMasses) {
  nlohmann::json j = {{"candidates", {"a", "b"}},
                      {"locations", {{{"id", "u"}, {"mass", 0.5}}, {{"id", "v"}, {"mass", 0.5 + 1e-10}}}},
                      {"distances", {{"a|b", 1.0}}}};
  const auto inst = MetricInstance::from_json(j);
  EXPECT_DOUBLE_EQ(inst.mass(0) + inst.mass(1), 1.0);
  j["locations"][1]["mass"] = 0.7;
  EXPECT_THROW(MetricInstance::from_json(j), InvalidInstance);
}
