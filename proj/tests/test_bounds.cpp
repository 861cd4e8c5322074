#include <gtest/gtest.h>

#include <cmath>

#include "delib/bounds.hpp"

using namespace delib;

TEST(CopelandFromTheta, Values) {
  EXPECT_DOUBLE_EQ(copeland_distortion_from_theta(0.0), 1.0);
  EXPECT_NEAR(copeland_distortion_from_theta(std::sqrt(2.0) - 1.0), 3.0 + 2.0 * std::sqrt(2.0), 1e-12);
  const double r = 1.2522 / 0.7478;
  EXPECT_NEAR(copeland_distortion_from_theta(0.2522), r * r, 1e-12);
  EXPECT_LE(copeland_distortion_from_theta(0.2522), 2.81);
  EXPECT_THROW(copeland_distortion_from_theta(1.0), ThetaOutOfRange);
  EXPECT_THROW(copeland_distortion_from_theta(-0.1), ThetaOutOfRange);
}

TEST(LowerBoundsFromTheta, Values) {
  const auto a = lower_bounds_from_theta(0.25);
  EXPECT_NEAR(a.deterministic, 5.0 / 3.0, 1e-15);
  EXPECT_NEAR(a.randomized, 4.0 / 3.0, 1e-15);
  const auto b = lower_bounds_from_theta(0.9);
  EXPECT_EQ(b.deterministic, 3.0);
  EXPECT_EQ(b.randomized, 2.0);
  const auto c = lower_bounds_from_theta(std::sqrt(2.0) - 1.0);
  EXPECT_NEAR(c.deterministic, 1.0 + std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(c.randomized, 1.0 / (2.0 - std::sqrt(2.0)), 1e-12);
}

TEST(Bounds, MonotoneAndChained) {
  double prev_up = 0.0;
  LowerBounds prev_lb{0.0, 0.0};
  for (int i = 0; i <= 900; ++i) {
    const double t = i / 1000.0;
    const double up = copeland_distortion_from_theta(t);
    const auto lb = lower_bounds_from_theta(t);
    if (i > 0) EXPECT_GT(up, prev_up);
    EXPECT_GE(lb.deterministic, prev_lb.deterministic);
    EXPECT_GE(lb.randomized, prev_lb.randomized);
    EXPECT_LE(lb.deterministic, up);
    EXPECT_LE(lb.deterministic, 3.0);
    EXPECT_LE(lb.randomized, 2.0);
    prev_up = up;
    prev_lb = lb;
  }
}

TEST(SampleSizeAveraging, Values) {
  EXPECT_EQ(sample_size_averaging(2, 0.1, 0.1), 150u);
  EXPECT_EQ(sample_size_averaging(2, 0.1, 0.1), static_cast<std::uint64_t>(std::ceil(std::log(20.0) / 0.02)));
  const double base = std::log(20.0) / 0.02;
  EXPECT_EQ(sample_size_averaging(2, 0.05, 0.1), static_cast<std::uint64_t>(std::ceil(4.0 * base)));
  EXPECT_EQ(sample_size_averaging(10, 0.1, 0.1), static_cast<std::uint64_t>(std::ceil(std::log(900.0) / 0.02)));
  EXPECT_THROW(sample_size_averaging(1, 0.1, 0.1), InvalidConfig);
  EXPECT_THROW(sample_size_averaging(3, 0.0, 0.1), InvalidConfig);
  EXPECT_THROW(sample_size_averaging(3, 0.1, 1.0), InvalidConfig);
}

TEST(SampleSizeRandomChoice, Values) {
  const auto four = sample_size_random_choice(4, 0.1, 0.1);
  EXPECT_EQ(four.matchings, 3u);
  EXPECT_EQ(four.groups_per_matching, sample_size_averaging(4, 0.1, 0.1 / 4));
  EXPECT_EQ(four.total, 3 * four.groups_per_matching);
  EXPECT_EQ(sample_size_random_choice(5, 0.1, 0.1).matchings, 5u);
  for (std::uint64_t m = 2; m < 40; ++m) {
    const auto s = sample_size_random_choice(m, 0.1, 0.1);
    const double ratio = static_cast<double>(s.total) / (m * std::log(m * m * (m - 1) / 0.1) / 0.02);
    EXPECT_GT(ratio, 0.4);
    EXPECT_LT(ratio, 1.1);
  }
}

TEST(BoundReport, Json) {
  const auto t = BoundReport::from_theta(0.25).to_json();
  EXPECT_NEAR(t["copeland_upper"].get<double>(), 25.0 / 9.0, 1e-12);
  EXPECT_GE(t["copeland_upper"].get<double>(), t["det_lb"].get<double>());
  const auto s = BoundReport::from_samples(5, 0.05, 0.1).to_json();
  EXPECT_EQ(s["samples_averaging"].get<std::uint64_t>(), sample_size_averaging(5, 0.05, 0.1));
  EXPECT_EQ(s["samples_random_choice"]["matchings"].get<std::uint64_t>(), 5u);
}
