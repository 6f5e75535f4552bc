#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "bilatrr/rng.hpp"

using namespace bilatrr;

TEST(Rng, DerivedSeedsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 20; ++s) {
    for (std::uint64_t i = 0; i < 500; ++i) seen.insert(derive_seed(s, i));
  }
  EXPECT_EQ(seen.size(), 20u * 500u);
  EXPECT_NE(derive_seed(1, 2), derive_seed(2, 1));
}

TEST(Rng, EngineIsDeterministic) {
  Engine a = make_engine(42);
  Engine b = make_engine(42);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a(), b());
  Engine c = make_engine(42);
  Engine d = make_engine(42);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(sample_binomial(c, 30, 0.3), sample_binomial(d, 30, 0.3));
}

TEST(Rng, BinomialEdgeCases) {
  Engine e = make_engine(1);
  EXPECT_EQ(sample_binomial(e, 0, 0.5), 0);
  EXPECT_EQ(sample_binomial(e, 10, 0.0), 0);
  EXPECT_EQ(sample_binomial(e, 10, 1.0), 10);
}

TEST(Rng, BinomialMoments) {
  Engine e = make_engine(7);
  const int draws = 200000;
  const std::int64_t n = 30;
  const double p = 0.23;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double x = static_cast<double>(sample_binomial(e, n, p));
    ASSERT_GE(x, 0.0);
    ASSERT_LE(x, 30.0);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / draws;
  const double var = sq / draws - mean * mean;
  const double target_var = n * p * (1 - p);
  EXPECT_NEAR(mean, n * p, 5.0 * std::sqrt(target_var / draws));
  EXPECT_NEAR(var, target_var, 0.02 * target_var);
}

TEST(Rng, UniformRange) {
  Engine e = make_engine(9);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = sample_uniform(e, 2.0, 5.0);
    ASSERT_GE(u, 2.0);
    ASSERT_LT(u, 5.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 3.5, 0.02);
}
