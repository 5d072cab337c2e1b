#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "cuts/error.hpp"
#include "cuts/variance.hpp"
#include "test_util.hpp"

namespace cuts {
namespace {

using testing::fake_group;

std::vector<double> ones_then_zeros(int ones, int n) {
  std::vector<double> r(static_cast<std::size_t>(n), 0.0);
  std::fill_n(r.begin(), ones, 1.0);
  return r;
}

std::vector<double> concat(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

TEST(Decompose, SaturatedStdHalfCuts) {
  const auto s = ones_then_zeros(8, 8), c = ones_then_zeros(4, 8);
  const auto r = decompose(s, c);
  EXPECT_DOUBLE_EQ(r.var_mixed, oracle_pooled_variance(concat(s, c)));
  EXPECT_DOUBLE_EQ(r.var_mixed, 0.1875);
  EXPECT_DOUBLE_EQ(r.within, 0.125);
  EXPECT_DOUBLE_EQ(r.between, 0.0625);
  EXPECT_EQ(r.label, SaturationCase::kCaseA);
}

TEST(Decompose, AllOnesIsZero) {
  const auto s = ones_then_zeros(8, 8);
  const auto r = decompose(s, s);
  EXPECT_EQ(r.var_mixed, 0.0);
  EXPECT_EQ(r.between, 0.0);
}

TEST(Decompose, CaseB) {
  const auto s = ones_then_zeros(0, 8), c = ones_then_zeros(2, 8);
  const auto r = decompose(s, c);
  EXPECT_NEAR(r.var_mixed, oracle_pooled_variance(concat(s, c)), 1e-15);
  EXPECT_NEAR(r.var_mixed, 0.109375, 1e-15);
  EXPECT_EQ(r.label, SaturationCase::kCaseB);
}

TEST(Decompose, RejectsUnequalHalves) {
  const auto s = ones_then_zeros(1, 8), c = ones_then_zeros(1, 6);
  EXPECT_THROW(decompose(s, c), InvalidInput);
  EXPECT_THROW(decompose(std::vector<double>{}, std::vector<double>{}), InvalidInput);
  EXPECT_THROW(decompose(fake_group({1, 1}, {})), InvalidInput);
}

TEST(Decompose, MatchesPooledOracle) {
  std::mt19937_64 g(31);
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 10000; ++trial) {
    const int half = 1 + trial % 12;
    std::vector<double> s(static_cast<std::size_t>(half)), c(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = trial % 2 ? coin(g) : u(g);
      c[i] = trial % 2 ? coin(g) : u(g);
    }
    const auto r = decompose(s, c);
    ASSERT_NEAR(r.var_mixed, oracle_pooled_variance(concat(s, c)), 1e-12);
    ASSERT_GE(r.between, 0.0);
    ASSERT_EQ(r.between == 0.0, r.mu_std == r.mu_cuts);
  }
}

TEST(Decompose, GroupOverloadUsesOrigins) {
  const auto g = fake_group({1, 1, 1, 1}, {1, 0, 0, 0});
  const auto r = decompose(g);
  EXPECT_EQ(r.mu_std, 1.0);
  EXPECT_EQ(r.mu_cuts, 0.25);
}

TEST(SaturationBounds, CaseAAndCaseB) {
  for (int n = 1; n <= 16; ++n) {
    for (int k = 0; k <= n; ++k) {
      const auto sat1 = ones_then_zeros(n, n), sat0 = ones_then_zeros(0, n);
      const auto c = ones_then_zeros(k, n);
      const auto a = decompose(sat1, c);
      EXPECT_GE(a.var_mixed, 0.25 * (1 - a.mu_cuts) * (1 - a.mu_cuts));
      if (k < n) EXPECT_GT(a.var_mixed, 0.0);
      const auto b = decompose(sat0, c);
      EXPECT_GE(b.var_mixed, 0.25 * b.mu_cuts * b.mu_cuts);
      if (k > 0) EXPECT_GT(b.var_mixed, 0.0);
    }
  }
}

TEST(Oracle, KnownValues) {
  EXPECT_EQ(oracle_pooled_variance(std::vector<double>{1, 1, 0, 0}), 0.25);
  EXPECT_EQ(oracle_pooled_variance(std::vector<double>{0.3, 0.3, 0.3}), 0.0);
  EXPECT_THROW(oracle_pooled_variance(std::vector<double>{}), InvalidInput);
}

TEST(Census, AllCorrect) {
  std::vector<RolloutGroup> batch{fake_group({1, 1}, {1, 1}), fake_group({1, 1, 1, 1}, {})};
  const auto c = saturation_census(batch, 1e-6);
  EXPECT_EQ(c.all.groups, 2);
  EXPECT_EQ(c.all.zero_variance_fraction, 1.0);
  EXPECT_EQ(c.all.mean_abs_advantage, 0.0);
  EXPECT_EQ(c.mixed.groups, 1);
  EXPECT_EQ(c.standard.groups, 1);
}

TEST(Census, MixedExampleAndPermutationInvariance) {
  std::vector<RolloutGroup> one{fake_group(ones_then_zeros(8, 8), ones_then_zeros(4, 8))};
  EXPECT_DOUBLE_EQ(saturation_census(one, 1e-6).all.mean_var_mixed, 0.1875);

  std::vector<RolloutGroup> batch{fake_group({1, 0, 1}, {0, 0, 1}, 1),
                                  fake_group({1, 1, 1}, {1, 1, 1}, 2),
                                  fake_group({0.3, 0.9, 0.1}, {0.7, 0.2, 0.4}, 3),
                                  fake_group({1, 0, 0, 1, 1, 0}, {}, 4)};
  const auto ref = saturation_census(batch, 1e-6);
  std::sort(batch.begin(), batch.end(),
            [](const RolloutGroup& a, const RolloutGroup& b) { return a.prompt < b.prompt; });
  do {
    const auto c = saturation_census(batch, 1e-6);
    EXPECT_EQ(c.all.mean_abs_advantage, ref.all.mean_abs_advantage);
    EXPECT_EQ(c.all.mean_var_mixed, ref.all.mean_var_mixed);
    EXPECT_EQ(c.all.zero_variance_fraction, ref.all.zero_variance_fraction);
  } while (std::next_permutation(batch.begin(), batch.end(),
                                 [](const RolloutGroup& a, const RolloutGroup& b) {
                                   return a.prompt < b.prompt;
                                 }));
  EXPECT_THROW(saturation_census(std::vector<RolloutGroup>{}, 1e-6), InvalidInput);
}

TEST(SaturationCase, Names) {
  EXPECT_EQ(to_string(SaturationCase::kCaseA), "case_a");
  EXPECT_EQ(to_string(SaturationCase::kCaseB), "case_b");
  EXPECT_EQ(to_string(SaturationCase::kGeneric), "generic");
}

}  // namespace
}  // namespace cuts
