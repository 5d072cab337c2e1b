#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "cuts/error.hpp"
#include "cuts/metrics.hpp"
#include "test_util.hpp"

namespace cuts {
namespace {

using testing::fake_group;

std::vector<EvalSample> samples_from(const std::vector<int>& answers, int gold = 0) {
  std::vector<EvalSample> out;
  for (int a : answers) {
    EvalSample s;
    s.answer = a;
    s.correct = a == gold;
    out.push_back(s);
  }
  return out;
}

// Mean over all size-k subsets of "any correct", by enumeration.
double brute_pass(const std::vector<bool>& correct, int k) {
  const int n = static_cast<int>(correct.size());
  double hits = 0, total = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != k) continue;
    bool any = false;
    for (int i = 0; i < n; ++i) any |= (mask >> i & 1u) && correct[static_cast<std::size_t>(i)];
    hits += any;
    total += 1;
  }
  return hits / total;
}

TEST(PassAtK, Examples) {
  EXPECT_EQ(pass_at_k(samples_from({0, -1, -1, -1}), 4), 1.0);
  EXPECT_EQ(pass_at_k(samples_from({-1, -1, 3, 2}), 2), 0.0);
  EXPECT_NEAR(pass_at_k(4, 2, 2), brute_pass({true, true, false, false}, 2), 1e-15);
  EXPECT_NEAR(pass_at_k(4, 2, 2), 5.0 / 6.0, 1e-15);
}

TEST(PassAtK, MatchesEnumeration) {
  for (int n = 1; n <= 12; ++n) {
    for (int c = 0; c <= n; ++c) {
      std::vector<bool> correct(static_cast<std::size_t>(n), false);
      std::fill_n(correct.begin(), c, true);
      double prev = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p = pass_at_k(n, c, k);
        ASSERT_NEAR(p, brute_pass(correct, k), 1e-12) << n << ' ' << c << ' ' << k;
        ASSERT_GE(p, prev);
        prev = p;
      }
    }
  }
}

TEST(PassAtK, RejectsBadArguments) {
  EXPECT_THROW(pass_at_k(4, 5, 2), InvalidInput);
  EXPECT_THROW(pass_at_k(4, 2, 5), InvalidInput);
  EXPECT_THROW(pass_at_k(4, 2, 0), InvalidInput);
  EXPECT_THROW(pass_at_k(std::vector<EvalSample>{}, 1), InvalidInput);
}

TEST(MajAtK, Examples) {
  EXPECT_EQ(maj_at_k(samples_from({0, 0, 1}), 0), 1);
  EXPECT_EQ(maj_at_k(samples_from({0, 1}), 0), 0);
  EXPECT_EQ(maj_at_k(samples_from({-1, -1, -1}), 0), 0);
  EXPECT_EQ(maj_at_k(samples_from({-1, -1, 0}), 0), 1);
}

// Independent vote count: the gold answer must be the unique strict mode.
int brute_maj(const std::vector<int>& answers, int gold) {
  std::map<int, int> votes;
  for (int a : answers) {
    if (a >= 0) ++votes[a];
  }
  if (votes.empty()) return 0;
  int best = -1;
  for (const auto& [a, v] : votes) best = std::max(best, v);
  int winners = 0;
  bool gold_wins = false;
  for (const auto& [a, v] : votes) {
    if (v == best) {
      ++winners;
      gold_wins |= a == gold;
    }
  }
  return winners == 1 && gold_wins ? 1 : 0;
}

TEST(MajAtK, MatchesExhaustiveVotes) {
  // Every answer vector of length <= 6 over {-1, 0, 1, 2}.
  for (int n = 1; n <= 6; ++n) {
    int total = 1;
    for (int i = 0; i < n; ++i) total *= 4;
    for (int code = 0; code < total; ++code) {
      std::vector<int> answers;
      int x = code;
      for (int i = 0; i < n; ++i) {
        answers.push_back(x % 4 - 1);
        x /= 4;
      }
      ASSERT_EQ(maj_at_k(samples_from(answers), 0), brute_maj(answers, 0));
      auto shuffled = answers;
      std::reverse(shuffled.begin(), shuffled.end());
      ASSERT_EQ(maj_at_k(samples_from(shuffled), 0), maj_at_k(samples_from(answers), 0));
    }
  }
}

TEST(EvalSample, FromTrajectory) {
  auto t = testing::fake_trajectory(1.0, {3, 4, kEos});
  t.step_entropy = {0.5, 0.25, 0.0};
  const auto s = to_eval_sample(9, t);
  EXPECT_EQ(s.prompt, 9);
  EXPECT_TRUE(s.correct);
  EXPECT_EQ(s.answer, 0);
  EXPECT_EQ(s.length, 3);
  EXPECT_DOUBLE_EQ(s.mean_entropy, 0.25);
  auto miss = testing::fake_trajectory(0.0, {1, kEos});
  EXPECT_FALSE(to_eval_sample(9, miss).correct);
  EXPECT_EQ(to_eval_sample(9, miss).answer, -1);
}

TEST(Dynamics, RowValues) {
  std::vector<RolloutGroup> batch{fake_group({1, 1}, {1, 1}, 1), fake_group({1, 1, 1, 1}, {}, 2)};
  for (auto& g : batch) {
    for (auto& t : g.trajectories) {
      t.tokens = {1, 2, kEos};
      t.length = 3;
    }
  }
  const auto row = dynamics_row(4, batch);
  EXPECT_EQ(row.step, 4);
  EXPECT_EQ(row.mean_reward, 1.0);
  EXPECT_EQ(row.mean_length, 3.0);
  EXPECT_EQ(row.zero_variance_fraction, 1.0);
  EXPECT_EQ(row.mean_var_mixed, 0.0);
}

TEST(Dynamics, InvariantUnderReordering) {
  std::vector<RolloutGroup> batch{fake_group({1, 0}, {0, 0}, 1), fake_group({0.2, 0.9}, {0.5, 0.5}, 2),
                                  fake_group({1, 1, 0, 1}, {}, 3)};
  const auto a = dynamics_row(0, batch);
  std::reverse(batch.begin(), batch.end());
  const auto b = dynamics_row(0, batch);
  EXPECT_EQ(a.mean_reward, b.mean_reward);
  EXPECT_EQ(a.mean_length, b.mean_length);
  EXPECT_EQ(a.mean_entropy, b.mean_entropy);
  EXPECT_EQ(a.mean_var_mixed, b.mean_var_mixed);
  EXPECT_EQ(a.zero_variance_fraction, b.zero_variance_fraction);
}

}  // namespace
}  // namespace cuts
