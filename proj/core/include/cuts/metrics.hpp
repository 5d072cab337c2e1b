#ifndef CUTS_METRICS_HPP_
#define CUTS_METRICS_HPP_

#include <span>
#include <vector>

#include "cuts/env.hpp"
#include "cuts/rollout.hpp"

namespace cuts {

struct EvalSample {
  PromptId prompt = 0;
  bool correct = false;
  int answer = -1;  // -1 implies !correct
  int length = 0;
  double mean_entropy = 0.0;  // nats
};

EvalSample to_eval_sample(PromptId prompt, const TrajectoryRecord& t);

// Probability that at least one of k samples is correct, from n samples with
// c correct. For n > k this is the unbiased 1 - C(n-c, k) / C(n, k).
double pass_at_k(int n, int c, int k);
double pass_at_k(std::span<const EvalSample> samples, int k);

// 1 iff the most frequent valid answer id equals `gold`. Samples with answer
// id -1 do not vote; a tie for the top count scores 0.
int maj_at_k(std::span<const EvalSample> samples, int gold);

struct DynamicsRow {
  int step = 0;
  double mean_reward = 0.0;
  double mean_length = 0.0;
  double mean_entropy = 0.0;
  double mean_var_mixed = 0.0;
  double zero_variance_fraction = 0.0;
};

// Order-independent aggregation over one training step's groups.
DynamicsRow dynamics_row(int step, std::span<const RolloutGroup> batch);

}  // namespace cuts

#endif  // CUTS_METRICS_HPP_
