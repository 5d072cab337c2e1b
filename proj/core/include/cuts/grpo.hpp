#ifndef CUTS_GRPO_HPP_
#define CUTS_GRPO_HPP_

#include <span>
#include <vector>

#include "cuts/policy.hpp"
#include "cuts/rollout.hpp"

namespace cuts {

// Group-standardized advantages for one prompt.
struct AdvantageVector {
  std::vector<double> values;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double epsilon = 0.0;
};

struct ClipConfig {
  double eps_low = 0.2;
  double eps_high = 0.2;
  double kl_coef = 1e-3;
  double adv_eps = 1e-6;

  void validate() const;
};

// A_i = (r_i - mean) / (population std + epsilon). A group whose rewards are
// all identical gets exactly zero advantages.
AdvantageVector advantages(std::span<const double> rewards, double epsilon);

// rho - 1 - log rho with rho = exp(snapshot - live). Non-negative.
double kl_low_variance(double live_logprob, double snapshot_logprob);

struct SurrogateResult {
  double objective = 0.0;
  SparseGrad grad;  // d objective / d live logits
  double mean_kl = 0.0;
  double clip_fraction = 0.0;  // share of tokens whose clip branch was active
};

// Clipped surrogate for one group:
//
//   (1/G) sum_i (1/|o_i|) sum_t [ min(ratio A_i, clip(ratio) A_i) - beta KL ]
//
// with ratio = pi_live / pi_snapshot on the sampled token. Where the clipped
// branch is selected the term is constant in the live logits.
SurrogateResult surrogate_and_grad(const RolloutGroup& group,
                                   const SoftmaxPolicy& live,
                                   const SoftmaxPolicy& snapshot,
                                   const AdvantageVector& adv,
                                   const ClipConfig& cfg);

// Gradient ascent: live += lr * grad. Throws NumericalError if any gradient
// entry is non-finite; the policy is left untouched in that case.
void update_step(SoftmaxPolicy& live, const SparseGrad& grad, double lr);

}  // namespace cuts

#endif  // CUTS_GRPO_HPP_
