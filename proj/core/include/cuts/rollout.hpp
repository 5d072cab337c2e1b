#ifndef CUTS_ROLLOUT_HPP_
#define CUTS_ROLLOUT_HPP_

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "cuts/env.hpp"
#include "cuts/policy.hpp"
#include "cuts/rng.hpp"
#include "cuts/sampler.hpp"

namespace cuts {

enum class Origin { kStd, kCuts };
std::string_view to_string(Origin o);

struct TrajectoryRecord {
  std::vector<Token> tokens;
  std::vector<double> behavior_logprobs;  // log of the proposal actually used
  std::vector<double> model_logprobs;     // log pi_old at the same step
  std::vector<double> step_entropy;       // entropy of pi_old at each step
  Origin origin = Origin::kStd;
  RewardOutcome reward;
  int length = 0;
  bool truncated = false;  // hit max_len without emitting end-of-sequence

  double mean_entropy() const;
};

struct RolloutGroup {
  PromptId prompt = 0;
  std::vector<TrajectoryRecord> trajectories;
  int g_std = 0;
  int g_cuts = 0;

  std::vector<double> rewards() const;
  std::size_t size() const noexcept { return trajectories.size(); }
};

// Generates one trajectory from the frozen snapshot. Generation stops at the
// end-of-sequence token or at max_len; a truncated trajectory scores 0.
TrajectoryRecord generate_trajectory(const SoftmaxPolicy& snapshot,
                                     const PromptSpec& prompt, Origin origin,
                                     const CutsConfig& cfg, RngStream& rng);

// G/2 standard trajectories followed by G/2 CUTS trajectories. Trajectory i
// draws from rng.derive(i).
RolloutGroup rollout_group(const SoftmaxPolicy& snapshot,
                           const PromptSpec& prompt, const CutsConfig& cfg,
                           int group_size, const RngStream& rng);

// GRPO control arm: all G trajectories from standard sampling, with the same
// per-index stream derivation as rollout_group.
RolloutGroup rollout_group_standard(const SoftmaxPolicy& snapshot,
                                    const PromptSpec& prompt, int group_size,
                                    const RngStream& rng);

// One trajectory per line.
void write_rollouts(std::ostream& out, std::span<const RolloutGroup> groups,
                    int step);
struct DumpedGroup {
  int step = 0;
  RolloutGroup group;
};
std::vector<DumpedGroup> read_rollouts(std::istream& in);

}  // namespace cuts

#endif  // CUTS_ROLLOUT_HPP_
