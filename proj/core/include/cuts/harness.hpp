#ifndef CUTS_HARNESS_HPP_
#define CUTS_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cuts/csv.hpp"
#include "cuts/env.hpp"
#include "cuts/grpo.hpp"
#include "cuts/metrics.hpp"
#include "cuts/policy.hpp"
#include "cuts/sampler.hpp"
#include "cuts/variance.hpp"

namespace cuts {

inline constexpr std::string_view kVersion = "0.1.0";

enum class Arm { kStandard, kMixedCuts };
std::string_view to_string(Arm a);
Arm parse_arm(std::string_view s);

struct ExperimentConfig {
  std::uint64_t seed = 1;
  Arm arm = Arm::kMixedCuts;

  // Training task. The task seed is derived from `seed`.
  int n_prompts = 40;
  int vocab = 16;
  int max_len = 8;
  int branching = 3;
  DifficultyMix mix{0.9, 0.1, 0.0};

  // Held-out prompts come from a sibling seed that training never touches.
  int heldout_prompts = 20;
  DifficultyMix heldout_mix{0.0, 1.0, 0.0};

  PriorConfig prior;
  CutsConfig cuts;  // K=5, delta=0.03, T_warm=5
  int group_size = 16;
  int g_std = 8;
  int g_cuts = 8;
  ClipConfig clip;  // (0.2, 0.2), KL 1e-3, advantage eps 1e-6

  double learning_rate = 2.0;
  int steps = 200;
  int batch_prompts = 8;       // prompts per rollout batch
  int mini_batch_prompts = 2;  // prompts per gradient update
  int eval_every = 10;
  int eval_samples = 16;
  int context_order = 2;
  bool shared_rows = true;
  bool dump_rollouts = false;

  void validate() const;
  TaskParams train_task() const;
  TaskParams heldout_task() const;
};

void write_config(std::ostream& out, const ExperimentConfig& cfg);
ExperimentConfig read_config(std::istream& in);
ExperimentConfig read_config_file(const std::filesystem::path& path);

// Policy initialized with the base-model prior of every prompt (training and
// held-out).
SoftmaxPolicy initial_policy(const ExperimentConfig& cfg,
                             std::span<const PromptSpec> train,
                             std::span<const PromptSpec> heldout);

struct PromptEval {
  PromptId prompt = 0;
  Difficulty difficulty = Difficulty::kMixed;
  int n = 0;
  int correct = 0;
  double pass_at_1 = 0.0;
  double pass_at_k = 0.0;
  int maj_at_k = 0;
  double mean_length = 0.0;
  double mean_entropy = 0.0;
};

struct EvalResult {
  int step = 0;
  std::vector<PromptEval> prompts;
  double pass_at_1 = 0.0;
  double pass_at_k = 0.0;
  double maj_at_k = 0.0;
  double mean_length = 0.0;
  double mean_entropy = 0.0;
};

// `samples` standard-decoding samples per prompt; Pass@k and maj@k use
// k = samples. Prompt i draws from rng.derive(i).
EvalResult evaluate(const SoftmaxPolicy& policy, std::span<const PromptSpec> prompts,
                    int samples, const RngStream& rng);

struct StepLog {
  DynamicsRow dynamics;
  double mean_abs_advantage = 0.0;
  double surrogate = 0.0;
  double mean_kl = 0.0;
  double clip_fraction = 0.0;
};

struct RunResult {
  std::vector<StepLog> steps;
  std::vector<EvalResult> evals;  // step 0 (before training) ... final
};

// Runs one arm and writes its run directory:
//   config.json, tasks_train.jsonl, tasks_heldout.jsonl, dynamics.csv,
//   variance.csv, eval.csv, eval_final.csv, policy.jsonl, manifest.json
//   (+ rollouts.jsonl when dump_rollouts is set).
RunResult run_experiment(const ExperimentConfig& cfg,
                         const std::filesystem::path& out_dir);

struct ComparisonReport {
  std::string arm_a;
  std::string arm_b;
  csv::Table dynamics;  // paired per-step values and deltas (b - a)
  csv::Table eval;      // paired per-eval-point values and deltas
  csv::Table summary;   // final metrics: metric,a,b,delta
};

// Pure function of the two run directories. Throws InvalidInput when the runs
// were not built on the same task.
ComparisonReport compare_arms(const std::filesystem::path& run_a,
                              const std::filesystem::path& run_b);
void write_comparison(const ComparisonReport& report,
                      const std::filesystem::path& out_dir);

}  // namespace cuts

#endif  // CUTS_HARNESS_HPP_
