#include "cuts/metrics.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "cuts/error.hpp"
#include "cuts/variance.hpp"

namespace cuts {

namespace {

double sorted_mean(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

EvalSample to_eval_sample(PromptId prompt, const TrajectoryRecord& t) {
  EvalSample s;
  s.prompt = prompt;
  s.correct = t.reward.r > 0.5;
  s.answer = t.reward.answer;
  s.length = t.length;
  s.mean_entropy = t.mean_entropy();
  return s;
}

double pass_at_k(int n, int c, int k) {
  if (k < 1 || n < k) {
    throw InvalidInput("pass_at_k: need 1 <= k <= n, got n=" + std::to_string(n) +
                       " k=" + std::to_string(k));
  }
  if (c < 0 || c > n) throw InvalidInput("pass_at_k: correct count outside [0, n]");
  if (n == k) return c > 0 ? 1.0 : 0.0;
  if (n - c < k) return 1.0;
  // C(n-c, k) / C(n, k) = prod_{i=n-c+1}^{n} (1 - k / i)
  double miss = 1.0;
  for (int i = n - c + 1; i <= n; ++i) {
    miss *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
  }
  return 1.0 - miss;
}

double pass_at_k(std::span<const EvalSample> samples, int k) {
  const auto c = std::count_if(samples.begin(), samples.end(),
                               [](const EvalSample& s) { return s.correct; });
  return pass_at_k(static_cast<int>(samples.size()), static_cast<int>(c), k);
}

int maj_at_k(std::span<const EvalSample> samples, int gold) {
  if (samples.empty()) throw InvalidInput("maj_at_k: need at least one sample");
  std::map<int, int> votes;
  for (const EvalSample& s : samples) {
    if (s.answer >= 0) ++votes[s.answer];
  }
  if (votes.empty()) return 0;
  int best = -1;
  int best_count = 0;
  bool tied = false;
  for (const auto& [answer, count] : votes) {
    if (count > best_count) {
      best = answer;
      best_count = count;
      tied = false;
    } else if (count == best_count) {
      tied = true;
    }
  }
  return !tied && best == gold ? 1 : 0;
}

DynamicsRow dynamics_row(int step, std::span<const RolloutGroup> batch) {
  if (batch.empty()) throw InvalidInput("dynamics_row: empty batch");
  std::vector<double> reward, length, ent, var;
  int zero = 0;
  for (const RolloutGroup& g : batch) {
    const auto r = g.rewards();
    if (r.empty()) throw InvalidInput("dynamics_row: empty group");
    for (const TrajectoryRecord& t : g.trajectories) {
      reward.push_back(t.reward.r);
      length.push_back(static_cast<double>(t.length));
      ent.push_back(t.mean_entropy());
    }
    const double v = oracle_pooled_variance(r);
    var.push_back(v);
    if (std::all_of(r.begin(), r.end(), [&](double x) { return x == r[0]; })) ++zero;
  }
  DynamicsRow row;
  row.step = step;
  row.mean_reward = sorted_mean(std::move(reward));
  row.mean_length = sorted_mean(std::move(length));
  row.mean_entropy = sorted_mean(std::move(ent));
  row.mean_var_mixed = sorted_mean(std::move(var));
  row.zero_variance_fraction = static_cast<double>(zero) / static_cast<double>(batch.size());
  return row;
}

}  // namespace cuts
