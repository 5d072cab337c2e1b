#include "cuts/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cuts/error.hpp"

namespace cuts {

void ClipConfig::validate() const {
  if (!(eps_low > 0.0 && eps_low < 1.0) || !(eps_high > 0.0 && eps_high < 1.0)) {
    throw InvalidInput("ClipConfig: clip widths must lie in (0, 1)");
  }
  if (!(kl_coef >= 0.0) || !std::isfinite(kl_coef)) {
    throw InvalidInput("ClipConfig: kl coefficient must be >= 0");
  }
  if (!(adv_eps > 0.0) || !std::isfinite(adv_eps)) {
    throw InvalidInput("ClipConfig: advantage epsilon must be > 0");
  }
}

AdvantageVector advantages(std::span<const double> rewards, double epsilon) {
  if (rewards.size() < 2) {
    throw InvalidInput("advantages: need at least 2 rewards, got " +
                       std::to_string(rewards.size()));
  }
  if (!(epsilon > 0.0)) throw InvalidInput("advantages: epsilon must be > 0");
  AdvantageVector a;
  a.epsilon = epsilon;
  a.values.assign(rewards.size(), 0.0);
  const bool constant = std::all_of(rewards.begin(), rewards.end(),
                                    [&](double r) { return r == rewards[0]; });
  if (constant) {
    a.mean = rewards[0];
    return a;
  }
  const auto n = static_cast<double>(rewards.size());
  double sum = 0.0;
  for (double r : rewards) sum += r;
  a.mean = sum / n;
  double ss = 0.0;
  for (double r : rewards) ss += (r - a.mean) * (r - a.mean);
  a.std = std::sqrt(ss / n);
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    a.values[i] = (rewards[i] - a.mean) / (a.std + epsilon);
  }
  return a;
}

double kl_low_variance(double live_logprob, double snapshot_logprob) {
  const double x = snapshot_logprob - live_logprob;  // log rho
  return std::max(0.0, std::expm1(x) - x);
}

SurrogateResult surrogate_and_grad(const RolloutGroup& group,
                                   const SoftmaxPolicy& live,
                                   const SoftmaxPolicy& snapshot,
                                   const AdvantageVector& adv,
                                   const ClipConfig& cfg) {
  cfg.validate();
  if (adv.values.size() != group.trajectories.size()) {
    throw InvalidInput("surrogate_and_grad: " +
                       std::to_string(adv.values.size()) + " advantages for " +
                       std::to_string(group.trajectories.size()) +
                       " trajectories");
  }
  if (group.trajectories.empty()) {
    throw InvalidInput("surrogate_and_grad: empty group");
  }
  SurrogateResult out;
  const double lo = 1.0 - cfg.eps_low;
  const double hi = 1.0 + cfg.eps_high;
  const auto g = static_cast<double>(group.trajectories.size());
  std::size_t tokens = 0;
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < group.trajectories.size(); ++i) {
    const TrajectoryRecord& traj = group.trajectories[i];
    if (traj.tokens.empty()) continue;
    const double a = adv.values[i];
    const double w = 1.0 / (g * static_cast<double>(traj.tokens.size()));
    const std::span<const Token> seq(traj.tokens);
    for (std::size_t t = 0; t < seq.size(); ++t) {
      const auto prefix = seq.first(t);
      const double l = live.logprob(group.prompt, prefix, seq[t]);
      const double s = snapshot.logprob(group.prompt, prefix, seq[t]);
      const double ratio = std::exp(l - s);
      const double unclipped = ratio * a;
      const double clipped_term = std::clamp(ratio, lo, hi) * a;
      const bool clip_active = clipped_term < unclipped;
      const double term = clip_active ? clipped_term : unclipped;
      const double kl = kl_low_variance(l, s);
      const double rho = std::exp(s - l);
      // d term / d l = ratio * a on the unclipped branch; d KL / d l = 1 - rho.
      const double coef =
          w * ((clip_active ? 0.0 : a * ratio) - cfg.kl_coef * (1.0 - rho));
      out.objective += w * (term - cfg.kl_coef * kl);
      out.mean_kl += w * kl;
      live.accumulate_logprob_grad(group.prompt, prefix, seq[t], coef, out.grad);
      ++tokens;
      if (clip_active) ++clipped;
    }
  }
  out.clip_fraction =
      tokens == 0 ? 0.0 : static_cast<double>(clipped) / static_cast<double>(tokens);
  return out;
}

void update_step(SoftmaxPolicy& live, const SparseGrad& grad, double lr) {
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw InvalidInput("update_step: learning rate must be positive and finite");
  }
  if (!all_finite(grad)) throw NumericalError("update_step: non-finite gradient");
  live.apply(grad, lr);
}

}  // namespace cuts
