#include "cuts/variance.hpp"

#include <algorithm>
#include <cmath>

#include "cuts/error.hpp"
#include "cuts/grpo.hpp"

namespace cuts {

namespace {

struct Moments {
  double mean;
  double var;
};

Moments moments(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  const double mean = s / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, ss / static_cast<double>(x.size())};
}

double sorted_mean(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

std::string_view to_string(SaturationCase c) {
  switch (c) {
    case SaturationCase::kCaseA:
      return "case_a";
    case SaturationCase::kCaseB:
      return "case_b";
    case SaturationCase::kGeneric:
      return "generic";
  }
  return "generic";
}

VarianceReport decompose(std::span<const double> std_rewards,
                         std::span<const double> cuts_rewards) {
  if (std_rewards.empty() || std_rewards.size() != cuts_rewards.size()) {
    throw InvalidInput("decompose: sub-groups must be non-empty and equal in size");
  }
  const Moments s = moments(std_rewards);
  const Moments c = moments(cuts_rewards);
  VarianceReport r;
  r.mu_std = s.mean;
  r.mu_cuts = c.mean;
  r.var_std = s.var;
  r.var_cuts = c.var;
  r.within = 0.5 * (s.var + c.var);
  const double gap = s.mean - c.mean;
  r.between = 0.25 * gap * gap;
  r.var_mixed = r.within + r.between;
  if (s.mean >= 1.0 - kSaturationTolerance) {
    r.label = SaturationCase::kCaseA;
  } else if (s.mean <= kSaturationTolerance) {
    r.label = SaturationCase::kCaseB;
  }
  return r;
}

VarianceReport decompose(const RolloutGroup& group) {
  if (group.g_std < 1 || group.g_std != group.g_cuts ||
      group.trajectories.size() != static_cast<std::size_t>(group.g_std + group.g_cuts)) {
    throw InvalidInput("decompose: group must have equal standard and CUTS halves");
  }
  const auto r = group.rewards();
  const std::span<const double> all(r);
  const auto half = static_cast<std::size_t>(group.g_std);
  return decompose(all.first(half), all.subspan(half));
}

double oracle_pooled_variance(std::span<const double> rewards) {
  if (rewards.empty()) throw InvalidInput("oracle_pooled_variance: empty list");
  long double sum = 0.0L;
  for (double r : rewards) sum += r;
  const long double mean = sum / static_cast<long double>(rewards.size());
  long double ss = 0.0L;
  for (double r : rewards) ss += (r - mean) * (r - mean);
  return static_cast<double>(ss / static_cast<long double>(rewards.size()));
}

CensusSummary saturation_census(std::span<const RolloutGroup> groups,
                                double adv_epsilon) {
  if (groups.empty()) throw InvalidInput("saturation_census: empty batch");
  struct Acc {
    int groups = 0;
    int zero = 0;
    std::vector<double> abs_adv;
    std::vector<double> var;
  };
  Acc all, standard, mixed;
  for (const RolloutGroup& g : groups) {
    const auto r = g.rewards();
    const AdvantageVector adv = advantages(r, adv_epsilon);
    const bool zero = adv.std == 0.0;
    const double var = oracle_pooled_variance(r);
    for (Acc* acc : {&all, g.g_cuts > 0 ? &mixed : &standard}) {
      ++acc->groups;
      acc->zero += zero ? 1 : 0;
      for (double a : adv.values) acc->abs_adv.push_back(std::abs(a));
      acc->var.push_back(var);
    }
  }
  auto finish = [](const Acc& a) {
    ModeCensus m;
    m.groups = a.groups;
    if (a.groups == 0) return m;
    m.zero_variance_fraction = static_cast<double>(a.zero) / a.groups;
    m.mean_abs_advantage = sorted_mean(a.abs_adv);
    m.mean_var_mixed = sorted_mean(a.var);
    return m;
  };
  return {finish(all), finish(standard), finish(mixed)};
}

}  // namespace cuts
