#ifndef CUTS_VARIANCE_HPP_
#define CUTS_VARIANCE_HPP_

#include <span>
#include <string_view>
#include <vector>

#include "cuts/rollout.hpp"

namespace cuts {

enum class SaturationCase { kCaseA, kCaseB, kGeneric };
std::string_view to_string(SaturationCase c);

// Equal-halves decomposition of a mixed group's reward variance:
//
//   var_mixed = (var_std + var_cuts) / 2 + (mu_std - mu_cuts)^2 / 4
//
// All variances are population variances, which makes this an identity.
struct VarianceReport {
  double mu_std = 0.0;
  double mu_cuts = 0.0;
  double var_std = 0.0;
  double var_cuts = 0.0;
  double within = 0.0;
  double between = 0.0;
  double var_mixed = 0.0;
  SaturationCase label = SaturationCase::kGeneric;
};

// Threshold used to recognize saturated standard sub-groups.
inline constexpr double kSaturationTolerance = 1e-9;

VarianceReport decompose(std::span<const double> std_rewards,
                         std::span<const double> cuts_rewards);
// Uses the first g_std trajectories as the standard half. Throws InvalidInput
// unless g_std == g_cuts >= 1.
VarianceReport decompose(const RolloutGroup& group);

// Population variance computed directly over the pooled list.
double oracle_pooled_variance(std::span<const double> rewards);

struct ModeCensus {
  int groups = 0;
  double zero_variance_fraction = 0.0;
  double mean_abs_advantage = 0.0;
  double mean_var_mixed = 0.0;  // mean pooled reward variance per group
};

struct CensusSummary {
  ModeCensus all;
  ModeCensus standard;  // groups with g_cuts == 0
  ModeCensus mixed;     // groups with g_cuts > 0
};

// Batch-level saturation statistics. Sums run over sorted per-group values,
// so the result does not depend on group order.
CensusSummary saturation_census(std::span<const RolloutGroup> groups,
                                double adv_epsilon);

}  // namespace cuts

#endif  // CUTS_VARIANCE_HPP_
