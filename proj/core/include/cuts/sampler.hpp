#ifndef CUTS_SAMPLER_HPP_
#define CUTS_SAMPLER_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "cuts/rng.hpp"

namespace cuts {

using Token = std::int32_t;

// Absolute tolerance on the total mass of a categorical distribution.
inline constexpr double kNormTolerance = 1e-9;

// A probability vector over vocabulary indices 0..V-1.
//
// Construction validates: every entry is finite and non-negative and the
// entries sum to one within kNormTolerance. Invalid input throws
// InvalidInput, so a CategoricalDist that exists is always valid.
class CategoricalDist {
 public:
  explicit CategoricalDist(std::vector<double> probs);

  // Numerically stable softmax of a logit row.
  static CategoricalDist from_logits(std::span<const double> logits);

  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::size_t size() const noexcept { return probs_.size(); }

  bool operator==(const CategoricalDist&) const = default;

 private:
  std::vector<double> probs_;
};

struct CutsConfig {
  int k = 5;             // Top-K size
  double delta = 0.03;   // minimum model probability to stay a candidate
  int t_warm = 5;        // generated tokens drawn by standard sampling first

  // Throws InvalidInput unless 1 <= k <= vocab and 0 <= delta <= 1.
  void validate(std::size_t vocab) const;
};

struct CandidateSet {
  std::vector<Token> indices;  // in top-k rank order
  bool fallback_used = false;
};

// Draws index i with probability dist[i]. Consumes exactly one uniform.
Token sample_standard(const CategoricalDist& dist, RngStream& rng);

// Top-k indices ranked by probability, ties broken toward the lower index.
std::vector<Token> top_k(const CategoricalDist& dist, int k);

// Keeps the top-k tokens whose raw probability is >= delta. When nothing
// survives the threshold the whole top-k set is returned and fallback_used
// is set.
CandidateSet select_filter(const CategoricalDist& dist, const CutsConfig& cfg);

// Uniform distribution over the candidates, zero elsewhere. Throws
// ContractViolation on an empty set.
CategoricalDist equalize(const CandidateSet& cands, std::size_t vocab);

struct CutsDraw {
  Token token;
  // The exact distribution the token was drawn from (the behavior policy at
  // this step).
  CategoricalDist proposal;
};

// Standard sampling while step < cfg.t_warm, otherwise sampling from
// equalize(select_filter(dist, cfg)). Consumes exactly one uniform either way.
CutsDraw sample_cuts(const CategoricalDist& dist, const CutsConfig& cfg,
                     int step, RngStream& rng);

// Shannon entropy in nats, with 0 log 0 = 0.
double entropy(const CategoricalDist& dist);

}  // namespace cuts

#endif  // CUTS_SAMPLER_HPP_
