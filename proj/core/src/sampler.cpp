#include "cuts/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cuts/error.hpp"

namespace cuts {

CategoricalDist::CategoricalDist(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.empty()) throw InvalidInput("CategoricalDist: empty vector");
  double sum = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double p = probs_[i];
    if (!std::isfinite(p) || p < 0.0) {
      throw InvalidInput("CategoricalDist: entry " + std::to_string(i) +
                         " is negative or non-finite");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kNormTolerance) {
    throw InvalidInput("CategoricalDist: entries sum to " +
                       std::to_string(sum));
  }
}

CategoricalDist CategoricalDist::from_logits(std::span<const double> logits) {
  if (logits.empty()) throw InvalidInput("from_logits: empty row");
  const double hi = *std::max_element(logits.begin(), logits.end());
  if (!std::isfinite(hi)) throw NumericalError("from_logits: non-finite logit");
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - hi);
    z += p[i];
  }
  for (double& x : p) x /= z;
  return CategoricalDist(std::move(p));
}

void CutsConfig::validate(std::size_t vocab) const {
  if (k < 1 || static_cast<std::size_t>(k) > vocab) {
    throw InvalidInput("CutsConfig: k=" + std::to_string(k) +
                       " outside [1, " + std::to_string(vocab) + "]");
  }
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw InvalidInput("CutsConfig: delta outside [0, 1]");
  }
  if (t_warm < 0) throw InvalidInput("CutsConfig: t_warm must be >= 0");
}

Token sample_standard(const CategoricalDist& dist, RngStream& rng) {
  const auto p = dist.probs();
  // Scale by the actual total so the tolerated 1e-9 slack never biases the
  // last bucket.
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  const double target = rng.uniform() * total;
  double acc = 0.0;
  Token last_positive = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    acc += p[i];
    last_positive = static_cast<Token>(i);
    if (target < acc) return last_positive;
  }
  return last_positive;
}

std::vector<Token> top_k(const CategoricalDist& dist, int k) {
  const auto p = dist.probs();
  std::vector<Token> idx(p.size());
  std::iota(idx.begin(), idx.end(), Token{0});
  const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), p.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(kk),
                    idx.end(), [&](Token a, Token b) {
                      if (p[a] != p[b]) return p[a] > p[b];
                      return a < b;
                    });
  idx.resize(kk);
  return idx;
}

CandidateSet select_filter(const CategoricalDist& dist, const CutsConfig& cfg) {
  cfg.validate(dist.size());
  CandidateSet out;
  std::vector<Token> top = top_k(dist, cfg.k);
  for (Token v : top) {
    if (dist[static_cast<std::size_t>(v)] >= cfg.delta) out.indices.push_back(v);
  }
  if (out.indices.empty()) {
    out.indices = std::move(top);
    out.fallback_used = true;
  }
  return out;
}

CategoricalDist equalize(const CandidateSet& cands, std::size_t vocab) {
  if (cands.indices.empty()) {
    throw ContractViolation("equalize: empty candidate set");
  }
  std::vector<double> q(vocab, 0.0);
  const double w = 1.0 / static_cast<double>(cands.indices.size());
  for (Token v : cands.indices) {
    if (v < 0 || static_cast<std::size_t>(v) >= vocab) {
      throw ContractViolation("equalize: candidate outside vocabulary");
    }
    if (q[static_cast<std::size_t>(v)] != 0.0) {
      throw ContractViolation("equalize: duplicate candidate");
    }
    q[static_cast<std::size_t>(v)] = w;
  }
  return CategoricalDist(std::move(q));
}

CutsDraw sample_cuts(const CategoricalDist& dist, const CutsConfig& cfg,
                     int step, RngStream& rng) {
  if (step < 0) throw InvalidInput("sample_cuts: negative step");
  if (step < cfg.t_warm) {
    cfg.validate(dist.size());
    return {sample_standard(dist, rng), dist};
  }
  CategoricalDist proposal = equalize(select_filter(dist, cfg), dist.size());
  const Token t = sample_standard(proposal, rng);
  return {t, std::move(proposal)};
}

double entropy(const CategoricalDist& dist) {
  double h = 0.0;
  for (double p : dist.probs()) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

}  // namespace cuts
