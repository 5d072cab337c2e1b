#ifndef CUTS_POLICY_HPP_
#define CUTS_POLICY_HPP_

#include <compare>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "cuts/env.hpp"
#include "cuts/sampler.hpp"

namespace cuts {

// Prompt id used for rows shared by every prompt.
inline constexpr PromptId kSharedPrompt = -1;

struct ContextKey {
  PromptId prompt = kSharedPrompt;
  std::vector<Token> tail;  // last `context_order` tokens of the prefix

  auto operator<=>(const ContextKey&) const = default;
  bool operator==(const ContextKey&) const = default;
};

// Gradient with respect to the logit table, one dense vector per touched row.
using SparseGrad = std::map<ContextKey, std::vector<double>>;

// dst += scale * src
void add_scaled(SparseGrad& dst, const SparseGrad& src, double scale);
bool all_finite(const SparseGrad& g);

// Tabular softmax policy over a synthetic vocabulary.
//
// The logit vector at (prompt, prefix) is the prompt-specific row keyed by
// (prompt, last `context_order` tokens) plus, when shared rows are enabled,
// the row keyed by (kSharedPrompt, same tokens). Missing rows read as zero,
// so unseen contexts are uniform. Copies are independent snapshots.
class SoftmaxPolicy {
 public:
  explicit SoftmaxPolicy(int vocab, int context_order = 2,
                         bool shared_rows = true);

  int vocab() const noexcept { return vocab_; }
  int context_order() const noexcept { return context_order_; }
  bool shared_rows() const noexcept { return shared_rows_; }

  ContextKey key(PromptId prompt, std::span<const Token> prefix) const;
  ContextKey shared_key(std::span<const Token> prefix) const;

  std::vector<double> logits(PromptId prompt, std::span<const Token> prefix) const;
  CategoricalDist next_dist(PromptId prompt, std::span<const Token> prefix) const;
  double logprob(PromptId prompt, std::span<const Token> prefix, Token token) const;

  struct LogProbGrad {
    double logprob;
    SparseGrad grad;  // d logprob / d logits: e_token - softmax(row)
  };
  LogProbGrad logprob_and_grad(PromptId prompt, std::span<const Token> prefix,
                               Token token) const;
  // Adds scale * d logprob / d logits into `into`; returns the log-prob.
  double accumulate_logprob_grad(PromptId prompt, std::span<const Token> prefix,
                                 Token token, double scale,
                                 SparseGrad& into) const;

  // Mutable row, created as zeros on first access.
  std::vector<double>& row(const ContextKey& key);
  const std::vector<double>* find_row(const ContextKey& key) const;
  const std::map<ContextKey, std::vector<double>>& rows() const noexcept {
    return rows_;
  }

  // logits += scale * grad. Throws NumericalError on non-finite input.
  void apply(const SparseGrad& grad, double scale);

  // Line-delimited JSON checkpoint: a header line, then one row per line.
  void save(std::ostream& out) const;
  static SoftmaxPolicy load(std::istream& in);

  bool operator==(const SoftmaxPolicy&) const = default;

 private:
  void check_token(Token t) const;

  int vocab_;
  int context_order_;
  bool shared_rows_;
  std::map<ContextKey, std::vector<double>> rows_;
};

// Writes log(probs) of every prior row into the prompt-specific table. When
// two trie nodes share a context key the first one wins.
void load_prior(SoftmaxPolicy& policy, PromptId prompt,
                std::span<const PriorRow> rows);

}  // namespace cuts

#endif  // CUTS_POLICY_HPP_
