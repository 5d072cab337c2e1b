#ifndef CUTS_ENV_HPP_
#define CUTS_ENV_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "cuts/sampler.hpp"

namespace cuts {

using PromptId = std::int64_t;

// Token 0 terminates generation in every task.
inline constexpr Token kEos = 0;

enum class Difficulty { kEasySaturated, kHardSaturated, kMixed };

std::string_view to_string(Difficulty d);
Difficulty parse_difficulty(std::string_view s);

// How strongly the base model believes in a trie edge. Used only to build
// the initial policy; scoring ignores it.
enum class PriorClass : char {
  kGreedy = 'g',
  kPlausible = 'p',    // at or above the CUTS threshold, well below greedy
  kCompetitive = 'c',  // a real contender (mixed prompts)
  kUnlikely = 'u',     // below the CUTS threshold
};

struct TrieEdge {
  Token token;
  int child;
  PriorClass prior;
};

struct TrieNode {
  std::vector<TrieEdge> children;  // first child is the greedy continuation
  int answer = -1;                 // >= 0 iff the path to here is accepting
  int depth = 0;
};

// One prompt of the synthetic task: a trie of known continuations, some of
// which are accepting. Sequences hold content tokens only; the end-of-sequence
// token is implicit.
class PromptSpec {
 public:
  PromptSpec(PromptId id, Difficulty difficulty, int vocab, int max_len);

  // Builds a trie from explicit accepting / rejecting content sequences.
  // Answer ids follow the order of `accepting`.
  static PromptSpec from_sequences(
      PromptId id, Difficulty difficulty, int vocab, int max_len,
      const std::vector<std::vector<Token>>& accepting,
      const std::vector<std::vector<Token>>& rejecting = {});

  PromptId id() const noexcept { return id_; }
  Difficulty difficulty() const noexcept { return difficulty_; }
  int vocab() const noexcept { return vocab_; }
  int max_len() const noexcept { return max_len_; }
  // Depth of the first exploration-relevant branch point.
  int setup_len() const noexcept { return setup_len_; }
  void set_setup_len(int s) { setup_len_ = s; }

  const std::vector<TrieNode>& nodes() const noexcept { return nodes_; }
  // Appends a child under `parent`; returns the new node index.
  int add_child(int parent, Token token, PriorClass prior);
  // Node reached by following `content` from the root, or -1.
  int find(std::span<const Token> content) const;
  void mark_accepting(int node);

  // Accepting content sequences ordered by answer id.
  std::vector<std::vector<Token>> accepting() const;
  // Content tokens along first children from the root to a leaf.
  std::vector<Token> greedy_path() const;
  // Answer id of the canonical solution (answer 0).
  int gold_answer() const noexcept { return 0; }
  int num_accepting() const noexcept { return num_accepting_; }

 private:
  PromptId id_;
  Difficulty difficulty_;
  int vocab_;
  int max_len_;
  int setup_len_ = 0;
  int num_accepting_ = 0;
  std::vector<TrieNode> nodes_;
};

struct RewardOutcome {
  double r = 0.0;
  int answer = -1;  // index of the accepted leaf, or -1
  bool operator==(const RewardOutcome&) const = default;
};

struct DifficultyMix {
  double easy = 0.9;
  double hard = 0.1;
  double mixed = 0.0;
};

struct TaskParams {
  std::uint64_t seed = 0;
  int n_prompts = 1;
  int vocab = 16;
  int max_len = 8;
  int branching = 3;
  DifficultyMix mix;
  PromptId first_id = 0;

  void validate() const;
};

// Deterministic in params. Difficulty counts follow the mix exactly (largest
// remainder rounding) and are then shuffled across prompt ids.
std::vector<PromptSpec> make_task(const TaskParams& params);

// r = 1 iff `tokens` (one trailing end-of-sequence token allowed) is an
// accepting sequence. Throws InvalidInput on over-length input.
RewardOutcome score(const PromptSpec& prompt, std::span<const Token> tokens);

// Per-class probabilities of the synthetic base model.
struct PriorConfig {
  double plausible = 0.035;
  double competitive = 0.35;
  double unlikely = 5e-4;
  double noise = 5e-4;  // total mass spread over tokens outside the trie

  // A prior that puts essentially all mass on first children.
  static PriorConfig concentrated();
  void validate() const;
};

struct PriorRow {
  std::vector<Token> prefix;  // content prefix leading to this trie node
  std::vector<double> probs;  // next-token distribution at that node
};

// Next-token distributions the base model assigns at every trie node. Leaves
// put the greedy mass on the end-of-sequence token.
std::vector<PriorRow> base_prior(const PromptSpec& prompt,
                                 const PriorConfig& cfg);

// Line-delimited JSON, one prompt per line.
void write_tasks(std::ostream& out, std::span<const PromptSpec> prompts);
std::vector<PromptSpec> read_tasks(std::istream& in);

}  // namespace cuts

#endif  // CUTS_ENV_HPP_
