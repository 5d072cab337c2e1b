#include "cuts/env.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "cuts/error.hpp"
#include "json.hpp"

namespace cuts {

namespace {

constexpr std::uint64_t kTaskStream = 0x7461736bULL;  // "task"

// Structural token roles. Offsets wrap around the content range so every
// vocabulary size >= 4 yields a valid (if less legible) task.
Token role_token(int vocab, int offset) {
  return static_cast<Token>(1 + offset % (vocab - 1));
}
constexpr int kReasonOffset = 0;
constexpr int kMarkerOffset = 1;  // + difficulty index
constexpr int kMethodOffset = 4;  // + method index

int difficulty_index(Difficulty d) {
  switch (d) {
    case Difficulty::kEasySaturated:
      return 0;
    case Difficulty::kHardSaturated:
      return 1;
    case Difficulty::kMixed:
      return 2;
  }
  return 0;
}

// Draws `count` distinct tokens from `pool` (partial Fisher-Yates).
std::vector<Token> draw_distinct(std::vector<Token> pool, std::size_t count,
                                 RngStream& rng) {
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

struct Leaf {
  PriorClass prior;
  bool accept;
};

// Prior class and acceptance for decision leaves. `first` is the method
// chosen at the first decision (-1 when there is only one decision).
Leaf decision_leaf(Difficulty d, int first, int second) {
  const PriorClass other = PriorClass::kUnlikely;
  if (first < 0) {
    const PriorClass cls = second == 0   ? PriorClass::kGreedy
                           : second == 1 ? (d == Difficulty::kMixed
                                                ? PriorClass::kCompetitive
                                                : PriorClass::kPlausible)
                                         : other;
    switch (d) {
      case Difficulty::kEasySaturated:
        return {cls, second <= 1};
      case Difficulty::kHardSaturated:
        return {cls, second == 1};
      case Difficulty::kMixed:
        return {cls, second == 0};
    }
  }
  PriorClass cls = second == 0 ? PriorClass::kGreedy : other;
  if (second == 1) {
    if (first == 1) cls = PriorClass::kPlausible;
    if (first == 0 && d == Difficulty::kMixed) cls = PriorClass::kCompetitive;
  }
  switch (d) {
    case Difficulty::kEasySaturated:
    case Difficulty::kMixed:
      return {cls, first <= 1 && second == 0};
    case Difficulty::kHardSaturated:
      return {cls, first == 1 && second == 1};
  }
  return {cls, false};
}

}  // namespace

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::kEasySaturated:
      return "easy-saturated";
    case Difficulty::kHardSaturated:
      return "hard-saturated";
    case Difficulty::kMixed:
      return "mixed";
  }
  return "mixed";
}

Difficulty parse_difficulty(std::string_view s) {
  if (s == "easy-saturated") return Difficulty::kEasySaturated;
  if (s == "hard-saturated") return Difficulty::kHardSaturated;
  if (s == "mixed") return Difficulty::kMixed;
  throw InvalidInput("unknown difficulty '" + std::string(s) + "'");
}

PromptSpec::PromptSpec(PromptId id, Difficulty difficulty, int vocab,
                       int max_len)
    : id_(id), difficulty_(difficulty), vocab_(vocab), max_len_(max_len) {
  if (vocab < 2) throw InvalidInput("PromptSpec: vocab must be >= 2");
  if (max_len < 1) throw InvalidInput("PromptSpec: max_len must be >= 1");
  nodes_.emplace_back();
}

int PromptSpec::add_child(int parent, Token token, PriorClass prior) {
  if (parent < 0 || static_cast<std::size_t>(parent) >= nodes_.size()) {
    throw InvalidInput("PromptSpec: bad parent node");
  }
  if (token < 1 || token >= vocab_) {
    throw InvalidInput("PromptSpec: token " + std::to_string(token) +
                       " is not a content token");
  }
  const int depth = nodes_[static_cast<std::size_t>(parent)].depth + 1;
  if (depth > max_len_) throw InvalidInput("PromptSpec: sequence exceeds max_len");
  for (const TrieEdge& e : nodes_[static_cast<std::size_t>(parent)].children) {
    if (e.token == token) throw InvalidInput("PromptSpec: duplicate child token");
  }
  const int child = static_cast<int>(nodes_.size());
  TrieNode node;
  node.depth = depth;
  nodes_.push_back(std::move(node));
  nodes_[static_cast<std::size_t>(parent)].children.push_back(
      {token, child, prior});
  return child;
}

int PromptSpec::find(std::span<const Token> content) const {
  int cur = 0;
  for (Token t : content) {
    int next = -1;
    for (const TrieEdge& e : nodes_[static_cast<std::size_t>(cur)].children) {
      if (e.token == t) {
        next = e.child;
        break;
      }
    }
    if (next < 0) return -1;
    cur = next;
  }
  return cur;
}

void PromptSpec::mark_accepting(int node) {
  TrieNode& n = nodes_.at(static_cast<std::size_t>(node));
  if (n.answer >= 0) throw InvalidInput("PromptSpec: duplicate accepting sequence");
  if (node == 0) throw InvalidInput("PromptSpec: empty accepting sequence");
  n.answer = num_accepting_++;
}

std::vector<std::vector<Token>> PromptSpec::accepting() const {
  std::vector<std::vector<Token>> out(static_cast<std::size_t>(num_accepting_));
  // Depth-first walk carrying the current path.
  std::vector<std::pair<int, std::vector<Token>>> stack{{0, {}}};
  while (!stack.empty()) {
    auto [node, path] = std::move(stack.back());
    stack.pop_back();
    const TrieNode& n = nodes_[static_cast<std::size_t>(node)];
    if (n.answer >= 0) out[static_cast<std::size_t>(n.answer)] = path;
    for (const TrieEdge& e : n.children) {
      auto next = path;
      next.push_back(e.token);
      stack.emplace_back(e.child, std::move(next));
    }
  }
  return out;
}

std::vector<Token> PromptSpec::greedy_path() const {
  std::vector<Token> path;
  int cur = 0;
  while (!nodes_[static_cast<std::size_t>(cur)].children.empty()) {
    const TrieEdge& e = nodes_[static_cast<std::size_t>(cur)].children.front();
    path.push_back(e.token);
    cur = e.child;
  }
  return path;
}

PromptSpec PromptSpec::from_sequences(
    PromptId id, Difficulty difficulty, int vocab, int max_len,
    const std::vector<std::vector<Token>>& accepting,
    const std::vector<std::vector<Token>>& rejecting) {
  if (accepting.empty()) throw InvalidInput("PromptSpec: accepting set is empty");
  PromptSpec spec(id, difficulty, vocab, max_len);
  auto insert = [&spec](const std::vector<Token>& seq) {
    if (seq.empty()) throw InvalidInput("PromptSpec: empty sequence");
    int cur = 0;
    for (Token t : seq) {
      int next = -1;
      for (const TrieEdge& e : spec.nodes_[static_cast<std::size_t>(cur)].children) {
        if (e.token == t) next = e.child;
      }
      if (next < 0) {
        const bool first =
            spec.nodes_[static_cast<std::size_t>(cur)].children.empty();
        next = spec.add_child(
            cur, t, first ? PriorClass::kGreedy : PriorClass::kUnlikely);
      }
      cur = next;
    }
    return cur;
  };
  std::vector<int> acc_nodes;
  for (const auto& seq : accepting) acc_nodes.push_back(insert(seq));
  for (const auto& seq : rejecting) {
    const int node = insert(seq);
    if (std::find(acc_nodes.begin(), acc_nodes.end(), node) != acc_nodes.end()) {
      throw InvalidInput("PromptSpec: sequence both accepting and rejecting");
    }
  }
  for (int node : acc_nodes) spec.mark_accepting(node);
  return spec;
}

void TaskParams::validate() const {
  if (n_prompts < 1) throw InvalidInput("make_task: n_prompts must be >= 1");
  if (vocab < 4) throw InvalidInput("make_task: vocab must be >= 4");
  if (max_len < 2) throw InvalidInput("make_task: max_len must be >= 2");
  if (branching < 2) throw InvalidInput("make_task: branching must be >= 2");
  if (branching > vocab - 1) {
    throw InvalidInput("make_task: branching must be <= vocab - 1");
  }
  if (mix.easy < 0 || mix.hard < 0 || mix.mixed < 0 ||
      !(mix.easy + mix.hard + mix.mixed > 0)) {
    throw InvalidInput("make_task: difficulty mix must be non-negative with a "
                       "positive total");
  }
}

std::vector<PromptSpec> make_task(const TaskParams& params) {
  params.validate();
  const int n = params.n_prompts;
  const int vocab = params.vocab;
  const int branching = params.branching;

  // Exact difficulty counts by largest remainder.
  const double total = params.mix.easy + params.mix.hard + params.mix.mixed;
  const double share[3] = {params.mix.easy / total * n,
                           params.mix.hard / total * n,
                           params.mix.mixed / total * n};
  int count[3];
  int assigned = 0;
  for (int i = 0; i < 3; ++i) {
    count[i] = static_cast<int>(std::floor(share[i]));
    assigned += count[i];
  }
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (share[i] - count[i] > share[best] - count[best]) best = i;
    }
    ++count[best];
    ++assigned;
  }
  std::vector<Difficulty> labels;
  const Difficulty kinds[3] = {Difficulty::kEasySaturated,
                               Difficulty::kHardSaturated, Difficulty::kMixed};
  for (int i = 0; i < 3; ++i) labels.insert(labels.end(), count[i], kinds[i]);
  RngStream root(params.seed, kTaskStream);
  RngStream shuffle = root.derive(0);
  for (std::size_t i = labels.size(); i > 1; --i) {
    std::swap(labels[i - 1], labels[shuffle.below(i)]);
  }

  const int content_depth = params.max_len - 1;
  const int decisions = std::min(2, content_depth);
  const int setup = content_depth - decisions;

  std::vector<Token> reserved;
  reserved.push_back(role_token(vocab, kReasonOffset));
  for (int d = 0; d < 3; ++d) reserved.push_back(role_token(vocab, kMarkerOffset + d));
  for (int m = 0; m < branching; ++m) {
    reserved.push_back(role_token(vocab, kMethodOffset + m));
  }
  std::vector<Token> content(static_cast<std::size_t>(vocab - 1));
  std::iota(content.begin(), content.end(), Token{1});
  std::vector<Token> free_pool;
  for (Token t : content) {
    if (std::find(reserved.begin(), reserved.end(), t) == reserved.end()) {
      free_pool.push_back(t);
    }
  }

  std::vector<PromptSpec> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    RngStream rng = root.derive(static_cast<std::uint64_t>(i) + 1);
    const Difficulty diff = labels[static_cast<std::size_t>(i)];
    PromptSpec spec(params.first_id + i, diff, vocab, params.max_len);
    spec.set_setup_len(setup);

    // Setup: prompt-specific tokens, then the shared reasoning cue and the
    // difficulty marker right before the first decision.
    std::vector<Token> setup_tokens;
    const Token marker = role_token(vocab, kMarkerOffset + difficulty_index(diff));
    if (setup >= 2) {
      const auto free_count = static_cast<std::size_t>(setup - 2);
      if (free_pool.size() >= free_count) {
        setup_tokens = draw_distinct(free_pool, free_count, rng);
      } else {
        for (std::size_t j = 0; j < free_count; ++j) {
          setup_tokens.push_back(content[rng.below(content.size())]);
        }
      }
      setup_tokens.push_back(role_token(vocab, kReasonOffset));
      setup_tokens.push_back(marker);
    } else if (setup == 1) {
      setup_tokens.push_back(marker);
    }

    int node = 0;
    for (Token greedy : setup_tokens) {
      const int next = spec.add_child(node, greedy, PriorClass::kGreedy);
      std::vector<Token> others;
      for (Token t : content) {
        if (t != greedy) others.push_back(t);
      }
      for (Token alt : draw_distinct(others, static_cast<std::size_t>(branching - 1), rng)) {
        spec.add_child(node, alt, PriorClass::kUnlikely);
      }
      node = next;
    }

    std::vector<int> accept_nodes;
    if (decisions == 1) {
      for (int m = 0; m < branching; ++m) {
        const Leaf leaf = decision_leaf(diff, -1, m);
        const int c = spec.add_child(node, role_token(vocab, kMethodOffset + m), leaf.prior);
        if (leaf.accept) accept_nodes.push_back(c);
      }
    } else {
      for (int a = 0; a < branching; ++a) {
        const PriorClass cls = a == 0   ? PriorClass::kGreedy
                               : a == 1 ? PriorClass::kPlausible
                                        : PriorClass::kUnlikely;
        const int mid = spec.add_child(node, role_token(vocab, kMethodOffset + a), cls);
        for (int b = 0; b < branching; ++b) {
          const Leaf leaf = decision_leaf(diff, a, b);
          const int c = spec.add_child(mid, role_token(vocab, kMethodOffset + b), leaf.prior);
          if (leaf.accept) accept_nodes.push_back(c);
        }
      }
    }
    for (int c : accept_nodes) spec.mark_accepting(c);
    out.push_back(std::move(spec));
  }
  return out;
}

RewardOutcome score(const PromptSpec& prompt, std::span<const Token> tokens) {
  if (tokens.size() > static_cast<std::size_t>(prompt.max_len())) {
    throw InvalidInput("score: sequence of length " +
                       std::to_string(tokens.size()) + " exceeds max_len " +
                       std::to_string(prompt.max_len()));
  }
  if (!tokens.empty() && tokens.back() == kEos) tokens = tokens.first(tokens.size() - 1);
  if (std::find(tokens.begin(), tokens.end(), kEos) != tokens.end()) return {};
  const int node = prompt.find(tokens);
  if (node <= 0) return {};
  const int answer = prompt.nodes()[static_cast<std::size_t>(node)].answer;
  if (answer < 0) return {};
  return {1.0, answer};
}

PriorConfig PriorConfig::concentrated() {
  PriorConfig cfg;
  cfg.plausible = 1e-12;
  cfg.competitive = 1e-12;
  cfg.unlikely = 1e-12;
  cfg.noise = 1e-12;
  return cfg;
}

void PriorConfig::validate() const {
  for (double v : {plausible, competitive, unlikely, noise}) {
    if (!(v > 0.0 && v < 1.0)) {
      throw InvalidInput("PriorConfig: class probabilities must lie in (0, 1)");
    }
  }
}

std::vector<PriorRow> base_prior(const PromptSpec& prompt,
                                 const PriorConfig& cfg) {
  cfg.validate();
  const auto vocab = static_cast<std::size_t>(prompt.vocab());
  const auto& nodes = prompt.nodes();
  std::vector<std::vector<Token>> prefix(nodes.size());
  std::vector<PriorRow> rows;
  rows.reserve(nodes.size());
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    const TrieNode& node = nodes[n];
    std::vector<double> p(vocab, 0.0);
    std::vector<bool> listed(vocab, false);
    Token greedy = kEos;
    double other_mass = 0.0;
    for (const TrieEdge& e : node.children) {
      prefix[static_cast<std::size_t>(e.child)] = prefix[n];
      prefix[static_cast<std::size_t>(e.child)].push_back(e.token);
      listed[static_cast<std::size_t>(e.token)] = true;
      double w = 0.0;
      switch (e.prior) {
        case PriorClass::kGreedy:
          greedy = e.token;
          continue;
        case PriorClass::kPlausible:
          w = cfg.plausible;
          break;
        case PriorClass::kCompetitive:
          w = cfg.competitive;
          break;
        case PriorClass::kUnlikely:
          w = cfg.unlikely;
          break;
      }
      p[static_cast<std::size_t>(e.token)] = w;
      other_mass += w;
    }
    if (node.children.empty()) greedy = kEos;
    listed[static_cast<std::size_t>(greedy)] = true;
    std::size_t unlisted = 0;
    for (bool b : listed) unlisted += b ? 0 : 1;
    if (unlisted > 0) {
      const double each = cfg.noise / static_cast<double>(unlisted);
      for (std::size_t v = 0; v < vocab; ++v) {
        if (!listed[v]) p[v] = each;
      }
      other_mass += cfg.noise;
    }
    const double g = 1.0 - other_mass;
    for (double x : p) {
      if (x > g) throw InvalidInput("base_prior: greedy token is not the mode");
    }
    p[static_cast<std::size_t>(greedy)] = g;
    rows.push_back({prefix[n], std::move(p)});
  }
  return rows;
}

void write_tasks(std::ostream& out, std::span<const PromptSpec> prompts) {
  for (const PromptSpec& p : prompts) {
    nlohmann::ordered_json j;
    j["id"] = p.id();
    j["difficulty"] = std::string(to_string(p.difficulty()));
    j["vocab"] = p.vocab();
    j["max_len"] = p.max_len();
    j["setup_len"] = p.setup_len();
    j["greedy"] = p.greedy_path();
    j["accepting"] = p.accepting();
    auto edges = nlohmann::json::array();
    // Edges are listed in child-index order so node ids rebuild identically.
    std::vector<std::pair<int, const TrieEdge*>> by_child;
    for (std::size_t n = 0; n < p.nodes().size(); ++n) {
      for (const TrieEdge& e : p.nodes()[n].children) {
        by_child.emplace_back(static_cast<int>(n), &e);
      }
    }
    std::sort(by_child.begin(), by_child.end(), [](const auto& a, const auto& b) {
      return a.second->child < b.second->child;
    });
    for (const auto& [parent, e] : by_child) {
      edges.push_back({parent, e->token, std::string(1, static_cast<char>(e->prior))});
    }
    j["edges"] = std::move(edges);
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write_tasks: stream failure");
}

std::vector<PromptSpec> read_tasks(std::istream& in) {
  std::vector<PromptSpec> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      PromptSpec spec(j.at("id").get<PromptId>(),
                      parse_difficulty(j.at("difficulty").get<std::string>()),
                      j.at("vocab").get<int>(), j.at("max_len").get<int>());
      spec.set_setup_len(j.value("setup_len", 0));
      for (const auto& e : j.at("edges")) {
        const auto cls = e.at(2).get<std::string>();
        if (cls.size() != 1 || std::string("gpcu").find(cls[0]) == std::string::npos) {
          throw InvalidInput("unknown prior class '" + cls + "'");
        }
        spec.add_child(e.at(0).get<int>(), e.at(1).get<Token>(),
                       static_cast<PriorClass>(cls[0]));
      }
      for (const auto& seq : j.at("accepting")) {
        const auto tokens = seq.get<std::vector<Token>>();
        const int node = spec.find(tokens);
        if (node <= 0) throw InvalidInput("accepting sequence missing from trie");
        spec.mark_accepting(node);
      }
      if (spec.num_accepting() == 0) throw InvalidInput("no accepting sequence");
      if (j.contains("greedy") &&
          j.at("greedy").get<std::vector<Token>>() != spec.greedy_path()) {
        throw InvalidInput("greedy path disagrees with trie");
      }
      out.push_back(std::move(spec));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput("read_tasks: line " + std::to_string(lineno) + ": " + e.what());
    } catch (const InvalidInput& e) {
      throw InvalidInput("read_tasks: line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace cuts
