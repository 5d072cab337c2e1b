#include "cuts/policy.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <string>

#include "cuts/error.hpp"
#include "json.hpp"

namespace cuts {

void add_scaled(SparseGrad& dst, const SparseGrad& src, double scale) {
  for (const auto& [key, g] : src) {
    auto& d = dst[key];
    if (d.empty()) d.assign(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += scale * g[i];
  }
}

bool all_finite(const SparseGrad& g) {
  for (const auto& [key, v] : g) {
    for (double x : v) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

SoftmaxPolicy::SoftmaxPolicy(int vocab, int context_order, bool shared_rows)
    : vocab_(vocab), context_order_(context_order), shared_rows_(shared_rows) {
  if (vocab < 2) throw InvalidInput("SoftmaxPolicy: vocab must be >= 2");
  if (context_order < 0) throw InvalidInput("SoftmaxPolicy: negative context order");
}

ContextKey SoftmaxPolicy::key(PromptId prompt, std::span<const Token> prefix) const {
  if (prompt < 0) throw InvalidInput("SoftmaxPolicy: prompt ids must be >= 0");
  ContextKey k = shared_key(prefix);
  k.prompt = prompt;
  return k;
}

ContextKey SoftmaxPolicy::shared_key(std::span<const Token> prefix) const {
  const auto n = std::min(prefix.size(), static_cast<std::size_t>(context_order_));
  ContextKey k;
  k.prompt = kSharedPrompt;
  k.tail.assign(prefix.end() - static_cast<std::ptrdiff_t>(n), prefix.end());
  return k;
}

std::vector<double> SoftmaxPolicy::logits(PromptId prompt,
                                          std::span<const Token> prefix) const {
  std::vector<double> z(static_cast<std::size_t>(vocab_), 0.0);
  if (const auto* r = find_row(key(prompt, prefix))) z = *r;
  if (shared_rows_) {
    if (const auto* s = find_row(shared_key(prefix))) {
      for (std::size_t i = 0; i < z.size(); ++i) z[i] += (*s)[i];
    }
  }
  return z;
}

CategoricalDist SoftmaxPolicy::next_dist(PromptId prompt,
                                         std::span<const Token> prefix) const {
  return CategoricalDist::from_logits(logits(prompt, prefix));
}

double SoftmaxPolicy::logprob(PromptId prompt, std::span<const Token> prefix,
                              Token token) const {
  check_token(token);
  const auto z = logits(prompt, prefix);
  const double hi = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double x : z) s += std::exp(x - hi);
  return z[static_cast<std::size_t>(token)] - hi - std::log(s);
}

SoftmaxPolicy::LogProbGrad SoftmaxPolicy::logprob_and_grad(
    PromptId prompt, std::span<const Token> prefix, Token token) const {
  LogProbGrad out;
  out.logprob = accumulate_logprob_grad(prompt, prefix, token, 1.0, out.grad);
  return out;
}

double SoftmaxPolicy::accumulate_logprob_grad(PromptId prompt,
                                              std::span<const Token> prefix,
                                              Token token, double scale,
                                              SparseGrad& into) const {
  check_token(token);
  const auto z = logits(prompt, prefix);
  const double hi = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - hi);
    s += p[i];
  }
  const double lp = z[static_cast<std::size_t>(token)] - hi - std::log(s);
  auto add_into = [&](const ContextKey& k) {
    auto& g = into[k];
    if (g.empty()) g.assign(z.size(), 0.0);
    for (std::size_t i = 0; i < z.size(); ++i) g[i] -= scale * (p[i] / s);
    g[static_cast<std::size_t>(token)] += scale;
  };
  add_into(key(prompt, prefix));
  if (shared_rows_) add_into(shared_key(prefix));
  return lp;
}

std::vector<double>& SoftmaxPolicy::row(const ContextKey& key) {
  auto& r = rows_[key];
  if (r.empty()) r.assign(static_cast<std::size_t>(vocab_), 0.0);
  return r;
}

const std::vector<double>* SoftmaxPolicy::find_row(const ContextKey& key) const {
  const auto it = rows_.find(key);
  return it == rows_.end() ? nullptr : &it->second;
}

void SoftmaxPolicy::apply(const SparseGrad& grad, double scale) {
  if (!std::isfinite(scale)) throw NumericalError("apply: non-finite scale");
  if (!all_finite(grad)) throw NumericalError("apply: non-finite gradient entry");
  for (const auto& [key, g] : grad) {
    if (g.size() != static_cast<std::size_t>(vocab_)) {
      throw InvalidInput("apply: gradient row has wrong width");
    }
    auto& r = row(key);
    for (std::size_t i = 0; i < g.size(); ++i) r[i] += scale * g[i];
  }
}

void SoftmaxPolicy::check_token(Token t) const {
  if (t < 0 || t >= vocab_) {
    throw InvalidInput("SoftmaxPolicy: token " + std::to_string(t) +
                       " outside vocabulary");
  }
}

void SoftmaxPolicy::save(std::ostream& out) const {
  nlohmann::ordered_json header;
  header["format"] = "cuts-policy";
  header["vocab"] = vocab_;
  header["context_order"] = context_order_;
  header["shared_rows"] = shared_rows_;
  out << header.dump() << '\n';
  for (const auto& [key, r] : rows_) {
    nlohmann::ordered_json j;
    j["prompt"] = key.prompt;
    j["context"] = key.tail;
    j["logits"] = r;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("SoftmaxPolicy::save: stream failure");
}

SoftmaxPolicy SoftmaxPolicy::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("policy checkpoint: empty input");
  try {
    const auto header = nlohmann::json::parse(line);
    if (header.value("format", "") != "cuts-policy") {
      throw InvalidInput("policy checkpoint: bad header");
    }
    SoftmaxPolicy policy(header.at("vocab").get<int>(),
                         header.at("context_order").get<int>(),
                         header.at("shared_rows").get<bool>());
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      ContextKey key{j.at("prompt").get<PromptId>(),
                     j.at("context").get<std::vector<Token>>()};
      auto logits = j.at("logits").get<std::vector<double>>();
      if (logits.size() != static_cast<std::size_t>(policy.vocab_)) {
        throw InvalidInput("policy checkpoint: row width mismatch");
      }
      for (double x : logits) {
        if (!std::isfinite(x)) throw InvalidInput("policy checkpoint: non-finite logit");
      }
      policy.rows_[std::move(key)] = std::move(logits);
    }
    return policy;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("policy checkpoint: ") + e.what());
  }
}

void load_prior(SoftmaxPolicy& policy, PromptId prompt,
                std::span<const PriorRow> rows) {
  std::set<ContextKey> written;
  for (const PriorRow& pr : rows) {
    if (pr.probs.size() != static_cast<std::size_t>(policy.vocab())) {
      throw InvalidInput("load_prior: row width does not match vocabulary");
    }
    ContextKey k = policy.key(prompt, pr.prefix);
    if (!written.insert(k).second) continue;
    auto& r = policy.row(k);
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!(pr.probs[i] > 0.0)) throw InvalidInput("load_prior: zero probability");
      r[i] = std::log(pr.probs[i]);
    }
  }
}

}  // namespace cuts
