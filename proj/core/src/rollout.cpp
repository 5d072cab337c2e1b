#include "cuts/rollout.hpp"

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "cuts/error.hpp"
#include "json.hpp"

namespace cuts {

std::string_view to_string(Origin o) { return o == Origin::kStd ? "std" : "cuts"; }

double TrajectoryRecord::mean_entropy() const {
  if (step_entropy.empty()) return 0.0;
  return std::accumulate(step_entropy.begin(), step_entropy.end(), 0.0) /
         static_cast<double>(step_entropy.size());
}

std::vector<double> RolloutGroup::rewards() const {
  std::vector<double> r;
  r.reserve(trajectories.size());
  for (const auto& t : trajectories) r.push_back(t.reward.r);
  return r;
}

TrajectoryRecord generate_trajectory(const SoftmaxPolicy& snapshot,
                                     const PromptSpec& prompt, Origin origin,
                                     const CutsConfig& cfg, RngStream& rng) {
  if (snapshot.vocab() != prompt.vocab()) {
    throw InvalidInput("generate_trajectory: policy and task vocabularies differ");
  }
  TrajectoryRecord rec;
  rec.origin = origin;
  const int max_len = prompt.max_len();
  for (int step = 0; step < max_len; ++step) {
    const CategoricalDist dist = snapshot.next_dist(prompt.id(), rec.tokens);
    Token tok;
    double behavior;
    if (origin == Origin::kCuts) {
      const CutsDraw d = sample_cuts(dist, cfg, step, rng);
      tok = d.token;
      behavior = std::log(d.proposal[static_cast<std::size_t>(tok)]);
    } else {
      tok = sample_standard(dist, rng);
      behavior = std::log(dist[static_cast<std::size_t>(tok)]);
    }
    rec.tokens.push_back(tok);
    rec.model_logprobs.push_back(std::log(dist[static_cast<std::size_t>(tok)]));
    rec.behavior_logprobs.push_back(behavior);
    rec.step_entropy.push_back(entropy(dist));
    if (tok == kEos) break;
  }
  rec.length = static_cast<int>(rec.tokens.size());
  rec.truncated = rec.tokens.empty() || rec.tokens.back() != kEos;
  rec.reward = rec.truncated ? RewardOutcome{} : score(prompt, rec.tokens);
  return rec;
}

namespace {

void check_group_size(int g) {
  if (g < 2 || g % 2 != 0) {
    throw InvalidInput("rollout: group size must be even and >= 2, got " +
                       std::to_string(g));
  }
}

}  // namespace

RolloutGroup rollout_group(const SoftmaxPolicy& snapshot,
                           const PromptSpec& prompt, const CutsConfig& cfg,
                           int group_size, const RngStream& rng) {
  check_group_size(group_size);
  cfg.validate(static_cast<std::size_t>(prompt.vocab()));
  RolloutGroup g;
  g.prompt = prompt.id();
  g.g_std = group_size / 2;
  g.g_cuts = group_size / 2;
  g.trajectories.reserve(static_cast<std::size_t>(group_size));
  for (int i = 0; i < group_size; ++i) {
    RngStream r = rng.derive(static_cast<std::uint64_t>(i));
    const Origin o = i < g.g_std ? Origin::kStd : Origin::kCuts;
    g.trajectories.push_back(generate_trajectory(snapshot, prompt, o, cfg, r));
  }
  return g;
}

RolloutGroup rollout_group_standard(const SoftmaxPolicy& snapshot,
                                    const PromptSpec& prompt, int group_size,
                                    const RngStream& rng) {
  check_group_size(group_size);
  const CutsConfig unused;
  RolloutGroup g;
  g.prompt = prompt.id();
  g.g_std = group_size;
  g.g_cuts = 0;
  g.trajectories.reserve(static_cast<std::size_t>(group_size));
  for (int i = 0; i < group_size; ++i) {
    RngStream r = rng.derive(static_cast<std::uint64_t>(i));
    g.trajectories.push_back(
        generate_trajectory(snapshot, prompt, Origin::kStd, unused, r));
  }
  return g;
}

void write_rollouts(std::ostream& out, std::span<const RolloutGroup> groups,
                    int step) {
  for (const RolloutGroup& g : groups) {
    for (std::size_t i = 0; i < g.trajectories.size(); ++i) {
      const TrajectoryRecord& t = g.trajectories[i];
      nlohmann::ordered_json j;
      j["step"] = step;
      j["prompt"] = g.prompt;
      j["index"] = i;
      j["g_std"] = g.g_std;
      j["g_cuts"] = g.g_cuts;
      j["origin"] = std::string(to_string(t.origin));
      j["tokens"] = t.tokens;
      j["behavior_logprobs"] = t.behavior_logprobs;
      j["model_logprobs"] = t.model_logprobs;
      j["step_entropy"] = t.step_entropy;
      j["reward"] = t.reward.r;
      j["answer"] = t.reward.answer;
      j["length"] = t.length;
      j["truncated"] = t.truncated;
      out << j.dump() << '\n';
    }
  }
  if (!out) throw IoError("write_rollouts: stream failure");
}

std::vector<DumpedGroup> read_rollouts(std::istream& in) {
  std::vector<DumpedGroup> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TrajectoryRecord t;
      const auto origin = j.at("origin").get<std::string>();
      if (origin != "std" && origin != "cuts") {
        throw InvalidInput("read_rollouts: unknown origin '" + origin + "'");
      }
      t.origin = origin == "std" ? Origin::kStd : Origin::kCuts;
      t.tokens = j.at("tokens").get<std::vector<Token>>();
      t.behavior_logprobs = j.at("behavior_logprobs").get<std::vector<double>>();
      t.model_logprobs = j.at("model_logprobs").get<std::vector<double>>();
      t.step_entropy = j.at("step_entropy").get<std::vector<double>>();
      t.reward = {j.at("reward").get<double>(), j.at("answer").get<int>()};
      t.length = j.at("length").get<int>();
      t.truncated = j.at("truncated").get<bool>();
      const int step = j.at("step").get<int>();
      const auto prompt = j.at("prompt").get<PromptId>();
      const auto index = j.at("index").get<std::size_t>();
      if (index == 0) {
        DumpedGroup d;
        d.step = step;
        d.group.prompt = prompt;
        d.group.g_std = j.at("g_std").get<int>();
        d.group.g_cuts = j.at("g_cuts").get<int>();
        out.push_back(std::move(d));
      }
      if (out.empty() || out.back().step != step || out.back().group.prompt != prompt ||
          out.back().group.trajectories.size() != index) {
        throw InvalidInput("read_rollouts: trajectory lines out of order");
      }
      out.back().group.trajectories.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(std::string("read_rollouts: ") + e.what());
    }
  }
  return out;
}

}  // namespace cuts
