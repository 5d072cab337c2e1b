#include "cuts/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "cuts/error.hpp"
#include "cuts/rollout.hpp"
#include "json.hpp"

namespace cuts {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Stream ids. Arms never share rollout or evaluation streams; the prompt
// schedule is common to both arms so they see the same batches.
constexpr std::uint64_t kTrainTaskStream = 0x747261696eULL;    // "train"
constexpr std::uint64_t kHeldoutTaskStream = 0x68656c64ULL;    // "held"
constexpr std::uint64_t kScheduleStream = 0x73636864ULL;       // "schd"
constexpr std::uint64_t kHeldoutIdBase = 1'000'000;

std::uint64_t rollout_stream(Arm a) {
  return a == Arm::kStandard ? 0x5354'0001ULL : 0x4d43'0001ULL;
}
std::uint64_t eval_stream(Arm a) {
  return a == Arm::kStandard ? 0x5354'0002ULL : 0x4d43'0002ULL;
}

ordered_json mix_json(const DifficultyMix& m) {
  ordered_json j;
  j["easy"] = m.easy;
  j["hard"] = m.hard;
  j["mixed"] = m.mixed;
  return j;
}

DifficultyMix mix_from(const nlohmann::json& j, DifficultyMix d) {
  d.easy = j.value("easy", d.easy);
  d.hard = j.value("hard", d.hard);
  d.mixed = j.value("mixed", d.mixed);
  return d;
}

ordered_json config_json(const ExperimentConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["arm"] = std::string(to_string(c.arm));
  j["task"] = {{"n_prompts", c.n_prompts}, {"vocab", c.vocab},
               {"max_len", c.max_len},     {"branching", c.branching},
               {"mix", mix_json(c.mix)}};
  j["heldout"] = {{"n_prompts", c.heldout_prompts},
                  {"mix", mix_json(c.heldout_mix)}};
  j["prior"] = {{"plausible", c.prior.plausible},
                {"competitive", c.prior.competitive},
                {"unlikely", c.prior.unlikely},
                {"noise", c.prior.noise}};
  j["cuts"] = {{"k", c.cuts.k}, {"delta", c.cuts.delta}, {"t_warm", c.cuts.t_warm}};
  j["group_size"] = c.group_size;
  j["split"] = {c.g_std, c.g_cuts};
  j["clip"] = {{"eps_low", c.clip.eps_low},
               {"eps_high", c.clip.eps_high},
               {"kl_coef", c.clip.kl_coef},
               {"adv_eps", c.clip.adv_eps}};
  j["learning_rate"] = c.learning_rate;
  j["steps"] = c.steps;
  j["batch_prompts"] = c.batch_prompts;
  j["mini_batch_prompts"] = c.mini_batch_prompts;
  j["eval_every"] = c.eval_every;
  j["eval_samples"] = c.eval_samples;
  j["context_order"] = c.context_order;
  j["shared_rows"] = c.shared_rows;
  j["dump_rollouts"] = c.dump_rollouts;
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string dynamics_csv_header() {
  return "step,mean_reward,mean_length,mean_entropy,mean_var_mixed,"
         "zero_variance_fraction,mean_abs_advantage,surrogate,mean_kl,"
         "clip_fraction\n";
}

void write_eval_row(std::ostream& out, const EvalResult& e) {
  csv::write_row(out, {std::to_string(e.step), csv::fmt(e.pass_at_1),
                       csv::fmt(e.pass_at_k), csv::fmt(e.maj_at_k),
                       csv::fmt(e.mean_length), csv::fmt(e.mean_entropy)});
}

// Epoch-shuffled prompt order shared by both arms.
class Schedule {
 public:
  Schedule(std::uint64_t seed, std::size_t n) : rng_(seed, kScheduleStream), n_(n) {}

  std::vector<std::size_t> next(std::size_t count) {
    std::vector<std::size_t> out;
    while (out.size() < count) {
      if (pos_ == order_.size()) refill();
      out.push_back(order_[pos_++]);
    }
    return out;
  }

 private:
  void refill() {
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    RngStream r = rng_.derive(epoch_++);
    for (std::size_t i = n_; i > 1; --i) std::swap(order_[i - 1], order_[r.below(i)]);
    pos_ = 0;
  }

  RngStream rng_;
  std::size_t n_;
  std::uint64_t epoch_ = 0;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string_view to_string(Arm a) {
  return a == Arm::kStandard ? "standard" : "mixed_cuts";
}

Arm parse_arm(std::string_view s) {
  if (s == "standard") return Arm::kStandard;
  if (s == "mixed_cuts") return Arm::kMixedCuts;
  throw InvalidInput("unknown arm '" + std::string(s) + "'");
}

TaskParams ExperimentConfig::train_task() const {
  TaskParams t;
  t.seed = mix64(seed ^ kTrainTaskStream);
  t.n_prompts = n_prompts;
  t.vocab = vocab;
  t.max_len = max_len;
  t.branching = branching;
  t.mix = mix;
  t.first_id = 0;
  return t;
}

TaskParams ExperimentConfig::heldout_task() const {
  TaskParams t = train_task();
  t.seed = mix64(seed ^ kHeldoutTaskStream);
  t.n_prompts = heldout_prompts;
  t.mix = heldout_mix;
  t.first_id = static_cast<PromptId>(kHeldoutIdBase);
  return t;
}

void ExperimentConfig::validate() const {
  train_task().validate();
  heldout_task().validate();
  if (n_prompts >= static_cast<int>(kHeldoutIdBase)) {
    throw InvalidInput("config: too many training prompts");
  }
  prior.validate();
  cuts.validate(static_cast<std::size_t>(vocab));
  clip.validate();
  if (group_size < 2 || group_size % 2 != 0) {
    throw InvalidInput("config: group_size must be even and >= 2");
  }
  if (g_std < 0 || g_cuts < 0 || g_std + g_cuts != group_size) {
    throw InvalidInput("config: split must sum to group_size");
  }
  if (arm == Arm::kMixedCuts && g_std != g_cuts) {
    throw InvalidInput("config: mixed_cuts needs an equal split");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidInput("config: learning_rate must be positive");
  }
  if (steps < 1) throw InvalidInput("config: steps must be >= 1");
  if (batch_prompts < 1) throw InvalidInput("config: batch_prompts must be >= 1");
  if (mini_batch_prompts < 1 || mini_batch_prompts > batch_prompts) {
    throw InvalidInput("config: mini_batch_prompts must lie in [1, batch_prompts]");
  }
  if (eval_every < 1) throw InvalidInput("config: eval_every must be >= 1");
  if (eval_samples < 1) throw InvalidInput("config: eval_samples must be >= 1");
  if (context_order < 0) throw InvalidInput("config: context_order must be >= 0");
}

void write_config(std::ostream& out, const ExperimentConfig& cfg) {
  out << config_json(cfg).dump(2) << '\n';
}

ExperimentConfig read_config(std::istream& in) {
  ExperimentConfig c;
  try {
    const auto j = nlohmann::json::parse(in);
    c.seed = j.value("seed", c.seed);
    if (j.contains("arm")) c.arm = parse_arm(j.at("arm").get<std::string>());
    if (j.contains("task")) {
      const auto& t = j.at("task");
      c.n_prompts = t.value("n_prompts", c.n_prompts);
      c.vocab = t.value("vocab", c.vocab);
      c.max_len = t.value("max_len", c.max_len);
      c.branching = t.value("branching", c.branching);
      if (t.contains("mix")) c.mix = mix_from(t.at("mix"), c.mix);
    }
    if (j.contains("heldout")) {
      const auto& h = j.at("heldout");
      c.heldout_prompts = h.value("n_prompts", c.heldout_prompts);
      if (h.contains("mix")) c.heldout_mix = mix_from(h.at("mix"), c.heldout_mix);
    }
    if (j.contains("prior")) {
      const auto& p = j.at("prior");
      c.prior.plausible = p.value("plausible", c.prior.plausible);
      c.prior.competitive = p.value("competitive", c.prior.competitive);
      c.prior.unlikely = p.value("unlikely", c.prior.unlikely);
      c.prior.noise = p.value("noise", c.prior.noise);
    }
    if (j.contains("cuts")) {
      const auto& k = j.at("cuts");
      c.cuts.k = k.value("k", c.cuts.k);
      c.cuts.delta = k.value("delta", c.cuts.delta);
      c.cuts.t_warm = k.value("t_warm", c.cuts.t_warm);
    }
    c.group_size = j.value("group_size", c.group_size);
    if (j.contains("split")) {
      const auto split = j.at("split").get<std::vector<int>>();
      if (split.size() != 2) throw InvalidInput("config: split needs two entries");
      c.g_std = split[0];
      c.g_cuts = split[1];
    } else {
      c.g_std = c.g_cuts = c.group_size / 2;
    }
    if (j.contains("clip")) {
      const auto& k = j.at("clip");
      c.clip.eps_low = k.value("eps_low", c.clip.eps_low);
      c.clip.eps_high = k.value("eps_high", c.clip.eps_high);
      c.clip.kl_coef = k.value("kl_coef", c.clip.kl_coef);
      c.clip.adv_eps = k.value("adv_eps", c.clip.adv_eps);
    }
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.steps = j.value("steps", c.steps);
    c.batch_prompts = j.value("batch_prompts", c.batch_prompts);
    c.mini_batch_prompts = j.value("mini_batch_prompts", c.mini_batch_prompts);
    c.eval_every = j.value("eval_every", c.eval_every);
    c.eval_samples = j.value("eval_samples", c.eval_samples);
    c.context_order = j.value("context_order", c.context_order);
    c.shared_rows = j.value("shared_rows", c.shared_rows);
    c.dump_rollouts = j.value("dump_rollouts", c.dump_rollouts);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return read_config(in);
}

SoftmaxPolicy initial_policy(const ExperimentConfig& cfg,
                             std::span<const PromptSpec> train,
                             std::span<const PromptSpec> heldout) {
  SoftmaxPolicy policy(cfg.vocab, cfg.context_order, cfg.shared_rows);
  for (auto set : {train, heldout}) {
    for (const PromptSpec& p : set) {
      const auto rows = base_prior(p, cfg.prior);
      load_prior(policy, p.id(), rows);
    }
  }
  return policy;
}

EvalResult evaluate(const SoftmaxPolicy& policy, std::span<const PromptSpec> prompts,
                    int samples, const RngStream& rng) {
  if (samples < 1) throw InvalidInput("evaluate: samples must be >= 1");
  if (prompts.empty()) throw InvalidInput("evaluate: no prompts");
  EvalResult out;
  const CutsConfig unused;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    const PromptSpec& p = prompts[i];
    const RngStream prng = rng.derive(i);
    std::vector<EvalSample> s;
    for (int k = 0; k < samples; ++k) {
      RngStream r = prng.derive(static_cast<std::uint64_t>(k));
      s.push_back(to_eval_sample(
          p.id(), generate_trajectory(policy, p, Origin::kStd, unused, r)));
    }
    PromptEval pe;
    pe.prompt = p.id();
    pe.difficulty = p.difficulty();
    pe.n = samples;
    pe.correct = static_cast<int>(std::count_if(
        s.begin(), s.end(), [](const EvalSample& e) { return e.correct; }));
    pe.pass_at_1 = pass_at_k(s, 1);
    pe.pass_at_k = pass_at_k(s, samples);
    pe.maj_at_k = maj_at_k(s, p.gold_answer());
    double len = 0.0, ent = 0.0;
    for (const EvalSample& e : s) {
      len += e.length;
      ent += e.mean_entropy;
    }
    pe.mean_length = len / samples;
    pe.mean_entropy = ent / samples;
    out.prompts.push_back(pe);
  }
  const auto n = static_cast<double>(out.prompts.size());
  for (const PromptEval& pe : out.prompts) {
    out.pass_at_1 += pe.pass_at_1 / n;
    out.pass_at_k += pe.pass_at_k / n;
    out.maj_at_k += pe.maj_at_k / n;
    out.mean_length += pe.mean_length / n;
    out.mean_entropy += pe.mean_entropy / n;
  }
  return out;
}

RunResult run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);

  const auto train = make_task(cfg.train_task());
  const auto heldout = make_task(cfg.heldout_task());
  SoftmaxPolicy live = initial_policy(cfg, train, heldout);

  {
    std::ostringstream c, t, h;
    write_config(c, cfg);
    write_text(out_dir / "config.json", c.str());
    write_tasks(t, train);
    write_text(out_dir / "tasks_train.jsonl", t.str());
    write_tasks(h, heldout);
    write_text(out_dir / "tasks_heldout.jsonl", h.str());
  }

  std::ostringstream dyn, var, evals, rollouts;
  dyn << dynamics_csv_header();
  var << "step,prompt,mode,mu_std,mu_cuts,var_std,var_cuts,within,between,"
         "var_mixed,case\n";
  evals << "step,pass_at_1,pass_at_k,maj_at_k,mean_length,mean_entropy\n";

  RunResult result;
  const RngStream rollout_root(cfg.seed, rollout_stream(cfg.arm));
  const RngStream eval_root(cfg.seed, eval_stream(cfg.arm));
  Schedule schedule(cfg.seed, train.size());

  auto run_eval = [&](int step) {
    EvalResult e = evaluate(live, heldout, cfg.eval_samples,
                            eval_root.derive(static_cast<std::uint64_t>(step)));
    e.step = step;
    write_eval_row(evals, e);
    result.evals.push_back(std::move(e));
  };
  run_eval(0);

  for (int step = 0; step < cfg.steps; ++step) {
    const SoftmaxPolicy snapshot = live;
    const RngStream step_rng = rollout_root.derive(static_cast<std::uint64_t>(step));
    const auto batch = schedule.next(static_cast<std::size_t>(cfg.batch_prompts));

    std::vector<RolloutGroup> groups;
    std::vector<AdvantageVector> advs;
    for (std::size_t j = 0; j < batch.size(); ++j) {
      const PromptSpec& p = train[batch[j]];
      const RngStream g_rng = step_rng.derive(j);
      groups.push_back(cfg.arm == Arm::kMixedCuts
                           ? rollout_group(snapshot, p, cfg.cuts, cfg.group_size, g_rng)
                           : rollout_group_standard(snapshot, p, cfg.group_size, g_rng));
      advs.push_back(advantages(groups.back().rewards(), cfg.clip.adv_eps));
    }
    if (cfg.dump_rollouts) write_rollouts(rollouts, groups, step);

    StepLog log;
    log.dynamics = dynamics_row(step, groups);
    log.mean_abs_advantage = saturation_census(groups, cfg.clip.adv_eps).all.mean_abs_advantage;

    for (const RolloutGroup& g : groups) {
      if (g.g_cuts > 0) {
        const VarianceReport r = decompose(g);
        csv::write_row(var, {std::to_string(step), std::to_string(g.prompt), "mixed",
                             csv::fmt(r.mu_std), csv::fmt(r.mu_cuts), csv::fmt(r.var_std),
                             csv::fmt(r.var_cuts), csv::fmt(r.within), csv::fmt(r.between),
                             csv::fmt(r.var_mixed), std::string(to_string(r.label))});
      } else {
        const auto rw = g.rewards();
        const double mean = std::accumulate(rw.begin(), rw.end(), 0.0) / rw.size();
        const double v = oracle_pooled_variance(rw);
        const auto label = mean >= 1.0 - kSaturationTolerance ? SaturationCase::kCaseA
                           : mean <= kSaturationTolerance     ? SaturationCase::kCaseB
                                                              : SaturationCase::kGeneric;
        csv::write_row(var, {std::to_string(step), std::to_string(g.prompt), "standard",
                             csv::fmt(mean), "", csv::fmt(v), "", "", "", csv::fmt(v),
                             std::string(to_string(label))});
      }
    }

    // Sequential mini-batch updates against the frozen snapshot.
    const auto mb = static_cast<std::size_t>(cfg.mini_batch_prompts);
    int updates = 0;
    for (std::size_t start = 0; start < groups.size(); start += mb) {
      const std::size_t end = std::min(groups.size(), start + mb);
      const double scale = 1.0 / static_cast<double>(end - start);
      SparseGrad grad;
      double objective = 0.0, kl = 0.0, clip = 0.0;
      for (std::size_t j = start; j < end; ++j) {
        const SurrogateResult r = surrogate_and_grad(groups[j], live, snapshot, advs[j], cfg.clip);
        add_scaled(grad, r.grad, scale);
        objective += scale * r.objective;
        kl += scale * r.mean_kl;
        clip += scale * r.clip_fraction;
      }
      if (!std::isfinite(objective) || !all_finite(grad)) {
        ordered_json diag;
        diag["step"] = step;
        diag["mini_batch_start"] = start;
        diag["objective"] = std::isfinite(objective) ? objective : 0.0;
        diag["objective_finite"] = static_cast<bool>(std::isfinite(objective));
        diag["gradient_finite"] = all_finite(grad);
        write_text(out_dir / "diagnostic.json", diag.dump(2) + "\n");
        throw NumericalError("non-finite surrogate at step " + std::to_string(step) +
                             "; diagnostic written to " +
                             (out_dir / "diagnostic.json").string());
      }
      update_step(live, grad, cfg.learning_rate);
      log.surrogate += objective;
      log.mean_kl += kl;
      log.clip_fraction += clip;
      ++updates;
    }
    log.surrogate /= updates;
    log.mean_kl /= updates;
    log.clip_fraction /= updates;

    const DynamicsRow& d = log.dynamics;
    csv::write_row(dyn, {std::to_string(step), csv::fmt(d.mean_reward),
                         csv::fmt(d.mean_length), csv::fmt(d.mean_entropy),
                         csv::fmt(d.mean_var_mixed), csv::fmt(d.zero_variance_fraction),
                         csv::fmt(log.mean_abs_advantage), csv::fmt(log.surrogate),
                         csv::fmt(log.mean_kl), csv::fmt(log.clip_fraction)});
    result.steps.push_back(log);

    if ((step + 1) % cfg.eval_every == 0 || step + 1 == cfg.steps) run_eval(step + 1);
  }

  write_text(out_dir / "dynamics.csv", dyn.str());
  write_text(out_dir / "variance.csv", var.str());
  write_text(out_dir / "eval.csv", evals.str());
  if (cfg.dump_rollouts) write_text(out_dir / "rollouts.jsonl", rollouts.str());

  {
    std::ostringstream f;
    f << "prompt,difficulty,n,correct,pass_at_1,pass_at_k,maj_at_k,mean_length,"
         "mean_entropy\n";
    for (const PromptEval& pe : result.evals.back().prompts) {
      csv::write_row(f, {std::to_string(pe.prompt), std::string(to_string(pe.difficulty)),
                         std::to_string(pe.n), std::to_string(pe.correct),
                         csv::fmt(pe.pass_at_1), csv::fmt(pe.pass_at_k),
                         std::to_string(pe.maj_at_k), csv::fmt(pe.mean_length),
                         csv::fmt(pe.mean_entropy)});
    }
    write_text(out_dir / "eval_final.csv", f.str());
  }
  {
    std::ostringstream p;
    live.save(p);
    write_text(out_dir / "policy.jsonl", p.str());
  }
  {
    ordered_json m;
    m["tool"] = "cuts";
    m["version"] = std::string(kVersion);
    m["seed"] = cfg.seed;
    m["arm"] = std::string(to_string(cfg.arm));
    m["task_seed_train"] = cfg.train_task().seed;
    m["task_seed_heldout"] = cfg.heldout_task().seed;
    m["streams"] = {{"schedule", kScheduleStream},
                    {"rollout", rollout_stream(cfg.arm)},
                    {"eval", eval_stream(cfg.arm)}};
    auto files = nlohmann::json::array({"config.json", "tasks_train.jsonl",
                                        "tasks_heldout.jsonl", "dynamics.csv",
                                        "variance.csv", "eval.csv", "eval_final.csv",
                                        "policy.jsonl"});
    if (cfg.dump_rollouts) files.push_back("rollouts.jsonl");
    m["files"] = files;
    write_text(out_dir / "manifest.json", m.dump(2) + "\n");
  }
  return result;
}

namespace {

struct RunFiles {
  ExperimentConfig cfg;
  csv::Table dynamics;
  csv::Table eval;
};

RunFiles load_run(const fs::path& dir) {
  RunFiles r{read_config_file(dir / "config.json"),
             csv::read_file((dir / "dynamics.csv").string()),
             csv::read_file((dir / "eval.csv").string())};
  return r;
}

bool same_task(const ExperimentConfig& a, const ExperimentConfig& b) {
  const TaskParams ta = a.train_task(), tb = b.train_task();
  const TaskParams ha = a.heldout_task(), hb = b.heldout_task();
  auto eq = [](const TaskParams& x, const TaskParams& y) {
    return x.seed == y.seed && x.n_prompts == y.n_prompts && x.vocab == y.vocab &&
           x.max_len == y.max_len && x.branching == y.branching &&
           x.mix.easy == y.mix.easy && x.mix.hard == y.mix.hard &&
           x.mix.mixed == y.mix.mixed;
  };
  return eq(ta, tb) && eq(ha, hb);
}

// Rows of `a` and `b` paired by their integer step column.
std::vector<std::pair<std::size_t, std::size_t>> pair_steps(const csv::Table& a,
                                                            const csv::Table& b) {
  std::map<long, std::size_t> in_b;
  for (std::size_t i = 0; i < b.rows.size(); ++i) {
    in_b[std::lround(b.number(i, "step"))] = i;
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto it = in_b.find(std::lround(a.number(i, "step")));
    if (it != in_b.end()) out.emplace_back(i, it->second);
  }
  return out;
}

csv::Table paired(const csv::Table& a, const csv::Table& b,
                  const std::vector<std::string>& metrics, bool with_sign) {
  csv::Table t;
  t.header.push_back("step");
  for (const auto& m : metrics) {
    t.header.push_back(m + "_a");
    t.header.push_back(m + "_b");
    t.header.push_back(m + "_delta");
  }
  if (with_sign) t.header.push_back("entropy_delta_sign");
  for (const auto& [ia, ib] : pair_steps(a, b)) {
    std::vector<std::string> row{a.rows[ia][a.column("step")]};
    double entropy_delta = 0.0;
    for (const auto& m : metrics) {
      const double va = a.number(ia, m);
      const double vb = b.number(ib, m);
      row.push_back(csv::fmt(va));
      row.push_back(csv::fmt(vb));
      row.push_back(csv::fmt(vb - va));
      if (m == "mean_entropy") entropy_delta = vb - va;
    }
    if (with_sign) {
      row.push_back(entropy_delta > 0 ? "+" : entropy_delta < 0 ? "-" : "0");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_table(const csv::Table& t, const fs::path& path) {
  std::ostringstream out;
  csv::write_row(out, t.header);
  for (const auto& r : t.rows) csv::write_row(out, r);
  write_text(path, out.str());
}

}  // namespace

ComparisonReport compare_arms(const fs::path& run_a, const fs::path& run_b) {
  const RunFiles a = load_run(run_a);
  const RunFiles b = load_run(run_b);
  if (!same_task(a.cfg, b.cfg)) {
    throw InvalidInput("compare: runs use different task seeds or task parameters");
  }
  ComparisonReport rep;
  rep.arm_a = std::string(to_string(a.cfg.arm));
  rep.arm_b = std::string(to_string(b.cfg.arm));
  rep.dynamics = paired(a.dynamics, b.dynamics,
                        {"mean_entropy", "mean_var_mixed", "zero_variance_fraction",
                         "mean_abs_advantage", "mean_reward", "mean_length"},
                        true);
  rep.eval = paired(a.eval, b.eval, {"pass_at_1", "pass_at_k", "maj_at_k", "mean_entropy"},
                    false);
  rep.summary.header = {"metric", "a", "b", "delta"};
  if (!a.eval.rows.empty() && !b.eval.rows.empty()) {
    const std::size_t la = a.eval.rows.size() - 1, lb = b.eval.rows.size() - 1;
    for (const std::string m :
         {"pass_at_1", "pass_at_k", "maj_at_k", "mean_length", "mean_entropy"}) {
      const double va = a.eval.number(la, m), vb = b.eval.number(lb, m);
      rep.summary.rows.push_back({"final_" + m, csv::fmt(va), csv::fmt(vb), csv::fmt(vb - va)});
    }
  }
  return rep;
}

void write_comparison(const ComparisonReport& report, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  write_table(report.dynamics, out_dir / "compare_dynamics.csv");
  write_table(report.eval, out_dir / "compare_eval.csv");
  write_table(report.summary, out_dir / "compare_summary.csv");
}

}  // namespace cuts
