#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cuts/error.hpp"
#include "cuts/harness.hpp"

namespace fs = std::filesystem;

namespace {

void add_config_flags(CLI::App* app, cuts::ExperimentConfig& c, std::string& config_path) {
  app->add_option("--config", config_path, "JSON config; flags override it");
  app->add_option("--seed", c.seed);
  app->add_option("--n-prompts", c.n_prompts);
  app->add_option("--vocab", c.vocab);
  app->add_option("--max-len", c.max_len);
  app->add_option("--branching", c.branching);
  app->add_option("--mix-easy", c.mix.easy);
  app->add_option("--mix-hard", c.mix.hard);
  app->add_option("--mix-mixed", c.mix.mixed);
  app->add_option("--heldout-prompts", c.heldout_prompts);
  app->add_option("--heldout-mix-easy", c.heldout_mix.easy);
  app->add_option("--heldout-mix-hard", c.heldout_mix.hard);
  app->add_option("--heldout-mix-mixed", c.heldout_mix.mixed);
  app->add_option("--prior-plausible", c.prior.plausible);
  app->add_option("--prior-competitive", c.prior.competitive);
  app->add_option("--prior-unlikely", c.prior.unlikely);
  app->add_option("--prior-noise", c.prior.noise);
  app->add_option("--k", c.cuts.k);
  app->add_option("--delta", c.cuts.delta);
  app->add_option("--t-warm", c.cuts.t_warm);
  app->add_option("--group-size", c.group_size);
  app->add_option("--g-std", c.g_std);
  app->add_option("--g-cuts", c.g_cuts);
  app->add_option("--eps-low", c.clip.eps_low);
  app->add_option("--eps-high", c.clip.eps_high);
  app->add_option("--kl-coef", c.clip.kl_coef);
  app->add_option("--adv-eps", c.clip.adv_eps);
  app->add_option("--lr", c.learning_rate);
  app->add_option("--steps", c.steps);
  app->add_option("--batch-prompts", c.batch_prompts);
  app->add_option("--mini-batch-prompts", c.mini_batch_prompts);
  app->add_option("--eval-every", c.eval_every);
  app->add_option("--eval-samples", c.eval_samples);
  app->add_option("--context-order", c.context_order);
  app->add_option("--shared-rows", c.shared_rows);
  app->add_flag("--dump-rollouts", c.dump_rollouts);
}

// Config file first, then any flag given explicitly on the command line.
cuts::ExperimentConfig resolve(CLI::App* app, const cuts::ExperimentConfig& flags,
                               const std::string& config_path) {
  if (config_path.empty()) return flags;
  cuts::ExperimentConfig c = cuts::read_config_file(config_path);
  auto given = [&](const char* name) { return app->count(name) > 0; };
  if (given("--seed")) c.seed = flags.seed;
  if (given("--n-prompts")) c.n_prompts = flags.n_prompts;
  if (given("--vocab")) c.vocab = flags.vocab;
  if (given("--max-len")) c.max_len = flags.max_len;
  if (given("--branching")) c.branching = flags.branching;
  if (given("--mix-easy")) c.mix.easy = flags.mix.easy;
  if (given("--mix-hard")) c.mix.hard = flags.mix.hard;
  if (given("--mix-mixed")) c.mix.mixed = flags.mix.mixed;
  if (given("--heldout-prompts")) c.heldout_prompts = flags.heldout_prompts;
  if (given("--heldout-mix-easy")) c.heldout_mix.easy = flags.heldout_mix.easy;
  if (given("--heldout-mix-hard")) c.heldout_mix.hard = flags.heldout_mix.hard;
  if (given("--heldout-mix-mixed")) c.heldout_mix.mixed = flags.heldout_mix.mixed;
  if (given("--prior-plausible")) c.prior.plausible = flags.prior.plausible;
  if (given("--prior-competitive")) c.prior.competitive = flags.prior.competitive;
  if (given("--prior-unlikely")) c.prior.unlikely = flags.prior.unlikely;
  if (given("--prior-noise")) c.prior.noise = flags.prior.noise;
  if (given("--k")) c.cuts.k = flags.cuts.k;
  if (given("--delta")) c.cuts.delta = flags.cuts.delta;
  if (given("--t-warm")) c.cuts.t_warm = flags.cuts.t_warm;
  if (given("--group-size")) c.group_size = flags.group_size;
  if (given("--g-std")) c.g_std = flags.g_std;
  if (given("--g-cuts")) c.g_cuts = flags.g_cuts;
  if (given("--eps-low")) c.clip.eps_low = flags.clip.eps_low;
  if (given("--eps-high")) c.clip.eps_high = flags.clip.eps_high;
  if (given("--kl-coef")) c.clip.kl_coef = flags.clip.kl_coef;
  if (given("--adv-eps")) c.clip.adv_eps = flags.clip.adv_eps;
  if (given("--lr")) c.learning_rate = flags.learning_rate;
  if (given("--steps")) c.steps = flags.steps;
  if (given("--batch-prompts")) c.batch_prompts = flags.batch_prompts;
  if (given("--mini-batch-prompts")) c.mini_batch_prompts = flags.mini_batch_prompts;
  if (given("--eval-every")) c.eval_every = flags.eval_every;
  if (given("--eval-samples")) c.eval_samples = flags.eval_samples;
  if (given("--context-order")) c.context_order = flags.context_order;
  if (given("--shared-rows")) c.shared_rows = flags.shared_rows;
  if (given("--dump-rollouts")) c.dump_rollouts = flags.dump_rollouts;
  return c;
}

void print_eval(std::ostream& out, const cuts::EvalResult& e) {
  out << "step,pass_at_1,pass_at_k,maj_at_k,mean_length,mean_entropy\n";
  cuts::csv::write_row(out, {std::to_string(e.step), cuts::csv::fmt(e.pass_at_1),
                             cuts::csv::fmt(e.pass_at_k), cuts::csv::fmt(e.maj_at_k),
                             cuts::csv::fmt(e.mean_length), cuts::csv::fmt(e.mean_entropy)});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cuts: mixed-CUTS vs. standard GRPO on synthetic saturated tasks"};
  app.set_version_flag("--version", std::string(cuts::kVersion));
  app.require_subcommand(1);

  cuts::ExperimentConfig gen_cfg, run_cfg;
  std::string gen_config, run_config;

  auto* gen = app.add_subcommand("generate-task", "write train and held-out tasks as JSONL");
  add_config_flags(gen, gen_cfg, gen_config);
  std::string gen_out = "-";
  gen->add_option("-o,--out", gen_out, "output file ('-' for stdout)");
  bool gen_heldout = false;
  gen->add_flag("--heldout", gen_heldout, "emit the held-out prompts instead");

  auto* run = app.add_subcommand("run", "train one arm (or both) and write run directories");
  add_config_flags(run, run_cfg, run_config);
  std::string arm = "mixed_cuts";
  std::string run_out;
  run->add_option("--arm", arm)->check(CLI::IsMember({"standard", "mixed_cuts", "both"}));
  run->add_option("-o,--out", run_out, "run directory (parent directory with --arm both)")
      ->required();

  auto* cmp = app.add_subcommand("compare", "paired comparison of two run directories");
  std::string cmp_a, cmp_b, cmp_out;
  cmp->add_option("run_a", cmp_a)->required()->check(CLI::ExistingDirectory);
  cmp->add_option("run_b", cmp_b)->required()->check(CLI::ExistingDirectory);
  cmp->add_option("-o,--out", cmp_out, "output directory (default: print summary only)");

  auto* ev = app.add_subcommand("eval", "evaluate a saved policy on a run's held-out prompts");
  std::string ev_run, ev_policy;
  int ev_samples = 0;
  std::uint64_t ev_seed = 0;
  bool ev_seed_given = false;
  ev->add_option("run", ev_run, "run directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--policy", ev_policy, "policy JSONL (default: <run>/policy.jsonl)");
  ev->add_option("--samples", ev_samples, "samples per prompt (default: config value)");
  ev->add_option("--seed", ev_seed)->each([&](const std::string&) { ev_seed_given = true; });
  bool ev_per_prompt = false;
  ev->add_flag("--per-prompt", ev_per_prompt, "print one row per prompt");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(cuts::ErrorClass::kInvalidInput);
  }

  try {
    if (*gen) {
      const cuts::ExperimentConfig c = resolve(gen, gen_cfg, gen_config);
      c.validate();
      const auto tasks = cuts::make_task(gen_heldout ? c.heldout_task() : c.train_task());
      if (gen_out == "-") {
        cuts::write_tasks(std::cout, tasks);
      } else {
        const fs::path parent = fs::path(gen_out).parent_path();
        if (!parent.empty()) fs::create_directories(parent);
        std::ofstream out(gen_out);
        if (!out) throw cuts::IoError("cannot write " + gen_out);
        cuts::write_tasks(out, tasks);
      }
    } else if (*run) {
      cuts::ExperimentConfig c = resolve(run, run_cfg, run_config);
      if (arm == "both") {
        for (cuts::Arm a : {cuts::Arm::kStandard, cuts::Arm::kMixedCuts}) {
          c.arm = a;
          const fs::path dir = fs::path(run_out) / std::string(cuts::to_string(a));
          const auto r = cuts::run_experiment(c, dir);
          std::cout << cuts::to_string(a) << ' ' << dir.string() << '\n';
          print_eval(std::cout, r.evals.back());
        }
      } else {
        if (run_config.empty() || run->count("--arm") > 0) c.arm = cuts::parse_arm(arm);
        const auto r = cuts::run_experiment(c, run_out);
        print_eval(std::cout, r.evals.back());
      }
    } else if (*cmp) {
      const auto rep = cuts::compare_arms(cmp_a, cmp_b);
      if (!cmp_out.empty()) cuts::write_comparison(rep, cmp_out);
      cuts::csv::write_row(std::cout, rep.summary.header);
      for (const auto& row : rep.summary.rows) cuts::csv::write_row(std::cout, row);
    } else if (*ev) {
      const fs::path dir(ev_run);
      cuts::ExperimentConfig c = cuts::read_config_file(dir / "config.json");
      if (ev_seed_given) c.seed = ev_seed;
      const int samples = ev_samples > 0 ? ev_samples : c.eval_samples;
      const fs::path policy_path = ev_policy.empty() ? dir / "policy.jsonl" : fs::path(ev_policy);
      std::ifstream in(policy_path);
      if (!in) throw cuts::IoError("cannot open policy " + policy_path.string());
      const cuts::SoftmaxPolicy policy = cuts::SoftmaxPolicy::load(in);
      std::ifstream tin(dir / "tasks_heldout.jsonl");
      if (!tin) throw cuts::IoError("cannot open " + (dir / "tasks_heldout.jsonl").string());
      const auto prompts = cuts::read_tasks(tin);
      const auto r = cuts::evaluate(policy, prompts, samples,
                                    cuts::RngStream(c.seed, 0x4556414cULL));
      if (ev_per_prompt) {
        std::cout << "prompt,difficulty,n,correct,pass_at_1,pass_at_k,maj_at_k\n";
        for (const auto& p : r.prompts) {
          cuts::csv::write_row(std::cout,
                               {std::to_string(p.prompt), std::string(cuts::to_string(p.difficulty)),
                                std::to_string(p.n), std::to_string(p.correct),
                                cuts::csv::fmt(p.pass_at_1), cuts::csv::fmt(p.pass_at_k),
                                std::to_string(p.maj_at_k)});
        }
      } else {
        print_eval(std::cout, r);
      }
    }
  } catch (const cuts::Error& e) {
    std::cerr << "error[" << cuts::to_string(e.error_class()) << "]: " << e.what() << '\n';
    return static_cast<int>(e.error_class());
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
