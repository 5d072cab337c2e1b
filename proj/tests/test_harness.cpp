#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cuts/error.hpp"
#include "cuts/harness.hpp"

namespace cuts {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cuts_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig small(Arm arm) {
  ExperimentConfig c;
  c.arm = arm;
  c.n_prompts = 12;
  c.heldout_prompts = 6;
  c.steps = 12;
  c.eval_every = 4;
  c.eval_samples = 8;
  return c;
}

TEST(Config, RoundTrip) {
  ExperimentConfig c = small(Arm::kStandard);
  c.seed = 99;
  c.mix = {0.5, 0.25, 0.25};
  c.cuts.delta = 0.05;
  c.clip.kl_coef = 0.0;
  c.learning_rate = 0.125;
  std::ostringstream out;
  write_config(out, c);
  std::istringstream in(out.str());
  const ExperimentConfig back = read_config(in);
  std::ostringstream again;
  write_config(again, back);
  EXPECT_EQ(out.str(), again.str());
}

TEST(Config, PartialFileKeepsDefaults) {
  std::istringstream in(R"({"seed": 5, "cuts": {"k": 3}})");
  const ExperimentConfig c = read_config(in);
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.cuts.k, 3);
  EXPECT_EQ(c.cuts.delta, CutsConfig{}.delta);
  EXPECT_EQ(c.group_size, 16);
  EXPECT_EQ(c.g_std, 8);
}

TEST(Config, Validation) {
  EXPECT_NO_THROW(ExperimentConfig{}.validate());
  auto bad = [](auto mutate) {
    ExperimentConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), InvalidInput);
  };
  bad([](ExperimentConfig& c) { c.g_std = 6; });
  bad([](ExperimentConfig& c) { c.group_size = 15; });
  bad([](ExperimentConfig& c) { c.learning_rate = 0; });
  bad([](ExperimentConfig& c) { c.cuts.k = 99; });
  bad([](ExperimentConfig& c) { c.clip.eps_low = 0; });
  bad([](ExperimentConfig& c) { c.n_prompts = 0; });
  bad([](ExperimentConfig& c) { c.mini_batch_prompts = 9; });
  std::istringstream garbage("{seed: 1");
  EXPECT_THROW(read_config(garbage), InvalidInput);
}

TEST(Config, HeldoutUsesSiblingSeed) {
  const ExperimentConfig c;
  EXPECT_NE(c.train_task().seed, c.heldout_task().seed);
  EXPECT_NE(c.train_task().first_id, c.heldout_task().first_id);
}

TEST(Run, InvalidConfigDoesNoWork) {
  const fs::path dir = scratch("invalid");
  ExperimentConfig c = small(Arm::kMixedCuts);
  c.g_cuts = 2;
  EXPECT_THROW(run_experiment(c, dir), InvalidInput);
  EXPECT_FALSE(fs::exists(dir));
}

TEST(Run, WritesLayoutAndIsDeterministic) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  ExperimentConfig c = small(Arm::kMixedCuts);
  c.dump_rollouts = true;
  const RunResult ra = run_experiment(c, a);
  run_experiment(c, b);
  for (const char* f : {"config.json", "tasks_train.jsonl", "tasks_heldout.jsonl", "dynamics.csv",
                        "variance.csv", "eval.csv", "eval_final.csv", "policy.jsonl",
                        "manifest.json", "rollouts.jsonl"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_EQ(ra.steps.size(), 12u);
  ASSERT_EQ(ra.evals.size(), 4u);
  EXPECT_EQ(ra.evals.front().step, 0);
  EXPECT_EQ(ra.evals.back().step, 12);
  const auto dyn = csv::read_file((a / "dynamics.csv").string());
  EXPECT_EQ(dyn.rows.size(), 12u);
  const auto var = csv::read_file((a / "variance.csv").string());
  EXPECT_EQ(var.rows.size(), 12u * static_cast<std::size_t>(c.batch_prompts));
}

TEST(Run, ConfigEchoReloads) {
  const fs::path dir = scratch("echo");
  ExperimentConfig c = small(Arm::kStandard);
  c.seed = 17;
  run_experiment(c, dir);
  const ExperimentConfig back = read_config_file(dir / "config.json");
  std::ostringstream x, y;
  write_config(x, c);
  write_config(y, back);
  EXPECT_EQ(x.str(), y.str());
}

TEST(Run, StandardArmCollapsesOnSaturatedTask) {
  ExperimentConfig c = small(Arm::kStandard);
  c.mix = {1, 0, 0};
  c.prior = PriorConfig::concentrated();
  c.steps = 30;
  const RunResult r = run_experiment(c, scratch("collapse"));
  int first_zero = -1;
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    if (r.steps[i].mean_abs_advantage == 0.0) {
      first_zero = static_cast<int>(i);
      break;
    }
  }
  ASSERT_GE(first_zero, 0);
  for (std::size_t i = static_cast<std::size_t>(first_zero); i < r.steps.size(); ++i) {
    EXPECT_EQ(r.steps[i].mean_abs_advantage, 0.0) << "step " << i;
  }
}

TEST(Run, MixedArmKeepsVarianceWhileSubgroupMeansDiffer) {
  ExperimentConfig c = small(Arm::kMixedCuts);
  c.mix = {1, 0, 0};
  c.steps = 30;
  const fs::path dir = scratch("mixed_var");
  run_experiment(c, dir);
  const auto var = csv::read_file((dir / "variance.csv").string());
  const auto dyn = csv::read_file((dir / "dynamics.csv").string());
  std::map<long, bool> differs;
  int differing = 0;
  for (std::size_t i = 0; i < var.rows.size(); ++i) {
    const bool d = var.number(i, "mu_std") != var.number(i, "mu_cuts");
    if (d) {
      EXPECT_GT(var.number(i, "var_mixed"), 0.0);
      ++differing;
    }
    differs[std::lround(var.number(i, "step"))] |= d;
  }
  EXPECT_GT(differing, 0);
  for (std::size_t i = 0; i < dyn.rows.size(); ++i) {
    if (differs[std::lround(dyn.number(i, "step"))]) {
      EXPECT_LT(dyn.number(i, "zero_variance_fraction"), 1.0);
    }
  }
}

TEST(Run, NonFiniteObjectiveAbortsWithDiagnostic) {
  const fs::path dir = scratch("nan");
  ExperimentConfig c = small(Arm::kMixedCuts);
  c.learning_rate = 1e300;
  EXPECT_THROW(run_experiment(c, dir), NumericalError);
  EXPECT_TRUE(fs::exists(dir / "diagnostic.json"));
  EXPECT_FALSE(fs::exists(dir / "manifest.json"));
}

TEST(Compare, IdenticalRunsHaveZeroDeltas) {
  const fs::path a = scratch("cmp_a"), b = scratch("cmp_b");
  run_experiment(small(Arm::kMixedCuts), a);
  run_experiment(small(Arm::kMixedCuts), b);
  const auto rep = compare_arms(a, b);
  ASSERT_FALSE(rep.dynamics.rows.empty());
  for (const auto* t : {&rep.dynamics, &rep.eval}) {
    for (std::size_t i = 0; i < t->rows.size(); ++i) {
      for (std::size_t col = 0; col < t->header.size(); ++col) {
        const auto& h = t->header[col];
        if (h.size() > 6 && h.substr(h.size() - 6) == "_delta") {
          EXPECT_EQ(t->number(i, h), 0.0) << h;
        }
      }
    }
  }
  for (std::size_t i = 0; i < rep.summary.rows.size(); ++i) {
    EXPECT_EQ(rep.summary.number(i, "delta"), 0.0);
  }
}

TEST(Compare, ReportsEntropySignAndIsPure) {
  const fs::path a = scratch("cmp_std"), b = scratch("cmp_mix");
  run_experiment(small(Arm::kStandard), a);
  run_experiment(small(Arm::kMixedCuts), b);
  const auto rep = compare_arms(a, b);
  EXPECT_EQ(rep.arm_a, "standard");
  EXPECT_EQ(rep.arm_b, "mixed_cuts");
  const std::size_t col = rep.dynamics.column("entropy_delta_sign");
  for (std::size_t i = 0; i < rep.dynamics.rows.size(); ++i) {
    const double d = rep.dynamics.number(i, "mean_entropy_delta");
    const std::string& s = rep.dynamics.rows[i][col];
    EXPECT_EQ(s, d > 0 ? "+" : d < 0 ? "-" : "0");
  }
  const fs::path o1 = scratch("cmp_o1"), o2 = scratch("cmp_o2");
  write_comparison(rep, o1);
  write_comparison(compare_arms(a, b), o2);
  for (const char* f : {"compare_dynamics.csv", "compare_eval.csv", "compare_summary.csv"}) {
    EXPECT_EQ(slurp(o1 / f), slurp(o2 / f));
  }
}

TEST(Compare, MismatchedTasksRejected) {
  const fs::path a = scratch("mm_a"), b = scratch("mm_b");
  ExperimentConfig c = small(Arm::kStandard);
  run_experiment(c, a);
  c.seed = 2;
  run_experiment(c, b);
  EXPECT_THROW(compare_arms(a, b), InvalidInput);
  EXPECT_THROW(compare_arms(a, scratch("missing")), IoError);
}

TEST(Evaluate, PerfectPolicyScoresOne) {
  ExperimentConfig c;
  c.mix = {1, 0, 0};
  c.heldout_mix = {1, 0, 0};
  c.prior = PriorConfig::concentrated();
  const auto train = make_task(c.train_task());
  const auto held = make_task(c.heldout_task());
  const auto policy = initial_policy(c, train, held);
  const auto e = evaluate(policy, held, 8, RngStream(1, 1));
  EXPECT_DOUBLE_EQ(e.pass_at_1, 1.0);
  EXPECT_DOUBLE_EQ(e.maj_at_k, 1.0);
  EXPECT_EQ(e.prompts.size(), held.size());
}

TEST(Arm, Names) {
  EXPECT_EQ(parse_arm("standard"), Arm::kStandard);
  EXPECT_EQ(parse_arm("mixed_cuts"), Arm::kMixedCuts);
  EXPECT_THROW(parse_arm("cuts"), InvalidInput);
}

}  // namespace
}  // namespace cuts
