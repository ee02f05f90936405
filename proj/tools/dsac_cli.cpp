// dsac_cli: train / eval / bias / ablate front end.
// Exit codes: 0 success, 2 config error, 3 numerical failure.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "dsac/errors.hpp"
#include "dsac/trainer.hpp"

namespace {

using nlohmann::json;

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<std::string> out) {
  dsac::RunConfig cfg = dsac::load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (out) cfg.out_dir = *out;
  cfg.validate();
  const dsac::TrainResult r = dsac::train(cfg);
  std::cout << r.summary.dump(2) << "\n";
  return 0;
}

int cmd_eval(const std::string& ckpt_path, int episodes, bool stochastic) {
  const dsac::Checkpoint c = dsac::load_checkpoint(ckpt_path);
  const auto env = dsac::make_environment(c.config.env, c.config.env_overrides);
  const dsac::EvalResult r =
      dsac::evaluate_policy(c.agent.actor, *env, episodes, !stochastic, dsac::derive_rng(c.config.seed, "eval")());
  std::cout << json{{"avg_return", r.mean}, {"std", r.std}, {"episodes", episodes}, {"returns", r.returns}}.dump(2)
            << "\n";
  return 0;
}

int cmd_bias(const std::string& ckpt_path, int samples) {
  const dsac::Checkpoint c = dsac::load_checkpoint(ckpt_path);
  const auto env = dsac::make_environment(c.config.env, c.config.env_overrides);
  dsac::Rng rng = dsac::derive_rng(c.config.seed, "bias-cli");
  const dsac::BiasReport r = dsac::measure_bias(c.agent, c.config.variant().twin_distributions, *env, samples,
                                                c.config.bias_rollouts, c.config.gamma, c.config.reward_scale, rng);
  std::cout << dsac::to_json(r).dump(2) << "\n";
  return 0;
}

int cmd_ablate(const std::string& study, const std::string& config_path) {
  const dsac::RunConfig base = dsac::load_config(config_path);
  const dsac::AblationReport r = dsac::run_ablation(study, base);
  std::cout << r.summary.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DSAC-T distributional soft actor-critic"};
  app.require_subcommand(1);

  std::string config_path, ckpt_path, study, out_dir;
  std::uint64_t seed = 0;
  int episodes = 5, samples = 20;
  bool stochastic = false;

  auto* train = app.add_subcommand("train", "run a training job");
  train->add_option("--config", config_path, "JSON config file")->required();
  auto* seed_opt = train->add_option("--seed", seed, "override config seed");
  auto* out_opt = train->add_option("--out", out_dir, "override output directory");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--checkpoint", ckpt_path)->required();
  eval->add_option("--episodes", episodes)->check(CLI::PositiveNumber);
  eval->add_flag("--stochastic", stochastic, "sample actions instead of tanh(mu)");

  auto* bias = app.add_subcommand("bias", "measure Q-value bias of a checkpoint");
  bias->add_option("--checkpoint", ckpt_path)->required();
  bias->add_option("--samples", samples)->check(CLI::PositiveNumber);

  auto* ablate = app.add_subcommand("ablate", "run an ablation study");
  ablate->add_option("--study", study, "refinements | reward-scale")->required();
  ablate->add_option("--config", config_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*train)
      return cmd_train(config_path, seed_opt->count() ? std::optional(seed) : std::nullopt,
                       out_opt->count() ? std::optional(out_dir) : std::nullopt);
    if (*eval) return cmd_eval(ckpt_path, episodes, stochastic);
    if (*bias) return cmd_bias(ckpt_path, samples);
    if (*ablate) return cmd_ablate(study, config_path);
  } catch (const dsac::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const dsac::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
  return 0;
}
