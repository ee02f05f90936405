#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "dsac/config.hpp"
#include "dsac/errors.hpp"
#include "dsac/trainer.hpp"
#include "helpers.hpp"

using namespace dsac;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "dsac_harness_tests" / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig tiny(const std::string& out) {
  RunConfig c;
  c.hidden_sizes = {8};
  c.batch_size = 8;
  c.warm_size = 40;
  c.samples_per_iteration = 10;
  c.buffer_capacity = 1000;
  c.total_iterations = 6;
  c.eval_interval = 2;
  c.eval_episodes = 1;
  c.out_dir = out;
  return c;
}

ParamSet zero_actor(int obs, int act) {
  ParamSet p;
  p.layers.push_back({Eigen::MatrixXd::Zero(2 * act, obs), Eigen::VectorXd::Zero(2 * act), Activation::identity});
  return p;
}

bool same_params(const ParamSet& a, const ParamSet& b) {
  if (!a.same_shape(b)) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.at(i) != b.at(i)) return false;
  return true;
}

// Q(s, a) = -(a - a*(s))^2 built from gelu(x) + gelu(-x) = x erf(x / sqrt 2) ~ sqrt(2 / pi) x^2.
ParamSet bandit_critic(const std::array<double, 3>& best) {
  const double k = 1e-3, norm = k * k * std::sqrt(2.0 / std::numbers::pi);
  ParamSet p;
  Eigen::MatrixXd w(2, 4);
  w << -best[0], -best[1], -best[2], 1.0, best[0], best[1], best[2], -1.0;
  p.layers.push_back({k * w, Eigen::VectorXd::Zero(2), Activation::gelu});
  Eigen::MatrixXd out(2, 2);
  out << -1.0 / norm, -1.0 / norm, 0.0, 0.0;
  p.layers.push_back({out, Eigen::VectorXd::Zero(2), Activation::identity});
  return p;
}

}  // namespace

TEST_CASE("config defaults follow the reference table") {
  const RunConfig c;
  CHECK(c.gamma == 0.99);
  CHECK(c.tau == 0.005);
  CHECK(c.lr_critic == 1e-4);
  CHECK(c.lr_actor == 1e-4);
  CHECK(c.lr_alpha == 3e-4);
  CHECK(c.xi == 3.0);
  CHECK(c.eps == 0.1);
  CHECK(c.eps_omega == 0.1);
  CHECK(c.policy_delay == 2);
  CHECK(c.samples_per_iteration == 20);
  CHECK(c.warm_size == 10000);
  CHECK(c.buffer_capacity == 1000000);
  CHECK(c.reward_scale == 1.0);
  CHECK(c.resolved_updates_per_iteration() == 20);
  CHECK(kReferenceSeeds == std::vector<std::uint64_t>{12345, 22345, 32345, 42345, 52345});
  const VariantConfig v = c.variant();
  CHECK(v.expected_value_substitution);
  CHECK(v.twin_distributions);
  CHECK(v.variance_adjustment);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config json round trip and rejection") {
  RunConfig c = tiny("x");
  c.algorithm = CriticFamily::sac;
  c.twin = false;
  c.target_entropy = -0.5;
  c.env_overrides = {{"nu", 0.2}};
  c.env = "noisy-bandit-chain";
  const RunConfig back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(back.twin == std::optional<bool>(false));

  CHECK_THROWS_AS(config_from_json({{"gama", 0.9}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"gamma", "high"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"hidden_sizes", 64}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"algorithm", "td3"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::array()), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
  // an empty document is the default config
  CHECK(config_to_json(config_from_json(nlohmann::json::object())) == config_to_json(RunConfig{}));
}

TEST_CASE("invalid values fail validation") {
  auto bad = [](auto mutate) {
    RunConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.gamma = 1.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.gamma = -0.1; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.lr_actor = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.tau = 1.5; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.policy_delay = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.batch_size = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.reward_scale = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.hidden_sizes = {}; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.env = "cartpole"; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) {
                    c.algorithm = CriticFamily::dsacv1;
                    c.twin = true;
                  }).validate(),
                  ConfigError);
}

TEST_CASE("zero iterations: config echo and initial checkpoint only") {
  const fs::path dir = scratch("zero");
  RunConfig c = tiny(dir.string());
  c.total_iterations = 0;
  const TrainResult r = train(c);
  CHECK(r.metrics.empty());
  std::set<std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) files.insert(e.path().filename().string());
  CHECK(files == std::set<std::string>{"config.json", "checkpoint_0.json"});
  CHECK(config_to_json(load_config((dir / "config.json").string())) == config_to_json(c));
}

TEST_CASE("warm-up: no parameter changes before the buffer is warm") {
  RunConfig c = tiny("unused");
  c.warm_size = 100;
  Trainer t(c);
  const AgentState init = t.agent();
  for (int it = 0; it < 9; ++it) t.run_iteration();
  CHECK(t.buffer().size() == 90);
  CHECK(t.agent().critic_updates == 0);
  CHECK(same_params(t.agent().actor, init.actor));
  for (int i = 0; i < 2; ++i) {
    CHECK(same_params(t.agent().critics.theta[static_cast<std::size_t>(i)], init.critics.theta[static_cast<std::size_t>(i)]));
    CHECK(same_params(t.agent().critics.theta_bar[static_cast<std::size_t>(i)],
                      init.critics.theta_bar[static_cast<std::size_t>(i)]));
  }
  CHECK(t.agent().temperature.alpha == init.temperature.alpha);
  t.run_iteration();
  CHECK(t.agent().critic_updates == 10);
  CHECK_FALSE(same_params(t.agent().critics.theta[0], init.critics.theta[0]));
  CHECK_FALSE(same_params(t.agent().actor, init.actor));
}

TEST_CASE("step accounting and update cadence") {
  for (int delay : {1, 2, 3}) {
    RunConfig c = tiny("unused");
    c.policy_delay = delay;
    c.updates_per_iteration = 7;
    Trainer t(c);
    for (int it = 1; it <= 9; ++it) {
      t.run_iteration();
      CHECK(t.env_steps() == it * c.samples_per_iteration);
      CHECK(t.iteration() == it);
      CHECK(t.agent().actor_updates == t.agent().critic_updates / delay);
    }
    CHECK(t.agent().critic_updates == 7 * 6);  // warm from the 4th iteration (40 samples)
  }
}

TEST_CASE("identical config and seed give bit-identical metrics.csv") {
  const fs::path a = scratch("det_a"), b = scratch("det_b"), d = scratch("det_c");
  RunConfig c = tiny(a.string());
  c.bias_samples = 2;
  c.bias_rollouts = 3;
  const TrainResult ra = train(c);
  c.out_dir = b.string();
  train(c);
  const std::string ma = slurp(a / "metrics.csv");
  CHECK(ma == slurp(b / "metrics.csv"));
  CHECK(ma.rfind(metrics_csv_header(), 0) == 0);
  c.out_dir = d.string();
  c.seed += 1;
  train(c);
  CHECK(ma != slurp(d / "metrics.csv"));

  // rows are monotone in iteration and env_steps
  REQUIRE(ra.metrics.size() == 3);
  for (std::size_t i = 1; i < ra.metrics.size(); ++i) {
    CHECK(ra.metrics[i].iteration > ra.metrics[i - 1].iteration);
    CHECK(ra.metrics[i].env_steps > ra.metrics[i - 1].env_steps);
  }
  CHECK(ra.metrics.back().bias_estimate.has_value());
  for (const char* f : {"summary.json", "curves.svg", "checkpoint_0.json", "checkpoint_6.json", "config.json"})
    CHECK(fs::exists(a / f));
  const nlohmann::json summary = nlohmann::json::parse(slurp(a / "summary.json"));
  CHECK(summary.contains("build_id"));
  CHECK(summary.at("env_steps") == 60);
  CHECK(summary.at("env_fixture").is_object());
}

TEST_CASE("checkpoint round trip is exact") {
  RunConfig c = tiny("unused");
  Trainer t(c);
  for (int it = 0; it < 6; ++it) t.run_iteration();
  const Checkpoint ck = t.checkpoint();
  const nlohmann::json j = checkpoint_to_json(ck);
  const Checkpoint back = checkpoint_from_json(j);
  CHECK(checkpoint_to_json(back) == j);
  CHECK(same_params(back.agent.actor, ck.agent.actor));
  CHECK(back.agent.critics.b == ck.agent.critics.b);
  CHECK(back.agent.temperature.alpha == ck.agent.temperature.alpha);

  const fs::path dir = scratch("ckpt");
  fs::create_directories(dir);
  save_checkpoint(ck, (dir / "c.json").string());
  CHECK(checkpoint_to_json(load_checkpoint((dir / "c.json").string())) == j);

  nlohmann::json wrong = j;
  wrong["format_version"] = 999;
  CHECK_THROWS_AS(checkpoint_from_json(wrong), ConfigError);
  nlohmann::json missing = j;
  missing.erase("actor");
  CHECK_THROWS_AS(checkpoint_from_json(missing), ConfigError);
}

TEST_CASE("evaluation: zero policy from upright scores zero") {
  const auto env = make_environment("pendulum-swingup", {{"init_theta", 0.0}, {"init_theta_dot", 0.0}});
  const EvalResult r = evaluate_policy(zero_actor(3, 1), *env, 3, true, 1);
  CHECK(r.mean == 0.0);
  CHECK(r.std == 0.0);
  CHECK(r.returns.size() == 3);
}

TEST_CASE("evaluation: one episode reports zero spread") {
  const auto env = make_environment("pendulum-swingup");
  Rng rng(2);
  const std::vector<int> hidden{8};
  const ParamSet actor = make_mlp(3, hidden, 2, rng);
  CHECK(evaluate_policy(actor, *env, 1, false, 9).std == 0.0);
  CHECK(evaluate_policy(actor, *env, 1, true, 9).std == 0.0);
  CHECK_THROWS_AS(evaluate_policy(zero_actor(2, 1), *env, 1, true, 9), ConfigError);
  CHECK_THROWS_AS(evaluate_policy(actor, *env, 0, true, 9), ConfigError);
}

TEST_CASE("evaluation: random policy lands in the random-baseline band") {
  const auto env = make_environment("pendulum-swingup");
  ParamSet actor = zero_actor(3, 1);  // mu = 0, log std = 0: tanh of a unit Gaussian
  const EvalResult r = evaluate_policy(actor, *env, 50, false, 3);
  MESSAGE("random-policy return " << r.mean << " +- " << r.std);
  CHECK(r.mean >= -2000.0);
  CHECK(r.mean <= -800.0);
}

TEST_CASE("bias measurement of an exact critic on the one-step bandit") {
  RunConfig c;
  c.env = "noisy-bandit-chain";
  c.env_overrides = {{"nu", 0.3}};
  c.gamma = 0.0;
  c.hidden_sizes = {8};
  const auto env = make_environment(c.env, c.env_overrides);
  AgentState agent = make_agent(c, env->spec());
  const std::array<double, 3> best{-0.5, 0.1, 0.6};
  agent.critics.theta[0] = agent.critics.theta[1] = bandit_critic(best);
  // the hand-built critic is exact to about 1e-6
  const Eigen::MatrixXd s = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd a = Eigen::RowVector3d(0.2, -0.9, 0.6);
  const CriticEval e = evaluate_critic(agent.critics.theta[0], s, a);
  for (int j = 0; j < 3; ++j) CHECK(e.q(j) == doctest::Approx(-std::pow(a(0, j) - best[static_cast<std::size_t>(j)], 2)).epsilon(1e-5));

  Rng rng(11);
  const BiasReport r = measure_bias(agent, true, *env, 200, 50, 0.0, 1.0, rng);
  CHECK(r.samples.size() == 200);
  CHECK(std::abs(r.mean_bias) <= 2 * r.sem);
  CHECK(r.sem == doctest::Approx(0.3 / std::sqrt(50.0 * 200.0)).epsilon(0.1));
}

TEST_CASE("ablation arms") {
  RunConfig base = tiny("base");
  const auto ref = ablation_arms("refinements", base);
  REQUIRE(ref.size() == 3);
  CHECK(ref[0].config.variant().expected_value_substitution);
  CHECK_FALSE(ref[1].config.variant().expected_value_substitution);
  CHECK_FALSE(ref[2].config.variant().twin_distributions);

  const auto rs = ablation_arms("reward-scale", base);
  REQUIRE(rs.size() == 10);
  std::set<double> scales;
  std::set<std::string> names, dirs;
  int fixed = 0;
  for (const auto& arm : rs) {
    scales.insert(arm.config.reward_scale);
    names.insert(arm.name);
    dirs.insert(arm.config.out_dir);
    CHECK(arm.config.seed == base.seed);
    if (!arm.config.variant().variance_adjustment) ++fixed;
  }
  CHECK(scales == std::set<double>{0.01, 0.1, 1.0, 10.0, 100.0});
  CHECK(names.size() == 10);
  CHECK(dirs.size() == 10);
  CHECK(fixed == 5);
  CHECK_THROWS_AS(ablation_arms("dropout", base), ConfigError);
}

TEST_CASE("an ablation arm reruns identically from its echoed config") {
  const fs::path dir = scratch("ablate");
  RunConfig base = tiny(dir.string());
  base.total_iterations = 5;
  const AblationReport rep = run_ablation("refinements", base);
  REQUIRE(rep.results.size() == 3);
  CHECK(fs::exists(dir / "ablation_summary.json"));
  CHECK(fs::exists(dir / "curves.svg"));
  const fs::path arm_dir = fs::path(rep.arms[1].config.out_dir);
  RunConfig echoed = load_config((arm_dir / "config.json").string());
  echoed.out_dir = scratch("ablate_rerun").string();
  train(echoed);
  CHECK(slurp(arm_dir / "metrics.csv") == slurp(fs::path(echoed.out_dir) / "metrics.csv"));
}

TEST_CASE("learning-curve area") {
  std::vector<MetricsRow> rows(3);
  rows[0].env_steps = 0, rows[0].avg_return = 0;
  rows[1].env_steps = 10, rows[1].avg_return = 10;
  rows[2].env_steps = 30, rows[2].avg_return = 10;
  CHECK(learning_curve_area(rows) == doctest::Approx((50.0 + 200.0) / 30.0));
  CHECK(learning_curve_area({rows[1]}) == 10.0);
}

TEST_CASE("cli exit codes") {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "bad.json") << R"({"gamma": 0.9, "no_such_key": 1})";
    std::ofstream(dir / "broken.json") << "{";
  }
  auto run = [](const std::string& args) {
    const int status = std::system((std::string(DSAC_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  CHECK(run("train --config " + (dir / "bad.json").string()) == 2);
  CHECK(run("train --config " + (dir / "broken.json").string()) == 2);
  CHECK(run("train --config " + (dir / "missing.json").string()) == 2);
  CHECK(run("ablate --study dropout --config " + (dir / "bad.json").string()) == 2);
  CHECK(run("frobnicate") == 2);

  RunConfig c = tiny((dir / "run").string());
  c.total_iterations = 2;
  std::ofstream(dir / "ok.json") << config_to_json(c).dump();
  CHECK(run("train --config " + (dir / "ok.json").string()) == 0);
  const std::string ckpt = (dir / "run" / "checkpoint_2.json").string();
  CHECK(run("eval --checkpoint " + ckpt + " --episodes 2") == 0);
  CHECK(run("bias --checkpoint " + ckpt + " --samples 2") == 0);
  CHECK(run("eval --checkpoint " + (dir / "bad.json").string() + " --episodes 2") == 2);
}
