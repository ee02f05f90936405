#include "dsac/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "dsac/distributions.hpp"
#include "dsac/errors.hpp"

#ifndef DSAC_BUILD_ID
#define DSAC_BUILD_ID "unknown"
#endif

namespace dsac {

using nlohmann::json;
namespace fs = std::filesystem;

AgentState make_agent(const RunConfig& cfg, const EnvSpec& spec) {
  AgentState agent;
  Rng actor_init = derive_rng(cfg.seed, "init-actor");
  Rng critic_init = derive_rng(cfg.seed, "init-critic");
  agent.actor = make_mlp(spec.obs_dim, cfg.hidden_sizes, 2 * spec.act_dim, actor_init);
  agent.actor_target = agent.actor;
  agent.actor_adam = AdamState::for_params(agent.actor);
  agent.critics = make_critic_pair(spec.obs_dim, spec.act_dim, cfg.hidden_sizes, critic_init);
  agent.temperature.alpha = cfg.alpha_init;
  agent.temperature.target_entropy = cfg.target_entropy.value_or(-static_cast<double>(spec.act_dim));
  agent.temperature.lr_alpha = cfg.lr_alpha;
  return agent;
}

// ---------------------------------------------------------------------------
// metrics

std::string metrics_csv_header() {
  return "iteration,env_steps,avg_return,q_mean,sigma_mean,alpha,b1,b2,omega1,omega2,entropy_estimate,bias_estimate";
}

std::string to_csv(const MetricsRow& row) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%ld,%ld,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,", row.iteration,
                row.env_steps, row.avg_return, row.q_mean, row.sigma_mean, row.alpha, row.b1, row.b2, row.omega1,
                row.omega2, row.entropy_estimate);
  std::string line(buf);
  if (row.bias_estimate) {
    std::snprintf(buf, sizeof(buf), "%.10g", *row.bias_estimate);
    line += buf;
  }
  return line;
}

// ---------------------------------------------------------------------------
// evaluation

EvalResult evaluate_policy(const ParamSet& actor, const Environment& env, int episodes, bool deterministic,
                           std::uint64_t seed, const StepObserver& observer) {
  if (episodes < 1) throw ConfigError("evaluate: episodes must be >= 1");
  if (actor.in_dim() != env.spec().obs_dim || actor.out_dim() != 2 * env.spec().act_dim)
    throw ConfigError("evaluate: checkpoint dimensions do not match environment " + env.spec().name);
  Rng noise = derive_rng(seed, "eval-policy");
  EvalResult result;
  for (int k = 0; k < episodes; ++k) {
    EnvState state = env.reset(splitmix64(seed + static_cast<std::uint64_t>(k)));
    double total = 0.0;
    for (;;) {
      const Eigen::VectorXd raw = mlp_predict(actor, env.observe(state)).col(0);
      const PolicyDistParams dist = policy_head(raw);
      Eigen::VectorXd action;
      if (deterministic) {
        action = dist.mu.array().tanh();
      } else {
        Eigen::VectorXd z(dist.mu.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = standard_normal(noise);
        action = policy_sample(dist, z).a;
      }
      const StepResult r = env.step(state, action);
      total += r.reward;
      if (observer) observer(k, state, r);
      if (r.done || r.truncated) break;
    }
    result.returns.push_back(total);
  }
  double sum = 0.0;
  for (double r : result.returns) sum += r;
  result.mean = sum / episodes;
  double ss = 0.0;
  for (double r : result.returns) ss += (r - result.mean) * (r - result.mean);
  result.std = std::sqrt(ss / episodes);
  return result;
}

BiasReport measure_bias(const AgentState& agent, bool twin, const Environment& env, int n_samples, int n_rollouts,
                        double gamma, double reward_scale, Rng& rng) {
  if (n_samples < 1) throw ConfigError("bias: n_samples must be >= 1");
  const BatchPolicy policy = network_policy(agent.actor);
  const int max_steps = env.spec().max_episode_steps;
  std::uniform_int_distribution<int> pick_step(0, max_steps - 1);
  std::vector<BiasSample> samples;
  int horizon = truth_horizon(gamma);
  for (int k = 0; k < n_samples; ++k) {
    EnvState state = env.reset(rng());
    const int target_step = pick_step(rng);
    for (int t = 0; t < target_step; ++t) {
      const PolicyDraw d = policy(env.observe(state), rng);
      const StepResult r = env.step(state, d.actions.col(0));
      if (r.done) state = env.reset(rng());
    }
    const Eigen::MatrixXd obs = env.observe(state);
    const Eigen::VectorXd action = policy(obs, rng).actions.col(0);
    double estimate = evaluate_critic(agent.critics.theta[0], obs, action).q(0);
    if (twin) estimate = std::min(estimate, evaluate_critic(agent.critics.theta[1], obs, action).q(0));
    const McEstimate truth =
        mc_true_q(env, state, action, policy, n_rollouts, gamma, agent.temperature.alpha, rng, reward_scale);
    horizon = truth.horizon;
    samples.push_back({estimate, truth.mean, truth.sem});
  }
  return make_bias_report(std::move(samples), n_rollouts, horizon);
}

// ---------------------------------------------------------------------------
// checkpoints

json checkpoint_to_json(const Checkpoint& c) {
  const auto& a = c.agent;
  return {{"format_version", kCheckpointFormatVersion},
          {"config", config_to_json(c.config)},
          {"iteration", c.iteration},
          {"env_steps", c.env_steps},
          {"critic_updates", a.critic_updates},
          {"actor_updates", a.actor_updates},
          {"alpha", a.temperature.alpha},
          {"target_entropy", a.temperature.target_entropy},
          {"lr_alpha", a.temperature.lr_alpha},
          {"actor", params_to_json(a.actor)},
          {"actor_target", params_to_json(a.actor_target)},
          {"actor_adam", adam_to_json(a.actor_adam)},
          {"critic1", params_to_json(a.critics.theta[0])},
          {"critic2", params_to_json(a.critics.theta[1])},
          {"critic1_target", params_to_json(a.critics.theta_bar[0])},
          {"critic2_target", params_to_json(a.critics.theta_bar[1])},
          {"critic1_adam", adam_to_json(a.critics.adam[0])},
          {"critic2_adam", adam_to_json(a.critics.adam[1])},
          {"b", a.critics.b},
          {"omega", a.critics.omega},
          {"stats_initialized", a.critics.stats_initialized}};
}

Checkpoint checkpoint_from_json(const json& doc) {
  try {
    if (doc.at("format_version").get<int>() != kCheckpointFormatVersion)
      throw ConfigError("checkpoint: unsupported format_version");
    Checkpoint c;
    c.config = config_from_json(doc.at("config"));
    c.iteration = doc.at("iteration").get<long>();
    c.env_steps = doc.at("env_steps").get<long>();
    auto& a = c.agent;
    a.critic_updates = doc.at("critic_updates").get<long>();
    a.actor_updates = doc.at("actor_updates").get<long>();
    a.temperature.alpha = doc.at("alpha").get<double>();
    a.temperature.target_entropy = doc.at("target_entropy").get<double>();
    a.temperature.lr_alpha = doc.at("lr_alpha").get<double>();
    a.actor = params_from_json(doc.at("actor"));
    a.actor_target = params_from_json(doc.at("actor_target"));
    a.actor_adam = adam_from_json(doc.at("actor_adam"), a.actor);
    a.critics.theta[0] = params_from_json(doc.at("critic1"));
    a.critics.theta[1] = params_from_json(doc.at("critic2"));
    a.critics.theta_bar[0] = params_from_json(doc.at("critic1_target"));
    a.critics.theta_bar[1] = params_from_json(doc.at("critic2_target"));
    a.critics.adam[0] = adam_from_json(doc.at("critic1_adam"), a.critics.theta[0]);
    a.critics.adam[1] = adam_from_json(doc.at("critic2_adam"), a.critics.theta[1]);
    a.critics.b = doc.at("b").get<std::array<double, 2>>();
    a.critics.omega = doc.at("omega").get<std::array<double, 2>>();
    a.critics.stats_initialized = doc.at("stats_initialized").get<std::array<bool, 2>>();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint: malformed document: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
  out << checkpoint_to_json(ckpt).dump();
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("checkpoint '" + path + "' is not valid JSON: " + e.what());
  }
  return checkpoint_from_json(doc);
}

// ---------------------------------------------------------------------------
// Trainer

Trainer::Trainer(RunConfig cfg)
    : cfg_((cfg.validate(), std::move(cfg))),
      env_(make_environment(cfg_.env, cfg_.env_overrides)),
      procedure_(build_variant(cfg_.variant())),
      agent_(make_agent(cfg_, env_->spec())),
      buffer_(static_cast<std::size_t>(cfg_.buffer_capacity), env_->spec().obs_dim, env_->spec().act_dim),
      env_rng_(derive_rng(cfg_.seed, "env")),
      policy_rng_(derive_rng(cfg_.seed, "policy")),
      replay_rng_(derive_rng(cfg_.seed, "replay")),
      target_rng_(derive_rng(cfg_.seed, "target")),
      actor_rng_(derive_rng(cfg_.seed, "actor")),
      bias_rng_(derive_rng(cfg_.seed, "bias")) {
  env_state_ = env_->reset(env_rng_());
}

void Trainer::run_iteration() {
  const EnvSpec& spec = env_->spec();
  for (int k = 0; k < cfg_.samples_per_iteration; ++k) {
    const Eigen::VectorXd obs = env_->observe(env_state_);
    const PolicyDistParams dist = policy_head(mlp_predict(agent_.actor, obs).col(0));
    Eigen::VectorXd z(spec.act_dim);
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = standard_normal(policy_rng_);
    const Eigen::VectorXd action = policy_sample(dist, z).a;
    const StepResult r = env_->step(env_state_, action);
    buffer_.push({obs, action, cfg_.reward_scale * r.reward, r.obs, r.done, r.truncated});
    ++env_steps_;
    if (r.done || r.truncated) {
      ++episode_;
      env_state_ = env_->reset(env_rng_());
    }
  }
  const auto ready = static_cast<std::size_t>(std::max<long>(cfg_.warm_size, cfg_.batch_size));
  if (buffer_.size() >= ready) {
    for (int u = 0; u < cfg_.resolved_updates_per_iteration(); ++u) update_step();
  }
  ++iteration_;
}

void Trainer::update_step() {
  const Batch batch = buffer_.sample_batch(static_cast<std::size_t>(cfg_.batch_size), replay_rng_);
  const CriticSettings settings{cfg_.gamma, cfg_.tau, cfg_.lr_critic, cfg_.xi, cfg_.eps, cfg_.eps_omega};
  last_critic_ = procedure_(agent_.critics, batch, agent_.actor_target, agent_.temperature.alpha, settings, target_rng_);
  ++agent_.critic_updates;
  if (agent_.critic_updates % cfg_.policy_delay != 0) return;

  const bool twin = procedure_.rule().twin;
  ActorGradient ag =
      actor_gradient(agent_.actor, batch.states, agent_.critics.theta, twin, agent_.temperature.alpha, actor_rng_);
  ag.ascent *= -1.0;
  adam_step(agent_.actor_adam, agent_.actor, ag.ascent, cfg_.lr_actor);

  // Temperature step on fresh actions from the updated policy.
  const Eigen::MatrixXd raw = mlp_predict(agent_.actor, batch.states);
  const PolicyBatch fresh = policy_sample_batch(raw, standard_normal_matrix(raw.rows() / 2, batch.size(), actor_rng_));
  agent_.temperature =
      temperature_update(agent_.temperature, {fresh.logp.data(), static_cast<std::size_t>(fresh.logp.size())});
  last_entropy_ = -fresh.logp.mean();
  if (!std::isfinite(agent_.temperature.alpha)) throw NumericalError("temperature became non-finite");

  for (int i = 0; i < 2; ++i) soft_update(agent_.critics.theta[i], agent_.critics.theta_bar[i], cfg_.tau);
  soft_update(agent_.actor, agent_.actor_target, cfg_.tau);
  ++agent_.actor_updates;
}

MetricsRow Trainer::snapshot_metrics() {
  MetricsRow row;
  row.iteration = iteration_;
  row.env_steps = env_steps_;
  row.avg_return = evaluate_policy(agent_.actor, *env_, cfg_.eval_episodes, true, derive_rng(cfg_.seed, "eval")())
                       .mean;
  row.q_mean = last_critic_.q_mean;
  row.sigma_mean = last_critic_.sigma_mean;
  row.alpha = agent_.temperature.alpha;
  row.b1 = agent_.critics.b[0];
  row.b2 = agent_.critics.b[1];
  row.omega1 = agent_.critics.omega[0];
  row.omega2 = agent_.critics.omega[1];
  row.entropy_estimate = last_entropy_;
  if (cfg_.bias_samples > 0) {
    const BiasReport rep = measure_bias(agent_, procedure_.rule().twin, *env_, cfg_.bias_samples, cfg_.bias_rollouts,
                                        cfg_.gamma, cfg_.reward_scale, bias_rng_);
    row.bias_estimate = rep.mean_bias;
  }
  return row;
}

Checkpoint Trainer::checkpoint() const { return {cfg_, agent_, iteration_, env_steps_}; }

// ---------------------------------------------------------------------------
// train

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string text = metrics_csv_header() + "\n";
  for (const auto& r : rows) text += to_csv(r) + "\n";
  return text;
}

std::vector<std::pair<std::string, std::vector<Series>>> run_panels(const std::vector<MetricsRow>& rows,
                                                                    const std::string& label) {
  Series ret{label, {}, {}};
  Series bias{label, {}, {}};
  for (const auto& r : rows) {
    ret.x.push_back(static_cast<double>(r.env_steps));
    ret.y.push_back(r.avg_return);
    if (r.bias_estimate) {
      bias.x.push_back(static_cast<double>(r.env_steps));
      bias.y.push_back(*r.bias_estimate);
    }
  }
  std::vector<std::pair<std::string, std::vector<Series>>> panels{{"average return vs env steps", {ret}}};
  if (!bias.x.empty()) panels.push_back({"Q bias vs env steps", {bias}});
  return panels;
}

json metrics_row_json(const MetricsRow& r) {
  json j = {{"iteration", r.iteration},   {"env_steps", r.env_steps}, {"avg_return", r.avg_return},
            {"q_mean", r.q_mean},         {"sigma_mean", r.sigma_mean}, {"alpha", r.alpha},
            {"b", {r.b1, r.b2}},          {"omega", {r.omega1, r.omega2}}, {"entropy_estimate", r.entropy_estimate}};
  if (r.bias_estimate) j["bias_estimate"] = *r.bias_estimate;
  return j;
}

}  // namespace

TrainResult train(const RunConfig& cfg, bool write_outputs) {
  Trainer trainer(cfg);
  TrainResult result;
  result.config = trainer.config();
  const fs::path out = cfg.out_dir;
  if (write_outputs) {
    fs::create_directories(out);
    write_text(out / "config.json", config_to_json(cfg).dump(2));
    save_checkpoint(trainer.checkpoint(), (out / "checkpoint_0.json").string());
  }

  try {
    for (long it = 1; it <= cfg.total_iterations; ++it) {
      trainer.run_iteration();
      if (it % cfg.eval_interval == 0 || it == cfg.total_iterations) result.metrics.push_back(trainer.snapshot_metrics());
      if (write_outputs && cfg.checkpoint_interval > 0 && it % cfg.checkpoint_interval == 0 &&
          it != cfg.total_iterations)
        save_checkpoint(trainer.checkpoint(), (out / ("checkpoint_" + std::to_string(it) + ".json")).string());
    }
  } catch (const NumericalError& e) {
    if (write_outputs) {
      const json diag = {{"error", e.what()},
                         {"iteration", trainer.iteration()},
                         {"env_steps", trainer.env_steps()},
                         {"critic_updates", trainer.agent().critic_updates},
                         {"alpha", trainer.agent().temperature.alpha},
                         {"b", trainer.agent().critics.b},
                         {"omega", trainer.agent().critics.omega}};
      write_text(out / "diagnostics.json", diag.dump(2));
      write_text(out / "metrics.csv", metrics_csv(result.metrics));
    }
    throw;
  }

  result.final_checkpoint = trainer.checkpoint();
  json summary;
  summary["config"] = config_to_json(cfg);
  summary["env_fixture"] = trainer.env().fixture();
  summary["build_id"] = DSAC_BUILD_ID;
  summary["iterations"] = trainer.iteration();
  summary["env_steps"] = trainer.env_steps();
  summary["critic_updates"] = trainer.agent().critic_updates;
  summary["actor_updates"] = trainer.agent().actor_updates;
  summary["final_alpha"] = trainer.agent().temperature.alpha;
  if (!result.metrics.empty()) summary["final_metrics"] = metrics_row_json(result.metrics.back());
  summary["decisions"] = {{"updates_per_iteration", cfg.resolved_updates_per_iteration()},
                          {"policy_delay_applies_to", "actor, temperature and target networks"},
                          {"truth_horizon_rule", "smallest T with gamma^T < 1e-3"},
                          {"bias_rollouts", cfg.bias_rollouts}};
  result.summary = summary;

  // a zero-iteration run leaves just the config echo and the initial checkpoint
  if (write_outputs && cfg.total_iterations > 0) {
    write_text(out / "metrics.csv", metrics_csv(result.metrics));
    write_text(out / "summary.json", summary.dump(2));
    save_checkpoint(result.final_checkpoint,
                    (out / ("checkpoint_" + std::to_string(cfg.total_iterations) + ".json")).string());
    write_text(out / "curves.svg", render_svg(run_panels(result.metrics, to_string(cfg.algorithm))));
  }
  return result;
}

// ---------------------------------------------------------------------------
// ablations

std::vector<AblationArm> ablation_arms(const std::string& study, const RunConfig& base) {
  std::vector<AblationArm> arms;
  RunConfig full = base;
  full.algorithm = CriticFamily::dsact;
  full.expected_value_substitution = true;
  full.twin = true;
  full.variance_adjustment = true;
  auto with_dir = [&](RunConfig c, const std::string& name) {
    c.out_dir = (fs::path(base.out_dir) / name).string();
    return AblationArm{name, std::move(c)};
  };
  if (study == "refinements") {
    arms.push_back(with_dir(full, "full"));
    RunConfig no_evs = full;
    no_evs.expected_value_substitution = false;
    arms.push_back(with_dir(no_evs, "no-evs"));
    RunConfig single = full;
    single.twin = false;
    arms.push_back(with_dir(single, "single-distribution"));
    return arms;
  }
  if (study == "reward-scale") {
    for (double scale : {0.01, 0.1, 1.0, 10.0, 100.0}) {
      char tag[32];
      std::snprintf(tag, sizeof(tag), "%g", scale);
      RunConfig adaptive = full;
      adaptive.reward_scale = scale;
      arms.push_back(with_dir(adaptive, std::string("adaptive-scale-") + tag));
      RunConfig fixed = full;
      fixed.variance_adjustment = false;
      fixed.reward_scale = scale;
      arms.push_back(with_dir(fixed, std::string("fixed-b-scale-") + tag));
    }
    return arms;
  }
  throw ConfigError("unknown ablation study '" + study + "' (expected refinements or reward-scale)");
}

double learning_curve_area(const std::vector<MetricsRow>& rows) {
  if (rows.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (rows.size() == 1) return rows.front().avg_return;
  double area = 0.0;
  for (std::size_t k = 1; k < rows.size(); ++k)
    area += 0.5 * (rows[k].avg_return + rows[k - 1].avg_return) *
            static_cast<double>(rows[k].env_steps - rows[k - 1].env_steps);
  return area / static_cast<double>(rows.back().env_steps - rows.front().env_steps);
}

AblationReport run_ablation(const std::string& study, const RunConfig& base, bool write_outputs) {
  AblationReport report;
  report.study = study;
  report.arms = ablation_arms(study, base);
  json table = json::array();
  std::vector<Series> curves;
  for (const auto& arm : report.arms) {
    TrainResult r = train(arm.config, write_outputs);
    const double final_return = r.metrics.empty() ? std::numeric_limits<double>::quiet_NaN() : r.metrics.back().avg_return;
    table.push_back({{"arm", arm.name},
                     {"config", config_to_json(arm.config)},
                     {"final_return", final_return},
                     {"area_under_curve", learning_curve_area(r.metrics)}});
    Series s{arm.name, {}, {}};
    for (const auto& m : r.metrics) {
      s.x.push_back(static_cast<double>(m.env_steps));
      s.y.push_back(m.avg_return);
    }
    curves.push_back(std::move(s));
    report.results.push_back(std::move(r));
  }
  report.summary = {{"study", study}, {"seed", base.seed}, {"arms", table}};
  if (write_outputs) {
    fs::create_directories(base.out_dir);
    write_text(fs::path(base.out_dir) / "ablation_summary.json", report.summary.dump(2));
    std::string csv = "arm,final_return,area_under_curve\n";
    for (const auto& row : table) {
      char buf[256];
      std::snprintf(buf, sizeof(buf), "%s,%.10g,%.10g\n", row["arm"].get<std::string>().c_str(),
                    row["final_return"].get<double>(), row["area_under_curve"].get<double>());
      csv += buf;
    }
    write_text(fs::path(base.out_dir) / "ablation_summary.csv", csv);
    write_text(fs::path(base.out_dir) / "curves.svg", render_svg({{study + ": average return vs env steps", curves}}));
  }
  return report;
}

// ---------------------------------------------------------------------------
// svg

std::string render_svg(const std::vector<std::pair<std::string, std::vector<Series>>>& panels) {
  const double width = 720.0;
  const double panel_h = 300.0;
  const double left = 70.0, right = 170.0, top = 30.0, bottom = 40.0;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
     << panel_h * static_cast<double>(std::max<std::size_t>(panels.size(), 1)) << "\" font-family=\"sans-serif\" "
     << "font-size=\"11\">\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const double y0 = panel_h * static_cast<double>(p);
    const auto& [title, series] = panels[p];
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto& s : series)
      for (std::size_t k = 0; k < s.x.size(); ++k) {
        if (!std::isfinite(s.y[k])) continue;
        xmin = std::min(xmin, s.x[k]);
        xmax = std::max(xmax, s.x[k]);
        ymin = std::min(ymin, s.y[k]);
        ymax = std::max(ymax, s.y[k]);
      }
    if (!std::isfinite(xmin)) xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
    const double pw = width - left - right;
    const double ph = panel_h - top - bottom;
    auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return y0 + top + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };
    os << "<text x=\"" << left << "\" y=\"" << y0 + 18 << "\" font-size=\"13\">" << title << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << y0 + top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double yv = ymin + (ymax - ymin) * t / 4.0;
      const double xv = xmin + (xmax - xmin) * t / 4.0;
      os << "<text x=\"" << left - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">" << yv << "</text>\n";
      os << "<text x=\"" << sx(xv) << "\" y=\"" << y0 + top + ph + 16 << "\" text-anchor=\"middle\">" << xv
         << "</text>\n";
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
      const auto& s = series[k];
      const char* color = palette[k % 10];
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.y[i])) os << sx(s.x[i]) << "," << sy(s.y[i]) << " ";
      os << "\"/>\n";
      os << "<text x=\"" << left + pw + 10 << "\" y=\"" << y0 + top + 14 * (static_cast<double>(k) + 1) << "\" fill=\""
         << color << "\">" << s.label << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace dsac
