#include "rprl/harness/experiment.hpp"

#include <fstream>

#include "rprl/dataset/buffer.hpp"
#include "rprl/errors.hpp"
#include "rprl/format.hpp"
#include "rprl/harness/evaluation.hpp"
#include "rprl/nncore/weights_io.hpp"

#ifndef RPRL_VERSION
#define RPRL_VERSION "unknown"
#endif

namespace rprl::harness {

std::string code_version() { return RPRL_VERSION; }

std::string ExperimentConfig::run_name() const {
  return name.empty() ? variant + "-" + std::string(gw::env_name(env.kind)) : name;
}

const std::set<std::string>& env_keys() {
  static const std::set<std::string> keys{"env.kind", "env.goal", "env.layout"};
  return keys;
}

const std::set<std::string>& experiment_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k = env_keys();
    k.insert({"agent.variant", "agent.algorithm", "agent.steps", "agent.model_raw", "agent.model_smooth",
              "agent.sf_buffer", "agent.sf_seed", "run.seeds", "run.name", "run.dir", "eval.interval",
              "eval.rollouts", "eval.greedy", "shaping.horizon", "shaping.mode", "manifest.version"});
    return k;
  }();
  return keys;
}

int parse_two_room_goal(const std::string& text) {
  if (text == "bottom-center") return 0;
  if (text == "top-left") return 1;
  if (text == "top-right") return 2;
  if (text == "random-training") return gw::kRandomTrainingGoal;
  if (text == "0" || text == "1" || text == "2") return text[0] - '0';
  throw ConfigError("env.goal: unknown two-room goal '" + text +
                    "' (bottom-center, top-left, top-right, random-training)");
}

std::string two_room_goal_name(int goal) {
  switch (goal) {
    case 0: return "bottom-center";
    case 1: return "top-left";
    case 2: return "top-right";
    default: return "random-training";
  }
}

gw::EnvSpec env_from_config(const Config& c) {
  gw::EnvSpec s;
  s.kind = gw::parse_env_kind(c.get("env.kind", "two-room"));
  s.goal = parse_two_room_goal(c.get("env.goal", "bottom-center"));
  const std::string layout = c.get("env.layout", "random");
  if (layout == "random") {
    s.layout = gw::kRandomLayout;
  } else {
    const auto l = c.get_int("env.layout", 0);
    if (l < 0 || l >= gw::kNumLavaLayouts) throw ConfigError("env.layout must be 0..7 or random");
    s.layout = static_cast<int>(l);
  }
  return s;
}

void env_to_config(const gw::EnvSpec& env, Config& c) {
  c.set("env.kind", std::string(gw::env_name(env.kind)));
  c.set("env.goal", two_room_goal_name(env.goal));
  c.set("env.layout", env.layout == gw::kRandomLayout ? "random" : std::to_string(env.layout));
}

ExperimentConfig experiment_from_config(const Config& c) {
  ExperimentConfig e;
  e.env = env_from_config(c);
  e.variant = c.get("agent.variant", e.variant);
  agents::variant_info(e.variant);
  e.algorithm = agents::parse_algorithm(c.get("agent.algorithm", "ppo"));
  e.seeds = c.get_u64_list("run.seeds", e.seeds);
  e.total_steps = c.get_u64("agent.steps", e.total_steps);
  e.eval_interval = c.get_u64("eval.interval", e.eval_interval);
  e.eval_rollouts = static_cast<int>(c.get_int("eval.rollouts", e.eval_rollouts));
  e.greedy_eval = c.get_bool("eval.greedy", e.greedy_eval);
  e.shaping_horizon = static_cast<int>(c.get_int("shaping.horizon", 0));
  e.shaping_mode = shaping::parse_mode(c.get("shaping.mode", "predictor"));
  e.name = c.get("run.name", "");
  e.runs_dir = c.get("run.dir", "runs");
  e.model_raw = c.get("agent.model_raw", "");
  e.model_smooth = c.get("agent.model_smooth", "");
  e.sf_buffer = c.get("agent.sf_buffer", "");
  e.sf_seed = c.get_u64("agent.sf_seed", 0);
  if (e.total_steps == 0) throw ConfigError("agent.steps must be positive");
  if (e.eval_interval == 0) throw ConfigError("eval.interval must be positive");
  if (e.eval_rollouts < 1) throw ConfigError("eval.rollouts must be at least 1");
  if (e.shaping_horizon < 0) throw ConfigError("shaping.horizon must be >= 0");
  if (e.shaping_mode == shaping::Mode::kNone) throw ConfigError("shaping.mode: 'none' is chosen by the variant");
  if (e.run_name().find('/') != std::string::npos) throw ConfigError("run.name must not contain '/'");
  return e;
}

Config experiment_to_config(const ExperimentConfig& e) {
  Config c;
  env_to_config(e.env, c);
  c.set("agent.variant", e.variant);
  c.set("agent.algorithm", agents::algorithm_name(e.algorithm));
  std::string seeds;
  for (auto s : e.seeds) seeds += (seeds.empty() ? "" : ",") + std::to_string(s);
  c.set("run.seeds", seeds);
  c.set("agent.steps", std::to_string(e.total_steps));
  c.set("eval.interval", std::to_string(e.eval_interval));
  c.set("eval.rollouts", std::to_string(e.eval_rollouts));
  c.set("eval.greedy", e.greedy_eval ? "true" : "false");
  c.set("shaping.horizon", std::to_string(e.shaping_horizon));
  c.set("shaping.mode", shaping::mode_name(e.shaping_mode));
  c.set("run.name", e.run_name());
  c.set("run.dir", e.runs_dir.string());
  c.set("agent.model_raw", e.model_raw.string());
  c.set("agent.model_smooth", e.model_smooth.string());
  c.set("agent.sf_buffer", e.sf_buffer.string());
  c.set("agent.sf_seed", std::to_string(e.sf_seed));
  return c;
}

agents::VariantResources Resources::view() const {
  return {raw ? &*raw : nullptr, smooth ? &*smooth : nullptr, sf ? &*sf : nullptr};
}

Resources load_resources(const ExperimentConfig& e) {
  const auto& info = agents::variant_info(e.variant);
  Resources r;
  auto need = [&](const std::filesystem::path& p, const char* key) {
    if (p.empty()) throw ConfigError(e.variant + " needs " + key);
    if (!std::filesystem::exists(p)) throw ConfigError(std::string(key) + ": no such file " + p.string());
  };
  switch (info.preprocessing) {
    case agents::Preprocessing::kEndToEnd: break;
    case agents::Preprocessing::kSuccessorFeatures: {
      need(e.sf_buffer, "agent.sf_buffer");
      agents::SFConfig cfg;
      cfg.seed = e.sf_seed;
      r.sf = agents::sf_pretrain(data::load_buffer(e.sf_buffer.string()), cfg);
      break;
    }
    case agents::Preprocessing::kRewardPrediction:
      if (info.horizon > 1) {
        need(e.model_smooth, "agent.model_smooth");
        r.smooth = repr::load_model(e.model_smooth);
      } else {
        need(e.model_raw, "agent.model_raw");
        r.raw = repr::load_model(e.model_raw);
      }
      break;
  }
  if (info.shaping && !r.raw) {
    need(e.model_raw, "agent.model_raw");
    r.raw = repr::load_model(e.model_raw);
  }
  return r;
}

agents::Learner make_learner(const ExperimentConfig& e, const Resources& res, std::uint64_t seed) {
  return agents::build_variant(e.variant, res.view(), seed);
}

void save_checkpoint(const std::filesystem::path& file, const agents::ActorCritic& ac) {
  const nn::Network<float>* nets[] = {&ac.policy.encoder(), &ac.policy.head(), &ac.value.encoder(), &ac.value.head()};
  nn::save_weights(file, nets);
}

void load_checkpoint(const std::filesystem::path& file, agents::ActorCritic& ac) {
  if (!std::filesystem::exists(file)) throw ConfigError("no checkpoint at " + file.string());
  nn::Network<float>* nets[] = {&ac.policy.encoder(), &ac.policy.head(), &ac.value.encoder(), &ac.value.head()};
  nn::load_weights(file, nets);
}

RunResult run_experiment(const ExperimentConfig& e, const Resources& res, std::uint64_t seed, std::ostream* log) {
  agents::Learner learner = make_learner(e, res, seed);
  RunResult out;
  out.dir = e.run_dir(seed);
  std::filesystem::create_directories(out.dir / "checkpoints");

  ExperimentConfig single = e;
  single.seeds = {seed};
  Config manifest = experiment_to_config(single);
  manifest.set("manifest.version", code_version());
  {
    std::ofstream m(out.dir / "manifest.txt");
    m << manifest.serialize();
    if (!m) throw FormatError("cannot write " + (out.dir / "manifest.txt").string());
  }

  agents::AgentConfig cfg;
  cfg.env = e.env;
  cfg.algorithm = e.algorithm;
  cfg.total_steps = e.total_steps;
  cfg.eval_interval = e.eval_interval;
  cfg.seed = seed;
  cfg.shaping.mode = e.shaping_mode;
  cfg.shaping.H = e.shaping_horizon;

  const auto metrics_path = out.dir / "metrics.csv";
  std::ofstream metrics(metrics_path);
  if (!metrics) throw FormatError("cannot write " + metrics_path.string());
  write_metrics_header(metrics);
  const std::uint64_t eval_seed = seed ^ 0x3c6ef372fe94f82bull;
  agents::train_agent(learner, cfg, [&](const agents::TrainProgress& p, const agents::ActorCritic& ac) {
    AgentPolicy policy(ac, e.greedy_eval);
    const EvalResult r = evaluate(policy, e.env, e.eval_rollouts, eval_seed);
    MetricsRow row{p.step, p.episodes, r.mean_reward, r.min_length, r.mean_length, r.success_rate, p.recent_reward};
    write_metrics_row(metrics, row);
    metrics.flush();
    out.rows.push_back(row);
    if (log)
      *log << e.run_name() << " seed " << seed << " step " << p.step << " reward " << fmt_num(r.mean_reward)
           << " min_len " << r.min_length << '\n';
  });
  save_checkpoint(out.dir / "checkpoints" / "final.weights", learner.ac);
  return out;
}

}  // namespace rprl::harness
