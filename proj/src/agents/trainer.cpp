#include "rprl/agents/trainer.hpp"

#include <algorithm>

#include "rprl/errors.hpp"

namespace rprl::agents {

std::string algorithm_name(Algorithm a) { return a == Algorithm::kPpo ? "ppo" : "a2c"; }

Algorithm parse_algorithm(std::string_view text) {
  if (text == "ppo") return Algorithm::kPpo;
  if (text == "a2c") return Algorithm::kA2c;
  throw ConfigError("unknown algorithm '" + std::string(text) + "' (ppo, a2c)");
}

int default_shaping_horizon(std::uint64_t total_steps) {
  return std::max<int>(1, static_cast<int>(total_steps / gw::kMaxSteps / 2));
}

namespace {

shaping::ShapingConfig shaping_for(const Learner& l, shaping::ShapingConfig cfg) {
  if (!l.info.shaping) {
    cfg.mode = shaping::Mode::kNone;
  } else if (cfg.mode == shaping::Mode::kNone) {
    cfg.mode = shaping::Mode::kPredictorPotential;
  }
  return cfg;
}

}  // namespace

RolloutWorker::RolloutWorker(const Learner& learner, const gw::EnvSpec& env, std::uint64_t seed,
                             shaping::ShapingConfig shaping)
    : learner_(&learner), env_(env, seed), shaper_(shaping_for(learner, std::move(shaping)), learner.shaping_model) {}

std::vector<float> RolloutWorker::encode(const nn::Network<float>& enc, const gw::Observation& obs) const {
  nn::Tensor x = obs;
  x.reshape(nn::batched(1, obs.shape()));
  const nn::Tensor c = enc.forward(x);
  return {c.data().begin(), c.data().end()};
}

void RolloutWorker::start_episode(const ActorCritic& ac) {
  obs_ = std::make_shared<const gw::Observation>(env_.reset());
  goal_ = std::make_shared<const gw::Observation>(env_.goal_obs());
  code_p_ = encode(ac.policy.encoder(), *obs_);
  goal_p_ = encode(ac.policy.encoder(), *goal_);
  if (ac.train_encoder) {
    code_v_ = encode(ac.value.encoder(), *obs_);
    goal_v_ = encode(ac.value.encoder(), *goal_);
  }
  shaper_.begin_episode(episodes_, *goal_, code_p_);
  episode_reward_ = 0.0;
  need_reset_ = false;
}

namespace {

void append_features(std::vector<float>& dst, const std::vector<float>& a, const std::vector<float>& b) {
  dst.insert(dst.end(), a.begin(), a.end());
  dst.insert(dst.end(), b.begin(), b.end());
}

std::vector<float> concat(const std::vector<float>& a, const std::vector<float>& b) {
  std::vector<float> out;
  append_features(out, a, b);
  return out;
}

}  // namespace

void RolloutWorker::collect(const ActorCritic& ac, int n_steps, RolloutBatch& out, std::mt19937_64& rng,
                            const std::function<void(std::uint64_t)>& hook, std::uint64_t hook_every) {
  out.clear();
  if (!need_reset_ && ac.train_encoder) {
    // the encoders moved since these codes were computed
    code_p_ = encode(ac.policy.encoder(), *obs_);
    goal_p_ = encode(ac.policy.encoder(), *goal_);
    code_v_ = encode(ac.value.encoder(), *obs_);
    goal_v_ = encode(ac.value.encoder(), *goal_);
  }
  for (int k = 0; k < n_steps; ++k) {
    if (need_reset_) start_episode(ac);
    const std::vector<float> pin = concat(code_p_, goal_p_);
    const std::vector<float> vin = ac.train_encoder ? concat(code_v_, goal_v_) : pin;
    const ActResult a = act(ac, pin, vin, rng);
    const gw::Pos before = env_.state().pose.pos();
    gw::StepOutcome s = env_.step(a.action);
    ++steps_;
    truths_.push_back(s.truth);

    auto next_obs = std::make_shared<const gw::Observation>(std::move(s.obs));
    std::vector<float> next_p = encode(ac.policy.encoder(), *next_obs);
    const double bonus = shaper_.bonus(next_p, before, s.truth.agent, s.truth.goal);

    append_features(out.policy_in, code_p_, goal_p_);
    if (ac.train_encoder) {
      append_features(out.value_in, code_v_, goal_v_);
      out.obs.push_back(obs_);
      out.goals.push_back(goal_);
    }
    out.actions.push_back(static_cast<int>(a.action));
    out.log_probs.push_back(a.log_prob);
    out.values.push_back(a.value);
    out.env_rewards.push_back(s.reward);
    out.rewards.push_back(static_cast<float>(s.reward + bonus));
    episode_reward_ += s.reward;

    std::vector<float> next_v;
    if (ac.train_encoder) next_v = encode(ac.value.encoder(), *next_obs);
    const bool truncated = s.done && s.truth.end == gw::EndReason::kTimeout;
    out.dones.push_back(s.done && !truncated ? 1 : 0);
    out.truncated.push_back(truncated ? 1 : 0);
    float boot = 0.0f;
    if (truncated) {
      const std::vector<float> fin = concat(ac.train_encoder ? next_v : next_p, ac.train_encoder ? goal_v_ : goal_p_);
      nn::Tensor x({1, kFeatureSize}, fin);
      boot = ac.value.head().forward(x)[0];
    }
    out.bootstrap.push_back(boot);

    if (s.done) {
      ++episodes_;
      episode_rewards_.push_back(episode_reward_);
      need_reset_ = true;
    } else {
      obs_ = std::move(next_obs);
      code_p_ = std::move(next_p);
      if (ac.train_encoder) code_v_ = std::move(next_v);
    }
    if (hook && hook_every > 0 && steps_ % hook_every == 0) hook(steps_);
  }
  out.last_value = 0.0f;
  if (!need_reset_) {
    const std::vector<float> vin = ac.train_encoder ? concat(code_v_, goal_v_) : concat(code_p_, goal_p_);
    nn::Tensor x({1, kFeatureSize}, vin);
    out.last_value = ac.value.head().forward(x)[0];
  }
}

TrainProgress train_agent(Learner& learner, const AgentConfig& config, const EvalHook& on_eval) {
  if (config.total_steps == 0) throw ConfigError("total_steps must be positive");
  shaping::ShapingConfig sc = config.shaping;
  if (sc.H <= 0) sc.H = default_shaping_horizon(config.total_steps);
  sc.I = 0;
  RolloutWorker worker(learner, config.env, config.seed, sc);
  const bool ppo = config.algorithm == Algorithm::kPpo;
  Optimizers opt(ppo ? config.ppo.lr : config.a2c.lr);
  std::mt19937_64 rng(config.seed ^ 0x5851f42d4c957f2dull);
  const int n_steps = ppo ? config.ppo.n_steps : config.a2c.n_steps;
  if (n_steps < 1) throw ConfigError("n_steps must be positive");

  TrainProgress progress;
  auto refresh = [&]() {
    progress.step = worker.steps();
    progress.episodes = worker.episodes();
    const auto& r = worker.episode_rewards();
    const std::size_t k = std::min<std::size_t>(10, r.size());
    double s = 0.0;
    for (std::size_t i = r.size() - k; i < r.size(); ++i) s += r[i];
    progress.recent_reward = k ? s / static_cast<double>(k) : 0.0;
  };
  if (on_eval) on_eval(progress, learner.ac);
  auto hook = [&](std::uint64_t) {
    refresh();
    on_eval(progress, learner.ac);
  };

  RolloutBatch batch;
  while (worker.steps() < config.total_steps) {
    const auto n = static_cast<int>(std::min<std::uint64_t>(n_steps, config.total_steps - worker.steps()));
    if (on_eval) {
      worker.collect(learner.ac, n, batch, rng, hook, config.eval_interval);
    } else {
      worker.collect(learner.ac, n, batch, rng);
    }
    if (ppo) {
      compute_gae(batch, config.ppo.gamma, config.ppo.lambda, true);
      progress.last = ppo_update(learner.ac, batch, config.ppo, opt, rng);
    } else {
      compute_gae(batch, config.a2c.gamma, config.a2c.lambda, false);
      progress.last = a2c_update(learner.ac, batch, config.a2c, opt);
    }
  }
  refresh();
  if (!learner.ac.train_encoder && !learner.encoder_unchanged())
    throw UsageError(learner.info.name + ": frozen encoder changed during training");
  return progress;
}

}  // namespace rprl::agents
