#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "rprl/agents/actor_critic.hpp"
#include "rprl/agents/variants.hpp"
#include "rprl/gridworld/env.hpp"
#include "rprl/shaping/shaping.hpp"

namespace rprl::agents {

enum class Algorithm { kPpo, kA2c };

std::string algorithm_name(Algorithm a);
// "ppo" or "a2c".
Algorithm parse_algorithm(std::string_view text);

struct AgentConfig {
  gw::EnvSpec env;
  Algorithm algorithm = Algorithm::kPpo;
  PpoConfig ppo;
  A2cConfig a2c;
  std::uint64_t total_steps = 150000;
  std::uint64_t eval_interval = 5000;
  std::uint64_t seed = 0;
  // Used by shaping variants; mode is set from the variant. H <= 0 selects
  // default_shaping_horizon().
  shaping::ShapingConfig shaping;
};

// Half the episode count the step budget allows at the step limit.
int default_shaping_horizon(std::uint64_t total_steps);

struct TrainProgress {
  std::uint64_t step = 0;
  int episodes = 0;
  double recent_reward = 0.0;  // mean environment reward of the last 10 episodes
  UpdateStats last;
};

using EvalHook = std::function<void(const TrainProgress&, const ActorCritic&)>;

// Steps one environment with the learner's policy and fills rollout
// batches. Episodes continue across collect() calls.
class RolloutWorker {
 public:
  RolloutWorker(const Learner& learner, const gw::EnvSpec& env, std::uint64_t seed, shaping::ShapingConfig shaping);

  // `hook` (optional) fires after every environment step whose count is a
  // multiple of `hook_every`.
  void collect(const ActorCritic& ac, int n_steps, RolloutBatch& out, std::mt19937_64& rng,
               const std::function<void(std::uint64_t)>& hook = {}, std::uint64_t hook_every = 0);

  std::uint64_t steps() const { return steps_; }
  int episodes() const { return episodes_; }
  const std::vector<double>& episode_rewards() const { return episode_rewards_; }
  const std::vector<gw::Truth>& truths() const { return truths_; }  // one per step
  const shaping::Shaper& shaper() const { return shaper_; }

 private:
  std::vector<float> encode(const nn::Network<float>& enc, const gw::Observation& obs) const;
  void start_episode(const ActorCritic& ac);

  const Learner* learner_;
  gw::Env env_;
  shaping::Shaper shaper_;
  bool need_reset_ = true;
  std::uint64_t steps_ = 0;
  int episodes_ = 0;
  double episode_reward_ = 0.0;
  std::vector<double> episode_rewards_;
  std::vector<gw::Truth> truths_;
  data::ObsPtr obs_, goal_;
  std::vector<float> code_p_, goal_p_, code_v_, goal_v_;
};

// Runs the configured algorithm for total_steps environment steps. `on_eval`
// fires at step 0 and at every multiple of eval_interval.
TrainProgress train_agent(Learner& learner, const AgentConfig& config, const EvalHook& on_eval = {});

}  // namespace rprl::agents
