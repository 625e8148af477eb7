#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <vector>

#include "rprl/agents/actor_critic.hpp"
#include "rprl/gridworld/env.hpp"

namespace rprl::harness {

class Policy {
 public:
  virtual ~Policy() = default;
  virtual void begin_episode(const gw::EnvState& state, const gw::Observation& goal_obs) {
    (void)state;
    (void)goal_obs;
  }
  virtual gw::Action act(const gw::EnvState& state, const gw::Observation& obs, std::mt19937_64& rng) = 0;
};

class RandomPolicy : public Policy {
 public:
  gw::Action act(const gw::EnvState& state, const gw::Observation& obs, std::mt19937_64& rng) override;
};

// Shortest action sequence to the goal over (tile, heading), avoiding lava.
// nullopt when the goal is unreachable.
std::optional<std::vector<gw::Action>> shortest_plan(const gw::EnvState& state);

// Replans from the true state every step.
class PlannerPolicy : public Policy {
 public:
  gw::Action act(const gw::EnvState& state, const gw::Observation& obs, std::mt19937_64& rng) override;
};

// Runs the actor-critic on its own preprocessing; samples unless greedy.
class AgentPolicy : public Policy {
 public:
  AgentPolicy(const agents::ActorCritic& ac, bool greedy) : ac_(&ac), greedy_(greedy) {}
  void begin_episode(const gw::EnvState& state, const gw::Observation& goal_obs) override;
  gw::Action act(const gw::EnvState& state, const gw::Observation& obs, std::mt19937_64& rng) override;

 private:
  std::vector<float> encode(const gw::Observation& obs) const;
  const agents::ActorCritic* ac_;
  bool greedy_;
  std::vector<float> goal_code_;
};

struct Episode {
  float reward = 0.0f;
  int length = 0;  // actions taken, at most the step limit
  bool success = false;
  std::vector<gw::Pos> tiles;  // start tile, then one entry per tile change
};

// Episode seeds for evaluation, drawn from a stream separate from training.
std::uint64_t eval_episode_seed(std::uint64_t base, int index);

Episode run_episode(Policy& policy, const gw::EnvSpec& env, std::uint64_t episode_seed, std::mt19937_64& rng);

struct EvalResult {
  int episodes = 0;
  double mean_reward = 0.0;
  int min_length = 0;
  double mean_length = 0.0;
  double success_rate = 0.0;
};

// Runs episodes eval_episode_seed(seed, 0..n-1). Throws ConfigError if n < 1.
EvalResult evaluate(Policy& policy, const gw::EnvSpec& env, int n, std::uint64_t seed);
std::vector<Episode> rollouts(Policy& policy, const gw::EnvSpec& env, int n, std::uint64_t seed);

// "episode,order,x,y,success"
void write_trajectories_csv(std::ostream& os, const std::vector<Episode>& episodes);

}  // namespace rprl::harness
