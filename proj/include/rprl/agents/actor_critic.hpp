#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "rprl/dataset/buffer.hpp"
#include "rprl/gridworld/env.hpp"
#include "rprl/nncore/optimizer.hpp"
#include "rprl/nncore/pair_net.hpp"

namespace rprl::agents {

inline constexpr int kFeatureSize = 32;

// 32 -> 64 -> 64 -> 3 logits.
std::vector<nn::LayerSpec> policy_layers();
// 32 -> 64 -> 64 -> 1.
std::vector<nn::LayerSpec> value_layers();

// Policy and value paths. Each is an encoder applied to the current and
// goal views followed by its own head. Unless `train_encoder` is set the
// encoders are fixed preprocessing and only the heads learn.
struct ActorCritic {
  nn::PairNet<float> policy;
  nn::PairNet<float> value;
  bool train_encoder = false;

  std::size_t policy_path_parameters() const { return policy.num_parameters(); }
  std::size_t value_path_parameters() const { return value.num_parameters(); }
};

// Heads on top of a copy of `encoder`, which stays fixed.
ActorCritic make_frozen_actor_critic(const nn::Network<float>& encoder, std::uint64_t seed);
// Fresh trainable encoders, one per path.
ActorCritic make_end_to_end_actor_critic(std::uint64_t seed);

std::array<double, gw::kNumActions> softmax(std::span<const float> logits);

struct ActResult {
  gw::Action action = gw::Action::kForward;
  float log_prob = 0.0f;
  float value = 0.0f;
  std::array<double, gw::kNumActions> probs{};
};

// Samples from softmax(policy(policy_in)); `greedy` takes the argmax.
// Throws NumericError when the logits are not finite.
ActResult act(const ActorCritic& ac, std::span<const float> policy_in, std::span<const float> value_in,
              std::mt19937_64& rng, bool greedy = false);

// One rollout of consecutive environment steps, possibly spanning episodes.
struct RolloutBatch {
  std::vector<float> policy_in;  // N x 32
  std::vector<float> value_in;   // N x 32, empty when equal to policy_in
  std::vector<data::ObsPtr> obs;    // kept only for trainable encoders
  std::vector<data::ObsPtr> goals;  // idem
  std::vector<int> actions;
  std::vector<float> log_probs;
  std::vector<float> rewards;      // environment reward plus shaping bonus
  std::vector<float> env_rewards;  // environment reward alone
  std::vector<float> values;
  std::vector<std::uint8_t> dones;      // true terminal: goal or lava
  std::vector<std::uint8_t> truncated;  // step limit reached
  std::vector<float> bootstrap;         // V(final obs), used where truncated
  float last_value = 0.0f;              // V(obs after the last step)
  std::vector<float> advantages;
  std::vector<float> returns;

  std::size_t size() const { return actions.size(); }
  std::span<const float> policy_row(std::size_t i) const;
  std::span<const float> value_row(std::size_t i) const;
  void clear();
};

// Generalised advantage estimation. Terminals cut the bootstrap; truncated
// steps bootstrap from V(final obs). Returns are advantage + value before
// any normalisation.
void compute_gae(RolloutBatch& batch, double gamma, double lambda, bool normalize);

struct PpoConfig {
  double clip = 0.2;
  double gamma = 0.99;
  double lambda = 0.95;
  double ent_coef = 0.01;
  double vf_coef = 0.5;
  float lr = 2.5e-4f;
  int n_steps = 128;
  int epochs = 4;
  int minibatch = 32;
  double max_grad_norm = 0.5;
};

struct A2cConfig {
  double gamma = 0.99;
  double lambda = 1.0;
  double ent_coef = 0.01;
  double vf_coef = 0.25;
  float lr = 7e-4f;
  int n_steps = 20;
  double max_grad_norm = 0.5;
};

struct Optimizers {
  explicit Optimizers(float lr);
  nn::Optimizer policy_head, value_head, policy_encoder, value_encoder;
};

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double grad_norm = 0.0;
  // max |pi_new / pi_old - 1| over the batch before the first step
  double initial_ratio_deviation = 0.0;
};

// Clipped surrogate with clipped value loss, entropy bonus and global
// gradient-norm clipping. Needs compute_gae() first. Throws NumericError on
// a non-finite loss.
UpdateStats ppo_update(ActorCritic& ac, const RolloutBatch& batch, const PpoConfig& config, Optimizers& opt,
                       std::mt19937_64& rng);

// One synchronous advantage actor-critic step on the whole batch.
UpdateStats a2c_update(ActorCritic& ac, const RolloutBatch& batch, const A2cConfig& config, Optimizers& opt);

}  // namespace rprl::agents
