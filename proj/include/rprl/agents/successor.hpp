#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rprl/dataset/buffer.hpp"
#include "rprl/nncore/network.hpp"
#include "rprl/nncore/optimizer.hpp"

namespace rprl::agents {

struct SFConfig {
  double gamma = 0.99;
  // phase 1: reward regression r = w . phi(s') on the balanced raw-reward data
  float reward_lr = 1e-3f;
  int reward_batch = 64;
  int reward_epochs = 20;
  int oversample = 10;
  // phase 2: TD fit of psi(phi(s), .) with phi frozen
  int psi_hidden = 0;  // 0 makes psi linear, which the folded preprocessor needs
  nn::OptimizerConfig psi_optimizer{nn::OptimizerKind::kAdam, 1e-3f};
  int psi_steps = 20000;
  int psi_batch = 64;  // >= dataset size means full batch
  int target_every = 500;
  std::uint64_t seed = 0;
};

// Transitions in feature space for the TD fit.
struct TdData {
  nn::Tensor phi;       // [N, d]
  nn::Tensor phi_next;  // [N, d]
  std::vector<int> actions;
  std::vector<std::uint8_t> done;

  std::size_t size() const { return actions.size(); }
};

// psi: d -> num_actions * d, one successor-feature block per action.
nn::Network<float> make_psi(int d, int num_actions, int hidden, std::mt19937_64& rng);

// Fits psi(s, a) to phi(s') + gamma * mean_a' psi_target(s', a') (uniform
// policy), with psi_target refreshed every `target_every` steps and zero
// continuation after terminal steps.
nn::Network<float> fit_successor_features(const TdData& data, int num_actions, const SFConfig& config);

struct SFModel {
  nn::Network<float> encoder;  // observation -> phi, 16 values
  nn::Network<float> reward;   // phi -> r, linear
  nn::Network<float> psi;      // phi -> 3 x 16
  double gamma = 0.99;

  std::vector<float> phi(const nn::Tensor& obs) const;
  // psi(s, a) for all actions, concatenated.
  std::vector<float> successor(std::span<const float> phi) const;
  // mean over actions, i.e. psi under the uniform policy
  std::vector<float> mean_successor(std::span<const float> phi) const;
  // Q(s, a) = w . psi(s, a)
  std::vector<float> q_values(std::span<const float> phi) const;

  // Observation -> mean successor features with the encoder's layer shapes:
  // the linear psi average is folded into the final dense layer.
  // Throws ConfigError when psi is not linear.
  nn::Network<float> folded_encoder() const;
};

// Two-phase pretraining on a random-policy buffer. Throws ConfigError on an
// empty buffer.
SFModel sf_pretrain(const data::Buffer& buffer, const SFConfig& config);

}  // namespace rprl::agents
