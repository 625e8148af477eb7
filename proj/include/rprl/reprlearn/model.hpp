#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rprl/dataset/buffer.hpp"
#include "rprl/dataset/smoothing.hpp"
#include "rprl/gridworld/env.hpp"
#include "rprl/nncore/optimizer.hpp"
#include "rprl/nncore/pair_net.hpp"

namespace rprl::repr {

inline constexpr int kCodeSize = 16;

// 28x28x3 -> Conv(8, 3x3, s3) -> ReLU -> MaxPool(2, s2) -> Conv(16, 3x3, s2)
// -> ReLU -> Flatten -> Dense(16), linear output.
std::vector<nn::LayerSpec> encoder_layers();
// 32 -> 256 -> 256 -> 1 with a logistic output.
std::vector<nn::LayerSpec> predictor_layers();
nn::Network<float> make_encoder(std::mt19937_64& rng);

struct TrainConfig {
  float lr = 1e-3f;
  int batch = 64;
  int epochs = 50;
  int patience = 10;  // 0 disables early stopping
  std::uint64_t seed = 0;
};

// Where the training data came from; stored in the sidecar.
struct Provenance {
  double gamma = 0.99;
  int horizon = 1;
  int oversample = 10;
  std::uint32_t dataset_crc = 0;
  std::string env = "two-room";
};

class ReprModel {
 public:
  explicit ReprModel(std::uint64_t init_seed = 0, bool tied = true);

  nn::PairNet<float>& net() { return net_; }
  const nn::PairNet<float>& net() const { return net_; }
  const nn::Network<float>& encoder() const { return net_.encoder(); }
  const nn::Network<float>& goal_encoder() const { return net_.second_encoder(); }
  bool tied() const { return net_.tied(); }

  // [N, 28, 28, 3] -> [N, 16] through the current-view encoder.
  nn::Tensor encode_batch(const nn::Tensor& obs) const;
  std::vector<float> encode(const gw::Observation& obs) const;
  // [N, 32] policy input: current-view code then goal code.
  nn::Tensor features(const nn::Tensor& obs, const nn::Tensor& goal) const;
  nn::Tensor predict_batch(const nn::Tensor& obs, const nn::Tensor& goal) const;
  float predict_reward(const gw::Observation& obs, const gw::Observation& goal) const;

  TrainConfig train_config;
  Provenance provenance;
  double best_val_mse = -1.0;

 private:
  nn::PairNet<float> net_;
};

struct LossAndGrad {
  double loss = 0.0;
  nn::PairGradients<float> grads;
};

// Mean of (r* - f(phi(next), phi(goal)))^2 and its gradient. Each distinct
// observation is encoded once per call.
LossAndGrad reward_loss_and_gradients(const ReprModel& model, std::span<const data::ObsPtr> next,
                                   std::span<const data::ObsPtr> goals, std::span<const float> targets);

// Reward-regression loss over a whole dataset (no gradients).
double reward_loss(const ReprModel& model, const data::SmoothedDataset& data);

struct EpochStats {
  int epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> history;
  int best_epoch = 0;
  double best_val_mse = 0.0;
  std::uint64_t steps = 0;
};

// Minibatch Adam on the reward loss, updating encoder and predictor jointly. With a
// non-empty validation set the parameters of the best validation epoch are
// kept. Throws ConfigError on an empty training set.
TrainReport train(ReprModel& model, const data::SmoothedDataset& train_set,
                  const data::SmoothedDataset& validation, const TrainConfig& config);

// Smooth, split by episode, then oversample both sides so that model
// selection scores the same balanced objective as training.
data::Split prepare_training_data(const data::Buffer& buffer, double gamma, int horizon, int oversample,
                                  double validation_fraction, std::uint64_t seed);

inline constexpr int kModelFormatVersion = 1;

// Writes <path> (weight file) and <path>.json (sidecar).
void save_model(const ReprModel& model, const std::filesystem::path& path);
ReprModel load_model(const std::filesystem::path& path);

}  // namespace rprl::repr
