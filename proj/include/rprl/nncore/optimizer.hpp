#pragma once

#include <cstdint>
#include <span>

#include "rprl/nncore/params.hpp"

namespace rprl::nn {

enum class OptimizerKind { kSgd, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  float lr = 1e-3f;
  float momentum = 0.0f;  // SGD only
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float epsilon = 1e-8f;
};

// Per-parameter optimizer state. Moment tensors are allocated on the first
// step and must keep mirroring the parameter layout afterwards.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config = {}) : config_(config) {}

  // Throws NumericError naming the first non-finite gradient tensor and
  // ShapeError when `grads` does not mirror `params`.
  void step(ParamSet<float>& params, const ParamSet<float>& grads);

  std::uint64_t step_count() const { return steps_; }
  const OptimizerConfig& config() const { return config_; }
  void set_lr(float lr) { config_.lr = lr; }

  const ParamSet<float>& first_moment() const { return first_; }
  const ParamSet<float>& second_moment() const { return second_; }

 private:
  OptimizerConfig config_;
  std::uint64_t steps_ = 0;
  ParamSet<float> first_;   // Adam m / SGD velocity
  ParamSet<float> second_;  // Adam v
};

// Scales all gradient sets jointly so their global L2 norm is at most
// `max_norm`. Returns the norm before clipping.
double clip_global_norm(std::span<ParamSet<float>* const> grads, double max_norm);

}  // namespace rprl::nn
