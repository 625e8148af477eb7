#include "rprl/nncore/optimizer.hpp"

#include <cmath>

namespace rprl::nn {

void Optimizer::step(ParamSet<float>& params, const ParamSet<float>& grads) {
  if (!params.same_layout(grads)) throw ShapeError("gradient layout does not mirror parameters");
  grads.for_each([](const std::string& key, const Tensor& g) {
    if (!g.all_finite()) throw NumericError("non-finite gradient in " + key);
  });
  if (steps_ == 0) {
    first_ = params.zeros_like();
    if (config_.kind == OptimizerKind::kAdam) second_ = params.zeros_like();
  } else if (!first_.same_layout(params)) {
    throw ShapeError("optimizer state does not mirror parameters");
  }
  ++steps_;

  const float lr = config_.lr;
  for (auto& [k, p] : params.layers()) {
    const auto& g = grads.at(k);
    auto& m = first_.at(k);
    auto update = [&](Tensor& param, const Tensor& grad, Tensor& mom, Tensor* sq) {
      if (config_.kind == OptimizerKind::kSgd) {
        const float mu = config_.momentum;
        for (std::size_t i = 0; i < param.size(); ++i) {
          mom[i] = mu * mom[i] + grad[i];
          param[i] -= lr * mom[i];
        }
        return;
      }
      const double b1 = config_.beta1, b2 = config_.beta2;
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
      for (std::size_t i = 0; i < param.size(); ++i) {
        mom[i] = static_cast<float>(b1 * mom[i] + (1.0 - b1) * grad[i]);
        (*sq)[i] = static_cast<float>(b2 * (*sq)[i] + (1.0 - b2) * grad[i] * grad[i]);
        const double m_hat = mom[i] / c1;
        const double v_hat = (*sq)[i] / c2;
        param[i] -= static_cast<float>(lr * m_hat / (std::sqrt(v_hat) + config_.epsilon));
      }
    };
    Tensor* vw = config_.kind == OptimizerKind::kAdam ? &second_.at(k).weight : nullptr;
    Tensor* vb = config_.kind == OptimizerKind::kAdam ? &second_.at(k).bias : nullptr;
    update(p.weight, g.weight, m.weight, vw);
    update(p.bias, g.bias, m.bias, vb);
  }
}

double clip_global_norm(std::span<ParamSet<float>* const> grads, double max_norm) {
  double sq = 0.0;
  for (const auto* g : grads) sq += g->squared_norm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const float s = static_cast<float>(max_norm / norm);
    for (auto* g : grads) g->scale(s);
  }
  return norm;
}

}  // namespace rprl::nn
