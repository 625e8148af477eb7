#include "rprl/shaping/shaping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rprl/errors.hpp"

namespace rprl::shaping {

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::kNone:
      return "none";
    case Mode::kPredictorPotential:
      return "predictor";
    case Mode::kNegDistance:
      return "negdist";
    case Mode::kAntiGoal:
      return "antigoal";
  }
  return "none";
}

Mode parse_mode(std::string_view text) {
  for (Mode m : {Mode::kNone, Mode::kPredictorPotential, Mode::kNegDistance, Mode::kAntiGoal}) {
    if (text == mode_name(m)) return m;
  }
  throw ConfigError("unknown shaping mode '" + std::string(text) + "' (none, predictor, negdist, antigoal)");
}

double ShapingConfig::scale() const {
  if (I >= H) return 0.0;
  return std::clamp(static_cast<double>(H - I) / H, 0.0, 1.0);
}

void validate(const ShapingConfig& config) {
  if (!(config.gamma > 0.0 && config.gamma <= 1.0)) {
    throw ConfigError("shaping.gamma must lie in (0, 1]");
  }
  if (config.H < 1) throw ConfigError("shaping.H must be a positive episode count");
  if (config.I < 0) throw ConfigError("shaping episode counter must be non-negative");
  if (config.delta < 0) throw ConfigError("shaping.delta must be non-negative");
}

double decayed_bonus(double f_prev, double f_next, const ShapingConfig& config) {
  const double s = config.scale();
  if (s == 0.0) return 0.0;
  return config.gamma * (s * f_next) - s * f_prev;
}

PredictorPotential::PredictorPotential(const repr::ReprModel& model, const gw::Observation& goal_obs)
    : model_(&model) {
  nn::Tensor g = goal_obs;
  g.reshape(nn::batched(1, goal_obs.shape()));
  const nn::Tensor code = model.goal_encoder().forward(g);
  goal_code_.assign(code.data().begin(), code.data().end());
}

double PredictorPotential::raw(const gw::Observation& obs) const {
  const auto code = model_->encode(obs);
  return raw_from_code(code);
}

double PredictorPotential::raw_from_code(std::span<const float> code) const {
  if (code.size() != goal_code_.size()) {
    throw ShapeError("potential expects a " + std::to_string(goal_code_.size()) + "-dim code");
  }
  nn::Tensor in({1, static_cast<int>(2 * code.size())});
  std::copy(code.begin(), code.end(), in.data().begin());
  std::copy(goal_code_.begin(), goal_code_.end(), in.data().begin() + static_cast<std::ptrdiff_t>(code.size()));
  return model_->net().head().forward(in)[0];
}

double shape(const gw::Observation& prev, const gw::Observation& next, const gw::Observation& goal,
             const repr::ReprModel* model, const ShapingConfig& config) {
  if (config.mode != Mode::kPredictorPotential) {
    throw ConfigError("shape() needs shaping.mode = predictor");
  }
  if (model == nullptr) throw ConfigError("predictor shaping needs a trained representation model");
  if (config.scale() == 0.0) return 0.0;
  const PredictorPotential f(*model, goal);
  return decayed_bonus(f.raw(prev), f.raw(next), config);
}

double shape_negdist(gw::Pos /*state*/, gw::Pos next_state, gw::Pos goal, int delta) {
  const int d = gw::manhattan(next_state, goal);
  return d <= delta ? 1.0 : -static_cast<double>(d);
}

double shape_antigoal(gw::Pos state, gw::Pos next_state, gw::Pos goal, std::span<const gw::Pos> antigoals,
                      int delta) {
  const int d = gw::manhattan(next_state, goal);
  if (d <= delta) return 1.0;
  int nearest = 0;
  if (!antigoals.empty()) {
    nearest = std::numeric_limits<int>::max();
    for (gw::Pos a : antigoals) nearest = std::min(nearest, gw::manhattan(state, a));
  }
  return std::min(0.0, -static_cast<double>(d) + nearest);
}

double telescoping_residual(std::span<const double> potentials, std::span<const double> bonuses, double gamma) {
  if (potentials.size() != bonuses.size() + 1) {
    throw UsageError("telescoping_residual needs one more potential than bonuses");
  }
  double sum = 0.0;
  double g = 1.0;
  for (double f : bonuses) {
    sum += g * f;
    g *= gamma;
  }
  return sum - (g * potentials.back() - potentials.front());
}

Shaper::Shaper(ShapingConfig config, const repr::ReprModel* model) : config_(std::move(config)), model_(model) {
  validate(config_);
  if (config_.mode == Mode::kPredictorPotential && model_ == nullptr) {
    throw ConfigError("predictor shaping needs a trained representation model");
  }
}

void Shaper::begin_episode(int episode_index, const gw::Observation& goal_obs, std::span<const float> first_code) {
  config_.I = episode_index;
  potential_.reset();
  if (config_.mode == Mode::kPredictorPotential && active()) {
    potential_.emplace(*model_, goal_obs);
    prev_raw_ = potential_->raw_from_code(first_code);
  }
}

double Shaper::bonus(std::span<const float> next_code, gw::Pos pos, gw::Pos next_pos, gw::Pos goal) {
  if (!active()) return 0.0;
  switch (config_.mode) {
    case Mode::kPredictorPotential: {
      const double next_raw = potential_->raw_from_code(next_code);
      const double f = decayed_bonus(prev_raw_, next_raw, config_);
      prev_raw_ = next_raw;
      return f;
    }
    case Mode::kNegDistance:
      return shape_negdist(pos, next_pos, goal, config_.delta);
    case Mode::kAntiGoal:
      return shape_antigoal(pos, next_pos, goal, config_.antigoals, config_.delta);
    case Mode::kNone:
      break;
  }
  return 0.0;
}

}  // namespace rprl::shaping
