#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rprl/gridworld/grid.hpp"
#include "rprl/reprlearn/model.hpp"

namespace rprl::shaping {

enum class Mode { kNone, kPredictorPotential, kNegDistance, kAntiGoal };

std::string mode_name(Mode mode);
// Accepts "none", "predictor", "negdist", "antigoal".
Mode parse_mode(std::string_view text);

struct ShapingConfig {
  Mode mode = Mode::kNone;
  double gamma = 0.99;
  int H = 1;  // episodes with shaping; the bonus is 0 from episode H on
  int I = 0;  // episode counter, frozen for the length of an episode
  int delta = 0;
  std::vector<gw::Pos> antigoals;

  // (H - I) / H clamped to [0, 1].
  double scale() const;
};

// Throws ConfigError on gamma outside (0, 1], H < 1, I < 0 or delta < 0.
void validate(const ShapingConfig& config);

// Decayed potential difference from raw predictor outputs:
// scale * (gamma * f(next) - f(prev)).
double decayed_bonus(double f_prev, double f_next, const ShapingConfig& config);

// Predictor potential for one episode. The goal code is computed once; each
// observation costs one encoder pass plus one head pass.
class PredictorPotential {
 public:
  PredictorPotential(const repr::ReprModel& model, const gw::Observation& goal_obs);

  const std::vector<float>& goal_code() const { return goal_code_; }
  // Raw f(phi(obs), phi(goal)) without the decay factor.
  double raw(const gw::Observation& obs) const;
  double raw_from_code(std::span<const float> code) const;

 private:
  const repr::ReprModel* model_;
  std::vector<float> goal_code_;
};

// F = gamma * f*(next) - f*(prev) with f* = f * (H - I) / H. Throws
// ConfigError without a model or when the mode is not PredictorPotential.
double shape(const gw::Observation& prev, const gw::Observation& next, const gw::Observation& goal,
             const repr::ReprModel* model, const ShapingConfig& config);

// 1 if d(next, goal) <= delta, else -d(next, goal). Manhattan distance.
double shape_negdist(gw::Pos state, gw::Pos next_state, gw::Pos goal, int delta);

// 1 if d(next, goal) <= delta, else min(0, -d(next, goal) + d(state, nearest
// anti-goal)). Without anti-goals the second term is 0.
double shape_antigoal(gw::Pos state, gw::Pos next_state, gw::Pos goal, std::span<const gw::Pos> antigoals,
                      int delta);

// sum_t gamma^t F_t - (gamma^T f(s_T) - f(s_0)) for potentials f(s_0..s_T)
// and bonuses F_0..F_{T-1}. Zero for any potential-based F.
double telescoping_residual(std::span<const double> potentials, std::span<const double> bonuses, double gamma);

// Wraps one of the modes for use in a training loop. begin_episode() freezes
// I and, for the predictor mode, the goal code.
class Shaper {
 public:
  Shaper() = default;
  Shaper(ShapingConfig config, const repr::ReprModel* model);

  const ShapingConfig& config() const { return config_; }
  bool active() const { return config_.mode != Mode::kNone && config_.scale() > 0.0; }

  void begin_episode(int episode_index, const gw::Observation& goal_obs, std::span<const float> first_code);
  // Bonus for the transition into `next`. `next_code` is the encoder output
  // of the next observation; positions come from the truth channel.
  double bonus(std::span<const float> next_code, gw::Pos pos, gw::Pos next_pos, gw::Pos goal);

 private:
  ShapingConfig config_;
  const repr::ReprModel* model_ = nullptr;
  std::optional<PredictorPotential> potential_;
  double prev_raw_ = 0.0;
};

}  // namespace rprl::shaping
