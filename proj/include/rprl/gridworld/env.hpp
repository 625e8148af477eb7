#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "rprl/gridworld/grid.hpp"
#include "rprl/nncore/tensor.hpp"

namespace rprl::gw {

enum class Action : std::uint8_t { kTurnLeft, kTurnRight, kForward };
inline constexpr int kNumActions = 3;
inline constexpr int kMaxSteps = 100;

enum class EnvKind { kTwoRoom, kLavaGap, kFourRoom };

std::string_view env_name(EnvKind kind);
// Accepts "two-room", "lava-gap", "four-room"; throws ConfigError otherwise.
EnvKind parse_env_kind(std::string_view name);

// Two-room goals, indices into two_room_goals().
enum class TwoRoomGoal : int { kBottomCenter = 0, kTopLeft = 1, kTopRight = 2 };
inline constexpr int kRandomTrainingGoal = -1;
inline constexpr int kRandomLayout = -1;

struct EnvSpec {
  EnvKind kind = EnvKind::kTwoRoom;
  // Two-room goal index, or kRandomTrainingGoal for a 50/50 draw between
  // bottom-center and top-left.
  int goal = static_cast<int>(TwoRoomGoal::kBottomCenter);
  // Lava-gap layout 0..7, or kRandomLayout.
  int layout = kRandomLayout;
};

const std::array<Pos, 3>& two_room_goals();
inline constexpr int kNumLavaLayouts = 8;
// Layout l puts the lava column at x = 2 + l / 4 with the gap at y = 1 + l % 4.
Grid lava_gap_grid(int layout);
const Layout& builtin_layout(EnvKind kind);

enum class EndReason : std::uint8_t { kNone, kGoal, kLava, kTimeout };

// Entering Goal or Lava moves the agent onto that tile and ends the episode.
struct EnvState {
  std::shared_ptr<const Grid> grid;
  Pose pose;
  Pos goal;
  int steps = 0;
  bool terminated = false;
};

// Ground truth for oracles and the distance-based shaping baselines.
struct Truth {
  Pos agent;
  Pos goal;
  int steps = 0;
  EndReason end = EndReason::kNone;
};

using Observation = nn::Tensor;

struct StepOutcome {
  Observation obs;
  float reward = 0.0f;
  bool done = false;
  Truth truth;
};

struct ResetResult {
  EnvState state;
  Observation obs;
  Observation goal_obs;
};

// Reward for reaching the goal after `steps` earlier actions.
float goal_reward(int steps);

EnvState initial_state(const EnvSpec& spec, std::mt19937_64& rng);
ResetResult reset(const EnvSpec& spec, std::uint64_t seed);
// Pure transition; throws UsageError on a terminated state.
EnvState transition(const EnvState& state, Action action, float* reward, EndReason* end);
StepOutcome step(EnvState& state, Action action);

// Every Empty tile times four headings, row-major then N, E, S, W.
std::vector<Pose> enumerate_poses(const Grid& grid);

// Stateful wrapper: each reset() draws the next episode from an internal rng
// and caches that episode's goal observation.
class Env {
 public:
  Env(EnvSpec spec, std::uint64_t seed);

  const Observation& reset();
  StepOutcome step(Action action);

  const EnvSpec& spec() const { return spec_; }
  const EnvState& state() const { return state_; }
  const Observation& goal_obs() const { return goal_obs_; }
  int episodes_started() const { return episodes_; }

 private:
  EnvSpec spec_;
  std::mt19937_64 rng_;
  EnvState state_;
  Observation obs_;
  Observation goal_obs_;
  int episodes_ = 0;
};

}  // namespace rprl::gw
