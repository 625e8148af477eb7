#include "rprl/gridworld/env.hpp"

#include <algorithm>

#include "rprl/errors.hpp"
#include "rprl/gridworld/render.hpp"

namespace rprl::gw {
namespace {

int uniform_int(std::mt19937_64& rng, int n) {
  return std::uniform_int_distribution<int>(0, n - 1)(rng);
}

Dir random_dir(std::mt19937_64& rng) { return static_cast<Dir>(uniform_int(rng, 4)); }

std::shared_ptr<const Grid> with_goal(Grid grid, Pos goal) {
  grid.set(goal, Tile::kGoal);
  return std::make_shared<const Grid>(std::move(grid));
}

const std::array<std::shared_ptr<const Grid>, 3>& two_room_grids() {
  static const auto grids = [] {
    std::array<std::shared_ptr<const Grid>, 3> g;
    for (int i = 0; i < 3; ++i) g[i] = with_goal(builtin_layout(EnvKind::kTwoRoom).grid, two_room_goals()[i]);
    return g;
  }();
  return grids;
}

const std::array<std::shared_ptr<const Grid>, kNumLavaLayouts>& lava_grids() {
  static const auto grids = [] {
    std::array<std::shared_ptr<const Grid>, kNumLavaLayouts> g;
    for (int l = 0; l < kNumLavaLayouts; ++l) g[l] = std::make_shared<const Grid>(lava_gap_grid(l));
    return g;
  }();
  return grids;
}

}  // namespace

std::string_view env_name(EnvKind kind) {
  switch (kind) {
    case EnvKind::kTwoRoom: return "two-room";
    case EnvKind::kLavaGap: return "lava-gap";
    case EnvKind::kFourRoom: return "four-room";
  }
  return "?";
}

EnvKind parse_env_kind(std::string_view name) {
  for (EnvKind k : {EnvKind::kTwoRoom, EnvKind::kLavaGap, EnvKind::kFourRoom})
    if (env_name(k) == name) return k;
  throw ConfigError("unknown environment '" + std::string(name) +
                    "' (expected two-room, lava-gap or four-room)");
}

const Layout& builtin_layout(EnvKind kind) {
  static const Layout two = parse_map(builtin_map_text("two_room"));
  static const Layout lava = parse_map(builtin_map_text("lava_gap"));
  static const Layout four = parse_map(builtin_map_text("four_room"));
  switch (kind) {
    case EnvKind::kTwoRoom: return two;
    case EnvKind::kLavaGap: return lava;
    case EnvKind::kFourRoom: return four;
  }
  throw UsageError("bad environment kind");
}

const std::array<Pos, 3>& two_room_goals() {
  static const std::array<Pos, 3> goals = [] {
    auto c = builtin_layout(EnvKind::kTwoRoom).goal_candidates;
    if (c.size() != 3) throw FormatError("two-room map must mark exactly three goal candidates");
    std::sort(c.begin(), c.end(), [](Pos a, Pos b) { return a.y != b.y ? a.y > b.y : a.x < b.x; });
    // c = bottom, then the top pair ordered left to right
    return std::array<Pos, 3>{c[0], c[1], c[2]};
  }();
  return goals;
}

Grid lava_gap_grid(int layout) {
  if (layout < 0 || layout >= kNumLavaLayouts)
    throw ConfigError("lava-gap layout must be in [0, 7], got " + std::to_string(layout));
  const Layout& base = builtin_layout(EnvKind::kLavaGap);
  Grid g = base.grid;
  const int column = 2 + layout / 4;
  const int gap = 1 + layout % 4;
  for (int y = 1; y < g.height() - 1; ++y)
    if (y != gap) g.set({column, y}, Tile::kLava);
  g.set(base.goal_candidates.at(0), Tile::kGoal);
  return g;
}

float goal_reward(int steps) {
  return 1.0f - 0.9f * static_cast<float>(steps) / static_cast<float>(kMaxSteps);
}

EnvState initial_state(const EnvSpec& spec, std::mt19937_64& rng) {
  EnvState s;
  switch (spec.kind) {
    case EnvKind::kTwoRoom: {
      int goal = spec.goal;
      if (goal == kRandomTrainingGoal) goal = uniform_int(rng, 2);
      if (goal < 0 || goal > 2)
        throw ConfigError("two-room goal index must be -1, 0, 1 or 2, got " + std::to_string(goal));
      const Pos start = *builtin_layout(EnvKind::kTwoRoom).start;
      s.grid = two_room_grids()[goal];
      s.goal = two_room_goals()[goal];
      s.pose = {start.x, start.y, random_dir(rng)};
      break;
    }
    case EnvKind::kLavaGap: {
      const int layout = spec.layout == kRandomLayout ? uniform_int(rng, kNumLavaLayouts) : spec.layout;
      if (layout < 0 || layout >= kNumLavaLayouts)
        throw ConfigError("lava-gap layout must be -1 or in [0, 7], got " + std::to_string(layout));
      const Layout& base = builtin_layout(EnvKind::kLavaGap);
      s.grid = lava_grids()[layout];
      s.goal = base.goal_candidates.at(0);
      s.pose = {base.start->x, base.start->y, Dir::kEast};
      break;
    }
    case EnvKind::kFourRoom: {
      const Grid& base = builtin_layout(EnvKind::kFourRoom).grid;
      const auto cells = base.cells_of(Tile::kEmpty);
      const int n = static_cast<int>(cells.size());
      const int a = uniform_int(rng, n);
      int g = uniform_int(rng, n - 1);
      if (g >= a) ++g;
      s.grid = with_goal(base, cells[g]);
      s.goal = cells[g];
      s.pose = {cells[a].x, cells[a].y, random_dir(rng)};
      break;
    }
  }
  return s;
}

ResetResult reset(const EnvSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ResetResult r;
  r.state = initial_state(spec, rng);
  r.obs = render_observation(r.state);
  r.goal_obs = goal_observation(r.state);
  return r;
}

EnvState transition(const EnvState& state, Action action, float* reward, EndReason* end) {
  if (state.terminated) throw UsageError("step() called on a terminated episode");
  EnvState next = state;
  float r = 0.0f;
  EndReason why = EndReason::kNone;
  switch (action) {
    case Action::kTurnLeft: next.pose.dir = turn_left(state.pose.dir); break;
    case Action::kTurnRight: next.pose.dir = turn_right(state.pose.dir); break;
    case Action::kForward: {
      const Pos target = state.pose.pos() + dir_vec(state.pose.dir);
      switch (state.grid->at(target)) {
        case Tile::kWall: break;
        case Tile::kGoal: why = EndReason::kGoal; r = goal_reward(state.steps); [[fallthrough]];
        case Tile::kLava:
          if (why == EndReason::kNone) why = EndReason::kLava;
          [[fallthrough]];
        case Tile::kEmpty: next.pose.x = target.x; next.pose.y = target.y; break;
      }
      break;
    }
    default: throw UsageError("invalid action " + std::to_string(static_cast<int>(action)));
  }
  next.steps = state.steps + 1;
  if (why == EndReason::kNone && next.steps >= kMaxSteps) why = EndReason::kTimeout;
  next.terminated = why != EndReason::kNone;
  if (reward) *reward = r;
  if (end) *end = why;
  return next;
}

StepOutcome step(EnvState& state, Action action) {
  StepOutcome out;
  EndReason end = EndReason::kNone;
  EnvState next = transition(state, action, &out.reward, &end);
  out.done = next.terminated;
  out.truth.agent = next.pose.pos();
  out.truth.goal = next.goal;
  out.truth.steps = next.steps;
  out.truth.end = end;
  state = std::move(next);
  out.obs = render_observation(state);
  return out;
}

std::vector<Pose> enumerate_poses(const Grid& grid) {
  std::vector<Pose> out;
  for (Pos p : grid.cells_of(Tile::kEmpty))
    for (int d = 0; d < 4; ++d) out.push_back({p.x, p.y, static_cast<Dir>(d)});
  return out;
}

Env::Env(EnvSpec spec, std::uint64_t seed) : spec_(spec), rng_(seed) {}

const Observation& Env::reset() {
  state_ = initial_state(spec_, rng_);
  obs_ = render_observation(state_);
  goal_obs_ = goal_observation(state_);
  ++episodes_;
  return obs_;
}

StepOutcome Env::step(Action action) {
  if (episodes_ == 0) throw UsageError("Env::step() before reset()");
  StepOutcome out = gw::step(state_, action);
  obs_ = out.obs;
  return out;
}

}  // namespace rprl::gw
