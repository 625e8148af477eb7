#pragma once

#include <array>
#include <string>

#include "rprl/gridworld/env.hpp"

namespace rprl::gw {

inline constexpr int kView = 7;
inline constexpr int kTilePixels = 4;
inline constexpr int kObsSide = kView * kTilePixels;

using Rgb = std::array<float, 3>;

namespace colors {
inline constexpr Rgb kEmpty = {0.6f, 0.6f, 0.6f};
inline constexpr Rgb kWall = {0.3f, 0.3f, 0.3f};
inline constexpr Rgb kLava = {1.0f, 0.5f, 0.0f};
inline constexpr Rgb kGoal = {0.0f, 1.0f, 0.0f};
inline constexpr Rgb kUnseen = {0.0f, 0.0f, 0.0f};
inline constexpr Rgb kAgent = {1.0f, 0.0f, 0.0f};
}  // namespace colors

Rgb tile_color(Tile t);

// World cell shown at window row i, column j. The agent sits at (6, 3)
// looking towards row 0.
Pos window_cell(const Pose& pose, int i, int j);

struct View {
  std::array<std::array<Tile, kView>, kView> tiles{};
  std::array<std::array<bool, kView>, kView> visible{};
};

// Window contents with occlusion: visibility spreads outward from the
// agent's cell and only Wall stops it.
View compute_view(const Grid& grid, const Pose& pose);

Observation render_view(const View& view);
Observation render_observation(const Grid& grid, const Pose& pose);
Observation render_observation(const EnvState& state);

// Pose one Forward step before the goal: the first Empty neighbour in
// N, E, S, W order, facing the goal.
Pose goal_pose(const Grid& grid, Pos goal);
Observation goal_observation(const EnvState& state);

// Binary PPM (P6) dump of an HxWx3 image in [0, 1].
void write_ppm(const std::string& path, const nn::Tensor& image);

}  // namespace rprl::gw
