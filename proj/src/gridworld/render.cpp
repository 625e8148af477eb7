#include "rprl/gridworld/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "rprl/errors.hpp"

namespace rprl::gw {

Rgb tile_color(Tile t) {
  switch (t) {
    case Tile::kEmpty: return colors::kEmpty;
    case Tile::kWall: return colors::kWall;
    case Tile::kLava: return colors::kLava;
    case Tile::kGoal: return colors::kGoal;
  }
  return colors::kUnseen;
}

Pos window_cell(const Pose& pose, int i, int j) {
  const Pos f = dir_vec(pose.dir);
  const Pos r{-f.y, f.x};
  const int ahead = kView - 1 - i;
  const int side = j - kView / 2;
  return {pose.x + ahead * f.x + side * r.x, pose.y + ahead * f.y + side * r.y};
}

View compute_view(const Grid& grid, const Pose& pose) {
  View v;
  for (int i = 0; i < kView; ++i)
    for (int j = 0; j < kView; ++j) v.tiles[i][j] = grid.at(window_cell(pose, i, j));

  auto& vis = v.visible;
  auto opaque = [&](int i, int j) { return v.tiles[i][j] == Tile::kWall; };
  vis[kView - 1][kView / 2] = true;
  // Sweep rows from the agent outwards, right then left, spreading to the
  // side neighbour and to the row beyond (straight and diagonal).
  for (int i = kView - 1; i >= 0; --i) {
    for (int j = 0; j < kView - 1; ++j) {
      if (!vis[i][j] || opaque(i, j)) continue;
      vis[i][j + 1] = true;
      if (i > 0) {
        vis[i - 1][j + 1] = true;
        vis[i - 1][j] = true;
      }
    }
    for (int j = kView - 1; j > 0; --j) {
      if (!vis[i][j] || opaque(i, j)) continue;
      vis[i][j - 1] = true;
      if (i > 0) {
        vis[i - 1][j - 1] = true;
        vis[i - 1][j] = true;
      }
    }
  }
  return v;
}

Observation render_view(const View& view) {
  Observation obs({kObsSide, kObsSide, 3});
  float* px = obs.raw();
  for (int i = 0; i < kView; ++i) {
    for (int j = 0; j < kView; ++j) {
      Rgb c = view.visible[i][j] ? tile_color(view.tiles[i][j]) : colors::kUnseen;
      if (i == kView - 1 && j == kView / 2) c = colors::kAgent;
      for (int dy = 0; dy < kTilePixels; ++dy) {
        float* row = px + ((i * kTilePixels + dy) * kObsSide + j * kTilePixels) * 3;
        for (int dx = 0; dx < kTilePixels; ++dx)
          std::copy(c.begin(), c.end(), row + dx * 3);
      }
    }
  }
  return obs;
}

Observation render_observation(const Grid& grid, const Pose& pose) {
  return render_view(compute_view(grid, pose));
}

Observation render_observation(const EnvState& state) { return render_observation(*state.grid, state.pose); }

Pose goal_pose(const Grid& grid, Pos goal) {
  for (Dir d : {Dir::kNorth, Dir::kEast, Dir::kSouth, Dir::kWest}) {
    const Pos n = goal + dir_vec(d);
    if (grid.at(n) == Tile::kEmpty) {
      // face back towards the goal
      return {n.x, n.y, turn_right(turn_right(d))};
    }
  }
  throw UsageError("goal at (" + std::to_string(goal.x) + "," + std::to_string(goal.y) +
                   ") has no empty neighbour");
}

Observation goal_observation(const EnvState& state) {
  return render_observation(*state.grid, goal_pose(*state.grid, state.goal));
}

void write_ppm(const std::string& path, const nn::Tensor& image) {
  if (image.rank() != 3 || image.dim(2) != 3)
    throw ShapeError("write_ppm expects HxWx3, got " + nn::shape_to_string(image.shape()));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out << "P6\n" << image.dim(1) << " " << image.dim(0) << "\n255\n";
  for (float v : image.data()) {
    const float c = std::clamp(v, 0.0f, 1.0f);
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0f))));
  }
  if (!out) throw FormatError("failed writing " + path);
}

}  // namespace rprl::gw
