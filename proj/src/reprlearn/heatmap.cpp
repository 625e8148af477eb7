#include "rprl/reprlearn/heatmap.hpp"

#include <limits>

#include "rprl/errors.hpp"
#include "rprl/format.hpp"
#include "rprl/gridworld/render.hpp"

namespace rprl::repr {

gw::Pos Heatmap::argmax() const {
  gw::Pos best{-1, -1};
  double v = -std::numeric_limits<double>::infinity();
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (at({x, y}) && *at({x, y}) > v) {
        v = *at({x, y});
        best = {x, y};
      }
  return best;
}

double Heatmap::max() const {
  const gw::Pos p = argmax();
  return p.x < 0 ? 0.0 : *at(p);
}

double Heatmap::min() const {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& c : values)
    if (c && *c < v) v = *c;
  return v;
}

Heatmap heatmap(const ReprModel& model, const gw::Grid& grid, gw::Pos goal) {
  if (grid.at(goal) != gw::Tile::kGoal) throw UsageError("heatmap grid has no goal at the given position");
  auto poses = gw::enumerate_poses(grid);
  for (int d = 0; d < 4; ++d) poses.push_back({goal.x, goal.y, static_cast<gw::Dir>(d)});
  Heatmap map;
  map.width = grid.width();
  map.height = grid.height();
  map.values.assign(static_cast<std::size_t>(map.width) * map.height, std::nullopt);

  const gw::Observation goal_obs = gw::render_observation(grid, gw::goal_pose(grid, goal));
  nn::Tensor obs(nn::batched(static_cast<int>(poses.size()), {28, 28, 3}));
  nn::Tensor goals(obs.shape());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const gw::Observation o = gw::render_observation(grid, poses[i]);
    std::copy(o.data().begin(), o.data().end(), obs.raw() + i * o.size());
    std::copy(goal_obs.data().begin(), goal_obs.data().end(), goals.raw() + i * o.size());
  }
  const nn::Tensor y = model.predict_batch(obs, goals);
  std::vector<double> sum(map.values.size(), 0.0);
  std::vector<int> count(map.values.size(), 0);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const std::size_t k = static_cast<std::size_t>(poses[i].y) * map.width + poses[i].x;
    sum[k] += y[i];
    ++count[k];
  }
  for (std::size_t k = 0; k < sum.size(); ++k)
    if (count[k]) map.values[k] = sum[k] / count[k];
  return map;
}

void write_heatmap_csv(std::ostream& os, const Heatmap& map) {
  os << "y";
  for (int x = 0; x < map.width; ++x) os << "," << x;
  os << "\n";
  for (int y = 0; y < map.height; ++y) {
    os << y;
    for (int x = 0; x < map.width; ++x) {
      os << ",";
      if (map.at({x, y})) os << fmt_num(*map.at({x, y}));
    }
    os << "\n";
  }
}

}  // namespace rprl::repr
