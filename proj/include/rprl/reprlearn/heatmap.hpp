#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "rprl/gridworld/grid.hpp"
#include "rprl/reprlearn/model.hpp"

namespace rprl::repr {

struct Heatmap {
  int width = 0;
  int height = 0;
  std::vector<std::optional<double>> values;  // row-major; empty on Wall and Lava

  const std::optional<double>& at(gw::Pos p) const { return values[static_cast<std::size_t>(p.y) * width + p.x]; }
  gw::Pos argmax() const;
  double max() const;
  double min() const;
};

// Mean predicted reward over the four headings on every Empty tile and on the
// goal tile (where a goal-reaching step leaves the agent), with the goal view
// of `goal` as the second input. `grid` must contain the goal.
Heatmap heatmap(const ReprModel& model, const gw::Grid& grid, gw::Pos goal);

// Header "y,0,1,...", then one row per y; blank cells on Wall and Lava.
void write_heatmap_csv(std::ostream& os, const Heatmap& map);

}  // namespace rprl::repr
