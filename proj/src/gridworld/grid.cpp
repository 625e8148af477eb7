#include "rprl/gridworld/grid.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rprl/errors.hpp"

namespace rprl::gw {

Pos dir_vec(Dir d) {
  switch (d) {
    case Dir::kNorth: return {0, -1};
    case Dir::kEast: return {1, 0};
    case Dir::kSouth: return {0, 1};
    case Dir::kWest: return {-1, 0};
  }
  return {0, 0};
}

Dir turn_left(Dir d) { return static_cast<Dir>((static_cast<int>(d) + 3) % 4); }
Dir turn_right(Dir d) { return static_cast<Dir>((static_cast<int>(d) + 1) % 4); }
Pos operator+(Pos a, Pos b) { return {a.x + b.x, a.y + b.y}; }
int manhattan(Pos a, Pos b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

Grid::Grid(int width, int height, Tile fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw FormatError("grid dimensions must be positive");
  tiles_.assign(static_cast<std::size_t>(width) * height, fill);
}

Tile Grid::at(Pos p) const {
  if (!in_bounds(p)) return Tile::kWall;
  return tiles_[static_cast<std::size_t>(p.y) * width_ + p.x];
}

void Grid::set(Pos p, Tile t) {
  if (!in_bounds(p)) throw UsageError("grid cell out of bounds");
  tiles_[static_cast<std::size_t>(p.y) * width_ + p.x] = t;
}

std::vector<Pos> Grid::cells_of(Tile t) const {
  std::vector<Pos> out;
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x)
      if (at({x, y}) == t) out.push_back({x, y});
  return out;
}

Layout parse_map(std::string_view text) {
  std::vector<std::string> rows;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) rows.push_back(line);
  }
  if (rows.empty()) throw FormatError("map is empty");
  const int w = static_cast<int>(rows[0].size());
  const int h = static_cast<int>(rows.size());
  Layout layout{Grid(w, h), {}, std::nullopt};
  for (int y = 0; y < h; ++y) {
    if (static_cast<int>(rows[y].size()) != w)
      throw FormatError("map row " + std::to_string(y) + " has length " +
                        std::to_string(rows[y].size()) + ", expected " + std::to_string(w));
    for (int x = 0; x < w; ++x) {
      Tile t = Tile::kEmpty;
      switch (rows[y][x]) {
        case '#': t = Tile::kWall; break;
        case '.': break;
        case 'L': t = Tile::kLava; break;
        case 'G': layout.goal_candidates.push_back({x, y}); break;
        case 'S':
          if (layout.start) throw FormatError("map has more than one start");
          layout.start = Pos{x, y};
          break;
        default:
          throw FormatError(std::string("unknown map character '") + rows[y][x] + "' at row " +
                            std::to_string(y));
      }
      const bool border = x == 0 || y == 0 || x == w - 1 || y == h - 1;
      if (border && t != Tile::kWall)
        throw FormatError("map boundary is open at (" + std::to_string(x) + "," +
                          std::to_string(y) + ")");
      layout.grid.set({x, y}, t);
    }
  }
  return layout;
}

Layout load_map_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open map file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_map(ss.str());
}

}  // namespace rprl::gw
