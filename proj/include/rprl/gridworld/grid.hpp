#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rprl::gw {

enum class Tile : std::uint8_t { kEmpty, kWall, kLava, kGoal };

enum class Dir : std::uint8_t { kNorth, kEast, kSouth, kWest };

struct Pos {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Pos&, const Pos&) = default;
};

struct Pose {
  int x = 0;
  int y = 0;
  Dir dir = Dir::kNorth;
  Pos pos() const { return {x, y}; }
  friend bool operator==(const Pose&, const Pose&) = default;
};

// Unit step for a heading; y grows downwards.
Pos dir_vec(Dir d);
Dir turn_left(Dir d);
Dir turn_right(Dir d);
Pos operator+(Pos a, Pos b);
int manhattan(Pos a, Pos b);

class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, Tile fill = Tile::kEmpty);

  int width() const { return width_; }
  int height() const { return height_; }
  bool in_bounds(Pos p) const { return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_; }
  // Cells outside the grid read as Wall.
  Tile at(Pos p) const;
  void set(Pos p, Tile t);
  std::vector<Pos> cells_of(Tile t) const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Tile> tiles_;
};

// A parsed ASCII map. 'G' cells are goal candidates and are stored as Empty
// in `grid`; the environment places exactly one Goal per episode.
struct Layout {
  Grid grid;
  std::vector<Pos> goal_candidates;
  std::optional<Pos> start;
};

// '#' Wall, '.' Empty, 'L' Lava, 'G' goal candidate, 'S' start. Throws
// FormatError on ragged rows, unknown characters or an open boundary.
Layout parse_map(std::string_view text);
Layout load_map_file(const std::string& path);

// Map text compiled in from data/maps.
std::string_view builtin_map_text(std::string_view name);

}  // namespace rprl::gw
