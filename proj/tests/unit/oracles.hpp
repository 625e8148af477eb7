#pragma once

// Independent reference computations shared by the unit tests.

#include <map>
#include <optional>
#include <queue>
#include <tuple>
#include <vector>

#include "rprl/gridworld/env.hpp"

namespace oracle {

using rprl::gw::Action;
using rprl::gw::Dir;
using rprl::gw::Grid;
using rprl::gw::Pos;
using rprl::gw::Pose;
using rprl::gw::Tile;

inline Pos ahead(const Pose& p) {
  static const int dx[4] = {0, 1, 0, -1};
  static const int dy[4] = {-1, 0, 1, 0};
  const int d = static_cast<int>(p.dir);
  return {p.x + dx[d], p.y + dy[d]};
}

inline Pose apply(const Pose& p, Action a) {
  Pose q = p;
  if (a == Action::kTurnLeft) q.dir = static_cast<Dir>((static_cast<int>(p.dir) + 3) % 4);
  if (a == Action::kTurnRight) q.dir = static_cast<Dir>((static_cast<int>(p.dir) + 1) % 4);
  return q;
}

struct Plan {
  std::vector<Action> actions;
  std::vector<Pos> tiles;  // tile sequence including the start tile and the goal
};

// Breadth-first search over poses; a Forward onto the goal ends the search.
// Lava and walls are never entered.
inline std::optional<Plan> shortest_plan(const Grid& g, Pose start, Pos goal) {
  auto key = [](const Pose& p) { return std::make_tuple(p.x, p.y, static_cast<int>(p.dir)); };
  std::map<std::tuple<int, int, int>, std::pair<Pose, Action>> parent;
  std::queue<Pose> q;
  q.push(start);
  parent[key(start)] = {start, Action::kForward};
  auto unwind = [&](Pose end) {
    Plan plan;
    std::vector<Action> rev;
    Pose cur = end;
    while (!(cur == start)) {
      auto [prev, act] = parent.at(key(cur));
      rev.push_back(act);
      cur = prev;
    }
    plan.actions.assign(rev.rbegin(), rev.rend());
    Pose p = start;
    plan.tiles.push_back(p.pos());
    for (Action a : plan.actions) {
      if (a == Action::kForward) {
        p.x = ahead(p).x;
        p.y = ahead(p).y;
        plan.tiles.push_back(p.pos());
      } else {
        p = apply(p, a);
      }
    }
    return plan;
  };
  while (!q.empty()) {
    Pose p = q.front();
    q.pop();
    for (Action a : {Action::kTurnLeft, Action::kTurnRight, Action::kForward}) {
      Pose n = apply(p, a);
      if (a == Action::kForward) {
        const Pos t = ahead(p);
        if (t == goal) {
          Plan plan = unwind(p);
          plan.actions.push_back(Action::kForward);
          plan.tiles.push_back(goal);
          return plan;
        }
        if (g.at(t) != Tile::kEmpty) continue;
        n.x = t.x;
        n.y = t.y;
      }
      if (parent.count(key(n))) continue;
      parent[key(n)] = {p, a};
      q.push(n);
    }
  }
  return std::nullopt;
}

}  // namespace oracle
