#include "rprl/dataset/buffer.hpp"

#include <map>
#include <tuple>

#include "rprl/errors.hpp"
#include "rprl/gridworld/render.hpp"
#include "rprl/nncore/network.hpp"

namespace rprl::data {
namespace {

class ObsCache {
 public:
  ObsPtr get(const gw::EnvState& s) { return get(s.grid, s.pose); }

  ObsPtr get(const std::shared_ptr<const gw::Grid>& grid, const gw::Pose& pose) {
    const Key k{grid.get(), pose.x, pose.y, static_cast<int>(pose.dir)};
    auto it = cache_.find(k);
    if (it != cache_.end()) return it->second;
    auto obs = std::make_shared<const gw::Observation>(gw::render_observation(*grid, pose));
    cache_.emplace(k, obs);
    grids_.push_back(grid);
    return obs;
  }

 private:
  using Key = std::tuple<const gw::Grid*, int, int, int>;
  std::map<Key, ObsPtr> cache_;
  // keeps grid addresses unique while cached
  std::vector<std::shared_ptr<const gw::Grid>> grids_;
};

}  // namespace

Buffer collect_random(const gw::EnvSpec& spec, std::size_t n_transitions, std::uint64_t seed) {
  if (n_transitions == 0) throw ConfigError("collect_random needs n_transitions > 0");
  std::mt19937_64 env_rng(seed);
  std::mt19937_64 act_rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_int_distribution<int> pick(0, gw::kNumActions - 1);
  ObsCache cache;

  Buffer out;
  out.reserve(n_transitions);
  std::uint32_t episode = 0;
  while (out.size() < n_transitions) {
    gw::EnvState s = gw::initial_state(spec, env_rng);
    const ObsPtr goal = cache.get(s.grid, gw::goal_pose(*s.grid, s.goal));
    ObsPtr obs = cache.get(s);
    for (std::uint16_t t = 0; !s.terminated && out.size() < n_transitions; ++t) {
      Transition tr;
      tr.obs = obs;
      tr.goal_obs = goal;
      tr.action = static_cast<gw::Action>(pick(act_rng));
      s = gw::transition(s, tr.action, &tr.reward, nullptr);
      tr.next_obs = obs = cache.get(s);
      tr.done = s.terminated;
      tr.episode = episode;
      tr.t = t;
      out.push_back(std::move(tr));
    }
    ++episode;
  }
  return out;
}

void append_buffer(Buffer& dst, const Buffer& src) {
  const std::uint32_t offset = dst.empty() ? 0 : dst.back().episode + 1;
  for (Transition tr : src) {
    tr.episode += offset;
    dst.push_back(std::move(tr));
  }
}

bool same_contents(const Buffer& a, const Buffer& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Transition& x = a[i];
    const Transition& y = b[i];
    if (x.action != y.action || x.reward != y.reward || x.done != y.done || x.episode != y.episode ||
        x.t != y.t)
      return false;
    if (*x.obs != *y.obs || *x.goal_obs != *y.goal_obs || *x.next_obs != *y.next_obs) return false;
  }
  return true;
}

nn::Tensor stack_observations(std::span<const ObsPtr> obs) {
  if (obs.empty()) throw ShapeError("cannot stack an empty observation list");
  const std::size_t per = obs[0]->size();
  nn::Tensor out(nn::batched(static_cast<int>(obs.size()), obs[0]->shape()));
  float* dst = out.raw();
  for (const auto& o : obs) {
    if (o->shape() != obs[0]->shape()) throw ShapeError("observations of different shapes");
    std::copy(o->data().begin(), o->data().end(), dst);
    dst += per;
  }
  return out;
}

}  // namespace rprl::data
