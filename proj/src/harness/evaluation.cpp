#include "rprl/harness/evaluation.hpp"

#include <algorithm>
#include <deque>

#include "rprl/errors.hpp"

namespace rprl::harness {

gw::Action RandomPolicy::act(const gw::EnvState&, const gw::Observation&, std::mt19937_64& rng) {
  return static_cast<gw::Action>(std::uniform_int_distribution<int>(0, gw::kNumActions - 1)(rng));
}

std::optional<std::vector<gw::Action>> shortest_plan(const gw::EnvState& state) {
  const gw::Grid& grid = *state.grid;
  const int w = grid.width();
  auto index = [w](const gw::Pose& p) { return (p.y * w + p.x) * 4 + static_cast<int>(p.dir); };
  std::vector<int> parent(static_cast<std::size_t>(w * grid.height() * 4), -2);
  std::vector<gw::Action> via(parent.size());
  std::deque<gw::Pose> queue{state.pose};
  parent[index(state.pose)] = -1;
  while (!queue.empty()) {
    const gw::Pose p = queue.front();
    queue.pop_front();
    for (int a = 0; a < gw::kNumActions; ++a) {
      gw::Pose q = p;
      if (a == 0) {
        q.dir = gw::turn_left(p.dir);
      } else if (a == 1) {
        q.dir = gw::turn_right(p.dir);
      } else {
        const gw::Pos f = p.pos() + gw::dir_vec(p.dir);
        const gw::Tile t = grid.at(f);
        if (t == gw::Tile::kWall || t == gw::Tile::kLava) continue;
        q.x = f.x;
        q.y = f.y;
        if (t == gw::Tile::kGoal) {
          std::vector<gw::Action> plan{gw::Action::kForward};
          for (int i = index(p); parent[i] != -1; i = parent[i]) plan.push_back(via[i]);
          std::reverse(plan.begin(), plan.end());
          return plan;
        }
      }
      const int j = index(q);
      if (parent[j] != -2) continue;
      parent[j] = index(p);
      via[j] = static_cast<gw::Action>(a);
      queue.push_back(q);
    }
  }
  return std::nullopt;
}

gw::Action PlannerPolicy::act(const gw::EnvState& state, const gw::Observation&, std::mt19937_64&) {
  const auto plan = shortest_plan(state);
  if (!plan) throw UsageError("planner: goal unreachable");
  return plan->front();
}

std::vector<float> AgentPolicy::encode(const gw::Observation& obs) const {
  nn::Tensor x = obs;
  x.reshape(nn::batched(1, obs.shape()));
  const nn::Tensor c = ac_->policy.encoder().forward(x);
  return {c.data().begin(), c.data().end()};
}

void AgentPolicy::begin_episode(const gw::EnvState&, const gw::Observation& goal_obs) { goal_code_ = encode(goal_obs); }

gw::Action AgentPolicy::act(const gw::EnvState&, const gw::Observation& obs, std::mt19937_64& rng) {
  std::vector<float> in = encode(obs);
  in.insert(in.end(), goal_code_.begin(), goal_code_.end());
  return agents::act(*ac_, in, in, rng, greedy_).action;
}

std::uint64_t eval_episode_seed(std::uint64_t base, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32), 0x65766c31u,
                    static_cast<std::uint32_t>(index)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Episode run_episode(Policy& policy, const gw::EnvSpec& env, std::uint64_t episode_seed, std::mt19937_64& rng) {
  gw::ResetResult r = gw::reset(env, episode_seed);
  policy.begin_episode(r.state, r.goal_obs);
  Episode e;
  e.tiles.push_back(r.state.pose.pos());
  gw::Observation obs = std::move(r.obs);
  while (true) {
    const gw::Action a = policy.act(r.state, obs, rng);
    gw::StepOutcome s = gw::step(r.state, a);
    ++e.length;
    e.reward += s.reward;
    if (r.state.pose.pos() != e.tiles.back()) e.tiles.push_back(r.state.pose.pos());
    if (s.done) {
      e.success = s.truth.end == gw::EndReason::kGoal;
      return e;
    }
    obs = std::move(s.obs);
  }
}

std::vector<Episode> rollouts(Policy& policy, const gw::EnvSpec& env, int n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("evaluation needs at least one rollout");
  std::mt19937_64 rng(eval_episode_seed(seed, -1));
  std::vector<Episode> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out.push_back(run_episode(policy, env, eval_episode_seed(seed, k), rng));
  return out;
}

EvalResult evaluate(Policy& policy, const gw::EnvSpec& env, int n, std::uint64_t seed) {
  const auto eps = rollouts(policy, env, n, seed);
  EvalResult r;
  r.episodes = n;
  r.min_length = gw::kMaxSteps;
  for (const auto& e : eps) {
    r.mean_reward += e.reward;
    r.mean_length += e.length;
    r.success_rate += e.success ? 1.0 : 0.0;
    r.min_length = std::min(r.min_length, e.length);
  }
  r.mean_reward /= n;
  r.mean_length /= n;
  r.success_rate /= n;
  return r;
}

void write_trajectories_csv(std::ostream& os, const std::vector<Episode>& episodes) {
  os << "episode,order,x,y,success\n";
  for (std::size_t e = 0; e < episodes.size(); ++e)
    for (std::size_t i = 0; i < episodes[e].tiles.size(); ++i)
      os << e << ',' << i << ',' << episodes[e].tiles[i].x << ',' << episodes[e].tiles[i].y << ','
         << (episodes[e].success ? 1 : 0) << '\n';
}

}  // namespace rprl::harness
