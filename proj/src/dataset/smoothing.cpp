#include "rprl/dataset/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "rprl/errors.hpp"

namespace rprl::data {

std::size_t SmoothedDataset::positives() const {
  return static_cast<std::size_t>(std::count_if(r_star.begin(), r_star.end(), [](float r) { return r > 0.0f; }));
}

SmoothedDataset smooth_rewards(const Buffer& buffer, double gamma, int horizon) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("smoothing gamma must be in [0, 1]");
  if (horizon < 1) throw ConfigError("smoothing horizon M must be >= 1");
  SmoothedDataset out;
  out.gamma = gamma;
  out.horizon = horizon;
  std::size_t begin = 0;
  while (begin < buffer.size()) {
    std::size_t end = begin;
    while (end < buffer.size() && buffer[end].episode == buffer[begin].episode) ++end;
    const Transition& last = buffer[end - 1];
    if (last.done) {
      const float r_T = last.reward;
      const int T = last.t;
      for (std::size_t i = begin; i < end; ++i) {
        const int m = T - buffer[i].t;
        float r = 0.0f;
        if (horizon == 1) {
          r = buffer[i].reward;
        } else if (r_T > 0.0f && m >= 0 && m < horizon) {
          r = static_cast<float>(std::pow(gamma, m) * r_T);
        }
        out.transitions.push_back(buffer[i]);
        out.r_star.push_back(r);
      }
    }
    begin = end;
  }
  return out;
}

SmoothedDataset oversample_positives(const SmoothedDataset& data, int factor, std::uint64_t seed) {
  if (factor < 1) throw ConfigError("oversampling factor must be >= 1");
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int copies = data.r_star[i] > 0.0f ? factor : 1;
    for (int c = 0; c < copies; ++c) order.push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  SmoothedDataset out;
  out.gamma = data.gamma;
  out.horizon = data.horizon;
  out.transitions.reserve(order.size());
  out.r_star.reserve(order.size());
  for (std::size_t i : order) {
    out.transitions.push_back(data.transitions[i]);
    out.r_star.push_back(data.r_star[i]);
  }
  return out;
}

Split split_by_episode(const SmoothedDataset& data, double validation_fraction, std::uint64_t seed) {
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
    throw ConfigError("validation fraction must be in [0, 1)");
  std::vector<std::uint32_t> episodes;
  for (const auto& tr : data.transitions)
    if (episodes.empty() || episodes.back() != tr.episode) episodes.push_back(tr.episode);
  std::sort(episodes.begin(), episodes.end());
  episodes.erase(std::unique(episodes.begin(), episodes.end()), episodes.end());
  std::mt19937_64 rng(seed);
  std::shuffle(episodes.begin(), episodes.end(), rng);
  const auto n_val = static_cast<std::size_t>(std::llround(validation_fraction * episodes.size()));
  std::map<std::uint32_t, bool> held_out;
  for (std::size_t i = 0; i < episodes.size(); ++i) held_out[episodes[i]] = i < n_val;

  Split s;
  for (SmoothedDataset* d : {&s.train, &s.validation}) {
    d->gamma = data.gamma;
    d->horizon = data.horizon;
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    SmoothedDataset& d = held_out[data.transitions[i].episode] ? s.validation : s.train;
    d.transitions.push_back(data.transitions[i]);
    d.r_star.push_back(data.r_star[i]);
  }
  return s;
}

}  // namespace rprl::data
