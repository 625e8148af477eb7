#pragma once

#include <cstdint>
#include <vector>

#include "rprl/dataset/buffer.hpp"

namespace rprl::data {

struct SmoothedDataset {
  std::vector<Transition> transitions;
  std::vector<float> r_star;
  double gamma = 0.99;
  int horizon = 1;

  std::size_t size() const { return transitions.size(); }
  std::size_t positives() const;
};

// r* = gamma^(T - t) * r_T for the final reward r_T of a goal-reaching
// episode when T - t < horizon, otherwise 0. horizon = 1 keeps the raw
// rewards. The unterminated tail episode is dropped.
SmoothedDataset smooth_rewards(const Buffer& buffer, double gamma, int horizon);

// Every transition with r* > 0 appears `factor` times, then the order is
// shuffled with `seed`.
SmoothedDataset oversample_positives(const SmoothedDataset& data, int factor, std::uint64_t seed);

struct Split {
  SmoothedDataset train;
  SmoothedDataset validation;
};

// Whole episodes go to one side; roughly `validation_fraction` of them are
// held out.
Split split_by_episode(const SmoothedDataset& data, double validation_fraction, std::uint64_t seed);

}  // namespace rprl::data
