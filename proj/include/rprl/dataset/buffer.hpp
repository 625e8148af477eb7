#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rprl/gridworld/env.hpp"

namespace rprl::data {

// Observations repeat heavily (they are a function of grid and pose), so
// transitions share them.
using ObsPtr = std::shared_ptr<const gw::Observation>;

struct Transition {
  ObsPtr obs;
  ObsPtr goal_obs;
  ObsPtr next_obs;
  gw::Action action = gw::Action::kTurnLeft;
  float reward = 0.0f;
  bool done = false;
  std::uint32_t episode = 0;
  std::uint16_t t = 0;
};

using Buffer = std::vector<Transition>;

// Uniform random actions. Episodes are numbered from 0; the last one may be
// cut off before it terminates.
Buffer collect_random(const gw::EnvSpec& spec, std::size_t n_transitions, std::uint64_t seed);

// Appends `src`, renumbering its episodes after those already in `dst`.
void append_buffer(Buffer& dst, const Buffer& src);

// Element-wise equality, comparing observation contents.
bool same_contents(const Buffer& a, const Buffer& b);

// Stacks observations into an [N, 28, 28, 3] batch.
nn::Tensor stack_observations(std::span<const ObsPtr> obs);

inline constexpr char kBufferMagic[] = "RSBUF1";

// Returns the CRC32 written as the trailer.
std::uint32_t write_buffer(std::ostream& os, const Buffer& buffer);
// Verifies magic, length and CRC32 before returning anything.
Buffer read_buffer(std::istream& is, std::uint32_t* crc = nullptr);
std::uint32_t save_buffer(const std::string& path, const Buffer& buffer);
Buffer load_buffer(const std::string& path, std::uint32_t* crc = nullptr);

}  // namespace rprl::data
