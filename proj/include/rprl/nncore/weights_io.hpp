#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>

#include "rprl/nncore/network.hpp"

namespace rprl::nn {

// Weight file: the magic "RSNN1" followed by one record per parameter
// tensor until end of file. A record is the layer index (u32), the layer
// kind tag (u8), the rank (u32), the dims (u32 each) and the raw f32
// payload, all little-endian. Each parameterised layer writes its weight
// record and then its bias record. When several networks are stored in one
// file their layers are numbered consecutively, as if stacked.
inline constexpr char kWeightMagic[] = "RSNN1";

void write_weights(std::ostream& os, std::span<const Network<float>* const> nets);
void read_weights(std::istream& is, std::span<Network<float>* const> nets);

void save_weights(const std::filesystem::path& path, std::span<const Network<float>* const> nets);
void load_weights(const std::filesystem::path& path, std::span<Network<float>* const> nets);

}  // namespace rprl::nn
