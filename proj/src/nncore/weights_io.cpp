#include "rprl/nncore/weights_io.hpp"

#include <cstring>
#include <fstream>

#include "rprl/binary_io.hpp"

namespace rprl::nn {

namespace {

constexpr std::size_t kMagicLen = sizeof(kWeightMagic) - 1;

void write_record(std::ostream& os, std::uint32_t layer, LayerKind kind, const Tensor& t) {
  bin::put_u32(os, layer);
  bin::put_u8(os, static_cast<std::uint8_t>(kind));
  bin::put_u32(os, static_cast<std::uint32_t>(t.rank()));
  for (int d : t.shape()) bin::put_u32(os, static_cast<std::uint32_t>(d));
  for (float v : t.data()) bin::put_f32(os, v);
}

void read_record(std::istream& is, std::uint32_t layer, LayerKind kind, Tensor& t) {
  const std::string where = "layer " + std::to_string(layer);
  if (is.peek() == std::char_traits<char>::eof()) {
    throw FormatError("weight file ends before record for " + where);
  }
  const std::uint32_t got_layer = bin::get_u32(is, "layer index");
  const auto got_kind = static_cast<LayerKind>(bin::get_u8(is, "kind tag"));
  if (got_layer != layer || got_kind != kind) {
    throw FormatError("weight record mismatch: expected " + where + " " + to_string(kind) +
                      ", found layer " + std::to_string(got_layer) + " " + to_string(got_kind));
  }
  const std::uint32_t rank = bin::get_u32(is, "rank");
  if (rank != t.rank()) throw FormatError("rank mismatch for " + where);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::uint32_t d = bin::get_u32(is, "dims");
    if (static_cast<int>(d) != t.dim(i)) {
      throw FormatError("shape mismatch for " + where + ": file dim " + std::to_string(d) +
                        " vs network " + shape_to_string(t.shape()));
    }
  }
  for (auto& v : t.data()) v = bin::get_f32(is, "payload");
}

}  // namespace

void write_weights(std::ostream& os, std::span<const Network<float>* const> nets) {
  os.write(kWeightMagic, kMagicLen);
  std::uint32_t base = 0;
  for (const auto* net : nets) {
    for (const auto& [i, p] : net->params().layers()) {
      const LayerKind kind = net->layers()[i].kind;
      write_record(os, base + static_cast<std::uint32_t>(i), kind, p.weight);
      write_record(os, base + static_cast<std::uint32_t>(i), kind, p.bias);
    }
    base += static_cast<std::uint32_t>(net->layers().size());
  }
  if (!os) throw FormatError("failed writing weights");
}

void read_weights(std::istream& is, std::span<Network<float>* const> nets) {
  char magic[kMagicLen];
  bin::read_exact(is, magic, kMagicLen, "magic");
  if (std::memcmp(magic, kWeightMagic, kMagicLen) != 0) {
    throw FormatError("not an RSNN1 weight file (bad magic)");
  }
  // Decode into copies so a failure leaves the networks untouched.
  std::vector<ParamSet<float>> staged;
  std::uint32_t base = 0;
  for (auto* net : nets) {
    ParamSet<float> p = net->params();
    for (auto& [i, lp] : p.layers()) {
      const LayerKind kind = net->layers()[i].kind;
      read_record(is, base + static_cast<std::uint32_t>(i), kind, lp.weight);
      read_record(is, base + static_cast<std::uint32_t>(i), kind, lp.bias);
    }
    base += static_cast<std::uint32_t>(net->layers().size());
    staged.push_back(std::move(p));
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing data after last weight record");
  }
  for (std::size_t i = 0; i < nets.size(); ++i) nets[i]->params() = std::move(staged[i]);
}

void save_weights(const std::filesystem::path& path, std::span<const Network<float>* const> nets) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  write_weights(os, nets);
}

void load_weights(const std::filesystem::path& path, std::span<Network<float>* const> nets) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open weight file " + path.string());
  read_weights(is, nets);
}

}  // namespace rprl::nn
