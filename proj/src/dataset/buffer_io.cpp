#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "rprl/binary_io.hpp"
#include "rprl/dataset/buffer.hpp"

namespace rprl::data {
namespace {

static_assert(std::endian::native == std::endian::little, "buffer I/O assumes a little-endian host");

constexpr std::size_t kMagicLen = sizeof(kBufferMagic) - 1;
constexpr std::size_t kObsFloats = 28 * 28 * 3;
constexpr std::size_t kObsBytes = kObsFloats * sizeof(float);
constexpr std::size_t kRecordBytes = 3 * kObsBytes + 1 + 4 + 1 + 4 + 2;

class Crc {
 public:
  void update(const void* p, std::size_t n) {
    crc_ = crc32(crc_, static_cast<const Bytef*>(p), static_cast<uInt>(n));
  }
  std::uint32_t value() const { return static_cast<std::uint32_t>(crc_); }

 private:
  uLong crc_ = crc32(0L, Z_NULL, 0);
};

void put_obs(unsigned char*& p, const gw::Observation& obs) {
  if (obs.size() != kObsFloats) throw ShapeError("buffer observations must be 28x28x3");
  std::memcpy(p, obs.raw(), kObsBytes);
  p += kObsBytes;
}

// Reuses identical observations already seen in this file.
class Interner {
 public:
  ObsPtr get(const unsigned char* p) {
    std::string key(reinterpret_cast<const char*>(p), kObsBytes);
    auto it = seen_.find(key);
    if (it != seen_.end()) return it->second;
    std::vector<float> v(kObsFloats);
    std::memcpy(v.data(), p, kObsBytes);
    auto obs = std::make_shared<const gw::Observation>(nn::Shape{28, 28, 3}, std::move(v));
    seen_.emplace(std::move(key), obs);
    return obs;
  }

 private:
  std::unordered_map<std::string, ObsPtr> seen_;
};

}  // namespace

std::uint32_t write_buffer(std::ostream& os, const Buffer& buffer) {
  Crc crc;
  auto emit = [&](const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    crc.update(p, n);
  };
  emit(kBufferMagic, kMagicLen);
  unsigned char count[4];
  bin::store_u32(count, static_cast<std::uint32_t>(buffer.size()));
  emit(count, 4);
  std::vector<unsigned char> rec(kRecordBytes);
  for (const Transition& tr : buffer) {
    unsigned char* p = rec.data();
    put_obs(p, *tr.obs);
    put_obs(p, *tr.goal_obs);
    put_obs(p, *tr.next_obs);
    *p++ = static_cast<unsigned char>(tr.action);
    bin::store_u32(p, std::bit_cast<std::uint32_t>(tr.reward));
    p += 4;
    *p++ = tr.done ? 1 : 0;
    bin::store_u32(p, tr.episode);
    p += 4;
    *p++ = tr.t & 0xff;
    *p++ = tr.t >> 8;
    emit(rec.data(), rec.size());
  }
  const std::uint32_t value = crc.value();
  bin::put_u32(os, value);
  if (!os) throw FormatError("failed writing buffer");
  return value;
}

Buffer read_buffer(std::istream& is, std::uint32_t* crc_out) {
  Crc crc;
  char magic[kMagicLen];
  bin::read_exact(is, magic, kMagicLen, "buffer magic");
  if (std::memcmp(magic, kBufferMagic, kMagicLen) != 0)
    throw FormatError("not a buffer file (bad magic or version)");
  crc.update(magic, kMagicLen);
  unsigned char count_bytes[4];
  bin::read_exact(is, reinterpret_cast<char*>(count_bytes), 4, "record count");
  crc.update(count_bytes, 4);
  const std::uint32_t count = bin::load_u32(count_bytes);

  Buffer out;
  out.reserve(count);
  Interner interner;
  std::vector<unsigned char> rec(kRecordBytes);
  for (std::uint32_t i = 0; i < count; ++i) {
    bin::read_exact(is, reinterpret_cast<char*>(rec.data()), kRecordBytes, "buffer record");
    crc.update(rec.data(), kRecordBytes);
    const unsigned char* p = rec.data();
    Transition tr;
    tr.obs = interner.get(p);
    tr.goal_obs = interner.get(p + kObsBytes);
    tr.next_obs = interner.get(p + 2 * kObsBytes);
    p += 3 * kObsBytes;
    if (*p >= gw::kNumActions) throw FormatError("record " + std::to_string(i) + " has an invalid action");
    tr.action = static_cast<gw::Action>(*p++);
    tr.reward = std::bit_cast<float>(bin::load_u32(p));
    p += 4;
    tr.done = *p++ != 0;
    tr.episode = bin::load_u32(p);
    p += 4;
    tr.t = static_cast<std::uint16_t>(p[0] | (p[1] << 8));
    out.push_back(std::move(tr));
  }
  const std::uint32_t stored = bin::get_u32(is, "checksum");
  if (stored != crc.value()) throw FormatError("buffer checksum mismatch");
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("trailing data after buffer checksum");
  if (crc_out) *crc_out = stored;
  return out;
}

std::uint32_t save_buffer(const std::string& path, const Buffer& buffer) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot write buffer file " + path);
  return write_buffer(os, buffer);
}

Buffer load_buffer(const std::string& path, std::uint32_t* crc) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open buffer file " + path);
  return read_buffer(is, crc);
}

}  // namespace rprl::data
