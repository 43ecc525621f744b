#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pixie/error.hpp"
#include "pixie/grid.hpp"
#include "pixie/mapper.hpp"
#include "pixie/opcode.hpp"

namespace pixie {

// File layout, little-endian:
//   0  char[4]  magic "PIXV"
//   4  u16      format version
//   6  u16      reserved (0)
//   8  u64      grid digest
//  16  payload
inline constexpr std::array<char, 4> kBitstreamMagic{'P', 'I', 'X', 'V'};
inline constexpr std::uint16_t kBitstreamVersion = 1;
inline constexpr std::size_t kBitstreamHeaderSize = 16;

struct BitstreamHeader {
  std::uint16_t format_version = kBitstreamVersion;
  std::uint64_t grid_digest = 0;

  friend bool operator==(const BitstreamHeader&, const BitstreamHeader&) = default;
};

struct VirtualBitstream {
  BitstreamHeader header;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const VirtualBitstream&, const VirtualBitstream&) = default;
};

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t grid_digest(const GridSpec& spec) { return fnv1a64(canonical_grid_json(spec)); }

namespace detail {

/// Appends fields LSB-first into a byte vector.
class BitWriter {
 public:
  void put(std::uint64_t value, unsigned width) {
    for (unsigned b = 0; b < width; ++b, ++pos_) {
      if (pos_ % 8 == 0) bytes_.push_back(0);
      if ((value >> b) & 1U) bytes_.back() |= static_cast<std::uint8_t>(1U << (pos_ % 8));
    }
  }
  std::uint64_t bit_count() const { return pos_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t pos_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::uint64_t get(unsigned width) {
    std::uint64_t v = 0;
    for (unsigned b = 0; b < width; ++b, ++pos_) {
      if ((bytes_[pos_ / 8] >> (pos_ % 8)) & 1U) v |= std::uint64_t{1} << b;
    }
    return v;
  }
  std::uint64_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::uint64_t pos_ = 0;
};

/// Visits every configuration field in bitstream order: memory-interface
/// selects, then per level the PE opcodes followed by the selects of the
/// channel below that level.
template <typename OnOpcode, typename OnSelect>
void walk_layout(const GridSpec& spec, const std::vector<ChannelSpec>& channels, OnOpcode on_opcode,
                 OnSelect on_select) {
  auto channel_fields = [&](const ChannelSpec& ch) {
    for (std::size_t o = 0; o < ch.output_count; ++o) on_select(ch, o);
  };
  channel_fields(channels.front());
  for (std::size_t l = 0; l < spec.levels.size(); ++l) {
    for (std::size_t s = 0; s < spec.levels[l].pe_count; ++s) on_opcode(l, s);
    channel_fields(channels[l + 1]);
  }
}

}  // namespace detail

inline VirtualBitstream encode(const GridConfig& cfg, const GridSpec& spec) {
  check_config(cfg, spec);
  const auto channels = derive_channels(spec);
  detail::BitWriter w;
  detail::walk_layout(
      spec, channels, [&](std::size_t l, std::size_t s) { w.put(static_cast<unsigned>(cfg.pe_configs[l][s]), kOpcodeBits); },
      [&](const ChannelSpec& ch, std::size_t o) { w.put(cfg.channel(ch.position).selects[o], ch.select_width); });
  VirtualBitstream bits;
  bits.header.grid_digest = grid_digest(spec);
  bits.payload = w.take();
  return bits;
}

inline GridConfig decode(const VirtualBitstream& bits, const GridSpec& spec) {
  require_valid(spec);
  if (bits.header.format_version != kBitstreamVersion)
    throw FramingError("unsupported bitstream version " + std::to_string(bits.header.format_version));
  if (bits.header.grid_digest != grid_digest(spec))
    throw WrongGridError("bitstream was built for a different grid (digest mismatch)");
  const auto total = grid_stats(spec).total_config_bits;
  const auto expected_bytes = (total + 7) / 8;
  if (bits.payload.size() != expected_bytes)
    throw FramingError("payload is " + std::to_string(bits.payload.size()) + " bytes, grid needs " +
                       std::to_string(expected_bytes));

  const auto channels = derive_channels(spec);
  GridConfig cfg = empty_config(spec);
  detail::BitReader r(bits.payload);
  detail::walk_layout(
      spec, channels,
      [&](std::size_t l, std::size_t s) {
        const auto raw = r.get(kOpcodeBits);
        auto op = opcode_from_value(raw);
        if (!op)
          throw InvalidOpcodeError("level " + std::to_string(l + 1) + " slot " + std::to_string(s) +
                                   ": invalid opcode " + std::to_string(raw));
        cfg.pe_configs[l][s] = *op;
      },
      [&](const ChannelSpec& ch, std::size_t o) {
        const auto sel = r.get(ch.select_width);
        if (sel >= ch.predecessor_count)
          throw CodecError("channel " + channel_instance_name(ch) + " output " + std::to_string(o) + " selects " +
                           std::to_string(sel) + ", only " + std::to_string(ch.predecessor_count) +
                           " predecessors");
        cfg.channel(ch.position).selects[o] = static_cast<std::uint32_t>(sel);
      });
  if (total % 8 != 0 && (bits.payload.back() >> (total % 8)) != 0)
    throw FramingError("non-zero padding bits after the payload");
  return cfg;
}

namespace detail {
template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}
template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t offset) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(in[offset + i]) << (8 * i));
  return v;
}
}  // namespace detail

/// Header followed by payload bytes.
inline std::vector<std::uint8_t> serialize(const VirtualBitstream& bits) {
  std::vector<std::uint8_t> out;
  out.reserve(kBitstreamHeaderSize + bits.payload.size());
  for (char c : kBitstreamMagic) out.push_back(static_cast<std::uint8_t>(c));
  detail::put_le<std::uint16_t>(out, bits.header.format_version);
  detail::put_le<std::uint16_t>(out, 0);
  detail::put_le<std::uint64_t>(out, bits.header.grid_digest);
  out.insert(out.end(), bits.payload.begin(), bits.payload.end());
  return out;
}

inline VirtualBitstream deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kBitstreamHeaderSize)
    throw FramingError("bitstream shorter than its " + std::to_string(kBitstreamHeaderSize) + "-byte header");
  if (std::memcmp(bytes.data(), kBitstreamMagic.data(), kBitstreamMagic.size()) != 0)
    throw FramingError("bad bitstream magic");
  VirtualBitstream bits;
  bits.header.format_version = detail::get_le<std::uint16_t>(bytes, 4);
  if (detail::get_le<std::uint16_t>(bytes, 6) != 0) throw FramingError("reserved header field is not zero");
  bits.header.grid_digest = detail::get_le<std::uint64_t>(bytes, 8);
  bits.payload.assign(bytes.begin() + kBitstreamHeaderSize, bytes.end());
  return bits;
}

}  // namespace pixie
