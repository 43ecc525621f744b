#include <random>

#include <gtest/gtest.h>

#include "pixie/codec.hpp"
#include "pixie/sobel.hpp"
#include "support/oracles.hpp"

namespace pixie {
namespace {

GridConfig single_add_config() {
  auto cfg = empty_config(generate_rectangular(1, 1, 8));
  cfg.pe_configs[0][0] = Opcode::Add;
  cfg.input_distribution.selects = {0, 1};
  return cfg;
}

TEST(Encode, MinimalGridBitLayout) {
  const auto spec = generate_rectangular(1, 1, 8);
  const auto bits = encode(single_add_config(), spec);
  // mi selects 0, 1 at bits 0-1, opcode 1 at bits 2-5, output select 0 at bit 6
  ASSERT_EQ(bits.payload.size(), 1U);
  EXPECT_EQ(bits.payload[0], 0x06);
  EXPECT_EQ(bits.header.grid_digest, grid_digest(spec));
  EXPECT_EQ(decode(bits, spec), single_add_config());
}

TEST(Encode, PayloadLengthMatchesStats) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    const auto spec = testing::random_grid(rng, 6, 12);
    const auto bits = encode(empty_config(spec), spec);
    EXPECT_EQ(bits.payload.size(), (grid_stats(spec).total_config_bits + 7) / 8);
  }
  EXPECT_EQ(encode(empty_config(generate_rectangular(9, 5, 8)), generate_rectangular(9, 5, 8)).payload.size(), 75U);
}

TEST(Encode, RejectsMalformedConfig) {
  const auto spec = generate_rectangular(1, 1, 8);
  auto cfg = single_add_config();
  cfg.input_distribution.selects = {0, 2};
  EXPECT_THROW(encode(cfg, spec), ValidationError);
  cfg = single_add_config();
  cfg.pe_configs[0].push_back(Opcode::Add);
  EXPECT_THROW(encode(cfg, spec), ValidationError);
}

TEST(Decode, RandomRoundTrips) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 1000; ++i) {
    const auto spec = testing::random_grid(rng, 6, 12);
    const auto cfg = testing::random_config(rng, spec);
    const auto bytes = serialize(encode(cfg, spec));
    ASSERT_EQ(decode(deserialize(bytes), spec), cfg);
  }
}

TEST(Decode, SobelRoundTrip) {
  const auto spec = generate_rectangular(9, 5, 8);
  const auto cfg = map_to_grid(build_sobel_graph(), spec);
  EXPECT_EQ(decode(encode(cfg, spec), spec), cfg);
}

TEST(Decode, AllZeroPayloadIsIdle) {
  const auto spec = generate_rectangular(4, 3, 8);
  VirtualBitstream bits;
  bits.header.grid_digest = grid_digest(spec);
  bits.payload.assign((grid_stats(spec).total_config_bits + 7) / 8, 0);
  EXPECT_EQ(decode(bits, spec), empty_config(spec));
}

TEST(Decode, TruncatedPayload) {
  const auto spec = generate_rectangular(9, 5, 8);
  auto bits = encode(map_to_grid(build_sobel_graph(), spec), spec);
  bits.payload.pop_back();
  EXPECT_THROW(decode(bits, spec), FramingError);
  bits.payload.push_back(0);
  bits.payload.push_back(0);
  EXPECT_THROW(decode(bits, spec), FramingError);
}

TEST(Decode, WrongGrid) {
  const auto bits = encode(single_add_config(), generate_rectangular(1, 1, 8));
  EXPECT_THROW(decode(bits, generate_rectangular(1, 1, 16)), WrongGridError);
  EXPECT_THROW(decode(bits, generate_rectangular(9, 5, 8)), WrongGridError);
}

TEST(Decode, InvalidOpcode) {
  const auto spec = generate_rectangular(1, 1, 8);
  auto bits = encode(single_add_config(), spec);
  bits.payload[0] = static_cast<std::uint8_t>((bits.payload[0] & ~0x3C) | (8 << 2));
  EXPECT_THROW(decode(bits, spec), InvalidOpcodeError);
  bits.payload[0] = static_cast<std::uint8_t>((bits.payload[0] & ~0x3C) | (15 << 2));
  EXPECT_THROW(decode(bits, spec), InvalidOpcodeError);
}

TEST(Decode, SelectOutOfRange) {
  // 18 memory inputs need 5 select bits; 31 names no predecessor.
  const auto spec = generate_rectangular(9, 5, 8);
  auto bits = encode(empty_config(spec), spec);
  bits.payload[0] = 0x1F;
  try {
    decode(bits, spec);
    FAIL();
  } catch (const CodecError& e) {
    EXPECT_NE(std::string(e.what()).find("mi output 0"), std::string::npos) << e.what();
  }
}

TEST(Decode, NonZeroPadding) {
  const auto spec = generate_rectangular(1, 1, 8);
  auto bits = encode(single_add_config(), spec);
  bits.payload[0] |= 0x80;
  EXPECT_THROW(decode(bits, spec), FramingError);
}

TEST(Decode, UnknownVersion) {
  const auto spec = generate_rectangular(1, 1, 8);
  auto bits = encode(single_add_config(), spec);
  bits.header.format_version = 2;
  EXPECT_THROW(decode(bits, spec), FramingError);
}

TEST(Serialize, HeaderLayout) {
  const auto spec = generate_rectangular(1, 1, 8);
  const auto bits = encode(single_add_config(), spec);
  const auto bytes = serialize(bits);
  ASSERT_EQ(bytes.size(), kBitstreamHeaderSize + 1);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "PIXV");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(bytes[6], 0);
  EXPECT_EQ(bytes[7], 0);
  std::uint64_t digest = 0;
  for (int i = 0; i < 8; ++i) digest |= std::uint64_t{bytes[8 + i]} << (8 * i);
  EXPECT_EQ(digest, grid_digest(spec));
  EXPECT_EQ(bytes.back(), 0x06);
  EXPECT_EQ(deserialize(bytes), bits);
}

TEST(Serialize, MalformedHeaders) {
  const auto bytes = serialize(encode(single_add_config(), generate_rectangular(1, 1, 8)));
  EXPECT_THROW(deserialize(std::span(bytes).first(10)), FramingError);
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(deserialize(bad), FramingError);
  bad = bytes;
  bad[6] = 1;
  EXPECT_THROW(deserialize(bad), FramingError);
}

TEST(GridDigest, Fnv1a) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_NE(grid_digest(generate_rectangular(9, 5, 8)), grid_digest(generate_rectangular(9, 5, 16)));
}

}  // namespace
}  // namespace pixie
