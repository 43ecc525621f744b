#include <map>
#include <random>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "pixie/grid.hpp"
#include "support/oracles.hpp"

namespace pixie {
namespace {

using testing::random_grid;

TEST(ValidateGrid, RectangularSobelShapeIsValid) {
  GridSpec spec;
  spec.memory_input_count = 18;
  spec.memory_input_bitwidth = 8;
  spec.levels.assign(5, LevelSpec{9, 8, 8});
  EXPECT_TRUE(validate_grid(spec).ok());
}

TEST(ValidateGrid, EmptyLevelIsReported) {
  auto spec = generate_rectangular(3, 3, 8);
  spec.levels[1].pe_count = 0;
  const auto report = validate_grid(spec);
  ASSERT_EQ(report.violations.size(), 1U);
  EXPECT_EQ(report.violations[0].location, "levels[1].pe_count");
  EXPECT_EQ(report.violations[0].message, "empty level");
}

TEST(ValidateGrid, ReportsEveryViolation) {
  GridSpec spec;
  EXPECT_FALSE(validate_grid(spec).ok());  // no levels, zero memory interface
  EXPECT_GE(validate_grid(spec).violations.size(), 3U);

  spec = generate_rectangular(2, 2, 8);
  spec.levels[0].pe_input_bitwidth = 0;
  spec.levels[1].pe_output_bitwidth = 65;
  const auto report = validate_grid(spec);
  ASSERT_EQ(report.violations.size(), 2U);
  EXPECT_EQ(report.violations[0].location, "levels[0].pe_input_bitwidth");
  EXPECT_EQ(report.violations[1].location, "levels[1].pe_output_bitwidth");
}

TEST(ValidateGrid, BitwidthBounds) {
  auto spec = generate_rectangular(1, 1, 64);
  EXPECT_TRUE(validate_grid(spec).ok());
  spec.memory_input_bitwidth = 65;
  EXPECT_FALSE(validate_grid(spec).ok());
  EXPECT_THROW(require_valid(spec), ValidationError);
}

TEST(DeriveChannels, SelectWidth) {
  EXPECT_EQ(select_width(9), 4U);
  EXPECT_EQ(select_width(1), 1U);  // floor for the degenerate mux
  EXPECT_EQ(select_width(2), 1U);
  EXPECT_EQ(select_width(8), 3U);
  EXPECT_EQ(select_width(18), 5U);
}

TEST(DeriveChannels, InternalWidthIsWidestInput) {
  const unsigned widths[] = {8, 16, 12};
  EXPECT_EQ(internal_bitwidth(widths), 16U);
}

TEST(DeriveChannels, SingleLevelSinglePe) {
  const auto ch = derive_channels(generate_rectangular(1, 1, 8));
  ASSERT_EQ(ch.size(), 2U);
  EXPECT_EQ(ch[0].kind, ChannelKind::MemoryInterface);
  EXPECT_EQ(ch[0].predecessor_count, 2U);
  EXPECT_EQ(ch[0].output_count, 2U);
  EXPECT_EQ(ch[1].kind, ChannelKind::OutputInterface);
  EXPECT_EQ(ch[1].predecessor_count, 1U);
  EXPECT_EQ(ch[1].valid_width, 1U);
  EXPECT_EQ(ch[1].select_width, 1U);
}

TEST(DeriveChannels, NineWideIntermediateChannels) {
  const auto ch = derive_channels(generate_rectangular(9, 5, 8));
  ASSERT_EQ(ch.size(), 6U);
  for (std::size_t k = 1; k <= 4; ++k) {
    EXPECT_EQ(ch[k].kind, ChannelKind::Intermediate);
    EXPECT_EQ(ch[k].position, k);
    EXPECT_EQ(ch[k].predecessor_count, 9U);
    EXPECT_EQ(ch[k].valid_width, 9U);
    EXPECT_EQ(ch[k].select_width, 4U);
    EXPECT_EQ(ch[k].output_count, 18U);
    EXPECT_EQ(ch[k].internal_bitwidth, 8U);
  }
}

TEST(DeriveChannels, RejectsInvalidSpec) {
  GridSpec spec;
  EXPECT_THROW(derive_channels(spec), ValidationError);
}

// Channel shape on randomized grids, checked against the level data directly.
TEST(DeriveChannels, FormulaPropertiesOnRandomShapes) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const auto spec = random_grid(rng);
    const auto ch = derive_channels(spec);
    ASSERT_EQ(ch.size(), spec.levels.size() + 1);
    for (std::size_t k = 0; k < ch.size(); ++k) {
      const std::size_t preds = k == 0 ? spec.memory_input_count : spec.levels[k - 1].pe_count;
      const unsigned width = k == 0 ? spec.memory_input_bitwidth : spec.levels[k - 1].pe_output_bitwidth;
      EXPECT_EQ(ch[k].predecessor_count, preds);
      EXPECT_EQ(ch[k].valid_width, preds);
      EXPECT_EQ(ch[k].internal_bitwidth, width);
      unsigned bw = 0;
      while ((std::size_t{1} << bw) < preds) ++bw;
      EXPECT_EQ(ch[k].select_width, std::max(bw, 1U));
      const std::size_t outs = k < spec.levels.size() ? 2 * spec.levels[k].pe_count : spec.levels.back().pe_count;
      EXPECT_EQ(ch[k].output_count, outs);
    }
  }
}

TEST(GridStats, SobelGrid) {
  const auto s = grid_stats(generate_rectangular(9, 5, 8));
  EXPECT_EQ(s.total_pe_slots, 45U);
  EXPECT_EQ(s.intermediate_channel_count, 4U);
  // Counted by hand: 45 opcodes * 4 = 180; memory interface 18 outputs *
  // ceil(log2 18) = 5 -> 90; four intermediate channels 18 outputs * 4 -> 288;
  // output interface 9 * 4 -> 36. Total 594.
  EXPECT_EQ(s.total_config_bits, 594U);
}

TEST(GridStats, MinimalGrid) {
  const auto s = grid_stats(generate_rectangular(1, 1, 8));
  EXPECT_EQ(s.total_pe_slots, 1U);
  EXPECT_EQ(s.intermediate_channel_count, 0U);
  EXPECT_EQ(s.total_config_bits, 2U + 4U + 1U);
}

TEST(GridStats, RectangularSlotCount) {
  for (std::size_t w = 1; w <= 32; ++w)
    for (std::size_t l = 1; l <= 32; ++l) ASSERT_EQ(grid_stats(generate_rectangular(w, l, 8)).total_pe_slots, w * l);
}

TEST(GenerateRectangular, Shapes) {
  const auto sobel = generate_rectangular(9, 5, 8);
  EXPECT_EQ(sobel.levels.size(), 5U);
  EXPECT_EQ(sobel.memory_input_count, 18U);
  for (const auto& l : sobel.levels) EXPECT_EQ(l, (LevelSpec{9, 8, 8}));

  const auto four = generate_rectangular(4, 4, 16);
  EXPECT_EQ(grid_stats(four).total_pe_slots, 16U);
  EXPECT_EQ(four.levels[3].pe_input_bitwidth, 16U);

  EXPECT_THROW(generate_rectangular(0, 5, 8), ValidationError);
  EXPECT_THROW(generate_rectangular(9, 0, 8), ValidationError);
  EXPECT_THROW(generate_rectangular(9, 5, 0), ValidationError);
  EXPECT_THROW(generate_rectangular(9, 5, 65), ValidationError);
}

TEST(GenerateRectangular, TriangularSpecIsRepresentable) {
  GridSpec tri;
  tri.memory_input_count = 18;
  tri.memory_input_bitwidth = 8;
  for (std::size_t n : {9, 5, 3, 2, 1}) tri.levels.push_back({n, 16, 16});
  ASSERT_TRUE(validate_grid(tri).ok());
  const auto ch = derive_channels(tri);
  ASSERT_EQ(ch.size(), 6U);
  EXPECT_EQ(ch[1].predecessor_count, 9U);
  EXPECT_EQ(ch[1].output_count, 10U);
  EXPECT_EQ(ch[4].predecessor_count, 2U);
  EXPECT_EQ(ch[4].select_width, 1U);
  EXPECT_EQ(ch[5].output_count, 1U);
}

TEST(GridJson, RoundTripAndErrors) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const auto spec = random_grid(rng);
    EXPECT_EQ(parse_grid(grid_to_json(spec).dump()), spec);
  }
  EXPECT_THROW(parse_grid("{"), ParseError);
  EXPECT_THROW(parse_grid(R"({"memory_input_count": 2, "levels": []})"), ParseError);
  EXPECT_THROW(parse_grid(R"({"memory_input_count": -2, "memory_input_bitwidth": 8, "levels": []})"), ParseError);
  EXPECT_THROW(parse_grid(R"({"memory_input_count": 2, "memory_input_bitwidth": 8, "levels": [{"pe_count": 1}]})"),
               ParseError);
}

TEST(GridJson, CanonicalFormIsCompactAndOrdered) {
  EXPECT_EQ(canonical_grid_json(generate_rectangular(1, 1, 8)),
            R"({"memory_input_count":2,"memory_input_bitwidth":8,"levels":[{"pe_count":1,"pe_input_bitwidth":8,"pe_output_bitwidth":8}]})");
}

TEST(ExportNetlist, MinimalGrid) {
  const auto doc = Json::parse(export_netlist(generate_rectangular(1, 1, 8)));
  ASSERT_EQ(doc["pes"].size(), 1U);
  EXPECT_EQ(doc["pes"][0]["name"], "pe_L1_0");
  ASSERT_EQ(doc["channels"].size(), 2U);
  EXPECT_EQ(doc["channels"][0]["kind"], "memory_interface");
  EXPECT_EQ(doc["channels"][1]["kind"], "output_interface");
  // 2 host->mi, 2 mi->pe, 1 pe->oi, 1 oi->host
  EXPECT_EQ(doc["connections"].size(), 6U);
  std::vector<std::string> keys;
  for (const auto& [k, v] : doc.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"format", "version", "memory_input_count", "memory_input_bitwidth", "pes",
                                            "channels", "connections"}));
}

TEST(ExportNetlist, SobelGrid) {
  const auto doc = Json::parse(export_netlist(generate_rectangular(9, 5, 8)));
  EXPECT_EQ(doc["pes"].size(), 45U);
  std::size_t intermediate = 0;
  for (const auto& c : doc["channels"]) intermediate += c["kind"] == "intermediate";
  EXPECT_EQ(intermediate, 4U);
  EXPECT_EQ(doc["channels"][2]["select_width"], 4);
}

TEST(ExportNetlist, DeterministicAndInjective) {
  const auto spec = generate_rectangular(4, 4, 16);
  EXPECT_EQ(export_netlist(spec), export_netlist(spec));

  std::mt19937_64 rng(3);
  std::map<std::string, GridSpec> seen;
  for (int i = 0; i < 300; ++i) {
    const auto s = random_grid(rng, 4, 4);
    auto [it, inserted] = seen.emplace(export_netlist(s), s);
    if (!inserted) {
      EXPECT_EQ(it->second, s);
    }
  }
}

}  // namespace
}  // namespace pixie
