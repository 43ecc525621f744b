#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pixie/bits.hpp"
#include "pixie/error.hpp"
#include "pixie/json_util.hpp"
#include "pixie/opcode.hpp"

namespace pixie {

/// One row of PE slots. Both PE operands share `pe_input_bitwidth`, so a slot
/// with mismatched operand widths cannot be expressed.
struct LevelSpec {
  std::size_t pe_count = 0;
  unsigned pe_input_bitwidth = 0;
  unsigned pe_output_bitwidth = 0;

  friend bool operator==(const LevelSpec&, const LevelSpec&) = default;
};

/// Static shape of a grid: PE levels from top to bottom plus the width of the
/// memory interface that feeds the first level.
struct GridSpec {
  std::vector<LevelSpec> levels;
  std::size_t memory_input_count = 0;
  unsigned memory_input_bitwidth = 0;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct Violation {
  std::string location;  // e.g. "levels[2].pe_count"
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }

  std::string to_string() const {
    std::string out;
    for (const auto& v : violations) {
      if (!out.empty()) out += "; ";
      out += v.location + ": " + v.message;
    }
    return out;
  }
};

namespace detail {
inline void check_width(std::vector<Violation>& out, std::string location, unsigned bits) {
  if (bits < 1 || bits > kMaxBitwidth)
    out.push_back({std::move(location),
                   "bitwidth " + std::to_string(bits) + " outside [1, " + std::to_string(kMaxBitwidth) + "]"});
}
}  // namespace detail

inline ValidationReport validate_grid(const GridSpec& spec) {
  ValidationReport report;
  auto& v = report.violations;
  if (spec.levels.empty()) v.push_back({"levels", "grid has no levels"});
  if (spec.memory_input_count == 0) v.push_back({"memory_input_count", "must be at least 1"});
  detail::check_width(v, "memory_input_bitwidth", spec.memory_input_bitwidth);
  for (std::size_t i = 0; i < spec.levels.size(); ++i) {
    const auto& level = spec.levels[i];
    const std::string at = "levels[" + std::to_string(i) + "]";
    if (level.pe_count == 0) v.push_back({at + ".pe_count", "empty level"});
    detail::check_width(v, at + ".pe_input_bitwidth", level.pe_input_bitwidth);
    detail::check_width(v, at + ".pe_output_bitwidth", level.pe_output_bitwidth);
  }
  return report;
}

inline void require_valid(const GridSpec& spec) {
  auto report = validate_grid(spec);
  if (!report.ok()) throw ValidationError("invalid grid: " + report.to_string());
}

enum class ChannelKind { MemoryInterface, Intermediate, OutputInterface };

constexpr std::string_view channel_kind_name(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::MemoryInterface: return "memory_interface";
    case ChannelKind::Intermediate: return "intermediate";
    case ChannelKind::OutputInterface: return "output_interface";
  }
  return "?";
}

/// Parameters of one virtual channel, derived from the grid shape.
///
/// Channels are numbered by position: position 0 is the memory interface
/// feeding level 1, position k (1 <= k < L) sits between levels k and k+1, and
/// position L is the output interface below the last level.
struct ChannelSpec {
  ChannelKind kind = ChannelKind::Intermediate;
  std::size_t position = 0;
  std::size_t predecessor_count = 0;
  std::size_t output_count = 0;
  unsigned internal_bitwidth = 0;  // N
  std::size_t valid_width = 0;     // M
  unsigned select_width = 0;       // bw

  friend bool operator==(const ChannelSpec&, const ChannelSpec&) = default;
};

/// N: the widest data input of the channel.
inline unsigned internal_bitwidth(std::span<const unsigned> predecessor_widths) {
  if (predecessor_widths.empty()) throw ValidationError("channel without predecessors");
  return *std::max_element(predecessor_widths.begin(), predecessor_widths.end());
}

/// bw = ceil(log2(predecessors)), floored at one bit so every mux select has a
/// field in the bitstream.
inline unsigned select_width(std::size_t predecessor_count) {
  if (predecessor_count == 0) throw ValidationError("channel without predecessors");
  return std::max(1U, ceil_log2(predecessor_count));
}

inline ChannelSpec make_channel(ChannelKind kind, std::size_t position,
                                std::span<const unsigned> predecessor_widths, std::size_t output_count) {
  ChannelSpec ch;
  ch.kind = kind;
  ch.position = position;
  ch.predecessor_count = predecessor_widths.size();
  ch.output_count = output_count;
  ch.internal_bitwidth = internal_bitwidth(predecessor_widths);
  ch.valid_width = predecessor_widths.size();
  ch.select_width = select_width(predecessor_widths.size());
  return ch;
}

/// Memory interface first, then one channel per pair of adjacent levels, then
/// the output interface. The output interface has one output per PE of the
/// last level.
inline std::vector<ChannelSpec> derive_channels(const GridSpec& spec) {
  require_valid(spec);
  const std::size_t depth = spec.levels.size();
  std::vector<ChannelSpec> channels;
  channels.reserve(depth + 1);

  std::vector<unsigned> widths(spec.memory_input_count, spec.memory_input_bitwidth);
  channels.push_back(make_channel(ChannelKind::MemoryInterface, 0, widths, 2 * spec.levels.front().pe_count));
  for (std::size_t k = 1; k < depth; ++k) {
    const auto& above = spec.levels[k - 1];
    widths.assign(above.pe_count, above.pe_output_bitwidth);
    channels.push_back(make_channel(ChannelKind::Intermediate, k, widths, 2 * spec.levels[k].pe_count));
  }
  const auto& last = spec.levels.back();
  widths.assign(last.pe_count, last.pe_output_bitwidth);
  channels.push_back(make_channel(ChannelKind::OutputInterface, depth, widths, last.pe_count));
  return channels;
}

struct GridStats {
  std::size_t total_pe_slots = 0;
  std::size_t intermediate_channel_count = 0;
  std::uint64_t total_config_bits = 0;

  friend bool operator==(const GridStats&, const GridStats&) = default;
};

inline GridStats grid_stats(const GridSpec& spec) {
  GridStats stats;
  for (const auto& ch : derive_channels(spec)) {
    stats.total_config_bits += static_cast<std::uint64_t>(ch.output_count) * ch.select_width;
  }
  for (const auto& level : spec.levels) {
    stats.total_pe_slots += level.pe_count;
    stats.total_config_bits += static_cast<std::uint64_t>(level.pe_count) * kOpcodeBits;
  }
  stats.intermediate_channel_count = spec.levels.size() - 1;
  return stats;
}

/// `levels` identical rows of `width` PEs. The memory interface gets one word
/// per first-level PE port.
inline GridSpec generate_rectangular(std::size_t width, std::size_t levels, unsigned bitwidth) {
  if (width == 0 || levels == 0 || bitwidth == 0)
    throw ValidationError("generate_rectangular: width, levels and bitwidth must be positive");
  GridSpec spec;
  spec.levels.assign(levels, LevelSpec{width, bitwidth, bitwidth});
  spec.memory_input_count = 2 * width;
  spec.memory_input_bitwidth = bitwidth;
  require_valid(spec);
  return spec;
}

// ---------------------------------------------------------------------------
// JSON

inline Json grid_to_json(const GridSpec& spec) {
  Json doc = Json::object();
  doc["memory_input_count"] = spec.memory_input_count;
  doc["memory_input_bitwidth"] = spec.memory_input_bitwidth;
  Json levels = Json::array();
  for (const auto& level : spec.levels) {
    Json l = Json::object();
    l["pe_count"] = level.pe_count;
    l["pe_input_bitwidth"] = level.pe_input_bitwidth;
    l["pe_output_bitwidth"] = level.pe_output_bitwidth;
    levels.push_back(std::move(l));
  }
  doc["levels"] = std::move(levels);
  return doc;
}

/// Compact serialization with fixed key order; input to the bitstream digest.
inline std::string canonical_grid_json(const GridSpec& spec) { return grid_to_json(spec).dump(); }

/// Reads a grid document. Only the document structure is checked here; call
/// validate_grid for the shape invariants.
inline GridSpec grid_from_json(const Json& doc) {
  using namespace detail;
  constexpr auto kWidthMax = std::numeric_limits<unsigned>::max();
  GridSpec spec;
  spec.memory_input_count = unsigned_field(doc, "memory_input_count", "");
  spec.memory_input_bitwidth = static_cast<unsigned>(unsigned_field(doc, "memory_input_bitwidth", "", kWidthMax));
  const auto& levels = as_array(field(doc, "levels", ""), "/levels");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const std::string path = "/levels/" + std::to_string(i);
    LevelSpec level;
    level.pe_count = unsigned_field(levels[i], "pe_count", path);
    level.pe_input_bitwidth = static_cast<unsigned>(unsigned_field(levels[i], "pe_input_bitwidth", path, kWidthMax));
    level.pe_output_bitwidth =
        static_cast<unsigned>(unsigned_field(levels[i], "pe_output_bitwidth", path, kWidthMax));
    spec.levels.push_back(level);
  }
  return spec;
}

inline GridSpec parse_grid(std::string_view text) { return grid_from_json(detail::parse_json(text, "grid")); }

// ---------------------------------------------------------------------------
// Netlist export

inline std::string pe_instance_name(std::size_t level, std::size_t index) {
  return "pe_L" + std::to_string(level) + "_" + std::to_string(index);
}

inline std::string channel_instance_name(const ChannelSpec& ch) {
  switch (ch.kind) {
    case ChannelKind::MemoryInterface: return "mi";
    case ChannelKind::OutputInterface: return "oi";
    case ChannelKind::Intermediate: break;
  }
  return "vc" + std::to_string(ch.position);
}

/// Structural netlist of the grid as a JSON document.
///
/// Layout (keys in this order):
///   format, version, memory_input_count, memory_input_bitwidth,
///   pes:         [{name, level, index, input_bitwidth, output_bitwidth}]
///   channels:    [{name, kind, position, predecessors, outputs,
///                  internal_bitwidth, valid_width, select_width}]
///   connections: [{from, to}]
/// Ports are written `<instance>.<port>[<i>]`; PE ports are `a`, `b`, `out`,
/// channel ports `in[i]`, `out[i]`, host ports `mem[i]` and `result[i]`.
inline std::string export_netlist(const GridSpec& spec) {
  const auto channels = derive_channels(spec);
  Json doc = Json::object();
  doc["format"] = "pixie-netlist";
  doc["version"] = 1;
  doc["memory_input_count"] = spec.memory_input_count;
  doc["memory_input_bitwidth"] = spec.memory_input_bitwidth;

  Json pes = Json::array();
  for (std::size_t l = 0; l < spec.levels.size(); ++l) {
    for (std::size_t i = 0; i < spec.levels[l].pe_count; ++i) {
      Json pe = Json::object();
      pe["name"] = pe_instance_name(l + 1, i);
      pe["level"] = l + 1;
      pe["index"] = i;
      pe["input_bitwidth"] = spec.levels[l].pe_input_bitwidth;
      pe["output_bitwidth"] = spec.levels[l].pe_output_bitwidth;
      pes.push_back(std::move(pe));
    }
  }
  doc["pes"] = std::move(pes);

  Json chans = Json::array();
  for (const auto& ch : channels) {
    Json c = Json::object();
    c["name"] = channel_instance_name(ch);
    c["kind"] = channel_kind_name(ch.kind);
    c["position"] = ch.position;
    c["predecessors"] = ch.predecessor_count;
    c["outputs"] = ch.output_count;
    c["internal_bitwidth"] = ch.internal_bitwidth;
    c["valid_width"] = ch.valid_width;
    c["select_width"] = ch.select_width;
    chans.push_back(std::move(c));
  }
  doc["channels"] = std::move(chans);

  Json conns = Json::array();
  auto connect = [&](std::string from, std::string to) {
    Json c = Json::object();
    c["from"] = std::move(from);
    c["to"] = std::move(to);
    conns.push_back(std::move(c));
  };
  auto idx = [](std::size_t i) { return "[" + std::to_string(i) + "]"; };
  for (std::size_t i = 0; i < spec.memory_input_count; ++i) connect("host.mem" + idx(i), "mi.in" + idx(i));
  for (const auto& ch : channels) {
    const std::string name = channel_instance_name(ch);
    if (ch.kind == ChannelKind::OutputInterface) {
      for (std::size_t o = 0; o < ch.output_count; ++o) connect(name + ".out" + idx(o), "host.result" + idx(o));
      continue;
    }
    // Outputs 2s and 2s+1 drive ports a and b of PE s in the level below.
    for (std::size_t o = 0; o < ch.output_count; ++o) {
      connect(name + ".out" + idx(o), pe_instance_name(ch.position + 1, o / 2) + (o % 2 == 0 ? ".a" : ".b"));
    }
    const auto& below = channels[ch.position + 1];
    for (std::size_t i = 0; i < spec.levels[ch.position].pe_count; ++i) {
      connect(pe_instance_name(ch.position + 1, i) + ".out", channel_instance_name(below) + ".in" + idx(i));
    }
  }
  doc["connections"] = std::move(conns);
  return doc.dump(2) + "\n";
}

}  // namespace pixie
