#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pixie/error.hpp"
#include "pixie/grid.hpp"
#include "pixie/json_util.hpp"
#include "pixie/opcode.hpp"
#include "pixie/taskgraph.hpp"

namespace pixie {

/// Per-output multiplexer selects of one channel. Select `o` picks the
/// predecessor routed to output `o`; outputs 2s and 2s+1 feed ports 0 and 1
/// of PE slot s in the level below.
struct ChannelConfig {
  std::vector<std::uint32_t> selects;

  friend bool operator==(const ChannelConfig&, const ChannelConfig&) = default;
};

/// Complete grid settings: PE operations and every channel's routing.
struct GridConfig {
  std::vector<std::vector<Opcode>> pe_configs;  // [level][slot]
  ChannelConfig input_distribution;             // memory interface
  std::vector<ChannelConfig> channel_configs;   // between level k and k+1
  ChannelConfig output_selection;               // output interface

  /// Channel by position, numbered as in derive_channels.
  const ChannelConfig& channel(std::size_t position) const {
    if (position == 0) return input_distribution;
    if (position <= channel_configs.size()) return channel_configs[position - 1];
    return output_selection;
  }
  ChannelConfig& channel(std::size_t position) {
    return const_cast<ChannelConfig&>(std::as_const(*this).channel(position));
  }

  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

/// All PEs NONE, all selects 0.
inline GridConfig empty_config(const GridSpec& spec) {
  const auto channels = derive_channels(spec);
  GridConfig cfg;
  for (const auto& level : spec.levels) cfg.pe_configs.emplace_back(level.pe_count, Opcode::None);
  cfg.channel_configs.resize(spec.levels.size() - 1);
  for (const auto& ch : channels) cfg.channel(ch.position).selects.assign(ch.output_count, 0);
  return cfg;
}

/// Shape and select-range check of a config against its grid.
inline void check_config(const GridConfig& cfg, const GridSpec& spec) {
  const auto channels = derive_channels(spec);
  if (cfg.pe_configs.size() != spec.levels.size())
    throw ValidationError("config has " + std::to_string(cfg.pe_configs.size()) + " PE levels, grid has " +
                          std::to_string(spec.levels.size()));
  for (std::size_t l = 0; l < spec.levels.size(); ++l) {
    if (cfg.pe_configs[l].size() != spec.levels[l].pe_count)
      throw ValidationError("config level " + std::to_string(l + 1) + " has " +
                            std::to_string(cfg.pe_configs[l].size()) + " PEs, grid has " +
                            std::to_string(spec.levels[l].pe_count));
    for (auto op : cfg.pe_configs[l])
      if (static_cast<unsigned>(op) >= kOpcodeCount) throw ValidationError("config holds an invalid opcode");
  }
  if (cfg.channel_configs.size() + 1 != spec.levels.size())
    throw ValidationError("config has " + std::to_string(cfg.channel_configs.size()) +
                          " intermediate channels, grid has " + std::to_string(spec.levels.size() - 1));
  for (const auto& ch : channels) {
    const auto& sel = cfg.channel(ch.position).selects;
    const auto name = channel_instance_name(ch);
    if (sel.size() != ch.output_count)
      throw ValidationError("channel " + name + " has " + std::to_string(sel.size()) + " selects, expected " +
                            std::to_string(ch.output_count));
    for (std::size_t o = 0; o < sel.size(); ++o) {
      if (sel[o] >= ch.predecessor_count)
        throw ValidationError("channel " + name + " output " + std::to_string(o) + " selects " +
                              std::to_string(sel[o]) + ", only " + std::to_string(ch.predecessor_count) +
                              " predecessors");
    }
  }
}

/// Input node ids in memory-interface order (sorted by id).
inline std::vector<std::string> input_order(const TaskGraph& g) {
  std::vector<std::string> ids;
  for (const auto& n : g.nodes)
    if (n.kind == NodeKind::Input) ids.push_back(n.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

/// Output node ids in output-interface order (sorted by id).
inline std::vector<std::string> output_order(const TaskGraph& g) {
  std::vector<std::string> ids;
  for (const auto& n : g.nodes)
    if (n.kind == NodeKind::Output) ids.push_back(n.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

struct Slot {
  std::size_t level = 0;  // 1-based
  std::size_t index = 0;

  friend bool operator==(const Slot&, const Slot&) = default;
};

struct Placement {
  std::map<std::string, Slot> slots;

  friend bool operator==(const Placement&, const Placement&) = default;
};

/// Assigns every op/buf node a PE slot on its own level. Nodes of one level
/// take slots left to right in id order.
inline Placement place(const LeveledGraph& lg, const GridSpec& spec) {
  require_valid(spec);
  const std::size_t grid_depth = spec.levels.size();
  if (lg.depth > grid_depth)
    throw InfeasibleError("graph needs " + std::to_string(lg.depth) + " levels, grid has " +
                          std::to_string(grid_depth));

  const auto inputs = input_order(lg.graph);
  if (inputs.size() > spec.memory_input_count)
    throw InfeasibleError("graph has " + std::to_string(inputs.size()) + " inputs, memory interface accepts " +
                          std::to_string(spec.memory_input_count));
  const auto outputs = output_order(lg.graph);
  if (!outputs.empty()) {
    if (lg.depth != grid_depth)
      throw InfeasibleError("graph outputs leave level " + std::to_string(lg.depth) + " but the grid has " +
                            std::to_string(grid_depth) + " levels; levelize with min_depth = grid depth");
    if (outputs.size() > spec.levels.back().pe_count)
      throw InfeasibleError("graph has " + std::to_string(outputs.size()) + " outputs, output interface has " +
                            std::to_string(spec.levels.back().pe_count));
  }

  std::vector<std::vector<std::string>> per_level(grid_depth);
  for (const auto& n : lg.graph.nodes) {
    if (n.kind == NodeKind::Op) per_level[lg.level_of(n.id) - 1].push_back(n.id);
  }
  for (std::size_t l = 0; l < grid_depth; ++l) {
    const auto need = per_level[l].size();
    const auto have = spec.levels[l].pe_count;
    if (need > have)
      throw InfeasibleError("level " + std::to_string(l + 1) + " needs " + std::to_string(need) +
                            " PE slots, grid has " + std::to_string(have) + " (short by " +
                            std::to_string(need - have) + ")");
  }

  Placement p;
  for (std::size_t l = 0; l < grid_depth; ++l) {
    auto& ids = per_level[l];
    std::sort(ids.begin(), ids.end());
    for (std::size_t i = 0; i < ids.size(); ++i) p.slots.emplace(ids[i], Slot{l + 1, i});
  }
  return p;
}

/// Sets opcodes from the placement and the channel selects from the edges.
/// Every channel is a full crossbar, so any valid placement routes.
inline GridConfig route(const LeveledGraph& lg, const Placement& p, const GridSpec& spec) {
  GridConfig cfg = empty_config(spec);

  std::map<std::string, std::uint32_t> input_index;
  {
    const auto inputs = input_order(lg.graph);
    for (std::size_t i = 0; i < inputs.size(); ++i) input_index[inputs[i]] = static_cast<std::uint32_t>(i);
  }
  std::map<std::string, std::size_t> output_index;
  {
    const auto outputs = output_order(lg.graph);
    for (std::size_t i = 0; i < outputs.size(); ++i) output_index[outputs[i]] = i;
  }
  std::map<std::string, const Node*> nodes;
  for (const auto& n : lg.graph.nodes) nodes[n.id] = &n;

  for (const auto& [id, slot] : p.slots) cfg.pe_configs[slot.level - 1][slot.index] = nodes.at(id)->op;

  // Index of `src` among the predecessors of the channel above `level`.
  auto source_index = [&](const std::string& src, std::size_t level) -> std::uint32_t {
    const auto src_level = lg.level_of(src);
    if (src_level + 1 != level)
      throw ValidationError("edge from \"" + src + "\" skips from level " + std::to_string(src_level) +
                            " to level " + std::to_string(level));
    if (src_level == 0) return input_index.at(src);
    return static_cast<std::uint32_t>(p.slots.at(src).index);
  };

  for (const auto& e : lg.graph.edges) {
    const Node& dst = *nodes.at(e.dst);
    if (dst.kind == NodeKind::Output) {
      cfg.output_selection.selects.at(output_index.at(e.dst)) = source_index(e.src, lg.depth + 1);
      continue;
    }
    const Slot& slot = p.slots.at(e.dst);
    cfg.channel(slot.level - 1).selects.at(2 * slot.index + e.port) = source_index(e.src, slot.level);
  }
  return cfg;
}

/// levelize, place and route. The graph is extended downward when the grid
/// is deeper than the graph, so results are buffered to the last level.
inline GridConfig map_to_grid(const TaskGraph& g, const GridSpec& spec) {
  require_valid(spec);
  const auto lg = levelize(g, spec.levels.size());
  const auto p = place(lg, spec);
  return route(lg, p, spec);
}

// ---------------------------------------------------------------------------
// JSON

inline Json config_to_json(const GridConfig& cfg) {
  Json doc = Json::object();
  Json pes = Json::array();
  for (const auto& level : cfg.pe_configs) {
    Json row = Json::array();
    for (auto op : level) row.push_back(opcode_name(op));
    pes.push_back(std::move(row));
  }
  doc["pe_configs"] = std::move(pes);
  doc["input_distribution"] = cfg.input_distribution.selects;
  Json chans = Json::array();
  for (const auto& ch : cfg.channel_configs) chans.push_back(ch.selects);
  doc["channel_configs"] = std::move(chans);
  doc["output_selection"] = cfg.output_selection.selects;
  return doc;
}

inline GridConfig config_from_json(const Json& doc) {
  using namespace detail;
  auto read_selects = [](const Json& v, const std::string& path) {
    ChannelConfig ch;
    const auto& arr = as_array(v, path);
    for (std::size_t i = 0; i < arr.size(); ++i)
      ch.selects.push_back(static_cast<std::uint32_t>(as_unsigned(arr[i], path + "/" + std::to_string(i), 0xFFFFFFFFU)));
    return ch;
  };
  GridConfig cfg;
  const auto& pes = as_array(field(doc, "pe_configs", ""), "/pe_configs");
  for (std::size_t l = 0; l < pes.size(); ++l) {
    const std::string path = "/pe_configs/" + std::to_string(l);
    const auto& row = as_array(pes[l], path);
    auto& out = cfg.pe_configs.emplace_back();
    for (std::size_t i = 0; i < row.size(); ++i) {
      const auto& name = as_string(row[i], path + "/" + std::to_string(i));
      auto op = opcode_from_name(name);
      if (!op) throw ParseError(path + "/" + std::to_string(i) + ": unknown opcode \"" + name + "\"");
      out.push_back(*op);
    }
  }
  cfg.input_distribution = read_selects(field(doc, "input_distribution", ""), "/input_distribution");
  const auto& chans = as_array(field(doc, "channel_configs", ""), "/channel_configs");
  for (std::size_t k = 0; k < chans.size(); ++k)
    cfg.channel_configs.push_back(read_selects(chans[k], "/channel_configs/" + std::to_string(k)));
  cfg.output_selection = read_selects(field(doc, "output_selection", ""), "/output_selection");
  return cfg;
}

inline GridConfig parse_config(std::string_view text) { return config_from_json(detail::parse_json(text, "config")); }

}  // namespace pixie
