#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pixie/error.hpp"
#include "pixie/json_util.hpp"
#include "pixie/opcode.hpp"

namespace pixie {

enum class NodeKind { Input, Output, Op };

constexpr std::string_view node_kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::Input: return "input";
    case NodeKind::Output: return "output";
    case NodeKind::Op: return "op";
  }
  return "?";
}

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Op;
  Opcode op = Opcode::None;  // meaningful for Op nodes only

  friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
  std::string src;
  std::string dst;
  unsigned port = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Application dataflow graph. Op nodes take two operands (ports 0 and 1).
/// A `buf` op is the levelized form of a pass-through and must receive the
/// same source on both ports.
struct TaskGraph {
  std::vector<Node> nodes;
  std::vector<Edge> edges;

  const Node* find(std::string_view id) const {
    for (const auto& n : nodes)
      if (n.id == id) return &n;
    return nullptr;
  }

  std::size_t count(NodeKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [kind](const Node& n) { return n.kind == kind; }));
  }

  friend bool operator==(const TaskGraph&, const TaskGraph&) = default;
};

namespace detail {

inline std::string describe(const Edge& e, std::size_t index) {
  return "edge " + std::to_string(index) + " (" + e.src + " -> " + e.dst + ", port " + std::to_string(e.port) + ")";
}

/// Node indices in topological order; throws on a cycle.
inline std::vector<std::size_t> topological_order(const TaskGraph& g,
                                                  const std::unordered_map<std::string, std::size_t>& index) {
  const std::size_t n = g.nodes.size();
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> succ(n);
  for (const auto& e : g.edges) {
    const auto s = index.at(e.src), d = index.at(e.dst);
    succ[s].push_back(d);
    ++indegree[d];
  }
  std::vector<std::size_t> ready, order;
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.push_back(i);
  while (!ready.empty()) {
    const auto i = ready.back();
    ready.pop_back();
    order.push_back(i);
    for (auto d : succ[i])
      if (--indegree[d] == 0) ready.push_back(d);
  }
  if (order.size() != n) {
    for (std::size_t i = 0; i < n; ++i)
      if (indegree[i] != 0) throw ValidationError("graph has a cycle through node \"" + g.nodes[i].id + "\"");
  }
  return order;
}

inline std::unordered_map<std::string, std::size_t> node_index(const TaskGraph& g) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (g.nodes[i].id.empty()) throw ValidationError("node " + std::to_string(i) + " has an empty id");
    if (!index.emplace(g.nodes[i].id, i).second)
      throw ValidationError("duplicate node id \"" + g.nodes[i].id + "\"");
  }
  return index;
}

}  // namespace detail

/// Checks every TaskGraph invariant; throws ValidationError naming the
/// offending node or edge.
inline void validate_graph(const TaskGraph& g) {
  const auto index = detail::node_index(g);
  for (const auto& n : g.nodes) {
    if (n.kind == NodeKind::Op && n.op == Opcode::None)
      throw ValidationError("node \"" + n.id + "\": op node without an operation");
  }

  std::vector<std::vector<const Edge*>> in_edges(g.nodes.size());
  std::vector<std::size_t> out_degree(g.nodes.size(), 0);
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto& e = g.edges[i];
    auto s = index.find(e.src);
    auto d = index.find(e.dst);
    if (s == index.end()) throw ValidationError(detail::describe(e, i) + ": unknown source node");
    if (d == index.end()) throw ValidationError(detail::describe(e, i) + ": unknown destination node");
    if (e.port > 1) throw ValidationError(detail::describe(e, i) + ": port must be 0 or 1");
    if (g.nodes[s->second].kind == NodeKind::Output)
      throw ValidationError(detail::describe(e, i) + ": output nodes have no out-edges");
    if (g.nodes[d->second].kind == NodeKind::Input)
      throw ValidationError(detail::describe(e, i) + ": input nodes have no in-edges");
    if (g.nodes[d->second].kind == NodeKind::Output && e.port != 0)
      throw ValidationError(detail::describe(e, i) + ": output nodes only have port 0");
    in_edges[d->second].push_back(&e);
    ++out_degree[s->second];
  }

  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    const auto& ins = in_edges[i];
    const std::string who = "node \"" + n.id + "\"";
    switch (n.kind) {
      case NodeKind::Input: break;
      case NodeKind::Output:
        if (ins.size() != 1)
          throw ValidationError(who + ": output node needs exactly 1 in-edge, has " + std::to_string(ins.size()));
        break;
      case NodeKind::Op: {
        int filled[2] = {0, 0};
        for (const auto* e : ins) ++filled[e->port];
        for (unsigned p = 0; p < 2; ++p) {
          if (filled[p] != 1)
            throw ValidationError(who + ": port " + std::to_string(p) + " has " + std::to_string(filled[p]) +
                                  " in-edges, expected 1");
        }
        if (n.op == Opcode::Buf && ins[0]->src != ins[1]->src)
          throw ValidationError(who + ": buf node must receive the same source on both ports");
        break;
      }
    }
  }
  detail::topological_order(g, index);
}

inline TaskGraph graph_from_json(const Json& doc) {
  using namespace detail;
  TaskGraph g;
  const auto& nodes = as_array(field(doc, "nodes", ""), "/nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string path = "/nodes/" + std::to_string(i);
    Node n;
    n.id = as_string(field(nodes[i], "id", path), path + "/id");
    const auto& kind = as_string(field(nodes[i], "kind", path), path + "/kind");
    if (kind == "input") {
      n.kind = NodeKind::Input;
    } else if (kind == "output") {
      n.kind = NodeKind::Output;
    } else if (kind == "op") {
      n.kind = NodeKind::Op;
      const auto& op = as_string(field(nodes[i], "op", path), path + "/op");
      auto code = opcode_from_name(op);
      if (!code || *code == Opcode::None)
        throw ValidationError("node \"" + n.id + "\": unknown op \"" + op + "\"");
      n.op = *code;
    } else {
      throw ParseError(path + "/kind: unknown node kind \"" + kind + "\"");
    }
    g.nodes.push_back(std::move(n));
  }
  const auto& edges = as_array(field(doc, "edges", ""), "/edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string path = "/edges/" + std::to_string(i);
    Edge e;
    e.src = as_string(field(edges[i], "src", path), path + "/src");
    e.dst = as_string(field(edges[i], "dst", path), path + "/dst");
    e.port = static_cast<unsigned>(unsigned_field(edges[i], "port", path, 0xFFFF));
    g.edges.push_back(std::move(e));
  }
  validate_graph(g);
  return g;
}

inline TaskGraph parse_graph(std::string_view text) { return graph_from_json(detail::parse_json(text, "graph")); }

inline Json graph_to_json(const TaskGraph& g) {
  Json nodes = Json::array();
  for (const auto& n : g.nodes) {
    Json j = Json::object();
    j["id"] = n.id;
    j["kind"] = node_kind_name(n.kind);
    if (n.kind == NodeKind::Op) j["op"] = opcode_name(n.op);
    nodes.push_back(std::move(j));
  }
  Json edges = Json::array();
  for (const auto& e : g.edges) {
    Json j = Json::object();
    j["src"] = e.src;
    j["dst"] = e.dst;
    j["port"] = e.port;
    edges.push_back(std::move(j));
  }
  Json doc = Json::object();
  doc["nodes"] = std::move(nodes);
  doc["edges"] = std::move(edges);
  return doc;
}

// ---------------------------------------------------------------------------
// Levelization

/// A task graph in which every op/buf node sits on a level and every edge
/// between op/buf nodes spans exactly one level. Input nodes are on level 0
/// and output nodes on level depth + 1.
struct LeveledGraph {
  TaskGraph graph;
  std::map<std::string, std::size_t> level;
  std::size_t depth = 0;

  std::size_t level_of(const std::string& id) const { return level.at(id); }

  friend bool operator==(const LeveledGraph&, const LeveledGraph&) = default;
};

inline std::string buffer_id(std::string_view source, std::size_t level) {
  return std::string(source) + "~buf" + std::to_string(level);
}

/// ASAP levelization with buffer insertion.
///
/// Each op sits one level below its deepest op/buf predecessor (level 1 when
/// fed only by inputs). A value consumed more than one level below its
/// producer is carried by a chain of buf nodes, one per intermediate level,
/// shared by every consumer of that value. Outputs are fed from the last
/// level; `min_depth` extends the last level downward, as needed when the
/// target grid is deeper than the graph.
inline LeveledGraph levelize(const TaskGraph& g, std::size_t min_depth = 0) {
  validate_graph(g);
  const auto index = detail::node_index(g);
  const auto order = detail::topological_order(g, index);

  std::vector<std::size_t> lvl(g.nodes.size(), 0);
  std::vector<std::vector<std::size_t>> preds(g.nodes.size());
  for (const auto& e : g.edges) preds[index.at(e.dst)].push_back(index.at(e.src));

  std::size_t depth = 0;
  for (auto i : order) {
    if (g.nodes[i].kind != NodeKind::Op) continue;
    std::size_t deepest = 0;
    for (auto p : preds[i]) deepest = std::max(deepest, lvl[p]);
    lvl[i] = deepest + 1;
    depth = std::max(depth, lvl[i]);
  }
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    // An input wired straight to an output still needs one PE level.
    if (g.nodes[i].kind == NodeKind::Output && depth == 0) depth = 1;
  }
  depth = std::max(depth, min_depth);
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    if (g.nodes[i].kind == NodeKind::Output) lvl[i] = depth + 1;

  LeveledGraph out;
  out.depth = depth;
  out.graph.nodes = g.nodes;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) out.level[g.nodes[i].id] = lvl[i];

  // Deepest level each source value has to reach.
  std::map<std::string, std::size_t> reach;
  for (const auto& e : g.edges) {
    auto& r = reach[e.src];
    r = std::max(r, lvl[index.at(e.dst)] - 1);
  }

  for (const auto& [src, last] : reach) {
    const auto from = lvl[index.at(src)];
    for (auto l = from + 1; l <= last; ++l) {
      auto id = buffer_id(src, l);
      if (index.count(id) || out.level.count(id))
        throw ValidationError("buffer id \"" + id + "\" collides with an existing node");
      const auto prev = l == from + 1 ? src : buffer_id(src, l - 1);
      out.graph.nodes.push_back(Node{id, NodeKind::Op, Opcode::Buf});
      out.level[id] = l;
      out.graph.edges.push_back(Edge{prev, id, 0});
      out.graph.edges.push_back(Edge{prev, id, 1});
    }
  }

  std::vector<Edge> rewired;
  rewired.reserve(g.edges.size() + out.graph.edges.size());
  for (const auto& e : g.edges) {
    const auto from = lvl[index.at(e.src)];
    const auto to = lvl[index.at(e.dst)];
    Edge r = e;
    if (to > from + 1) r.src = buffer_id(e.src, to - 1);
    rewired.push_back(std::move(r));
  }
  rewired.insert(rewired.end(), out.graph.edges.begin(), out.graph.edges.end());
  out.graph.edges = std::move(rewired);
  return out;
}

/// Drops the level annotation; buf nodes remain as `buf` ops.
inline TaskGraph strip_levels(const LeveledGraph& lg) { return lg.graph; }

/// Number of op/buf nodes on each level 1..depth.
inline std::vector<std::size_t> graph_width(const LeveledGraph& lg) {
  std::vector<std::size_t> width(lg.depth, 0);
  for (const auto& n : lg.graph.nodes) {
    if (n.kind == NodeKind::Op) ++width[lg.level.at(n.id) - 1];
  }
  return width;
}

}  // namespace pixie
