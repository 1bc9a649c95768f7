#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "infmax/common.hpp"
#include "infmax/rng.hpp"

namespace infmax {

using NodeId = uint32_t;

struct Edge {
  NodeId src;
  NodeId dst;
  double p;  // propagation probability in (0, 1]
};

// Immutable weighted digraph. Nodes are dense 0..n-1; adjacency lists hold
// edge indices so per-edge state (live masks, delays) can stay index-aligned.
class DirectedGraph {
 public:
  DirectedGraph() = default;

  DirectedGraph(NodeId n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    for (const Edge& e : edges_) {
      if (e.src >= n_ || e.dst >= n_) throw InputError("edge endpoint out of range");
      if (!(e.p > 0.0 && e.p <= 1.0)) throw InputError("edge probability outside (0,1]");
    }
    build_adjacency();
  }

  NodeId num_nodes() const { return n_; }
  size_t num_edges() const { return edges_.size(); }
  const Edge& edge(size_t e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const uint32_t> out_edges(NodeId v) const {
    return {out_list_.data() + out_index_[v], out_index_[v + 1] - out_index_[v]};
  }
  std::span<const uint32_t> in_edges(NodeId v) const {
    return {in_list_.data() + in_index_[v], in_index_[v + 1] - in_index_[v]};
  }
  size_t out_degree(NodeId v) const { return out_index_[v + 1] - out_index_[v]; }
  size_t in_degree(NodeId v) const { return in_index_[v + 1] - in_index_[v]; }

 private:
  void build_adjacency() {
    out_index_.assign(n_ + 1, 0);
    in_index_.assign(n_ + 1, 0);
    for (const Edge& e : edges_) {
      ++out_index_[e.src + 1];
      ++in_index_[e.dst + 1];
    }
    for (NodeId v = 0; v < n_; ++v) {
      out_index_[v + 1] += out_index_[v];
      in_index_[v + 1] += in_index_[v];
    }
    out_list_.resize(edges_.size());
    in_list_.resize(edges_.size());
    std::vector<size_t> ocur(out_index_.begin(), out_index_.end() - 1);
    std::vector<size_t> icur(in_index_.begin(), in_index_.end() - 1);
    for (uint32_t e = 0; e < edges_.size(); ++e) {
      out_list_[ocur[edges_[e].src]++] = e;
      in_list_[icur[edges_[e].dst]++] = e;
    }
  }

  NodeId n_ = 0;
  std::vector<Edge> edges_;
  std::vector<size_t> out_index_, in_index_;
  std::vector<uint32_t> out_list_, in_list_;
};

// One realization of all edge coins, index-aligned with DirectedGraph edges.
struct LiveEdgeGraph {
  std::vector<uint8_t> live;
};

inline LiveEdgeGraph sample_live_edges(const DirectedGraph& g, Rng& rng) {
  LiveEdgeGraph l;
  l.live.resize(g.num_edges());
  for (size_t e = 0; e < g.num_edges(); ++e) l.live[e] = rng.coin(g.edge(e).p) ? 1 : 0;
  return l;
}

// Reusable visited marks; next_epoch() is O(1) instead of clearing.
class EpochMarker {
 public:
  void reset(size_t n) {
    stamp_.assign(n, 0);
    epoch_ = 0;
  }
  void ensure(size_t n) {
    if (stamp_.size() < n) stamp_.resize(n, 0);
  }
  void next_epoch() {
    if (++epoch_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      epoch_ = 1;
    }
  }
  bool mark(uint32_t v) {
    if (stamp_[v] == epoch_) return false;
    stamp_[v] = epoch_;
    return true;
  }
  bool marked(uint32_t v) const { return stamp_[v] == epoch_; }

 private:
  std::vector<uint32_t> stamp_;
  uint32_t epoch_ = 0;
};

// Forward closure of `seeds` along live edges; result is sorted and
// contains the seeds.
inline std::vector<NodeId> reach(const DirectedGraph& g, const LiveEdgeGraph& l,
                                 std::span<const NodeId> seeds) {
  std::vector<NodeId> out;
  std::vector<uint8_t> seen(g.num_nodes(), 0);
  std::vector<NodeId> queue;
  for (NodeId s : seeds) {
    if (!seen[s]) {
      seen[s] = 1;
      queue.push_back(s);
    }
  }
  for (size_t head = 0; head < queue.size(); ++head) {
    NodeId u = queue[head];
    for (uint32_t e : g.out_edges(u)) {
      if (!l.live[e]) continue;
      NodeId v = g.edge(e).dst;
      if (!seen[v]) {
        seen[v] = 1;
        queue.push_back(v);
      }
    }
  }
  out = std::move(queue);
  std::sort(out.begin(), out.end());
  return out;
}

// All u with a live directed path u -> ... -> root; includes root.
inline std::vector<NodeId> reverse_reach(const DirectedGraph& g, const LiveEdgeGraph& l,
                                         NodeId root) {
  std::vector<uint8_t> seen(g.num_nodes(), 0);
  std::vector<NodeId> queue{root};
  seen[root] = 1;
  for (size_t head = 0; head < queue.size(); ++head) {
    NodeId v = queue[head];
    for (uint32_t e : g.in_edges(v)) {
      if (!l.live[e]) continue;
      NodeId u = g.edge(e).src;
      if (!seen[u]) {
        seen[u] = 1;
        queue.push_back(u);
      }
    }
  }
  std::sort(queue.begin(), queue.end());
  return queue;
}

struct GraphLoadResult {
  DirectedGraph graph;
  std::vector<std::string> labels;  // node id -> input label
  size_t duplicate_edges = 0;       // dropped records (first occurrence wins)
};

// Parses whitespace-separated `u v [p]` records; `#` starts a comment line.
// With weighted_cascade set, any explicit p is ignored and p(u,v) becomes
// 1/indegree(v) after dedup.
inline GraphLoadResult from_edge_list(std::istream& in, bool weighted_cascade = false) {
  GraphLoadResult result;
  std::unordered_map<std::string, NodeId> ids;
  auto intern = [&](const std::string& label) {
    auto it = ids.find(label);
    if (it != ids.end()) return it->second;
    NodeId id = static_cast<NodeId>(result.labels.size());
    ids.emplace(label, id);
    result.labels.push_back(label);
    return id;
  };

  std::vector<Edge> edges;
  std::unordered_map<uint64_t, size_t> seen_pairs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string su, sv;
    if (!(ls >> su >> sv)) {
      throw ParseError("line " + std::to_string(line_no) + ": expected `u v [p]`");
    }
    double p = 1.0;
    bool has_p = false;
    std::string sp;
    if (ls >> sp) {
      try {
        size_t pos = 0;
        p = std::stod(sp, &pos);
        if (pos != sp.size()) throw std::invalid_argument(sp);
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": bad probability `" + sp + "`");
      }
      has_p = true;
      std::string extra;
      if (ls >> extra) {
        throw ParseError("line " + std::to_string(line_no) + ": trailing token `" + extra + "`");
      }
    }
    if (has_p && !weighted_cascade && !(p > 0.0 && p <= 1.0)) {
      throw ParseError("line " + std::to_string(line_no) + ": probability outside (0,1]");
    }
    NodeId u = intern(su), v = intern(sv);
    uint64_t key = (static_cast<uint64_t>(u) << 32) | v;
    if (seen_pairs.count(key)) {
      ++result.duplicate_edges;
      continue;
    }
    seen_pairs.emplace(key, edges.size());
    edges.push_back(Edge{u, v, p});
  }

  NodeId n = static_cast<NodeId>(result.labels.size());
  if (weighted_cascade) {
    std::vector<size_t> indeg(n, 0);
    for (const Edge& e : edges) ++indeg[e.dst];
    for (Edge& e : edges) e.p = 1.0 / static_cast<double>(indeg[e.dst]);
  }
  result.graph = DirectedGraph(n, std::move(edges));
  return result;
}

inline void write_label_table(std::ostream& out, const std::vector<std::string>& labels) {
  for (size_t i = 0; i < labels.size(); ++i) out << i << '\t' << labels[i] << '\n';
}

inline std::unordered_map<std::string, NodeId> label_index(const std::vector<std::string>& labels) {
  std::unordered_map<std::string, NodeId> idx;
  for (size_t i = 0; i < labels.size(); ++i) idx.emplace(labels[i], static_cast<NodeId>(i));
  return idx;
}

}  // namespace infmax
