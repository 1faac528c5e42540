#pragma once

// Issue graph: issues as nodes, typed dependencies as bidirected edges.
//
// Each logical dependency is stored once in `edges()` and referenced from the
// adjacency list of both endpoints with a direction flag, so the inverse
// reading ("is duplicated by", "is required by") is derived from the flag.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "depgraph/errors.hpp"
#include "depgraph/types.hpp"

namespace depgraph {

using NodeId = std::uint32_t;

inline constexpr std::uint32_t kUnreachable = std::numeric_limits<std::uint32_t>::max();

struct Adjacent {
  NodeId neighbor;
  std::uint32_t edge;  // index into IssueGraph::edges()
  bool outgoing;       // true when the owning node is the dependency's `from`
};

struct BuildOptions {
  // Proposed dependencies become graph structure only on request; rejected
  // ones never do.
  bool include_proposed = false;
};

struct BuildReport {
  std::size_t dropped_missing_endpoint = 0;
  std::size_t dropped_self_loops = 0;
  std::size_t coalesced = 0;
  std::size_t skipped_rejected = 0;
  std::size_t skipped_proposed = 0;
};

/// Immutable after construction; safe for concurrent readers.
class IssueGraph {
 public:
  IssueGraph() = default;

  static IssueGraph build(std::vector<IssuePtr> issues, std::span<const Dependency> deps,
                          BuildOptions options = {}, BuildReport* report = nullptr) {
    BuildReport local;
    BuildReport& rep = report ? *report : local;
    rep = BuildReport{};

    std::sort(issues.begin(), issues.end(), [](const IssuePtr& a, const IssuePtr& b) { return a->key < b->key; });
    issues.erase(std::unique(issues.begin(), issues.end(),
                             [](const IssuePtr& a, const IssuePtr& b) { return a->key == b->key; }),
                 issues.end());

    IssueGraph g;
    g.issues_ = std::move(issues);
    g.index_.reserve(g.issues_.size());
    for (NodeId i = 0; i < g.issues_.size(); ++i) g.index_.emplace(g.issues_[i]->key, i);

    // One edge per (unordered pair, type): later records overwrite status and
    // direction, the score keeps the maximum seen.
    std::map<std::pair<KeyPair, DependencyType>, std::size_t> slot;
    std::vector<Dependency> merged;
    for (const auto& d : deps) {
      if (d.from == d.to) {
        ++rep.dropped_self_loops;
        continue;
      }
      if (!g.index_.contains(d.from) || !g.index_.contains(d.to)) {
        ++rep.dropped_missing_endpoint;
        continue;
      }
      auto [it, inserted] = slot.try_emplace({d.pair(), d.type}, merged.size());
      if (inserted) {
        merged.push_back(d);
      } else {
        ++rep.coalesced;
        auto& prev = merged[it->second];
        double score = std::max(prev.score, d.score);
        prev = d;
        prev.score = score;
      }
    }

    g.adjacency_.resize(g.issues_.size());
    for (auto& d : merged) {
      if (d.status == DependencyStatus::rejected) {
        ++rep.skipped_rejected;
        continue;
      }
      if (d.status == DependencyStatus::proposed && !options.include_proposed) {
        ++rep.skipped_proposed;
        continue;
      }
      g.push_edge(std::move(d));
    }
    g.sort_adjacency();
    return g;
  }

  static IssueGraph build(const std::vector<Issue>& issues, std::span<const Dependency> deps,
                          BuildOptions options = {}, BuildReport* report = nullptr) {
    std::vector<IssuePtr> ptrs;
    ptrs.reserve(issues.size());
    for (const auto& i : issues) ptrs.push_back(std::make_shared<const Issue>(i));
    return build(std::move(ptrs), deps, options, report);
  }

  std::size_t size() const { return issues_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  bool contains(const IssueKey& key) const { return index_.contains(key); }

  std::optional<NodeId> find(const IssueKey& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  NodeId id_of(const IssueKey& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) throw NotFoundError("unknown issue " + key.str());
    return it->second;
  }

  const Issue& issue(NodeId id) const { return *issues_[id]; }
  const Issue& issue(const IssueKey& key) const { return *issues_[id_of(key)]; }
  const IssuePtr& issue_ptr(NodeId id) const { return issues_[id]; }
  const std::vector<IssuePtr>& issues() const { return issues_; }

  std::span<const Adjacent> neighbors(NodeId id) const { return adjacency_[id]; }
  std::size_t degree(NodeId id) const { return adjacency_[id].size(); }
  bool is_orphan(NodeId id) const { return adjacency_[id].empty(); }

  const std::vector<Dependency>& edges() const { return edges_; }
  const Dependency& edge(std::uint32_t e) const { return edges_[e]; }

  /// True when any dependency (of any type) links the two issues.
  bool linked(NodeId a, NodeId b) const {
    const auto& adj = adjacency_[a].size() <= adjacency_[b].size() ? adjacency_[a] : adjacency_[b];
    NodeId other = adjacency_[a].size() <= adjacency_[b].size() ? b : a;
    auto it = std::lower_bound(adj.begin(), adj.end(), other,
                               [](const Adjacent& x, NodeId v) { return x.neighbor < v; });
    return it != adj.end() && it->neighbor == other;
  }

  /// Subgraph induced by `nodes`: all of them plus every edge among them.
  IssueGraph induced(std::span<const NodeId> nodes) const {
    std::vector<NodeId> sorted(nodes.begin(), nodes.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::unordered_map<NodeId, NodeId> remap;
    remap.reserve(sorted.size());
    IssueGraph sub;
    sub.issues_.reserve(sorted.size());
    for (NodeId old : sorted) {
      remap.emplace(old, static_cast<NodeId>(sub.issues_.size()));
      sub.index_.emplace(issues_[old]->key, static_cast<NodeId>(sub.issues_.size()));
      sub.issues_.push_back(issues_[old]);
    }
    sub.adjacency_.resize(sub.issues_.size());
    std::vector<std::uint32_t> taken;
    for (NodeId old : sorted) {
      for (const auto& a : adjacency_[old]) {
        if (!a.outgoing || !remap.contains(a.neighbor)) continue;
        taken.push_back(a.edge);
      }
    }
    std::sort(taken.begin(), taken.end());
    for (auto e : taken) sub.push_edge(edges_[e]);
    sub.sort_adjacency();
    return sub;
  }

 private:
  void push_edge(Dependency d) {
    auto e = static_cast<std::uint32_t>(edges_.size());
    NodeId a = index_.at(d.from);
    NodeId b = index_.at(d.to);
    adjacency_[a].push_back({b, e, true});
    adjacency_[b].push_back({a, e, false});
    edges_.push_back(std::move(d));
  }

  void sort_adjacency() {
    for (auto& adj : adjacency_) {
      std::sort(adj.begin(), adj.end(), [](const Adjacent& x, const Adjacent& y) {
        return x.neighbor != y.neighbor ? x.neighbor < y.neighbor : x.edge < y.edge;
      });
    }
  }

  std::vector<IssuePtr> issues_;
  std::unordered_map<IssueKey, NodeId, IssueKeyHash> index_;
  std::vector<Dependency> edges_;
  std::vector<std::vector<Adjacent>> adjacency_;
};

/// Hop distances from `source`, `kUnreachable` beyond `max_depth` or outside
/// the component.
inline std::vector<std::uint32_t> bfs_distances(const IssueGraph& g, NodeId source,
                                                std::uint32_t max_depth = kUnreachable) {
  std::vector<std::uint32_t> dist(g.size(), kUnreachable);
  std::deque<NodeId> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    if (dist[u] == max_depth) continue;
    for (const auto& a : g.neighbors(u)) {
      if (dist[a.neighbor] != kUnreachable) continue;
      dist[a.neighbor] = dist[u] + 1;
      queue.push_back(a.neighbor);
    }
  }
  return dist;
}

/// Nodes within `max_depth` hops of `source` with their hop level, in BFS
/// order (source first).
inline std::vector<std::pair<NodeId, std::uint32_t>> bfs_levels(const IssueGraph& g, NodeId source,
                                                                std::uint32_t max_depth) {
  std::unordered_map<NodeId, std::uint32_t> seen{{source, 0}};
  std::vector<std::pair<NodeId, std::uint32_t>> order{{source, 0}};
  for (std::size_t head = 0; head < order.size(); ++head) {
    auto [u, du] = order[head];
    if (du == max_depth) continue;
    for (const auto& a : g.neighbors(u)) {
      if (seen.try_emplace(a.neighbor, du + 1).second) order.emplace_back(a.neighbor, du + 1);
    }
  }
  return order;
}

/// Nodes within `max_depth` hops of `source`, in BFS order (source first).
inline std::vector<NodeId> bfs_ball(const IssueGraph& g, NodeId source, std::uint32_t max_depth) {
  auto levels = bfs_levels(g, source, max_depth);
  std::vector<NodeId> out;
  out.reserve(levels.size());
  for (const auto& [v, d] : levels) out.push_back(v);
  return out;
}

/// G0: the connected component containing `r0`.
inline IssueGraph component_of(const IssueGraph& g, const IssueKey& r0) {
  auto nodes = bfs_ball(g, g.id_of(r0), kUnreachable);
  return g.induced(nodes);
}

/// G^p_0: induced subgraph over every issue at most `p` hops from `r0`.
inline IssueGraph p_depth_subgraph(const IssueGraph& g, const IssueKey& r0, std::uint32_t p) {
  auto nodes = bfs_ball(g, g.id_of(r0), p);
  return g.induced(nodes);
}

/// Shortest hop count; nullopt stands for an infinite distance.
inline std::optional<std::uint32_t> distance(const IssueGraph& g, const IssueKey& a, const IssueKey& b) {
  auto src = g.find(a);
  auto dst = g.find(b);
  if (!src || !dst) return std::nullopt;
  if (*src == *dst) return 0;
  std::unordered_map<NodeId, std::uint32_t> seen{{*src, 0}};
  std::deque<NodeId> queue{*src};
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    auto du = seen[u];
    for (const auto& n : g.neighbors(u)) {
      if (!seen.try_emplace(n.neighbor, du + 1).second) continue;
      if (n.neighbor == *dst) return du + 1;
      queue.push_back(n.neighbor);
    }
  }
  return std::nullopt;
}

/// Component label per node; labels are dense, assigned in node order.
inline std::vector<std::uint32_t> component_labels(const IssueGraph& g, std::uint32_t* count = nullptr) {
  std::vector<std::uint32_t> label(g.size(), kUnreachable);
  std::uint32_t next = 0;
  std::vector<NodeId> stack;
  for (NodeId s = 0; s < g.size(); ++s) {
    if (label[s] != kUnreachable) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (const auto& a : g.neighbors(u)) {
        if (label[a.neighbor] == kUnreachable) {
          label[a.neighbor] = next;
          stack.push_back(a.neighbor);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return label;
}

}  // namespace depgraph
