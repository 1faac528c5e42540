#pragma once

// Topology analytics over an issue graph: dependency counts per issue,
// orphans, components and p-depth issue graph sizes.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <tuple>
#include <vector>

#include "depgraph/graph.hpp"

namespace depgraph {

struct CountSummary {
  std::size_t count = 0;
  double min = 0;
  double avg = 0;
  double median = 0;
  double max = 0;
};

inline CountSummary summarize(std::vector<std::size_t> values) {
  CountSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.min = static_cast<double>(values.front());
  s.max = static_cast<double>(values.back());
  s.avg = static_cast<double>(std::accumulate(values.begin(), values.end(), std::size_t{0})) /
          static_cast<double>(values.size());
  auto n = values.size();
  s.median = n % 2 ? static_cast<double>(values[n / 2])
                   : (static_cast<double>(values[n / 2 - 1]) + static_cast<double>(values[n / 2])) / 2.0;
  return s;
}

/// Size statistics of all p-depth issue graphs for one depth p. Orphans are
/// not counted as p-depth graphs.
struct DepthSummary {
  std::uint32_t depth = 0;
  std::size_t graphs = 0;
  CountSummary issues;
};

struct TopologyReport {
  std::size_t issues = 0;
  std::size_t dependencies = 0;
  CountSummary dependencies_per_issue;         // over all issues
  CountSummary dependencies_per_linked_issue;  // over issues with >= 1 dependency
  std::map<std::size_t, std::size_t> degree_histogram;
  std::size_t orphans = 0;
  double orphan_fraction = 0;
  std::size_t components = 0;
  std::vector<std::size_t> component_sizes;  // descending
  std::vector<DepthSummary> p_depth;          // populated when requested
  // (issue, p) -> subgraph size, populated when requested
  std::vector<std::tuple<IssueKey, std::uint32_t, std::size_t>> p_depth_sizes;
};

struct StatsOptions {
  std::uint32_t min_depth = 1;
  std::uint32_t max_depth = 0;  // 0 disables p-depth statistics
  bool per_issue_sizes = false;
};

inline TopologyReport graph_stats(const IssueGraph& g, const StatsOptions& options = {}) {
  TopologyReport r;
  r.issues = g.size();
  r.dependencies = g.edge_count();

  std::vector<std::size_t> degrees(g.size());
  std::vector<std::size_t> linked;
  for (NodeId i = 0; i < g.size(); ++i) {
    degrees[i] = g.degree(i);
    ++r.degree_histogram[degrees[i]];
    if (degrees[i] == 0) {
      ++r.orphans;
    } else {
      linked.push_back(degrees[i]);
    }
  }
  r.dependencies_per_issue = summarize(degrees);
  r.dependencies_per_linked_issue = summarize(std::move(linked));
  r.orphan_fraction = g.size() ? static_cast<double>(r.orphans) / static_cast<double>(g.size()) : 0.0;

  std::uint32_t count = 0;
  auto labels = component_labels(g, &count);
  r.components = count;
  r.component_sizes.assign(count, 0);
  for (auto l : labels) ++r.component_sizes[l];
  std::sort(r.component_sizes.rbegin(), r.component_sizes.rend());

  if (options.max_depth >= options.min_depth && options.max_depth > 0) {
    std::vector<std::vector<std::size_t>> sizes(options.max_depth - options.min_depth + 1);
    for (NodeId i = 0; i < g.size(); ++i) {
      if (g.is_orphan(i)) continue;
      std::vector<std::size_t> per_level(options.max_depth + 1, 0);
      for (const auto& [v, level] : bfs_levels(g, i, options.max_depth)) ++per_level[level];
      std::size_t cumulative = 0;
      for (std::uint32_t p = 0; p <= options.max_depth; ++p) {
        cumulative += per_level[p];
        if (p < options.min_depth) continue;
        sizes[p - options.min_depth].push_back(cumulative);
        if (options.per_issue_sizes) r.p_depth_sizes.emplace_back(g.issue(i).key, p, cumulative);
      }
    }
    for (std::uint32_t p = options.min_depth; p <= options.max_depth; ++p) {
      auto& v = sizes[p - options.min_depth];
      DepthSummary d;
      d.depth = p;
      d.graphs = v.size();
      d.issues = summarize(std::move(v));
      r.p_depth.push_back(d);
    }
  }
  return r;
}

}  // namespace depgraph
