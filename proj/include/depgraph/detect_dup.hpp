#pragma once

// Duplicate detection: cosine similarity above a threshold between issues not
// already linked, followed by cluster compression. Each cluster of m issues
// is reported with m - 1 edges (a maximum-similarity spanning tree; existing
// duplicate links weigh 1.0).

#include <algorithm>
#include <map>
#include <numeric>
#include <tuple>
#include <span>
#include <vector>

#include "depgraph/errors.hpp"
#include "depgraph/graph.hpp"
#include "depgraph/tfidf.hpp"

namespace depgraph {

struct DuplicateProposal {
  IssueKey a;  // a < b
  IssueKey b;
  double score = 0.0;

  bool operator==(const DuplicateProposal&) const = default;
};

struct ClusterEdge {
  IssueKey a;
  IssueKey b;
  double score = 0.0;
  bool existing = false;  // an accepted duplicates dependency, not a proposal
};

struct Cluster {
  std::vector<IssueKey> members;  // sorted, size >= 2
  std::vector<ClusterEdge> reported_edges;
};

struct DuplicateResult {
  std::vector<DuplicateProposal> proposals;  // sorted by (a, b)
  std::vector<Cluster> clusters;             // sorted by first member
};

enum class PairScan { blocking, exhaustive };

inline TfidfModel build_model(const IssueGraph& g) {
  std::vector<TokenBag> bags;
  bags.reserve(g.size());
  for (const auto& issue : g.issues()) bags.push_back(text_preprocess(*issue));
  return TfidfModel::fit(bags);
}

inline void check_threshold(double thr) {
  if (!(thr > 0.0 && thr <= 1.0)) throw ValidationError("similarity threshold must lie in (0, 1]");
}

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

inline bool pair_allowed(const IssueGraph& g, const TfidfModel& m, DocId x, DocId y) {
  auto gx = g.find(m.key(x));
  auto gy = g.find(m.key(y));
  return gx && gy && !g.linked(*gx, *gy);
}

inline DuplicateProposal make_proposal(const TfidfModel& m, DocId x, DocId y, double score) {
  const auto& kx = m.key(x);
  const auto& ky = m.key(y);
  return kx < ky ? DuplicateProposal{kx, ky, score} : DuplicateProposal{ky, kx, score};
}

}  // namespace detail

/// Proposals for unordered pairs lacking any dependency in `g` whose cosine
/// reaches `thr`.
inline std::vector<DuplicateProposal> score_pairs(const IssueGraph& g, const TfidfModel& m, double thr,
                                                  PairScan scan = PairScan::blocking) {
  check_threshold(thr);
  std::vector<DuplicateProposal> out;
  auto consider = [&](DocId x, DocId y) {
    if (!detail::pair_allowed(g, m, x, y)) return;
    double s = cosine_sim(m, x, y);
    if (s >= thr) out.push_back(detail::make_proposal(m, x, y, s));
  };
  if (scan == PairScan::exhaustive) {
    for (DocId x = 0; x < m.documents(); ++x) {
      for (DocId y = x + 1; y < m.documents(); ++y) consider(x, y);
    }
  } else {
    std::vector<char> mark;
    for (DocId x = 0; x < m.documents(); ++x) {
      for (auto y : blocked_neighbors(m, x, true, mark)) consider(x, y);
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& p, const auto& q) {
    return std::tie(p.a, p.b) < std::tie(q.a, q.b);
  });
  return out;
}

/// Proposals touching one issue only; used for per-issue queries and for
/// re-scoring the issues of an update delta.
inline std::vector<DuplicateProposal> duplicates_of(const IssueGraph& g, const TfidfModel& m,
                                                    const IssueKey& key, double thr) {
  check_threshold(thr);
  std::vector<DuplicateProposal> out;
  auto doc = m.doc(key);
  if (!doc) return out;
  std::vector<char> mark;
  for (auto y : blocked_neighbors(m, *doc, false, mark)) {
    if (!detail::pair_allowed(g, m, *doc, y)) continue;
    double s = cosine_sim(m, *doc, y);
    if (s >= thr) out.push_back(detail::make_proposal(m, *doc, y, s));
  }
  std::sort(out.begin(), out.end(), [](const auto& p, const auto& q) {
    return std::tie(p.a, p.b) < std::tie(q.a, q.b);
  });
  return out;
}

/// Connected components over accepted duplicates links plus proposals, each
/// reported through a maximum-similarity spanning tree.
inline std::vector<Cluster> compute_clusters(const IssueGraph& g, std::span<const DuplicateProposal> proposals) {
  std::vector<ClusterEdge> edges;
  for (const auto& d : g.edges()) {
    if (d.type != DependencyType::duplicates || d.status != DependencyStatus::accepted) continue;
    auto p = d.pair();
    edges.push_back({p.first, p.second, 1.0, true});
  }
  for (const auto& p : proposals) edges.push_back({p.a, p.b, p.score, false});

  std::map<IssueKey, std::size_t> ids;
  for (const auto& e : edges) {
    ids.try_emplace(e.a, 0);
    ids.try_emplace(e.b, 0);
  }
  std::vector<IssueKey> keys;
  for (auto& [k, id] : ids) {
    id = keys.size();
    keys.push_back(k);
  }

  std::stable_sort(edges.begin(), edges.end(), [](const ClusterEdge& x, const ClusterEdge& y) {
    if (x.score != y.score) return x.score > y.score;
    if (x.existing != y.existing) return x.existing;
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });

  detail::DisjointSets sets(keys.size());
  std::vector<ClusterEdge> tree;
  for (const auto& e : edges) {
    if (sets.unite(ids[e.a], ids[e.b])) tree.push_back(e);
  }

  std::map<std::size_t, Cluster> by_root;
  for (std::size_t i = 0; i < keys.size(); ++i) by_root[sets.find(i)].members.push_back(keys[i]);
  for (auto& e : tree) by_root[sets.find(ids[e.a])].reported_edges.push_back(e);

  std::vector<Cluster> clusters;
  for (auto& [root, c] : by_root) clusters.push_back(std::move(c));
  return clusters;
}

inline DuplicateResult detect_duplicates(const IssueGraph& g, const TfidfModel& m, double thr,
                                         PairScan scan = PairScan::blocking) {
  DuplicateResult r;
  r.proposals = score_pairs(g, m, thr, scan);
  r.clusters = compute_clusters(g, r.proposals);
  return r;
}

}  // namespace depgraph
