#pragma once

// Contextualized dependency proposals for one issue of interest.
//
// Detector outputs are combined per target (reference hit counts 1.0, a
// duplicate hit adds its cosine score), pairs already linked or rejected are
// dropped, and the remaining scores are multiplied by user factors:
//   - f_depth when the target lies farther than `min_depth` hops away
//     (a different component counts as infinitely far),
//   - f_orphan when the target has no dependencies,
//   - one factor per matching (property, value) rule.
// The ranked score is unbounded above; stored dependency scores are not.

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "depgraph/detect_dup.hpp"
#include "depgraph/detect_ref.hpp"
#include "depgraph/errors.hpp"
#include "depgraph/graph.hpp"

namespace depgraph {

struct PropertyFactor {
  std::string name;
  std::string value;
  double factor = 1.0;
};

struct ContextParams {
  std::uint32_t min_depth = 5;
  double f_depth = 1.0;
  double f_orphan = 1.0;
  std::vector<PropertyFactor> properties;

  void validate() const {
    if (!(f_depth > 0.0)) throw ValidationError("f_depth must be positive");
    if (!(f_orphan > 0.0)) throw ValidationError("f_orphan must be positive");
    for (const auto& p : properties) {
      if (!(p.factor > 0.0)) throw ValidationError("property factor for '" + p.name + "' must be positive");
    }
  }
};

inline double parse_positive(std::string_view text, const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !(v > 0.0)) {
    throw ValidationError(std::string(what) + " must be a positive number, got '" + std::string(text) + "'");
  }
  return v;
}

/// Parses `name:value:factor`; the value may itself contain ':'.
inline PropertyFactor parse_property_factor(std::string_view text) {
  auto first = text.find(':');
  auto last = text.rfind(':');
  if (first == std::string_view::npos || first == last || first == 0) {
    throw ValidationError("property rule must look like name:value:factor, got '" + std::string(text) + "'");
  }
  PropertyFactor p;
  p.name = std::string(text.substr(0, first));
  p.value = std::string(text.substr(first + 1, last - first - 1));
  p.factor = parse_positive(text.substr(last + 1), "property factor");
  return p;
}

struct AppliedFactor {
  std::string label;
  double factor = 1.0;

  bool operator==(const AppliedFactor&) const = default;
};

struct RankedProposal {
  IssueKey from;  // the issue of interest
  IssueKey to;
  double base_score = 0.0;
  double ranked_score = 0.0;
  bool by_reference = false;
  bool by_duplicate = false;
  std::vector<AppliedFactor> applied_factors;
};

inline constexpr double kReferenceScore = 1.0;

/// One candidate per target issue; inputs not involving `r0` are ignored.
inline std::vector<RankedProposal> combine(std::span<const ReferenceProposal> refs,
                                           std::span<const DuplicateProposal> dups, const IssueKey& r0) {
  std::map<IssueKey, RankedProposal> by_target;
  auto slot = [&](const IssueKey& target) -> RankedProposal& {
    auto [it, inserted] = by_target.try_emplace(target);
    if (inserted) {
      it->second.from = r0;
      it->second.to = target;
    }
    return it->second;
  };
  for (const auto& r : refs) {
    const IssueKey* target = r.from == r0 ? &r.to : (r.to == r0 ? &r.from : nullptr);
    if (!target) continue;
    auto& p = slot(*target);
    if (!p.by_reference) p.base_score += kReferenceScore;
    p.by_reference = true;
  }
  for (const auto& d : dups) {
    const IssueKey* target = d.a == r0 ? &d.b : (d.b == r0 ? &d.a : nullptr);
    if (!target) continue;
    auto& p = slot(*target);
    if (!p.by_duplicate) p.base_score += d.score;
    p.by_duplicate = true;
  }
  std::vector<RankedProposal> out;
  out.reserve(by_target.size());
  for (auto& [k, p] : by_target) {
    p.ranked_score = p.base_score;
    out.push_back(std::move(p));
  }
  return out;
}

inline void sort_ranked(std::vector<RankedProposal>& v) {
  std::sort(v.begin(), v.end(), [](const RankedProposal& a, const RankedProposal& b) {
    if (a.ranked_score != b.ranked_score) return a.ranked_score > b.ranked_score;
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });
}

inline std::vector<RankedProposal> contextualize(const IssueKey& r0, std::vector<RankedProposal> candidates,
                                                 const IssueGraph& g, const std::set<KeyPair>& existing,
                                                 const std::set<KeyPair>& rejected, const ContextParams& params) {
  params.validate();
  NodeId center = g.id_of(r0);
  std::unordered_set<NodeId> near;
  for (const auto& [v, level] : bfs_levels(g, center, params.min_depth)) near.insert(v);

  std::vector<RankedProposal> out;
  out.reserve(candidates.size());
  for (auto& c : candidates) {
    KeyPair pair(c.from, c.to);
    if (existing.contains(pair) || rejected.contains(pair)) continue;

    auto target = g.find(c.to);
    auto apply = [&c](std::string label, double f) {
      c.ranked_score *= f;
      c.applied_factors.push_back({std::move(label), f});
    };
    if (!target || !near.contains(*target)) apply("depth", params.f_depth);
    if (target && g.is_orphan(*target)) apply("orphan", params.f_orphan);
    if (target) {
      const Issue& issue = g.issue(*target);
      for (const auto& rule : params.properties) {
        auto value = property(issue, rule.name);
        if (value && *value == rule.value) apply("property:" + rule.name + "=" + rule.value, rule.factor);
      }
    }
    out.push_back(std::move(c));
  }
  sort_ranked(out);
  return out;
}

}  // namespace depgraph
