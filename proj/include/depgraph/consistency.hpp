#pragma once

// Release/priority consistency of requires and parent-child dependencies,
// duplicate merging, and preferred diagnoses of inconsistent issue graphs.
//
// Rules (priority numbers: 0 is most urgent; a missing release is later than
// every release; a missing priority drops the priority clause):
//   A requires B      violated iff rel(B) > rel(A) or prio(B) > prio(A)
//   parent P, child C consistent iff rel(C) <= rel(P) or prio(C) > prio(P)

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>
#include <optional>
#include <string>
#include <vector>

#include "depgraph/detect_dup.hpp"
#include "depgraph/errors.hpp"
#include "depgraph/fastdiag.hpp"
#include "depgraph/graph.hpp"

namespace depgraph {

/// Encoded value of an unscheduled release; above every encoded version.
inline constexpr std::int64_t kTopRelease = 1'000'000'000;

inline std::int64_t encode_release(const std::optional<Version>& v) { return v ? v->encode() : kTopRelease; }

struct EncodedIssue {
  IssueKey key;
  std::optional<int> prio;
  std::int64_t rel = kTopRelease;
};

inline EncodedIssue encode(const Issue& issue) { return {issue.key, issue.priority, encode_release(issue.release)}; }

enum class Rule { requires_rule, parent_child_rule };

inline std::string_view to_string(Rule r) {
  return r == Rule::requires_rule ? "requires_rule" : "parent_child_rule";
}

struct RuleViolation {
  Dependency dependency;
  Rule rule = Rule::requires_rule;
  std::string detail;
};

/// `a` requires `b`.
inline bool requires_satisfied(const EncodedIssue& a, const EncodedIssue& b) {
  if (b.rel > a.rel) return false;
  if (a.prio && b.prio && *b.prio > *a.prio) return false;
  return true;
}

inline bool parent_child_satisfied(const EncodedIssue& parent, const EncodedIssue& child) {
  if (child.rel <= parent.rel) return true;
  return parent.prio && child.prio && *child.prio > *parent.prio;
}

inline bool is_rule_type(DependencyType t) {
  return t == DependencyType::requires_ || t == DependencyType::parent_child;
}

namespace detail {

inline std::string describe(const EncodedIssue& e) {
  std::string rel = e.rel == kTopRelease ? std::string("unscheduled") : "rel " + std::to_string(e.rel);
  std::string prio = e.prio ? "P" + std::to_string(*e.prio) : std::string("no priority");
  return e.key.str() + " (" + rel + ", " + prio + ")";
}

}  // namespace detail

/// A requires dependency reads `from` requires `to`; a parent_child
/// dependency reads `from` is the parent of `to`.
inline std::optional<RuleViolation> check_dependency(const Dependency& d, const Issue& from, const Issue& to) {
  if (!is_rule_type(d.type)) {
    throw ValidationError("consistency rules apply to requires and parent_child only, got " +
                          std::string(to_string(d.type)));
  }
  auto a = encode(from);
  auto b = encode(to);
  if (d.type == DependencyType::requires_) {
    if (requires_satisfied(a, b)) return std::nullopt;
    return RuleViolation{d, Rule::requires_rule,
                         detail::describe(a) + " requires " + detail::describe(b) +
                             ": required issue has a later release or lower priority"};
  }
  if (parent_child_satisfied(a, b)) return std::nullopt;
  return RuleViolation{d, Rule::parent_child_rule,
                       "child " + detail::describe(b) + " of " + detail::describe(a) +
                           " is scheduled later without a lower priority"};
}

struct ConsistencyReport {
  std::vector<RuleViolation> violations;
  std::size_t checked = 0;
  std::size_t cross_project_skipped = 0;

  std::size_t count(Rule r) const {
    return static_cast<std::size_t>(
        std::count_if(violations.begin(), violations.end(), [r](const RuleViolation& v) { return v.rule == r; }));
  }
};

/// Intra-project rule edges of `g` (accepted requires / parent_child).
inline std::vector<std::uint32_t> rule_edges(const IssueGraph& g, std::size_t* cross_project = nullptr) {
  std::vector<std::uint32_t> out;
  std::size_t cross = 0;
  for (std::uint32_t e = 0; e < g.edge_count(); ++e) {
    const auto& d = g.edge(e);
    if (!is_rule_type(d.type) || d.status != DependencyStatus::accepted) continue;
    if (d.from.project != d.to.project) {
      ++cross;
      continue;
    }
    out.push_back(e);
  }
  if (cross_project) *cross_project = cross;
  return out;
}

inline ConsistencyReport check_consistency(const IssueGraph& sub) {
  ConsistencyReport r;
  for (auto e : rule_edges(sub, &r.cross_project_skipped)) {
    const auto& d = sub.edge(e);
    ++r.checked;
    if (auto v = check_dependency(d, sub.issue(d.from), sub.issue(d.to))) r.violations.push_back(std::move(*v));
  }
  return r;
}

struct MergeResult {
  IssueGraph graph;
  std::map<IssueKey, IssueKey> representative;  // every original key
};

/// Collapses issues linked by accepted duplicates dependencies. The merged
/// node is the member not resolved as "Duplicate" when there is exactly one
/// such member, otherwise the smallest key; it keeps that member's properties
/// and inherits every other dependency of the group.
inline MergeResult merge_duplicates_mapped(const IssueGraph& g) {
  detail::DisjointSets sets(g.size());
  for (const auto& d : g.edges()) {
    if (d.type == DependencyType::duplicates && d.status == DependencyStatus::accepted) {
      sets.unite(g.id_of(d.from), g.id_of(d.to));
    }
  }
  std::map<std::size_t, std::vector<NodeId>> groups;
  for (NodeId i = 0; i < g.size(); ++i) groups[sets.find(i)].push_back(i);

  MergeResult out;
  std::vector<IssuePtr> issues;
  std::vector<NodeId> rep_of(g.size());
  for (const auto& [root, members] : groups) {
    NodeId rep = members.front();  // nodes are in key order
    std::vector<NodeId> primaries;
    for (auto m : members) {
      if (!g.issue(m).resolved_as_duplicate()) primaries.push_back(m);
    }
    if (primaries.size() == 1) rep = primaries.front();
    for (auto m : members) {
      rep_of[m] = rep;
      out.representative.emplace(g.issue(m).key, g.issue(rep).key);
    }
    issues.push_back(g.issue_ptr(rep));
  }

  std::vector<Dependency> deps;
  for (const auto& d : g.edges()) {
    if (d.type == DependencyType::duplicates && d.status == DependencyStatus::accepted) continue;
    Dependency m = d;
    m.from = g.issue(rep_of[g.id_of(d.from)]).key;
    m.to = g.issue(rep_of[g.id_of(d.to)]).key;
    if (m.from == m.to) continue;
    deps.push_back(std::move(m));
  }
  out.graph = IssueGraph::build(std::move(issues), deps, BuildOptions{.include_proposed = true});
  return out;
}

inline IssueGraph merge_duplicates(const IssueGraph& g) { return merge_duplicates_mapped(g).graph; }

/// Satisfiability of the rule constraints when some issues keep their
/// release and priority and the others may take any release (including
/// unscheduled) and any priority 0..5.
///
/// Every rule clause is a difference constraint `x - y <= k`; a system of
/// those is satisfiable iff its constraint graph has no negative cycle.
/// Parent-child rules with both clauses open are disjunctions and are
/// resolved by backtracking.
class ReleaseCsp {
 public:
  struct RuleEdge {
    std::uint32_t from;
    std::uint32_t to;
    DependencyType type;
  };

  ReleaseCsp(std::vector<EncodedIssue> issues, std::vector<RuleEdge> rules)
      : issues_(std::move(issues)), rules_(std::move(rules)) {}

  std::size_t size() const { return issues_.size(); }
  const std::vector<RuleEdge>& rules() const { return rules_; }
  const EncodedIssue& issue(std::uint32_t i) const { return issues_[i]; }

  bool rule_satisfied(const RuleEdge& r) const {
    return r.type == DependencyType::requires_ ? requires_satisfied(issues_[r.from], issues_[r.to])
                                               : parent_child_satisfied(issues_[r.from], issues_[r.to]);
  }

  /// `fixed[i]` keeps issue i's assignment; `active[r]` selects rules.
  bool feasible(const std::vector<char>& fixed, const std::vector<char>& active, const Deadline& deadline) const {
    Builder b(*this, fixed);
    for (std::size_t r = 0; r < rules_.size(); ++r) {
      if (active[r] && !b.add_rule(rules_[r])) return false;
    }
    b.add_bounds();
    return b.solve(deadline);
  }

  bool feasible(const std::vector<char>& fixed, const Deadline& deadline) const {
    return feasible(fixed, std::vector<char>(rules_.size(), 1), deadline);
  }

 private:
  static constexpr std::int64_t kMaxPriority = 5;

  struct Term {
    int var = -1;  // -1: constant
    std::int64_t value = 0;
  };

  struct Diff {  // x - y <= k over variable ids (0 is the zero node)
    int x;
    int y;
    std::int64_t k;
  };

  class Builder {
   public:
    Builder(const ReleaseCsp& csp, const std::vector<char>& fixed) : csp_(csp), fixed_(fixed) {}

    bool add_rule(const RuleEdge& r) {
      auto rel_from = rel(r.from);
      auto rel_to = rel(r.to);
      auto prio_from = prio(r.from);
      auto prio_to = prio(r.to);
      if (r.type == DependencyType::requires_) {
        if (!add_conj(make(rel_to, rel_from, 0))) return false;
        if (prio_from && prio_to && !add_conj(make(*prio_to, *prio_from, 0))) return false;
        return true;
      }
      // parent = from, child = to
      Diff release = make(rel_to, rel_from, 0);
      std::optional<Diff> priority;
      if (prio_from && prio_to) priority = make(*prio_from, *prio_to, -1);
      auto release_const = constant(release);
      auto priority_const = priority ? constant(*priority) : std::optional<bool>(false);
      if (release_const == true || priority_const == true) return true;
      if (release_const == false && priority_const == false) return false;
      if (release_const == false) return add_conj(*priority);
      if (priority_const == false) return add_conj(release);
      disj_.emplace_back(release, *priority);
      return true;
    }

    void add_bounds() {
      for (auto [issue, slot] : slots_) {
        int r = 1 + 2 * slot;
        int p = 2 + 2 * slot;
        conj_.push_back({r, 0, kTopRelease});
        conj_.push_back({0, r, 0});
        conj_.push_back({p, 0, kMaxPriority});
        conj_.push_back({0, p, 0});
      }
    }

    bool solve(const Deadline& deadline) {
      std::vector<Diff> system = conj_;
      return search(system, 0, deadline);
    }

   private:
    Term rel(std::uint32_t i) {
      if (fixed_[i]) return {-1, csp_.issues_[i].rel};
      return {1 + 2 * slot(i), 0};
    }

    std::optional<Term> prio(std::uint32_t i) {
      if (fixed_[i]) {
        if (!csp_.issues_[i].prio) return std::nullopt;
        return Term{-1, *csp_.issues_[i].prio};
      }
      return Term{2 + 2 * slot(i), 0};
    }

    int slot(std::uint32_t i) {
      auto [it, inserted] = slots_.try_emplace(i, static_cast<int>(slots_.size()));
      return it->second;
    }

    // (x + cx) - (y + cy) <= k
    static Diff make(Term x, Term y, std::int64_t k) {
      return {x.var < 0 ? 0 : x.var, y.var < 0 ? 0 : y.var, k - x.value + y.value};
    }

    static std::optional<bool> constant(const Diff& d) {
      if (d.x == 0 && d.y == 0) return 0 <= d.k;
      return std::nullopt;
    }

    bool add_conj(const Diff& d) {
      if (auto c = constant(d)) return *c;
      conj_.push_back(d);
      return true;
    }

    bool search(std::vector<Diff>& system, std::size_t next, const Deadline& deadline) {
      if (!consistent(system, deadline)) return false;
      if (next == disj_.size()) return true;
      for (const Diff& option : {disj_[next].first, disj_[next].second}) {
        system.push_back(option);
        bool ok = search(system, next + 1, deadline);
        system.pop_back();
        if (ok) return true;
      }
      return false;
    }

    // Negative-cycle check (queue-based Bellman-Ford from a virtual source).
    bool consistent(const std::vector<Diff>& system, const Deadline& deadline) const {
      const int n = 1 + 2 * static_cast<int>(slots_.size());
      std::vector<std::vector<std::pair<int, std::int64_t>>> out(static_cast<std::size_t>(n));
      for (const auto& d : system) {
        if (d.x == d.y) {
          if (d.k < 0) return false;
          continue;
        }
        out[static_cast<std::size_t>(d.y)].emplace_back(d.x, d.k);
      }
      std::vector<std::int64_t> dist(static_cast<std::size_t>(n), 0);
      std::vector<int> relaxed(static_cast<std::size_t>(n), 0);
      std::vector<char> queued(static_cast<std::size_t>(n), 1);
      std::deque<int> queue;
      for (int v = 0; v < n; ++v) queue.push_back(v);
      std::size_t steps = 0;
      while (!queue.empty()) {
        if ((++steps & 1023) == 0) deadline.check();
        int u = queue.front();
        queue.pop_front();
        queued[static_cast<std::size_t>(u)] = 0;
        for (auto [v, w] : out[static_cast<std::size_t>(u)]) {
          auto cand = dist[static_cast<std::size_t>(u)] + w;
          if (cand >= dist[static_cast<std::size_t>(v)]) continue;
          dist[static_cast<std::size_t>(v)] = cand;
          if (++relaxed[static_cast<std::size_t>(v)] > n) return false;
          if (!queued[static_cast<std::size_t>(v)]) {
            queued[static_cast<std::size_t>(v)] = 1;
            queue.push_back(v);
          }
        }
      }
      return true;
    }

    const ReleaseCsp& csp_;
    const std::vector<char>& fixed_;
    std::map<std::uint32_t, int> slots_;
    std::vector<Diff> conj_;
    std::vector<std::pair<Diff, Diff>> disj_;
  };

  std::vector<EncodedIssue> issues_;
  std::vector<RuleEdge> rules_;
};

struct DiagnoseOptions {
  std::chrono::milliseconds time_limit{5000};
  bool diagnose = true;
};

struct DiagnosisResult {
  bool consistent = true;
  IssueKey center;  // after duplicate merging
  std::vector<RuleViolation> violations;
  std::size_t cross_project_skipped = 0;
  std::vector<Dependency> diag_dependencies;
  std::vector<IssueKey> diag_issues;
  bool diagnosed = false;
  bool dep_diag_timed_out = false;
  bool issue_diag_timed_out = false;
  std::optional<std::string> issue_diag_error;
  std::chrono::microseconds elapsed{0};

  std::size_t requires_violations() const {
    return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                  [](const auto& v) { return v.rule == Rule::requires_rule; }));
  }
  std::size_t parent_child_violations() const { return violations.size() - requires_violations(); }
};

namespace detail {

inline int priority_rank(const std::optional<int>& p) { return p ? *p : 6; }

}  // namespace detail

/// Consistency check of `sub` around `r0` and, when inconsistent and
/// requested, a dependency diagnosis and an issue diagnosis, each under its
/// own time budget. `r0` is never part of the issue diagnosis.
inline DiagnosisResult diagnose(const IssueKey& r0, const IssueGraph& sub, const DiagnoseOptions& options = {}) {
  auto start = std::chrono::steady_clock::now();
  auto finish = [&](DiagnosisResult& r) {
    r.elapsed = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
  };
  if (!sub.contains(r0)) throw NotFoundError("unknown issue " + r0.str());

  auto merged = merge_duplicates_mapped(sub);
  const IssueGraph& g = merged.graph;
  DiagnosisResult result;
  result.center = merged.representative.at(r0);

  auto report = check_consistency(g);
  result.violations = std::move(report.violations);
  result.cross_project_skipped = report.cross_project_skipped;
  result.consistent = result.violations.empty();
  if (result.consistent || !options.diagnose) {
    finish(result);
    return result;
  }
  result.diagnosed = true;

  std::vector<EncodedIssue> encoded;
  encoded.reserve(g.size());
  for (const auto& i : g.issues()) encoded.push_back(encode(*i));
  auto edges = rule_edges(g);
  std::vector<ReleaseCsp::RuleEdge> rules;
  rules.reserve(edges.size());
  for (auto e : edges) {
    const auto& d = g.edge(e);
    rules.push_back({g.id_of(d.from), g.id_of(d.to), d.type});
  }
  ReleaseCsp csp(std::move(encoded), std::move(rules));

  // Dependency diagnosis: assignments fixed, dependencies are the candidates,
  // those touching the most urgent issues ranked most important.
  {
    std::vector<std::size_t> order(edges.size());
    std::iota(order.begin(), order.end(), 0);
    auto urgency = [&](std::size_t r) {
      const auto& re = csp.rules()[r];
      return std::min(detail::priority_rank(csp.issue(re.from).prio), detail::priority_rank(csp.issue(re.to).prio));
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      auto ua = urgency(a);
      auto ub = urgency(b);
      if (ua != ub) return ua < ub;
      const auto& da = g.edge(edges[a]);
      const auto& db = g.edge(edges[b]);
      return std::tie(da.from, da.to) < std::tie(db.from, db.to);
    });
    auto deadline = Deadline::after(options.time_limit);
    try {
      auto diag = fastdiag_indices(order.size(), [&](const std::vector<char>& kept) {
        deadline.check();
        for (std::size_t i = 0; i < order.size(); ++i) {
          if (kept[i] && !csp.rule_satisfied(csp.rules()[order[i]])) return false;
        }
        return true;
      });
      for (auto i : diag) result.diag_dependencies.push_back(g.edge(edges[order[i]]));
      std::sort(result.diag_dependencies.begin(), result.diag_dependencies.end(),
                [](const Dependency& a, const Dependency& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });
    } catch (const DeadlineExceeded&) {
      result.dep_diag_timed_out = true;
    }
  }

  // Issue diagnosis: dependencies and the center's assignment are background;
  // every other issue's assignment is a candidate, most urgent first.
  {
    NodeId center = g.id_of(result.center);
    std::vector<std::uint32_t> order;
    for (std::uint32_t i = 0; i < g.size(); ++i) {
      if (i != center) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      auto pa = detail::priority_rank(csp.issue(a).prio);
      auto pb = detail::priority_rank(csp.issue(b).prio);
      if (pa != pb) return pa < pb;
      return csp.issue(a).key < csp.issue(b).key;
    });
    auto deadline = Deadline::after(options.time_limit);
    std::vector<char> fixed(g.size(), 0);
    try {
      auto diag = fastdiag_indices(order.size(), [&](const std::vector<char>& kept) {
        deadline.check();
        std::fill(fixed.begin(), fixed.end(), 0);
        fixed[center] = 1;
        for (std::size_t i = 0; i < order.size(); ++i) fixed[order[i]] = kept[i];
        return csp.feasible(fixed, deadline);
      });
      for (auto i : diag) result.diag_issues.push_back(csp.issue(order[i]).key);
      std::sort(result.diag_issues.begin(), result.diag_issues.end());
    } catch (const DeadlineExceeded&) {
      result.issue_diag_timed_out = true;
    } catch (const ValidationError&) {
      result.issue_diag_error = "no assignment of the other issues satisfies the dependencies of " + result.center.str();
    }
  }

  finish(result);
  return result;
}

}  // namespace depgraph
