#pragma once

// Reference implementations shared by the unit tests and the acceptance
// binary. Each one is deliberately naive.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "support.hpp"

namespace testing_support {

// ---- rule truth tables -------------------------------------------------------

// Index ((ra*4 + pa)*4 + rb)*4 + pb, A = from, B = to.
// Release order: unscheduled, 1.0, 2.0, 3.0. Priority order: none, P0, P2, P5.
// '1' = rule satisfied. Tabulated independently of the library.
inline const std::string kRequiresTable =
    "1111111111111111110011001100110011101110111011101111111111111111"
    "0000111100000000000011000000000000001110000000000000111100000000"
    "0000111111110000000011001100000000001110111000000000111111110000"
    "0000111111111111000011001100110000001110111011100000111111111111";

// parent_child, from = parent.
inline const std::string kParentChildTable =
    "1111111111111111111111111111111111111111111111111111111111111111"
    "0000111100000000001111110011001100011111000100010000111100000000"
    "0000111111110000001111111111001100011111111100010000111111110000"
    "0000111111111111001111111111111100011111111111110000111111111111";

inline const std::vector<std::optional<std::string>> kTableReleases{std::nullopt, "1.0", "2.0", "3.0"};
inline const std::vector<std::optional<int>> kTablePriorities{std::nullopt, 0, 2, 5};

// ---- preferred diagnosis by enumeration ---------------------------------------

// Monotone oracle over candidate flags: inconsistent iff some conflict set is
// fully kept. Background constraints are folded into the conflicts.
struct ConflictModel {
  std::size_t n = 0;
  std::vector<std::vector<std::size_t>> conflicts;

  bool consistent(const std::vector<char>& kept) const {
    for (const auto& c : conflicts) {
      if (std::all_of(c.begin(), c.end(), [&](std::size_t i) { return kept[i] != 0; })) return false;
    }
    return true;
  }
};

// Complement of the consistent subset whose membership vector, read most
// important first, is lexicographically largest.
inline std::vector<std::size_t> brute_force_preferred_diagnosis(
    std::size_t n, const std::function<bool(const std::vector<char>&)>& consistent) {
  std::vector<char> best;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<char> kept(n);
    for (std::size_t i = 0; i < n; ++i) kept[i] = static_cast<char>(mask >> i & 1);
    if (!consistent(kept)) continue;
    if (best.empty() || kept > best) best = kept;
  }
  std::vector<std::size_t> diag;
  for (std::size_t i = 0; i < n; ++i) {
    if (!best[i]) diag.push_back(i);
  }
  return diag;
}

inline ConflictModel random_conflicts(std::mt19937_64& rng, std::size_t max_n) {
  ConflictModel m;
  m.n = 1 + rng() % max_n;
  std::size_t count = 1 + rng() % 5;
  for (std::size_t c = 0; c < count; ++c) {
    std::vector<std::size_t> set;
    std::size_t size = 1 + rng() % 3;
    for (std::size_t k = 0; k < size; ++k) set.push_back(rng() % m.n);
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    m.conflicts.push_back(set);
  }
  return m;
}

// ---- release feasibility by enumeration ---------------------------------------

// Free issues range over every release already in use (plus 0 and
// unscheduled) and priorities 0..5. Rule clauses only compare values, so
// those releases suffice.
inline bool brute_force_feasible(const std::vector<EncodedIssue>& issues,
                                 const std::vector<ReleaseCsp::RuleEdge>& rules, const std::vector<char>& fixed) {
  std::set<std::int64_t> rel_values{0, kTopRelease};
  for (const auto& i : issues) rel_values.insert(i.rel);
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (!fixed[i]) free.push_back(i);
  }
  std::vector<std::int64_t> rels(rel_values.begin(), rel_values.end());
  std::vector<EncodedIssue> cur = issues;
  std::function<bool(std::size_t)> rec = [&](std::size_t k) -> bool {
    if (k == free.size()) {
      for (const auto& r : rules) {
        bool ok = r.type == DependencyType::requires_ ? requires_satisfied(cur[r.from], cur[r.to])
                                                      : parent_child_satisfied(cur[r.from], cur[r.to]);
        if (!ok) return false;
      }
      return true;
    }
    for (auto rel : rels) {
      for (int p = 0; p <= 5; ++p) {
        cur[free[k]].rel = rel;
        cur[free[k]].prio = p;
        if (rec(k + 1)) return true;
      }
    }
    return false;
  };
  return rec(0);
}

// ---- mention grammar as a regular expression ----------------------------------

inline std::vector<std::string> regex_mentions(const std::string& text, const std::vector<std::string>& pids) {
  std::string alt;
  for (const auto& p : pids) alt += (alt.empty() ? "" : "|") + p;
  std::regex re("(?:^|[^A-Za-z0-9])((?:" + alt + ")-[1-9][0-9]{0,4})(?![0-9])");
  std::vector<std::string> out;
  for (std::sregex_iterator it(text.begin(), text.end(), re), end; it != end; ++it) out.push_back((*it)[1].str());
  return out;
}

// ---- ranking procedure read line by line --------------------------------------

inline std::vector<std::pair<IssueKey, double>> interpret_ranking(const IssueKey& r0,
                                                                  const std::vector<RankedProposal>& cands,
                                                                  const IssueGraph& g,
                                                                  const std::set<KeyPair>& existing,
                                                                  const std::set<KeyPair>& rejected,
                                                                  const ContextParams& params) {
  std::vector<std::pair<IssueKey, double>> out;
  for (const auto& c : cands) {
    if (existing.contains(KeyPair(c.from, c.to))) continue;
    if (rejected.contains(KeyPair(c.from, c.to))) continue;
    double s = c.base_score;
    auto d = distance(g, r0, c.to);
    if (!d || *d > params.min_depth) s *= params.f_depth;
    auto id = g.find(c.to);
    if (id && g.degree(*id) == 0) s *= params.f_orphan;
    for (const auto& p : params.properties) {
      if (id && property(g.issue(*id), p.name) == p.value) s *= p.factor;
    }
    out.emplace_back(c.to, s);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

}  // namespace testing_support
