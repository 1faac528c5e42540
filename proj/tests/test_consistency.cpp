#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "oracles.hpp"

using namespace depgraph;
using namespace testing_support;

namespace {

EncodedIssue enc(const std::optional<std::string>& rel, std::optional<int> prio) {
  EncodedIssue e;
  e.key = K("A-1");
  e.prio = prio;
  e.rel = rel ? Version::parse(*rel).encode() : kTopRelease;
  return e;
}

std::vector<std::tuple<std::string, std::string, std::string>> edge_multiset(const IssueGraph& g) {
  std::vector<std::tuple<std::string, std::string, std::string>> out;
  for (const auto& d : g.edges()) out.emplace_back(d.from.str(), d.to.str(), std::string(to_string(d.type)));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Rules, TruthTables) {
  std::size_t idx = 0;
  for (const auto& ra : kTableReleases) {
    for (auto pa : kTablePriorities) {
      for (const auto& rb : kTableReleases) {
        for (auto pb : kTablePriorities) {
          auto a = enc(ra, pa);
          auto b = enc(rb, pb);
          EXPECT_EQ(requires_satisfied(a, b), kRequiresTable[idx] == '1') << idx;
          EXPECT_EQ(parent_child_satisfied(a, b), kParentChildTable[idx] == '1') << idx;
          ++idx;
        }
      }
    }
  }
  EXPECT_EQ(idx, kRequiresTable.size());
}

TEST(Rules, RequiredIssueWithLowerPriority) {
  auto a = scheduled("QTBUG-27426", 0, std::nullopt);
  auto b = scheduled("QTBUG-28416", 2, std::nullopt);
  auto v = check_dependency(dep("QTBUG-27426", "QTBUG-28416", DependencyType::requires_), a, b);
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(v->rule, Rule::requires_rule);
}

TEST(Rules, UnscheduledChildOfScheduledParent) {
  auto parent = scheduled("QTBUG-72510", 2, "5.13");
  auto child = scheduled("QTBUG-72511", 2, std::nullopt);
  auto v = check_dependency(dep("QTBUG-72510", "QTBUG-72511", DependencyType::parent_child), parent, child);
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(v->rule, Rule::parent_child_rule);
}

TEST(Rules, EqualReleaseAndPriorityIsConsistent) {
  auto a = scheduled("A-1", 1, "5.12");
  auto b = scheduled("A-2", 1, "5.12");
  EXPECT_FALSE(check_dependency(dep("A-1", "A-2", DependencyType::requires_), a, b));
  EXPECT_THROW(check_dependency(dep("A-1", "A-2", DependencyType::relates), a, b), ValidationError);
}

TEST(CheckConsistency, CountsAndCrossProjectSkip) {
  std::vector<Issue> issues{scheduled("A-1", 0, "1.0"), scheduled("A-2", 2, "1.0"), scheduled("B-1", 2, "1.0")};
  std::vector<Dependency> deps{dep("A-1", "A-2", DependencyType::relates)};
  EXPECT_TRUE(check_consistency(IssueGraph::build(issues, deps)).violations.empty());

  deps = {dep("A-1", "A-2", DependencyType::requires_), dep("A-1", "B-1", DependencyType::requires_)};
  auto r = check_consistency(IssueGraph::build(issues, deps));
  EXPECT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.cross_project_skipped, 1u);
  EXPECT_EQ(r.count(Rule::requires_rule), 1u);
}

TEST(MergeDuplicates, InheritsDependencies) {
  auto b = make_issue("A-2");
  b.resolution = "Duplicate";
  std::vector<Issue> issues{make_issue("A-1"), b, make_issue("A-3")};
  std::vector<Dependency> deps{dep("A-1", "A-2", DependencyType::duplicates), dep("A-2", "A-3", DependencyType::requires_)};
  auto m = merge_duplicates(IssueGraph::build(issues, deps));
  EXPECT_EQ(keys_of(m), (std::vector<std::string>{"A-1", "A-3"}));
  ASSERT_EQ(m.edge_count(), 1u);
  EXPECT_EQ(m.edge(0).from, K("A-1"));
  EXPECT_EQ(m.edge(0).type, DependencyType::requires_);
}

TEST(MergeDuplicates, RepresentativeIsTheNonDuplicateMember) {
  auto a = make_issue("A-1");
  a.resolution = "Duplicate";
  std::vector<Issue> issues{a, make_issue("A-2")};
  std::vector<Dependency> deps{dep("A-1", "A-2", DependencyType::duplicates)};
  auto m = merge_duplicates_mapped(IssueGraph::build(issues, deps));
  EXPECT_EQ(m.representative.at(K("A-1")), K("A-2"));
}

TEST(MergeDuplicates, TriangleCollapses) {
  std::vector<Dependency> deps{dep("A-1", "A-2", DependencyType::duplicates),
                               dep("A-2", "A-3", DependencyType::duplicates),
                               dep("A-1", "A-3", DependencyType::duplicates)};
  auto m = merge_duplicates(IssueGraph::build(numbered(3), deps));
  EXPECT_EQ(m.size(), 1u);
  EXPECT_EQ(m.edge_count(), 0u);
}

TEST(MergeDuplicates, UnionDeduplicates) {
  std::vector<Dependency> deps{dep("A-1", "A-2", DependencyType::duplicates),
                               dep("A-2", "A-3", DependencyType::requires_),
                               dep("A-1", "A-3", DependencyType::requires_)};
  auto m = merge_duplicates(IssueGraph::build(numbered(3), deps));
  EXPECT_EQ(m.size(), 2u);
  EXPECT_EQ(m.edge_count(), 1u);
}

TEST(MergeDuplicates, IdempotentAndOrderIndependent) {
  std::mt19937_64 rng(8);
  for (int round = 0; round < 100; ++round) {
    std::size_t n = 2 + rng() % 20;
    auto issues = numbered(n);
    for (auto& i : issues) {
      if (rng() % 3 == 0) i.resolution = "Duplicate";
    }
    std::vector<Dependency> deps;
    for (std::size_t e = 0; e < 2 * n; ++e) {
      auto a = 1 + rng() % n, b = 1 + rng() % n;
      if (a == b) continue;
      auto t = std::array{DependencyType::duplicates, DependencyType::requires_, DependencyType::relates}[rng() % 3];
      deps.push_back(dep("A-" + std::to_string(a), "A-" + std::to_string(b), t));
    }
    auto m = merge_duplicates(IssueGraph::build(issues, deps));
    auto mm = merge_duplicates(m);
    EXPECT_EQ(keys_of(mm), keys_of(m));
    EXPECT_EQ(edge_multiset(mm), edge_multiset(m));

    std::shuffle(issues.begin(), issues.end(), rng);
    std::shuffle(deps.begin(), deps.end(), rng);
    auto shuffled = merge_duplicates(IssueGraph::build(issues, deps));
    EXPECT_EQ(keys_of(shuffled), keys_of(m));
    // Coalescing keeps one direction per pair and type; compare unordered.
    auto unordered = [](const IssueGraph& g) {
      std::vector<std::tuple<std::string, std::string, std::string>> out;
      for (const auto& [a, b, t] : edge_multiset(g)) out.emplace_back(std::min(a, b), std::max(a, b), t);
      std::sort(out.begin(), out.end());
      return out;
    };
    EXPECT_EQ(unordered(shuffled), unordered(m));
  }
}

TEST(Diagnose, ConsistentSubgraph) {
  std::vector<Issue> issues{scheduled("A-1", 1, "5.12"), scheduled("A-2", 1, "5.12")};
  std::vector<Dependency> deps{dep("A-1", "A-2", DependencyType::requires_)};
  auto r = diagnose(K("A-1"), IssueGraph::build(issues, deps));
  EXPECT_TRUE(r.consistent);
  EXPECT_TRUE(r.diag_dependencies.empty());
  EXPECT_TRUE(r.diag_issues.empty());
  EXPECT_FALSE(r.dep_diag_timed_out || r.issue_diag_timed_out);
  EXPECT_LT(r.elapsed, std::chrono::seconds(5));
}

TEST(Diagnose, ChainRequiringLowerPriority) {
  std::vector<Issue> issues{scheduled("A-1", 0, "1.0"), scheduled("A-2", 2, "1.0")};
  std::vector<Dependency> deps{dep("A-1", "A-2", DependencyType::requires_)};
  auto r = diagnose(K("A-1"), IssueGraph::build(issues, deps));
  EXPECT_FALSE(r.consistent);
  ASSERT_EQ(r.diag_dependencies.size(), 1u);
  EXPECT_EQ(r.diag_dependencies[0].to, K("A-2"));
  EXPECT_EQ(r.diag_issues, (std::vector<IssueKey>{K("A-2")}));

  auto plain = diagnose(K("A-1"), IssueGraph::build(issues, deps), {.diagnose = false});
  EXPECT_FALSE(plain.consistent);
  EXPECT_FALSE(plain.diagnosed);
  EXPECT_TRUE(plain.diag_issues.empty());
}

TEST(Diagnose, IndependentViolationsEachNeedOneRemoval) {
  std::vector<Issue> issues;
  std::vector<Dependency> deps;
  for (int k = 0; k < 6; ++k) {
    auto a = "A-" + std::to_string(2 * k + 1);
    auto b = "A-" + std::to_string(2 * k + 2);
    issues.push_back(scheduled(a, 1, "2.0"));
    issues.push_back(scheduled(b, 1, k % 2 ? "3.0" : "2.0"));
    deps.push_back(dep(a, b, k % 3 == 2 ? DependencyType::parent_child : DependencyType::requires_));
  }
  auto g = IssueGraph::build(issues, deps);
  auto r = diagnose(K("A-1"), g);
  EXPECT_EQ(r.violations.size(), 3u);
  EXPECT_EQ(r.diag_dependencies.size(), r.violations.size());
}

TEST(Diagnose, CenterNeverInIssueDiagnosis) {
  std::mt19937_64 rng(13);
  for (int round = 0; round < 100; ++round) {
    std::size_t n = 2 + rng() % 8;
    std::vector<Issue> issues;
    for (std::size_t i = 1; i <= n; ++i) {
      std::optional<int> prio;
      if (rng() % 4) prio = static_cast<int>(rng() % 6);
      std::optional<std::string> rel;
      if (rng() % 4) rel = std::to_string(1 + rng() % 3) + ".0";
      issues.push_back(scheduled("A-" + std::to_string(i), prio, rel));
    }
    std::vector<Dependency> deps;
    for (std::size_t e = 0; e < n + 2; ++e) {
      auto a = 1 + rng() % n, b = 1 + rng() % n;
      if (a == b) continue;
      deps.push_back(dep("A-" + std::to_string(a), "A-" + std::to_string(b),
                         rng() % 2 ? DependencyType::requires_ : DependencyType::parent_child));
    }
    auto g = IssueGraph::build(issues, deps);
    auto r0 = K("A-" + std::to_string(1 + rng() % n));
    auto r = diagnose(r0, g);
    EXPECT_EQ(std::count(r.diag_issues.begin(), r.diag_issues.end(), r0), 0);
    if (r.consistent) {
      EXPECT_TRUE(r.diag_dependencies.empty() && r.diag_issues.empty());
    } else {
      EXPECT_FALSE(r.diag_dependencies.empty());
      EXPECT_TRUE(r.issue_diag_error || !r.diag_issues.empty());
    }
  }
}

TEST(Diagnose, UnknownCenter) {
  EXPECT_THROW(diagnose(K("A-9"), IssueGraph::build(numbered(2), {})), NotFoundError);
}

TEST(Diagnose, ConsistencyIsAntitoneInDepth) {
  GeneratorParams p;
  p.seed = 3;
  p.issues = 400;
  p.dependencies = 380;
  p.rule_fraction = 0.5;
  auto gen = generate_repository(p);
  auto g = IssueGraph::build(gen.issues, gen.dependencies);
  for (NodeId c = 0; c < g.size(); c += 7) {
    if (g.is_orphan(c)) continue;
    bool inconsistent = false;
    for (std::uint32_t d = 1; d <= 6; ++d) {
      auto sub = p_depth_subgraph(g, g.issue(c).key, d);
      bool now = !check_consistency(merge_duplicates(sub)).violations.empty();
      if (inconsistent) {
        EXPECT_TRUE(now);
      }
      inconsistent = now;
    }
  }
}

TEST(ReleaseCsp, MatchesEnumeration) {
  std::mt19937_64 rng(77);
  const std::vector<std::optional<std::string>> rels{std::nullopt, "1.0", "2.0", "3.0"};
  for (int round = 0; round < 300; ++round) {
    std::size_t n = 2 + rng() % 4;
    std::vector<EncodedIssue> issues;
    for (std::size_t i = 0; i < n; ++i) {
      auto e = enc(rels[rng() % rels.size()], rng() % 5 ? std::optional<int>(static_cast<int>(rng() % 6)) : std::nullopt);
      e.key = K("A-" + std::to_string(i + 1));
      issues.push_back(e);
    }
    std::vector<ReleaseCsp::RuleEdge> rules;
    for (std::size_t e = 0; e < n + 1; ++e) {
      auto a = static_cast<std::uint32_t>(rng() % n), b = static_cast<std::uint32_t>(rng() % n);
      if (a == b) continue;
      rules.push_back({a, b, rng() % 2 ? DependencyType::requires_ : DependencyType::parent_child});
    }
    std::vector<char> fixed(n);
    std::size_t free = 0;
    for (auto& f : fixed) {
      f = free < 3 && rng() % 2 ? 0 : 1;
      free += f == 0;
    }
    ReleaseCsp csp(issues, rules);
    EXPECT_EQ(csp.feasible(fixed, Deadline::never()), brute_force_feasible(issues, rules, fixed)) << round;
  }
}

TEST(ReleaseCsp, DeadlineInterruptsLargeSystem) {
  std::vector<EncodedIssue> issues;
  std::vector<ReleaseCsp::RuleEdge> rules;
  for (std::uint32_t i = 0; i < 3000; ++i) {
    EncodedIssue e;
    e.key = K("A-" + std::to_string(i + 1));
    e.prio = 0;
    e.rel = 1;
    issues.push_back(e);
    if (i > 0) rules.push_back({i - 1, i, DependencyType::requires_});
  }
  ReleaseCsp csp(issues, rules);
  std::vector<char> fixed(issues.size(), 0);
  auto deadline = Deadline::after(std::chrono::milliseconds(0));
  std::this_thread::sleep_for(std::chrono::milliseconds(1));
  EXPECT_THROW(csp.feasible(fixed, deadline), DeadlineExceeded);
}
