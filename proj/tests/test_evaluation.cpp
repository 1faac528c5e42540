#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support.hpp"

using namespace depgraph;
using namespace testing_support;

namespace {

struct LabeledCorpus {
  std::vector<IssuePtr> issues;
  std::vector<LabeledPair> pairs;
};

// Planted near-copies as positives, random other pairs as negatives.
LabeledCorpus labeled_corpus(std::uint64_t seed, std::size_t positives, std::size_t negatives,
                             double noise = 0.0) {
  GeneratorParams p;
  p.seed = seed;
  p.issues = 2 * positives + 2 * negatives + 50;
  p.dependencies = 0;
  p.duplicate_pairs = positives;
  p.references = positives / 5;
  auto gen = generate_repository(p);
  LabeledCorpus c;
  for (auto& i : gen.issues) c.issues.push_back(std::make_shared<const Issue>(std::move(i)));
  std::set<KeyPair> taken;
  for (const auto& [a, b] : gen.duplicates) {
    c.pairs.push_back({a, b, true});
    taken.insert(KeyPair(a, b));
  }
  std::mt19937_64 rng(seed + 1);
  while (c.pairs.size() < positives + negatives) {
    const auto& a = c.issues[rng() % c.issues.size()]->key;
    const auto& b = c.issues[rng() % c.issues.size()]->key;
    if (a == b || !taken.insert(KeyPair(a, b)).second) continue;
    c.pairs.push_back({a, b, false});
  }
  for (auto& pair : c.pairs) {
    if (static_cast<double>(rng() % 1000) < noise * 1000.0) pair.duplicate = !pair.duplicate;
  }
  return c;
}

}  // namespace

TEST(HillClimb, MonotoneDecreasingReturnsLowest) {
  auto r = hill_climb_threshold([](double t) { return 1.0 - t; }, 0.5);
  EXPECT_DOUBLE_EQ(r.best, 0.1);
}

TEST(HillClimb, UnimodalPeak) {
  auto f = [](double t) { return 1.0 - std::abs(t - 0.6); };
  for (double start : {0.1, 0.3, 0.5, 0.9, 1.0}) {
    auto r = hill_climb_threshold(f, start);
    EXPECT_NEAR(r.best, 0.6, 0.01 + 1e-9) << start;
  }
  // Off-grid peak: the refinement recovers the grid optimum.
  auto g = [](double t) { return -std::abs(t - 0.437); };
  int grid_best = 10;
  for (int t = 10; t <= 100; ++t) {
    if (g(t / 100.0) > g(grid_best / 100.0)) grid_best = t;
  }
  EXPECT_DOUBLE_EQ(hill_climb_threshold(g, 0.5).best, grid_best / 100.0);
}

TEST(HillClimb, FlatCurveTakesSmallestSampled) {
  auto r = hill_climb_threshold([](double) { return 0.5; }, 0.5);
  EXPECT_DOUBLE_EQ(r.best, r.curve.begin()->first);
  EXPECT_DOUBLE_EQ(r.best, 0.4);
}

TEST(Metrics, UndefinedRatiosAreFlagged) {
  Confusion c;
  c.tn = 5;
  auto m = metrics_of(c);
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0);
  EXPECT_TRUE(m.recall_undefined);
  EXPECT_TRUE(m.precision_undefined);
  EXPECT_EQ(m.recall, 0.0);
}

TEST(LabeledPairs, ParsingAndErrors) {
  std::istringstream ok(R"({"a":"A-1","b":"A-2","label":"duplicate"}
{"a":"A-1","b":"A-3","label":"not_duplicate"}
)");
  auto pairs = read_labeled_pairs(ok);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_TRUE(pairs[0].duplicate);
  EXPECT_FALSE(pairs[1].duplicate);
  std::istringstream bad(R"({"a":"A-1","b":"A-2","label":"maybe"})");
  EXPECT_THROW(read_labeled_pairs(bad), ValidationError);
}

TEST(Crossval, SeparableSetScoresPerfectly) {
  auto c = labeled_corpus(5, 60, 80);
  auto r = crossval(c.issues, c.pairs);
  EXPECT_DOUBLE_EQ(r.duplicate.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(r.duplicate.recall, 1.0);
  EXPECT_DOUBLE_EQ(r.duplicate.precision, 1.0);
  EXPECT_DOUBLE_EQ(r.duplicate.f_measure, 1.0);
  EXPECT_EQ(r.fold_thresholds.size(), 10u);
}

TEST(Crossval, AllNegativeWithSilentDetectors) {
  auto issues = numbered(30);
  for (std::size_t i = 0; i < issues.size(); ++i) issues[i].title = synthetic_word(i * 7);
  std::vector<IssuePtr> ptrs;
  for (auto& i : issues) ptrs.push_back(std::make_shared<const Issue>(i));
  std::vector<LabeledPair> pairs;
  for (int i = 1; i <= 20; ++i) pairs.push_back({K("A-" + std::to_string(i)), K("A-" + std::to_string(i + 10)), false});
  auto r = crossval(ptrs, pairs);
  for (const auto* m : {&r.reference, &r.duplicate, &r.either, &r.both}) {
    EXPECT_DOUBLE_EQ(m->accuracy, 1.0);
    EXPECT_TRUE(m->recall_undefined);
    EXPECT_EQ(m->recall, 0.0);
  }
}

TEST(Crossval, TooFewExamplesOfAClass) {
  auto c = labeled_corpus(6, 5, 40);
  EXPECT_THROW(crossval(c.issues, c.pairs), ValidationError);
  CrossvalOptions three{.k = 3};
  EXPECT_NO_THROW(crossval(c.issues, c.pairs, three));
}

TEST(Crossval, NoisyLabelsMatchConfusionOracle) {
  auto c = labeled_corpus(7, 80, 120, 0.1);

  // Oracle built outside the harness: its own model, reference scan and counts.
  std::vector<TokenBag> bags;
  for (const auto& i : c.issues) bags.push_back(text_preprocess(*i));
  auto model = TfidfModel::fit(bags);
  std::set<IssueKey> known;
  for (const auto& i : c.issues) known.insert(i->key);
  std::set<KeyPair> referenced;
  for (const auto& i : c.issues) {
    for (const auto& comment : i->comments) {
      for (const auto& [k, text] : find_mentions(comment, {"QTBUG", "QBS", "QTCREATORBUG"})) {
        if (known.contains(k) && k != i->key) referenced.insert(KeyPair(i->key, k));
      }
    }
  }
  auto oracle = [&](const std::vector<double>& thr_of_pair) {
    std::array<std::array<std::size_t, 4>, 4> counts{};  // detector x {tp, fp, tn, fn}
    for (std::size_t i = 0; i < c.pairs.size(); ++i) {
      bool truth = c.pairs[i].duplicate;
      bool ref = referenced.contains(KeyPair(c.pairs[i].a, c.pairs[i].b));
      bool dup = cosine_sim(model, c.pairs[i].a, c.pairs[i].b) >= thr_of_pair[i];
      bool predicted[4] = {ref, dup, ref || dup, ref && dup};
      for (int d = 0; d < 4; ++d) {
        auto slot = predicted[d] ? (truth ? 0 : 1) : (truth ? 3 : 2);
        ++counts[d][slot];
      }
    }
    return counts;
  };
  auto check = [&](const CrossvalResult& r, const std::vector<double>& thr_of_pair) {
    auto counts = oracle(thr_of_pair);
    const Metrics* ms[4] = {&r.reference, &r.duplicate, &r.either, &r.both};
    for (int d = 0; d < 4; ++d) {
      EXPECT_EQ(ms[d]->counts.tp, counts[d][0]) << d;
      EXPECT_EQ(ms[d]->counts.fp, counts[d][1]) << d;
      EXPECT_EQ(ms[d]->counts.tn, counts[d][2]) << d;
      EXPECT_EQ(ms[d]->counts.fn, counts[d][3]) << d;
      double acc = static_cast<double>(counts[d][0] + counts[d][2]) / static_cast<double>(c.pairs.size());
      EXPECT_DOUBLE_EQ(ms[d]->accuracy, acc);
    }
  };

  auto fixed = crossval(c.issues, c.pairs, {.fixed_threshold = 0.5});
  check(fixed, std::vector<double>(c.pairs.size(), 0.5));

  auto tuned = crossval(c.issues, c.pairs);
  std::vector<double> per_pair;
  for (auto f : tuned.fold_of) per_pair.push_back(tuned.fold_thresholds[f]);
  check(tuned, per_pair);
  EXPECT_GT(tuned.duplicate.counts.fp + tuned.duplicate.counts.fn, 0u);
}

TEST(Crossval, FoldsAreStratifiedAndSeeded) {
  auto c = labeled_corpus(8, 40, 60);
  auto f1 = stratified_folds(c.pairs, 10, 3);
  EXPECT_EQ(f1, stratified_folds(c.pairs, 10, 3));
  EXPECT_NE(f1, stratified_folds(c.pairs, 10, 4));
  std::vector<std::size_t> pos(10), neg(10);
  for (std::size_t i = 0; i < c.pairs.size(); ++i) ++(c.pairs[i].duplicate ? pos : neg)[f1[i]];
  for (int f = 0; f < 10; ++f) {
    EXPECT_EQ(pos[f], 4u);
    EXPECT_EQ(neg[f], 6u);
  }
}

TEST(Sweep, AllConsistentRepository) {
  GeneratorParams p;
  p.seed = 9;
  p.issues = 200;
  p.dependencies = 150;
  p.schedule = Schedule::uniform;
  auto gen = generate_repository(p);
  auto rows = sweep_consistency(IssueGraph::build(gen.issues, gen.dependencies), {.max_depth = 4});
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    EXPECT_DOUBLE_EQ(r.consistent_pct, 100.0);
    EXPECT_EQ(r.dep_diag_count_avg, 0.0);
    EXPECT_EQ(r.issue_diag_count_avg, 0.0);
    EXPECT_DOUBLE_EQ(r.dep_diag_success_pct, 100.0);
  }
}

TEST(Sweep, IndependentViolatingPairs) {
  std::vector<Issue> issues;
  std::vector<Dependency> deps;
  for (int k = 0; k < 10; ++k) {
    auto a = "A-" + std::to_string(2 * k + 1);
    auto b = "A-" + std::to_string(2 * k + 2);
    issues.push_back(scheduled(a, 1, "1.0"));
    issues.push_back(scheduled(b, 1, "2.0"));
    deps.push_back(dep(a, b, DependencyType::requires_));
  }
  auto rows = sweep_consistency(IssueGraph::build(issues, deps), {.max_depth = 2});
  EXPECT_EQ(rows[0].graphs, 20u);
  EXPECT_EQ(rows[0].inconsistent, 20u);
  EXPECT_DOUBLE_EQ(rows[0].requires_inconsistent_avg, 1.0);
  EXPECT_DOUBLE_EQ(rows[0].dep_diag_count_avg, rows[0].requires_inconsistent_avg);
  EXPECT_DOUBLE_EQ(rows[0].consistent_pct, 0.0);
  EXPECT_DOUBLE_EQ(rows[0].issue_diag_success_pct, 100.0);
}

TEST(Sweep, MatchesSlowReference) {
  GeneratorParams p;
  p.seed = 12;
  p.issues = 150;
  p.dependencies = 140;
  p.rule_fraction = 0.6;
  auto gen = generate_repository(p);
  auto g = IssueGraph::build(gen.issues, gen.dependencies);
  const std::uint32_t depth = 4;
  SweepOptions opts{.max_depth = depth, .time_limit = std::chrono::milliseconds(60000)};
  auto rows = sweep_consistency(g, opts);

  // Reference: balls from pairwise distances, no reuse, plain averaging.
  for (std::uint32_t d = 1; d <= depth; ++d) {
    std::size_t graphs = 0, inconsistent = 0;
    double req = 0, pc = 0, depc = 0, issc = 0;
    std::size_t issue_ok = 0;
    for (NodeId c = 0; c < g.size(); ++c) {
      if (g.degree(c) == 0) continue;
      std::vector<NodeId> ball;
      for (NodeId v = 0; v < g.size(); ++v) {
        auto dist = distance(g, g.issue(c).key, g.issue(v).key);
        if (dist && *dist <= d) ball.push_back(v);
      }
      auto r = diagnose(g.issue(c).key, g.induced(ball), {opts.time_limit, true});
      ++graphs;
      if (r.consistent) continue;
      ++inconsistent;
      req += static_cast<double>(r.requires_violations());
      pc += static_cast<double>(r.parent_child_violations());
      depc += static_cast<double>(r.diag_dependencies.size());
      if (!r.issue_diag_error) {
        ++issue_ok;
        issc += static_cast<double>(r.diag_issues.size());
      }
    }
    const auto& row = rows[d - 1];
    EXPECT_EQ(row.graphs, graphs);
    EXPECT_EQ(row.inconsistent, inconsistent);
    if (inconsistent) {
      EXPECT_DOUBLE_EQ(row.requires_inconsistent_avg, req / static_cast<double>(inconsistent));
      EXPECT_DOUBLE_EQ(row.parent_child_inconsistent_avg, pc / static_cast<double>(inconsistent));
      EXPECT_DOUBLE_EQ(row.dep_diag_count_avg, depc / static_cast<double>(inconsistent));
    }
    if (issue_ok) {
      EXPECT_DOUBLE_EQ(row.issue_diag_count_avg, issc / static_cast<double>(issue_ok));
    }
  }
  EXPECT_GT(rows[depth - 1].inconsistent, 0u);

  opts.threads = 3;
  auto parallel = sweep_consistency(g, opts);
  for (std::uint32_t d = 0; d < depth; ++d) {
    EXPECT_EQ(parallel[d].inconsistent, rows[d].inconsistent);
    EXPECT_DOUBLE_EQ(parallel[d].issue_diag_count_avg, rows[d].issue_diag_count_avg);
  }

  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  auto text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(depth + 1));
}
