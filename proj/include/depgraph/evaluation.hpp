#pragma once

// Evaluation procedures: k-fold cross-validation of the detectors on labeled
// issue pairs, threshold tuning by hill climbing, and the per-depth
// consistency sweep.

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <thread>
#include <vector>

#include "depgraph/consistency.hpp"
#include "depgraph/detect_dup.hpp"
#include "depgraph/detect_ref.hpp"
#include "depgraph/graph.hpp"
#include "depgraph/jsonl.hpp"

namespace depgraph {

struct LabeledPair {
  IssueKey a;
  IssueKey b;
  bool duplicate = false;
};

inline std::vector<LabeledPair> read_labeled_pairs(std::istream& in) {
  std::vector<LabeledPair> out;
  std::vector<ParseError> errors;
  read_jsonl(
      in, "pairs",
      [](const json& j) {
        LabeledPair p;
        p.a = IssueKey::parse(detail::require_string(j, "a"));
        p.b = IssueKey::parse(detail::require_string(j, "b"));
        auto label = detail::require_string(j, "label");
        if (label == "duplicate") {
          p.duplicate = true;
        } else if (label != "not_duplicate") {
          throw ValidationError("label must be duplicate or not_duplicate, got '" + label + "'");
        }
        return p;
      },
      [&](LabeledPair p) { out.push_back(std::move(p)); }, errors);
  if (!errors.empty()) {
    throw ValidationError("pairs line " + std::to_string(errors[0].line) + ": " + errors[0].message);
  }
  return out;
}

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  void add(bool predicted, bool actual) {
    if (predicted) {
      ++(actual ? tp : fp);
    } else {
      ++(actual ? fn : tn);
    }
  }
  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const Confusion&) const = default;
};

/// Undefined ratios (zero denominators) are reported as 0 with a flag set.
struct Metrics {
  Confusion counts;
  double accuracy = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double f_measure = 0.0;
  bool recall_undefined = false;
  bool precision_undefined = false;
  bool f_undefined = false;
};

inline Metrics metrics_of(const Confusion& c) {
  Metrics m;
  m.counts = c;
  m.accuracy = c.total() ? static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total()) : 0.0;
  if (c.tp + c.fn) {
    m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  } else {
    m.recall_undefined = true;
  }
  if (c.tp + c.fp) {
    m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  } else {
    m.precision_undefined = true;
  }
  if (m.recall_undefined || m.precision_undefined || m.precision + m.recall == 0.0) {
    m.f_undefined = true;
  } else {
    m.f_measure = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return m;
}

struct ThresholdSearch {
  double best = 0.0;
  double best_f = 0.0;
  std::map<double, double> curve;  // sampled threshold -> F-measure
};

/// Hill climb over thresholds in [0.1, 1.0]: steps of 0.1 from `start` while
/// F strictly improves, then every 0.01 within 0.09 of the coarse optimum.
/// The result is the best sampled point; ties go to the lower threshold.
inline ThresholdSearch hill_climb_threshold(const std::function<double(double)>& f, double start) {
  constexpr int kLo = 10;
  constexpr int kHi = 100;
  std::map<int, double> sampled;  // hundredths
  auto eval = [&](int t) {
    auto it = sampled.find(t);
    if (it != sampled.end()) return it->second;
    double v = f(t / 100.0);
    sampled.emplace(t, v);
    return v;
  };
  int cur = std::clamp(static_cast<int>(std::lround(start * 100.0)), kLo, kHi);
  double cur_f = eval(cur);
  while (true) {
    int next = cur;
    double next_f = cur_f;
    for (int t : {cur - 10, cur + 10}) {
      if (t < kLo || t > kHi) continue;
      double v = eval(t);
      if (v > next_f) {
        next = t;
        next_f = v;
      }
    }
    if (next == cur) break;
    cur = next;
    cur_f = next_f;
  }
  for (int t = std::max(kLo, cur - 9); t <= std::min(kHi, cur + 9); ++t) eval(t);

  ThresholdSearch out;
  int best = -1;
  for (const auto& [t, v] : sampled) {
    out.curve.emplace(t / 100.0, v);
    if (best < 0 || v > out.best_f) {
      best = t;
      out.best_f = v;
    }
  }
  out.best = best / 100.0;
  return out;
}

struct ScoredPair {
  double score = 0.0;
  bool duplicate = false;
};

inline double f_measure_at(std::span<const ScoredPair> pairs, double thr) {
  Confusion c;
  for (const auto& p : pairs) c.add(p.score >= thr, p.duplicate);
  return metrics_of(c).f_measure;
}

inline ThresholdSearch tune_threshold(std::span<const ScoredPair> pairs, double start) {
  return hill_climb_threshold([&](double t) { return f_measure_at(pairs, t); }, start);
}

struct CrossvalOptions {
  std::size_t k = 10;
  std::uint64_t seed = 1;
  double start_threshold = 0.5;
  std::optional<double> fixed_threshold;  // skip tuning
};

struct CrossvalResult {
  Metrics reference;
  Metrics duplicate;
  Metrics either;  // union of both detectors
  Metrics both;    // intersection
  std::vector<double> fold_thresholds;
  std::vector<std::size_t> fold_of;  // per input pair
};

/// Stratified seeded folds: each class is shuffled and dealt round-robin.
inline std::vector<std::size_t> stratified_folds(std::span<const LabeledPair> pairs, std::size_t k,
                                                 std::uint64_t seed) {
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < pairs.size(); ++i) (pairs[i].duplicate ? pos : neg).push_back(i);
  for (auto* cls : {&pos, &neg}) {
    if (!cls->empty() && cls->size() < k) {
      throw ValidationError("need at least k=" + std::to_string(k) + " examples of each present class, got " +
                            std::to_string(cls->size()));
    }
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> fold(pairs.size());
  for (auto* cls : {&pos, &neg}) {
    std::shuffle(cls->begin(), cls->end(), rng);
    for (std::size_t i = 0; i < cls->size(); ++i) fold[(*cls)[i]] = i % k;
  }
  return fold;
}

/// Pooled confusion counts over the k test folds. The duplicate detector's
/// threshold is tuned on each training split.
inline CrossvalResult crossval(const std::vector<IssuePtr>& issues, std::span<const LabeledPair> pairs,
                               const CrossvalOptions& options = {}) {
  if (options.k < 2) throw ValidationError("k must be at least 2");
  if (pairs.empty()) throw ValidationError("no labeled pairs");
  std::set<IssueKey> known;
  for (const auto& i : issues) known.insert(i->key);
  for (const auto& p : pairs) {
    for (const auto* k : {&p.a, &p.b}) {
      if (!known.contains(*k)) throw NotFoundError("labeled pair refers to unknown issue " + k->str());
    }
  }

  auto refs = detect_references(std::span<const IssuePtr>(issues), project_ids_of(issues),
                                [&](const IssueKey& k) { return known.contains(k); });
  std::set<KeyPair> referenced;
  for (const auto& r : refs.proposals) referenced.insert(KeyPair(r.from, r.to));

  std::vector<TokenBag> bags;
  bags.reserve(issues.size());
  for (const auto& i : issues) bags.push_back(text_preprocess(*i));
  auto model = TfidfModel::fit(bags);
  std::vector<ScoredPair> scored;
  scored.reserve(pairs.size());
  for (const auto& p : pairs) scored.push_back({cosine_sim(model, p.a, p.b), p.duplicate});

  CrossvalResult out;
  out.fold_of = stratified_folds(pairs, options.k, options.seed);
  Confusion ref, dup, either, both;
  for (std::size_t f = 0; f < options.k; ++f) {
    double thr = 0.0;
    if (options.fixed_threshold) {
      thr = *options.fixed_threshold;
    } else {
      std::vector<ScoredPair> train;
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (out.fold_of[i] != f) train.push_back(scored[i]);
      }
      thr = tune_threshold(train, options.start_threshold).best;
    }
    out.fold_thresholds.push_back(thr);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (out.fold_of[i] != f) continue;
      bool r = referenced.contains(KeyPair(pairs[i].a, pairs[i].b));
      bool d = scored[i].score >= thr;
      ref.add(r, pairs[i].duplicate);
      dup.add(d, pairs[i].duplicate);
      either.add(r || d, pairs[i].duplicate);
      both.add(r && d, pairs[i].duplicate);
    }
  }
  out.reference = metrics_of(ref);
  out.duplicate = metrics_of(dup);
  out.either = metrics_of(either);
  out.both = metrics_of(both);
  return out;
}

struct DepthRow {
  std::uint32_t depth = 0;
  std::size_t graphs = 0;
  std::size_t inconsistent = 0;
  double requires_inconsistent_avg = 0.0;      // over inconsistent graphs
  double parent_child_inconsistent_avg = 0.0;  // over inconsistent graphs
  double consistent_pct = 0.0;
  double dep_diag_count_avg = 0.0;  // over successful dependency diagnoses
  double dep_diag_success_pct = 0.0;
  double issue_diag_count_avg = 0.0;  // over successful issue diagnoses
  double issue_diag_success_pct = 0.0;
};

struct SweepOptions {
  std::uint32_t max_depth = 10;
  std::chrono::milliseconds time_limit{5000};
  unsigned threads = 1;
};

struct SweepSample {
  bool consistent = true;
  std::size_t requires_violations = 0;
  std::size_t parent_child_violations = 0;
  bool dep_ok = true;
  bool issue_ok = true;
  std::size_t dep_count = 0;
  std::size_t issue_count = 0;
};

inline SweepSample sample_of(const DiagnosisResult& r) {
  SweepSample s;
  s.consistent = r.consistent;
  s.requires_violations = r.requires_violations();
  s.parent_child_violations = r.parent_child_violations();
  s.dep_ok = !r.dep_diag_timed_out;
  s.issue_ok = !r.issue_diag_timed_out && !r.issue_diag_error;
  s.dep_count = r.diag_dependencies.size();
  s.issue_count = r.diag_issues.size();
  return s;
}

/// Aggregates samples[issue][depth - 1] into one row per depth.
inline std::vector<DepthRow> aggregate_sweep(const std::vector<std::vector<SweepSample>>& samples,
                                             std::uint32_t max_depth) {
  std::vector<DepthRow> rows;
  for (std::uint32_t p = 1; p <= max_depth; ++p) {
    DepthRow row;
    row.depth = p;
    double req = 0, pc = 0, depc = 0, issc = 0;
    std::size_t dep_ok = 0, issue_ok = 0;
    for (const auto& per_issue : samples) {
      const auto& s = per_issue[p - 1];
      ++row.graphs;
      if (s.consistent) continue;
      ++row.inconsistent;
      req += static_cast<double>(s.requires_violations);
      pc += static_cast<double>(s.parent_child_violations);
      if (s.dep_ok) {
        ++dep_ok;
        depc += static_cast<double>(s.dep_count);
      }
      if (s.issue_ok) {
        ++issue_ok;
        issc += static_cast<double>(s.issue_count);
      }
    }
    auto ratio = [](double a, std::size_t b) { return b ? a / static_cast<double>(b) : 0.0; };
    row.requires_inconsistent_avg = ratio(req, row.inconsistent);
    row.parent_child_inconsistent_avg = ratio(pc, row.inconsistent);
    row.consistent_pct = row.graphs ? 100.0 * ratio(static_cast<double>(row.graphs - row.inconsistent), row.graphs)
                                    : 0.0;
    row.dep_diag_count_avg = ratio(depc, dep_ok);
    row.issue_diag_count_avg = ratio(issc, issue_ok);
    row.dep_diag_success_pct = row.inconsistent ? 100.0 * ratio(static_cast<double>(dep_ok), row.inconsistent) : 100.0;
    row.issue_diag_success_pct =
        row.inconsistent ? 100.0 * ratio(static_cast<double>(issue_ok), row.inconsistent) : 100.0;
    rows.push_back(row);
  }
  return rows;
}

/// Checks and diagnoses the p-depth graph of every non-orphan issue for
/// p = 1..max_depth. Once a subgraph stops growing its result is reused.
inline std::vector<DepthRow> sweep_consistency(const IssueGraph& g, const SweepOptions& options = {}) {
  std::vector<NodeId> centers;
  for (NodeId i = 0; i < g.size(); ++i) {
    if (!g.is_orphan(i)) centers.push_back(i);
  }
  std::vector<std::vector<SweepSample>> samples(centers.size());
  DiagnoseOptions diag{options.time_limit, true};

  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t c = begin; c < centers.size(); c += stride) {
      const auto& key = g.issue(centers[c]).key;
      auto& out = samples[c];
      std::size_t prev_size = 0;
      for (std::uint32_t p = 1; p <= options.max_depth; ++p) {
        auto ball = bfs_ball(g, centers[c], p);
        if (p > 1 && ball.size() == prev_size) {
          out.push_back(out.back());
          continue;
        }
        prev_size = ball.size();
        out.push_back(sample_of(diagnose(key, g.induced(ball), diag)));
      }
    }
  };
  unsigned threads = std::max(1u, options.threads);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& t : pool) t.join();
  }
  return aggregate_sweep(samples, options.max_depth);
}

inline void write_sweep_csv(std::ostream& out, std::span<const DepthRow> rows) {
  out << "depth,graphs,inconsistent,requires_inconsistent_avg,parent_child_inconsistent_avg,consistent_pct,"
         "dep_diag_count_avg,dep_diag_success_pct,issue_diag_count_avg,issue_diag_success_pct\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%u,%zu,%zu,%.4f,%.4f,%.2f,%.4f,%.2f,%.4f,%.2f\n", r.depth, r.graphs,
                  r.inconsistent, r.requires_inconsistent_avg, r.parent_child_inconsistent_avg, r.consistent_pct,
                  r.dep_diag_count_avg, r.dep_diag_success_pct, r.issue_diag_count_avg, r.issue_diag_success_pct);
    out << buf;
  }
}

}  // namespace depgraph
