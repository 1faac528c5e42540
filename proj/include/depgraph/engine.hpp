#pragma once

// Query engine: an immutable analysis snapshot (graphs, text model, detector
// output) over one repository state, and a service object that serializes
// writers and swaps snapshots for readers.

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "depgraph/consistency.hpp"
#include "depgraph/detect_dup.hpp"
#include "depgraph/detect_ref.hpp"
#include "depgraph/graph.hpp"
#include "depgraph/proposals.hpp"
#include "depgraph/store.hpp"
#include "depgraph/topology.hpp"

namespace depgraph {

struct EngineConfig {
  double dup_threshold = 0.6;
  // The initial all-pairs duplicate pass is the expensive part of a full
  // build; when off, only issues touched by later updates are scored.
  bool detect_duplicates = true;
  std::uint32_t max_depth = 5;
};

class Snapshot {
 public:
  static std::shared_ptr<const Snapshot> build(std::shared_ptr<const Repository> repo, const EngineConfig& config) {
    check_threshold(config.dup_threshold);
    auto s = std::shared_ptr<Snapshot>(new Snapshot());
    s->config_ = config;
    s->repo_ = std::move(repo);
    s->build_graph();
    s->model_ = build_model(s->graph_);
    if (config.detect_duplicates) s->duplicates_ = score_pairs(s->graph_, s->model_, config.dup_threshold, PairScan::blocking);
    s->detect_refs();
    s->finish();
    return s;
  }

  /// Re-vectorizes the changed issues against the frozen idf table and
  /// rescores only pairs that involve them. References are rescanned in full.
  static std::shared_ptr<const Snapshot> update(const Snapshot& prev, std::shared_ptr<const Repository> repo,
                                                const std::vector<IssueKey>& changed) {
    auto s = std::shared_ptr<Snapshot>(new Snapshot());
    s->config_ = prev.config_;
    s->repo_ = std::move(repo);
    s->build_graph();
    s->model_ = prev.model_;
    std::set<IssueKey> touched(changed.begin(), changed.end());
    for (const auto& key : touched) {
      if (auto id = s->graph_.find(key)) s->model_.upsert(text_preprocess(s->graph_.issue(*id)));
    }
    std::set<KeyPair> seen;
    for (const auto& p : prev.duplicates_) {
      if (touched.contains(p.a) || touched.contains(p.b)) continue;
      if (s->graph_.linked(s->graph_.id_of(p.a), s->graph_.id_of(p.b))) continue;
      seen.insert(KeyPair(p.a, p.b));
      s->duplicates_.push_back(p);
    }
    for (const auto& key : touched) {
      if (!s->graph_.contains(key)) continue;
      for (auto& p : duplicates_of(s->graph_, s->model_, key, s->config_.dup_threshold)) {
        if (seen.insert(KeyPair(p.a, p.b)).second) s->duplicates_.push_back(std::move(p));
      }
    }
    std::sort(s->duplicates_.begin(), s->duplicates_.end(),
              [](const auto& x, const auto& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
    s->detect_refs();
    s->finish();
    return s;
  }

  const EngineConfig& config() const { return config_; }
  const Repository& repository() const { return *repo_; }
  const std::shared_ptr<const Repository>& repository_ptr() const { return repo_; }
  const IssueGraph& graph() const { return graph_; }
  /// Accepted and proposed dependencies plus current detector proposals.
  const IssueGraph& proposal_graph() const { return proposal_graph_; }
  const TfidfModel& model() const { return model_; }
  const ReferenceResult& references() const { return references_; }
  const std::vector<DuplicateProposal>& duplicates() const { return duplicates_; }
  const std::set<KeyPair>& existing() const { return existing_; }
  const std::set<KeyPair>& rejected() const { return rejected_; }

  std::vector<Cluster> clusters() const { return compute_clusters(graph_, duplicates_); }

  std::vector<RankedProposal> proposals(const IssueKey& r0, const ContextParams& params) const {
    if (!graph_.contains(r0)) throw NotFoundError("unknown issue " + r0.str());
    std::vector<ReferenceProposal> refs;
    std::vector<DuplicateProposal> dups;
    if (auto it = ref_index_.find(r0); it != ref_index_.end()) {
      for (auto i : it->second) refs.push_back(references_.proposals[i]);
    }
    if (auto it = dup_index_.find(r0); it != dup_index_.end()) {
      for (auto i : it->second) dups.push_back(duplicates_[i]);
    }
    return contextualize(r0, combine(refs, dups, r0), graph_, existing_, rejected_, params);
  }

  IssueGraph subgraph(const IssueKey& r0, std::uint32_t depth, bool include_proposed) const {
    return p_depth_subgraph(include_proposed ? proposal_graph_ : graph_, r0, depth);
  }

  DiagnosisResult consistency(const IssueKey& r0, std::uint32_t depth, const DiagnoseOptions& options) const {
    return diagnose(r0, p_depth_subgraph(graph_, r0, depth), options);
  }

 private:
  Snapshot() = default;

  void build_graph() {
    auto deps = repo_->dependencies();
    graph_ = IssueGraph::build(repo_->issues(), deps, BuildOptions{}, &build_report_);
  }

  void detect_refs() {
    references_ = detect_references(std::span<const IssuePtr>(graph_.issues()), repo_->project_ids(),
                                    [this](const IssueKey& k) { return graph_.contains(k); });
  }

  void finish() {
    for (const auto& d : repo_->dependencies()) {
      if (d.status == DependencyStatus::accepted) existing_.insert(d.pair());
      if (d.status == DependencyStatus::rejected) rejected_.insert(d.pair());
    }
    rejected_.insert(repo_->rejected_pairs().begin(), repo_->rejected_pairs().end());

    for (std::size_t i = 0; i < references_.proposals.size(); ++i) {
      ref_index_[references_.proposals[i].from].push_back(i);
      ref_index_[references_.proposals[i].to].push_back(i);
    }
    for (std::size_t i = 0; i < duplicates_.size(); ++i) {
      dup_index_[duplicates_[i].a].push_back(i);
      dup_index_[duplicates_[i].b].push_back(i);
    }

    auto deps = repo_->dependencies();
    auto open = [&](const KeyPair& p) { return !existing_.contains(p) && !rejected_.contains(p); };
    for (const auto& r : references_.proposals) {
      if (open(KeyPair(r.from, r.to))) {
        deps.push_back({r.from, r.to, DependencyType::untyped, DependencyStatus::proposed, 1.0, std::nullopt});
      }
    }
    for (const auto& d : duplicates_) {
      if (open(KeyPair(d.a, d.b))) {
        deps.push_back({d.a, d.b, DependencyType::duplicates, DependencyStatus::proposed, d.score, std::nullopt});
      }
    }
    proposal_graph_ = IssueGraph::build(graph_.issues(), deps, BuildOptions{.include_proposed = true});
  }

  EngineConfig config_;
  std::shared_ptr<const Repository> repo_;
  IssueGraph graph_;
  IssueGraph proposal_graph_;
  BuildReport build_report_;
  TfidfModel model_;
  ReferenceResult references_;
  std::vector<DuplicateProposal> duplicates_;
  std::set<KeyPair> existing_;
  std::set<KeyPair> rejected_;
  std::map<IssueKey, std::vector<std::size_t>> ref_index_;
  std::map<IssueKey, std::vector<std::size_t>> dup_index_;
};

/// Single writer, many readers. Readers take the current snapshot and never
/// wait for a rebuild; writers build the next snapshot off to the side.
class Service {
 public:
  explicit Service(Repository repo, EngineConfig config = {}, std::optional<std::filesystem::path> data_dir = {})
      : config_(config), data_dir_(std::move(data_dir)) {
    current_ = Snapshot::build(std::make_shared<const Repository>(std::move(repo)), config_);
  }

  std::shared_ptr<const Snapshot> snapshot() const {
    std::lock_guard lock(swap_mutex_);
    return current_;
  }

  ImportReport import_snapshot(std::istream& issues, std::istream& dependencies) {
    std::lock_guard writer(write_mutex_);
    auto repo = std::make_shared<Repository>(snapshot()->repository());
    auto report = repo->import_snapshot(issues, dependencies);
    persist(*repo);
    publish(Snapshot::build(repo, config_));
    return report;
  }

  UpdateReport apply_update(std::istream& issues, std::istream& dependencies) {
    std::lock_guard writer(write_mutex_);
    auto prev = snapshot();
    auto repo = std::make_shared<Repository>(prev->repository());
    auto report = repo->apply_update(issues, dependencies);
    persist(*repo);
    publish(Snapshot::update(*prev, repo, report.changed_issues));
    return report;
  }

  void record_decision(const DecisionRecord& r) {
    std::lock_guard writer(write_mutex_);
    auto prev = snapshot();
    auto repo = std::make_shared<Repository>(prev->repository());
    repo->record_decision(r);
    // Accepted dependencies are rebuilt from the log on load.
    if (data_dir_) Repository::append_decision(*data_dir_, r);
    publish(Snapshot::update(*prev, repo, {}));
  }

  const EngineConfig& config() const { return config_; }

 private:
  void persist(const Repository& repo) {
    if (data_dir_) repo.save(*data_dir_);
  }

  void publish(std::shared_ptr<const Snapshot> next) {
    std::lock_guard lock(swap_mutex_);
    current_ = std::move(next);
  }

  EngineConfig config_;
  std::optional<std::filesystem::path> data_dir_;
  mutable std::mutex swap_mutex_;
  std::mutex write_mutex_;
  std::shared_ptr<const Snapshot> current_;
};

}  // namespace depgraph
