#pragma once

// Repository of issues, dependencies and review decisions with JSONL import,
// incremental update, export and a plain-file data directory.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "depgraph/errors.hpp"
#include "depgraph/jsonl.hpp"
#include "depgraph/types.hpp"

namespace depgraph {

inline Timestamp now_utc() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return {buf};
}

struct ImportReport {
  std::size_t issues = 0;
  std::size_t dependencies = 0;
  std::size_t dropped = 0;  // dependencies with an endpoint outside the repository
  std::vector<ParseError> errors;

  std::size_t parse_errors() const { return errors.size(); }
};

struct UpdateReport {
  std::vector<IssueKey> changed_issues;  // new or modified, sorted
  std::size_t new_issues = 0;
  std::size_t changed_dependencies = 0;
  std::size_t dropped = 0;
  std::vector<std::string> new_projects;
  // Rejected pairs with an endpoint that changed; rejections stay in force.
  std::vector<KeyPair> rejections_to_revisit;
  std::vector<ParseError> errors;

  std::size_t parse_errors() const { return errors.size(); }
};

/// Last-writer-wins fold of the decision log over unordered pairs.
inline std::set<KeyPair> fold_rejections(std::span<const DecisionRecord> log) {
  std::set<KeyPair> out;
  for (const auto& r : log) {
    if (r.verdict == Verdict::reject) {
      out.insert(KeyPair(r.from, r.to));
    } else {
      out.erase(KeyPair(r.from, r.to));
    }
  }
  return out;
}

class Repository {
 public:
  using DependencyId = std::tuple<IssueKey, IssueKey, DependencyType>;

  static DependencyId id_of(const Dependency& d) { return {d.from, d.to, d.type}; }

  /// Replaces issues and dependencies; the decision log is kept and its
  /// accepted links are re-applied. On an I/O
  /// error nothing changes and the error propagates.
  ImportReport import_snapshot(std::istream& issues, std::istream& dependencies) {
    ImportReport report;
    std::map<IssueKey, IssuePtr> new_issues;
    read_jsonl(
        issues, "issues", issue_from_json,
        [&](Issue i) {
          auto key = i.key;
          new_issues.insert_or_assign(std::move(key), std::make_shared<const Issue>(std::move(i)));
        },
        report.errors);
    std::vector<Dependency> parsed;
    read_jsonl(
        dependencies, "dependencies", dependency_from_json, [&](Dependency d) { parsed.push_back(std::move(d)); },
        report.errors);
    std::map<DependencyId, Dependency> new_deps;
    for (auto& d : parsed) {
      if (!new_issues.contains(d.from) || !new_issues.contains(d.to)) {
        ++report.dropped;
        continue;
      }
      new_deps.insert_or_assign(id_of(d), std::move(d));
    }
    report.issues = new_issues.size();
    report.dependencies = new_deps.size();

    issues_ = std::move(new_issues);
    deps_ = std::move(new_deps);
    for (const auto& r : decisions_) apply_accept(r);
    last_import_ = now_utc();
    refresh_projects();
    return report;
  }

  /// Upserts issues by key and dependencies by (from, to, dep_type). Applying
  /// the same delta twice leaves the repository unchanged.
  UpdateReport apply_update(std::istream& issues, std::istream& dependencies) {
    UpdateReport report;
    std::vector<Issue> parsed_issues;
    read_jsonl(issues, "issues", issue_from_json, [&](Issue i) { parsed_issues.push_back(std::move(i)); },
               report.errors);
    std::vector<Dependency> parsed_deps;
    read_jsonl(
        dependencies, "dependencies", dependency_from_json, [&](Dependency d) { parsed_deps.push_back(std::move(d)); },
        report.errors);

    auto before = project_ids_;
    std::set<IssueKey> changed;
    for (auto& i : parsed_issues) {
      auto it = issues_.find(i.key);
      if (it == issues_.end()) {
        ++report.new_issues;
      } else if (*it->second == i) {
        continue;
      }
      changed.insert(i.key);
      auto key = i.key;
      issues_.insert_or_assign(std::move(key), std::make_shared<const Issue>(std::move(i)));
    }
    for (auto& d : parsed_deps) {
      if (!issues_.contains(d.from) || !issues_.contains(d.to)) {
        ++report.dropped;
        continue;
      }
      auto id = id_of(d);
      auto it = deps_.find(id);
      if (it != deps_.end() && it->second == d) continue;
      ++report.changed_dependencies;
      deps_.insert_or_assign(std::move(id), std::move(d));
    }
    refresh_projects();

    report.changed_issues.assign(changed.begin(), changed.end());
    std::set_difference(project_ids_.begin(), project_ids_.end(), before.begin(), before.end(),
                        std::back_inserter(report.new_projects));
    for (const auto& pair : rejected_) {
      if (changed.contains(pair.first) || changed.contains(pair.second)) report.rejections_to_revisit.push_back(pair);
    }
    return report;
  }

  /// Accept upserts an accepted dependency with score 1.0; reject adds the
  /// unordered pair to the rejected set. Both are appended to the log.
  void record_decision(const DecisionRecord& r) {
    validate(r);
    for (const auto* k : {&r.from, &r.to}) {
      if (!issues_.contains(*k)) throw NotFoundError("unknown issue " + k->str());
    }
    if (r.verdict == Verdict::accept) {
      Dependency d{r.from, r.to, *r.dep_type, DependencyStatus::accepted, 1.0, r.at};
      deps_.insert_or_assign(id_of(d), d);
      rejected_.erase(KeyPair(r.from, r.to));
    } else {
      rejected_.insert(KeyPair(r.from, r.to));
    }
    decisions_.push_back(r);
  }

  std::size_t issue_count() const { return issues_.size(); }
  std::size_t dependency_count() const { return deps_.size(); }

  const Issue* find(const IssueKey& key) const {
    auto it = issues_.find(key);
    return it == issues_.end() ? nullptr : it->second.get();
  }
  bool contains(const IssueKey& key) const { return issues_.contains(key); }

  std::vector<IssuePtr> issues() const {
    std::vector<IssuePtr> out;
    out.reserve(issues_.size());
    for (const auto& [k, i] : issues_) out.push_back(i);
    return out;
  }

  std::vector<Dependency> dependencies() const {
    std::vector<Dependency> out;
    out.reserve(deps_.size());
    for (const auto& [k, d] : deps_) out.push_back(d);
    return out;
  }

  const std::vector<DecisionRecord>& decisions() const { return decisions_; }
  const std::set<KeyPair>& rejected_pairs() const { return rejected_; }
  const std::set<std::string>& project_ids() const { return project_ids_; }
  const std::optional<Timestamp>& last_import() const { return last_import_; }

  void export_issues(std::ostream& out) const {
    for (const auto& [k, i] : issues_) write_jsonl_line(out, to_json(*i));
  }
  void export_dependencies(std::ostream& out) const {
    for (const auto& [k, d] : deps_) write_jsonl_line(out, to_json(d));
  }
  void export_decisions(std::ostream& out) const {
    for (const auto& r : decisions_) write_jsonl_line(out, to_json(r));
  }

  // Data directory layout: issues.jsonl, dependencies.jsonl, decisions.jsonl.

  static Repository load(const std::filesystem::path& dir) {
    Repository repo;
    auto open = [&](const char* name) {
      auto path = dir / name;
      std::ifstream in;
      if (std::filesystem::exists(path)) {
        in.open(path);
        if (!in) throw std::runtime_error("cannot read " + path.string());
      }
      return in;
    };
    auto issues = open("issues.jsonl");
    auto deps = open("dependencies.jsonl");
    std::stringstream empty;
    auto report = repo.import_snapshot(issues.is_open() ? static_cast<std::istream&>(issues) : empty,
                                       deps.is_open() ? static_cast<std::istream&>(deps) : empty);
    if (!report.errors.empty()) {
      const auto& e = report.errors.front();
      throw std::runtime_error("corrupt data directory: " + e.stream + " line " + std::to_string(e.line) + ": " +
                               e.message);
    }
    auto log = open("decisions.jsonl");
    if (log.is_open()) {
      std::vector<ParseError> errors;
      read_jsonl(log, "decisions", decision_from_json, [&](DecisionRecord r) { repo.replay(std::move(r)); }, errors);
      if (!errors.empty()) throw std::runtime_error("corrupt decision log at line " + std::to_string(errors[0].line));
    }
    return repo;
  }

  /// Rewrites issue and dependency files atomically (write, then rename).
  void save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    write_file(dir / "issues.jsonl", [&](std::ostream& o) { export_issues(o); });
    write_file(dir / "dependencies.jsonl", [&](std::ostream& o) { export_dependencies(o); });
    write_file(dir / "decisions.jsonl", [&](std::ostream& o) { export_decisions(o); });
  }

  static void append_decision(const std::filesystem::path& dir, const DecisionRecord& r) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "decisions.jsonl", std::ios::app);
    write_jsonl_line(out, to_json(r));
    out.flush();
    if (!out) throw std::runtime_error("cannot append to decision log in " + dir.string());
  }

 private:
  template <typename Fn>
  static void write_file(const std::filesystem::path& path, Fn&& fill) {
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      fill(out);
      out.flush();
      if (!out) throw std::runtime_error("cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
  }

  // Log replay tolerates decisions on issues that have since disappeared.
  void apply_accept(const DecisionRecord& r) {
    if (r.verdict == Verdict::accept && issues_.contains(r.from) && issues_.contains(r.to)) {
      Dependency d{r.from, r.to, *r.dep_type, DependencyStatus::accepted, 1.0, r.at};
      deps_.insert_or_assign(id_of(d), d);
    }
  }

  void replay(DecisionRecord r) {
    apply_accept(r);
    if (r.verdict == Verdict::accept) {
      rejected_.erase(KeyPair(r.from, r.to));
    } else {
      rejected_.insert(KeyPair(r.from, r.to));
    }
    decisions_.push_back(std::move(r));
  }

  void refresh_projects() {
    project_ids_.clear();
    for (const auto& [k, i] : issues_) project_ids_.insert(k.project);
  }

  std::map<IssueKey, IssuePtr> issues_;
  std::map<DependencyId, Dependency> deps_;
  std::vector<DecisionRecord> decisions_;
  std::set<KeyPair> rejected_;
  std::set<std::string> project_ids_;
  std::optional<Timestamp> last_import_;
};

}  // namespace depgraph
