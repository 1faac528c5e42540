#pragma once

#include <optional>
#include <string>
#include <vector>

#include "depgraph/depgraph.hpp"

namespace testing_support {

using namespace depgraph;

inline IssueKey K(const std::string& text) { return IssueKey::parse(text); }

inline Issue make_issue(const std::string& key, std::string title = {}, std::string description = {}) {
  Issue i;
  i.key = K(key);
  i.title = std::move(title);
  i.description = std::move(description);
  i.status = "Open";
  i.created.value = "2020-01-01T00:00:00Z";
  i.modified.value = "2020-01-01T00:00:00Z";
  return i;
}

inline Issue scheduled(const std::string& key, std::optional<int> prio, std::optional<std::string> release) {
  Issue i = make_issue(key);
  i.priority = prio;
  if (release) i.release = Version::parse(*release);
  return i;
}

inline Dependency dep(const std::string& from, const std::string& to, DependencyType t = DependencyType::relates,
                      DependencyStatus s = DependencyStatus::accepted, double score = 1.0) {
  return Dependency{K(from), K(to), t, s, score, std::nullopt};
}

inline std::vector<std::string> keys_of(const IssueGraph& g) {
  std::vector<std::string> out;
  for (const auto& i : g.issues()) out.push_back(i->key.str());
  return out;
}

// Issues named A-1 .. A-n.
inline std::vector<Issue> numbered(std::size_t n, const std::string& project = "A") {
  std::vector<Issue> out;
  for (std::size_t i = 1; i <= n; ++i) out.push_back(make_issue(project + "-" + std::to_string(i)));
  return out;
}

}  // namespace testing_support
