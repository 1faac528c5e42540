#pragma once

// JSONL record formats for issues, dependencies and decisions.
//
// Output is canonical: keys sorted, optional fields omitted when absent, one
// compact object per line. Unknown string-valued issue fields are carried in
// Issue::custom; other unknown fields are ignored.

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "depgraph/errors.hpp"
#include "depgraph/types.hpp"

namespace depgraph {

using json = nlohmann::json;

namespace detail {

inline const json& require(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) throw ValidationError(std::string("missing field '") + field + "'");
  return *it;
}

inline std::string require_string(const json& j, const char* field) {
  const auto& v = require(j, field);
  if (!v.is_string()) throw ValidationError(std::string("field '") + field + "' must be a string");
  return v.get<std::string>();
}

inline std::string optional_string(const json& j, const char* field, std::string fallback = {}) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_string()) throw ValidationError(std::string("field '") + field + "' must be a string");
  return it->get<std::string>();
}

inline bool has(const json& j, const char* field) {
  auto it = j.find(field);
  return it != j.end() && !it->is_null();
}

inline int parse_priority(const json& v) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_string()) {
    auto s = v.get<std::string>();
    if (s.size() == 2 && (s[0] == 'P' || s[0] == 'p') && detail::is_digit(s[1])) return s[1] - '0';
  }
  throw ValidationError("priority must be an integer 0..5 or P0..P5, got " + v.dump());
}

}  // namespace detail

inline Issue issue_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("issue record must be a JSON object");
  Issue issue;
  issue.key = IssueKey::parse(detail::require_string(j, "key"));
  if (detail::has(j, "project") && detail::require_string(j, "project") != issue.key.project) {
    throw ValidationError("project does not match key " + issue.key.str());
  }
  issue.title = detail::optional_string(j, "title");
  issue.description = detail::optional_string(j, "description");
  if (detail::has(j, "comments")) {
    const auto& c = j.at("comments");
    if (!c.is_array()) throw ValidationError("comments must be an array of strings");
    for (const auto& item : c) {
      if (!item.is_string()) throw ValidationError("comments must be an array of strings");
      issue.comments.push_back(item.get<std::string>());
    }
  }
  issue.type = parse_issue_type(detail::optional_string(j, "type", "task"));
  issue.status = detail::optional_string(j, "status");
  if (detail::has(j, "resolution")) issue.resolution = detail::require_string(j, "resolution");
  if (detail::has(j, "priority")) issue.priority = detail::parse_priority(j.at("priority"));
  if (detail::has(j, "release")) issue.release = Version::parse(detail::require_string(j, "release"));
  issue.created.value = detail::optional_string(j, "created");
  issue.modified.value = detail::optional_string(j, "modified", issue.created.value);

  static const char* const kKnown[] = {"key",      "project",  "title",   "description", "comments", "type",
                                       "status",   "resolution", "priority", "release",   "created",  "modified"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find_if(std::begin(kKnown), std::end(kKnown), [&](const char* k) { return it.key() == k; }) !=
        std::end(kKnown)) {
      continue;
    }
    if (it->is_string()) issue.custom.emplace(it.key(), it->get<std::string>());
  }
  validate(issue);
  return issue;
}

inline json to_json(const Issue& issue) {
  json j = json::object();
  for (const auto& [k, v] : issue.custom) j[k] = v;
  j["key"] = issue.key.str();
  j["project"] = issue.key.project;
  j["title"] = issue.title;
  j["description"] = issue.description;
  j["comments"] = issue.comments;
  j["type"] = std::string(to_string(issue.type));
  j["status"] = issue.status;
  if (issue.resolution) j["resolution"] = *issue.resolution;
  if (issue.priority) j["priority"] = *issue.priority;
  if (issue.release) j["release"] = issue.release->str();
  j["created"] = issue.created.value;
  j["modified"] = issue.modified.value;
  return j;
}

inline Dependency dependency_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("dependency record must be a JSON object");
  Dependency d;
  d.from = IssueKey::parse(detail::require_string(j, "from"));
  d.to = IssueKey::parse(detail::require_string(j, "to"));
  d.type = parse_dependency_type(detail::require_string(j, "dep_type"));
  d.status = parse_status(detail::optional_string(j, "status", "accepted"));
  if (detail::has(j, "score")) {
    const auto& s = j.at("score");
    if (!s.is_number()) throw ValidationError("score must be a number");
    d.score = s.get<double>();
  }
  if (detail::has(j, "created")) d.created = Timestamp{detail::require_string(j, "created")};
  validate(d);
  return d;
}

inline json to_json(const Dependency& d) {
  json j = json::object();
  j["from"] = d.from.str();
  j["to"] = d.to.str();
  j["dep_type"] = std::string(to_string(d.type));
  j["status"] = std::string(to_string(d.status));
  j["score"] = d.score;
  if (d.created) j["created"] = d.created->value;
  return j;
}

inline DecisionRecord decision_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("decision record must be a JSON object");
  DecisionRecord r;
  r.from = IssueKey::parse(detail::require_string(j, "from"));
  r.to = IssueKey::parse(detail::require_string(j, "to"));
  r.verdict = parse_verdict(detail::require_string(j, "verdict"));
  if (detail::has(j, "dep_type")) r.dep_type = parse_dependency_type(detail::require_string(j, "dep_type"));
  r.actor = detail::optional_string(j, "actor");
  r.at.value = detail::optional_string(j, "at");
  validate(r);
  return r;
}

inline json to_json(const DecisionRecord& r) {
  json j = json::object();
  j["from"] = r.from.str();
  j["to"] = r.to.str();
  j["verdict"] = std::string(to_string(r.verdict));
  if (r.dep_type) j["dep_type"] = std::string(to_string(*r.dep_type));
  j["actor"] = r.actor;
  j["at"] = r.at.value;
  return j;
}

struct ParseError {
  std::string stream;
  std::size_t line = 0;  // 1-based
  std::string message;

  bool operator==(const ParseError&) const = default;
};

/// Reads one record per non-blank line. Lines that fail to parse or convert
/// are reported and skipped. Throws std::runtime_error on a stream I/O error.
template <typename Convert, typename Sink>
void read_jsonl(std::istream& in, const std::string& stream_name, Convert&& convert, Sink&& sink,
                std::vector<ParseError>& errors) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      sink(convert(json::parse(line)));
    } catch (const json::exception& e) {
      errors.push_back({stream_name, n, e.what()});
    } catch (const std::invalid_argument& e) {
      errors.push_back({stream_name, n, e.what()});
    }
  }
  if (in.bad()) throw std::runtime_error("I/O error while reading " + stream_name);
}

inline void write_jsonl_line(std::ostream& out, const json& j) { out << j.dump() << '\n'; }

}  // namespace depgraph
