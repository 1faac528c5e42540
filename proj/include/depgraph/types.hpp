#pragma once

// Core domain types shared by every module: issue keys, versions, issues and
// dependencies.

#include <array>
#include <cctype>
#include <charconv>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "depgraph/errors.hpp"

namespace depgraph {

namespace detail {

inline bool is_upper_alnum(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace detail

/// Tracker key `<PROJECT>-<number>`, e.g. `QTBUG-72510`.
struct IssueKey {
  std::string project;
  std::uint32_t number = 0;

  static bool valid_project(std::string_view p) {
    if (p.empty() || !(p[0] >= 'A' && p[0] <= 'Z')) return false;
    for (char c : p) {
      if (!detail::is_upper_alnum(c)) return false;
    }
    return true;
  }

  static std::optional<IssueKey> try_parse(std::string_view text) {
    auto dash = text.find('-');
    if (dash == std::string_view::npos || text.find('-', dash + 1) != std::string_view::npos) {
      return std::nullopt;
    }
    auto project = text.substr(0, dash);
    auto digits = text.substr(dash + 1);
    if (!valid_project(project) || digits.empty() || digits.size() > 9 || digits[0] == '0') {
      return std::nullopt;
    }
    std::uint32_t n = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || n == 0) return std::nullopt;
    return IssueKey{std::string(project), n};
  }

  static IssueKey parse(std::string_view text) {
    auto key = try_parse(text);
    if (!key) throw ValidationError("malformed issue key '" + std::string(text) + "'");
    return *key;
  }

  std::string str() const { return project + "-" + std::to_string(number); }

  // Ordered by project acronym, then by running number.
  auto operator<=>(const IssueKey&) const = default;
};

struct IssueKeyHash {
  std::size_t operator()(const IssueKey& k) const noexcept {
    return std::hash<std::string>{}(k.project) * 1000003u ^ std::hash<std::uint32_t>{}(k.number);
  }
};

/// Unordered pair of issue keys, normalized so that `first <= second`.
struct KeyPair {
  IssueKey first;
  IssueKey second;

  KeyPair() = default;
  KeyPair(IssueKey a, IssueKey b) {
    if (b < a) std::swap(a, b);
    first = std::move(a);
    second = std::move(b);
  }

  auto operator<=>(const KeyPair&) const = default;
};

/// Release number with up to three parts; missing trailing parts read as 0.
class Version {
 public:
  static constexpr std::uint32_t kMaxPart = 999;

  Version() = default;
  Version(std::uint32_t x, std::uint32_t y = 0, std::uint32_t z = 0, int parts = 3)
      : parts_{x, y, z}, count_(parts) {
    for (auto p : parts_) {
      if (p > kMaxPart) throw ValidationError("version part exceeds 999");
    }
  }

  static Version parse(std::string_view text) {
    std::array<std::uint32_t, 3> parts{0, 0, 0};
    int count = 0;
    std::size_t pos = 0;
    while (true) {
      if (count == 3) throw ValidationError("version has more than three parts: '" + std::string(text) + "'");
      auto end = text.find('.', pos);
      auto piece = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
      if (piece.empty()) throw ValidationError("malformed version '" + std::string(text) + "'");
      std::uint64_t v = 0;
      auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), v);
      if (ec != std::errc{} || ptr != piece.data() + piece.size()) {
        throw ValidationError("malformed version '" + std::string(text) + "'");
      }
      if (v > kMaxPart) {
        throw ValidationError("version part " + std::to_string(v) + " exceeds 999 in '" + std::string(text) + "'");
      }
      parts[count++] = static_cast<std::uint32_t>(v);
      if (end == std::string_view::npos) break;
      pos = end + 1;
    }
    return Version(parts[0], parts[1], parts[2], count);
  }

  std::string str() const {
    std::string out = std::to_string(parts_[0]);
    for (int i = 1; i < count_; ++i) out += "." + std::to_string(parts_[i]);
    return out;
  }

  /// x * 10^6 + y * 10^3 + z; strictly monotone in the version order.
  std::int64_t encode() const {
    return static_cast<std::int64_t>(parts_[0]) * 1'000'000 + parts_[1] * 1'000 + parts_[2];
  }

  const std::array<std::uint32_t, 3>& parts() const { return parts_; }
  int part_count() const { return count_; }

  std::strong_ordering operator<=>(const Version& o) const { return parts_ <=> o.parts_; }
  bool operator==(const Version& o) const { return parts_ == o.parts_; }

 private:
  std::array<std::uint32_t, 3> parts_{0, 0, 0};
  int count_ = 1;
};

enum class IssueType { bug, epic, user_story, suggestion, task };

enum class DependencyType { duplicates, requires_, relates, replaces, results, tests, parent_child, untyped };

enum class DependencyStatus { proposed, accepted, rejected };

inline constexpr std::array<std::pair<IssueType, std::string_view>, 5> kIssueTypeNames{{
    {IssueType::bug, "bug"},
    {IssueType::epic, "epic"},
    {IssueType::user_story, "user_story"},
    {IssueType::suggestion, "suggestion"},
    {IssueType::task, "task"},
}};

inline constexpr std::array<std::pair<DependencyType, std::string_view>, 8> kDependencyTypeNames{{
    {DependencyType::duplicates, "duplicates"},
    {DependencyType::requires_, "requires"},
    {DependencyType::relates, "relates"},
    {DependencyType::replaces, "replaces"},
    {DependencyType::results, "results"},
    {DependencyType::tests, "tests"},
    {DependencyType::parent_child, "parent_child"},
    {DependencyType::untyped, "untyped"},
}};

inline constexpr std::array<std::pair<DependencyStatus, std::string_view>, 3> kStatusNames{{
    {DependencyStatus::proposed, "proposed"},
    {DependencyStatus::accepted, "accepted"},
    {DependencyStatus::rejected, "rejected"},
}};

namespace detail {

template <typename E, std::size_t N>
std::string_view enum_name(const std::array<std::pair<E, std::string_view>, N>& table, E value) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  return "?";
}

template <typename E, std::size_t N>
E enum_parse(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view text,
             const char* what) {
  for (const auto& [e, name] : table) {
    if (name == text) return e;
  }
  throw ValidationError(std::string("unknown ") + what + " '" + std::string(text) + "'");
}

}  // namespace detail

inline std::string_view to_string(IssueType t) { return detail::enum_name(kIssueTypeNames, t); }
inline std::string_view to_string(DependencyType t) { return detail::enum_name(kDependencyTypeNames, t); }
inline std::string_view to_string(DependencyStatus s) { return detail::enum_name(kStatusNames, s); }

inline IssueType parse_issue_type(std::string_view s) {
  return detail::enum_parse(kIssueTypeNames, s, "issue type");
}
inline DependencyType parse_dependency_type(std::string_view s) {
  return detail::enum_parse(kDependencyTypeNames, s, "dependency type");
}
inline DependencyStatus parse_status(std::string_view s) {
  return detail::enum_parse(kStatusNames, s, "dependency status");
}

/// ISO-8601 UTC timestamp text; ordered lexicographically.
struct Timestamp {
  std::string value;
  auto operator<=>(const Timestamp&) const = default;
};

struct Issue {
  IssueKey key;
  std::string title;
  std::string description;
  std::vector<std::string> comments;
  IssueType type = IssueType::task;
  std::string status;
  std::optional<std::string> resolution;
  std::optional<int> priority;  // 0 (blocker) .. 5
  std::optional<Version> release;
  Timestamp created;
  Timestamp modified;
  // Extra string-valued fields carried through from imports.
  std::map<std::string, std::string> custom;

  bool resolved_as_duplicate() const { return resolution && *resolution == "Duplicate"; }

  bool operator==(const Issue& o) const {
    auto rel = [](const std::optional<Version>& v) { return v ? std::optional<std::string>(v->str()) : std::nullopt; };
    return key == o.key && title == o.title && description == o.description && comments == o.comments &&
           type == o.type && status == o.status && resolution == o.resolution && priority == o.priority &&
           rel(release) == rel(o.release) && created == o.created && modified == o.modified && custom == o.custom;
  }
};

using IssuePtr = std::shared_ptr<const Issue>;

inline void validate(const Issue& issue) {
  if (issue.priority && (*issue.priority < 0 || *issue.priority > 5)) {
    throw ValidationError("priority " + std::to_string(*issue.priority) + " outside [0,5] for " + issue.key.str());
  }
}

/// Named property of an issue as text, used by property-based factors.
inline std::optional<std::string> property(const Issue& issue, std::string_view name) {
  if (name == "key") return issue.key.str();
  if (name == "project") return issue.key.project;
  if (name == "type") return std::string(to_string(issue.type));
  if (name == "status") return issue.status;
  if (name == "resolution") return issue.resolution;
  if (name == "priority") {
    if (!issue.priority) return std::nullopt;
    return "P" + std::to_string(*issue.priority);
  }
  if (name == "release") {
    if (!issue.release) return std::nullopt;
    return issue.release->str();
  }
  if (auto it = issue.custom.find(std::string(name)); it != issue.custom.end()) return it->second;
  return std::nullopt;
}

struct Dependency {
  IssueKey from;
  IssueKey to;
  DependencyType type = DependencyType::relates;
  DependencyStatus status = DependencyStatus::accepted;
  double score = 1.0;
  std::optional<Timestamp> created;

  KeyPair pair() const { return KeyPair(from, to); }

  bool operator==(const Dependency&) const = default;
};

inline void validate(const Dependency& d) {
  if (d.from == d.to) throw ValidationError("self-dependency on " + d.from.str());
  if (!(d.score >= 0.0 && d.score <= 1.0)) throw ValidationError("dependency score outside [0,1]");
  if (d.type == DependencyType::untyped && d.status != DependencyStatus::proposed) {
    throw ValidationError("untyped dependency " + d.from.str() + "->" + d.to.str() + " must be proposed");
  }
}

enum class Verdict { accept, reject };

inline std::string_view to_string(Verdict v) { return v == Verdict::accept ? "accept" : "reject"; }

inline Verdict parse_verdict(std::string_view s) {
  if (s == "accept") return Verdict::accept;
  if (s == "reject") return Verdict::reject;
  throw ValidationError("unknown verdict '" + std::string(s) + "'");
}

/// A reviewer's accept/reject decision on a proposed pair.
struct DecisionRecord {
  IssueKey from;
  IssueKey to;
  Verdict verdict = Verdict::reject;
  std::optional<DependencyType> dep_type;  // required for accept
  std::string actor;
  Timestamp at;

  bool operator==(const DecisionRecord&) const = default;
};

inline void validate(const DecisionRecord& r) {
  if (r.from == r.to) throw ValidationError("decision on self-pair " + r.from.str());
  if (r.verdict == Verdict::accept) {
    if (!r.dep_type) throw ValidationError("accepting a dependency requires a dep_type");
    if (*r.dep_type == DependencyType::untyped) throw ValidationError("accepted dependencies cannot be untyped");
  }
}

}  // namespace depgraph
