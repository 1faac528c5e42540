#pragma once

// Reference detection: textual mentions of other issue keys in titles,
// descriptions and comments become untyped, proposed dependencies.
//
// A mention is `<PID>-<1..5 digits>` where PID is one of the known project
// acronyms (case-sensitive), the character before PID is absent or not
// alphanumeric, and the character after the digits is absent or not a digit.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "depgraph/types.hpp"

namespace depgraph {

enum class SourceField { title, description, comment };

struct ReferenceProposal {
  IssueKey from;
  IssueKey to;
  SourceField field = SourceField::title;
  std::size_t comment_index = 0;  // meaningful for SourceField::comment
  std::string matched_text;

  bool operator==(const ReferenceProposal&) const = default;
};

inline std::string_view to_string(SourceField f) {
  switch (f) {
    case SourceField::title:
      return "title";
    case SourceField::description:
      return "description";
    case SourceField::comment:
      return "comment";
  }
  return "?";
}

struct ReferenceResult {
  std::vector<ReferenceProposal> proposals;  // sorted by (from, to)
  std::size_t dangling = 0;                  // mentions of keys not in the repository
  std::size_t self_references = 0;
};

namespace detail {

inline bool is_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

}  // namespace detail

/// All well-formed mentions in `text`, in order of appearance.
inline std::vector<std::pair<IssueKey, std::string>> find_mentions(
    std::string_view text, const std::unordered_set<std::string>& project_ids) {
  std::vector<std::pair<IssueKey, std::string>> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (!detail::is_alnum(text[i]) || (i > 0 && detail::is_alnum(text[i - 1]))) {
      ++i;
      continue;
    }
    // Word start: read the alphanumeric run.
    std::size_t j = i;
    while (j < n && detail::is_alnum(text[j])) ++j;
    if (j + 1 < n && text[j] == '-' && project_ids.contains(std::string(text.substr(i, j - i)))) {
      std::size_t k = j + 1;
      while (k < n && detail::is_digit(text[k])) ++k;
      std::size_t digits = k - (j + 1);
      if (digits >= 1 && digits <= 5 && text[j + 1] != '0') {
        std::uint32_t number = 0;
        for (std::size_t d = j + 1; d < k; ++d) number = number * 10 + static_cast<std::uint32_t>(text[d] - '0');
        out.emplace_back(IssueKey{std::string(text.substr(i, j - i)), number}, std::string(text.substr(i, k - i)));
      }
    }
    i = j;
  }
  return out;
}

struct ReferenceOptions {
  std::optional<Timestamp> since;  // only scan issues modified at or after this
};

/// `known` answers whether a target key exists in the repository.
template <typename KnownFn>
ReferenceResult detect_references(std::span<const IssuePtr> issues, const std::set<std::string>& project_ids,
                                  KnownFn&& known, const ReferenceOptions& options = {}) {
  std::unordered_set<std::string> pids(project_ids.begin(), project_ids.end());
  ReferenceResult result;
  for (const auto& issue : issues) {
    if (options.since && issue->modified < *options.since) continue;
    std::set<IssueKey> seen;
    auto scan = [&](std::string_view text, SourceField field, std::size_t index) {
      for (auto& [key, matched] : find_mentions(text, pids)) {
        if (key == issue->key) {
          ++result.self_references;
          continue;
        }
        if (!known(key)) {
          ++result.dangling;
          continue;
        }
        if (!seen.insert(key).second) continue;
        result.proposals.push_back({issue->key, key, field, index, std::move(matched)});
      }
    };
    scan(issue->title, SourceField::title, 0);
    scan(issue->description, SourceField::description, 0);
    for (std::size_t c = 0; c < issue->comments.size(); ++c) scan(issue->comments[c], SourceField::comment, c);
  }
  std::sort(result.proposals.begin(), result.proposals.end(), [](const auto& a, const auto& b) {
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });
  return result;
}

/// Project acronyms present among `issues`.
inline std::set<std::string> project_ids_of(std::span<const IssuePtr> issues) {
  std::set<std::string> out;
  for (const auto& i : issues) out.insert(i->key.project);
  return out;
}

}  // namespace depgraph
