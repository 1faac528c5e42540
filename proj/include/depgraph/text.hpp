#pragma once

// Lexical pipeline for duplicate detection: title + description, lowercased,
// split on non-alphanumeric runs, short tokens and stopwords dropped. No
// stemming.

#include <algorithm>
#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "depgraph/types.hpp"

namespace depgraph {

inline constexpr std::string_view kStopwords[] = {
    "a",       "about",  "above",   "after",   "again",   "against", "all",     "am",      "an",
    "and",     "any",    "are",     "as",      "at",      "be",      "because", "been",    "before",
    "being",   "below",  "between", "both",    "but",     "by",      "can",     "could",   "did",
    "do",      "does",   "doing",   "down",    "during",  "each",    "few",     "for",     "from",
    "further", "had",    "has",     "have",    "having",  "he",      "her",     "here",    "hers",
    "herself", "him",    "himself", "his",     "how",     "if",      "in",      "into",    "is",
    "it",      "its",    "itself",  "just",    "me",      "more",    "most",    "my",      "myself",
    "no",      "nor",    "not",     "now",     "of",      "off",     "on",      "once",    "only",
    "or",      "other",  "our",     "ours",    "ourselves", "out",   "over",    "own",     "same",
    "she",     "should", "so",      "some",    "such",    "than",    "that",    "the",     "their",
    "theirs",  "them",   "themselves", "then", "there",   "these",   "they",    "this",    "those",
    "through", "to",     "too",     "under",   "until",   "up",      "very",    "was",     "we",
    "were",    "what",   "when",    "where",   "which",   "while",   "who",     "whom",    "why",
    "will",    "with",   "would",   "you",     "your",    "yours",   "yourself", "yourselves", "i",
    "s",
};

inline bool is_stopword(std::string_view token) {
  static const auto sorted = [] {
    std::vector<std::string_view> copy(std::begin(kStopwords), std::end(kStopwords));
    std::sort(copy.begin(), copy.end());
    return copy;
  }();
  return std::binary_search(sorted.begin(), sorted.end(), token);
}

inline constexpr std::size_t kMinTokenLength = 2;

struct TokenBag {
  IssueKey issue;
  std::map<std::string, std::size_t> counts;

  bool operator==(const TokenBag&) const = default;
};

namespace detail {

// Bytes >= 0x80 belong to tokens so multi-byte UTF-8 words stay whole.
inline bool is_token_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

inline void tokenize_into(std::string_view text, std::map<std::string, std::size_t>& counts) {
  std::string token;
  auto flush = [&] {
    if (token.size() >= kMinTokenLength && !is_stopword(token)) ++counts[token];
    token.clear();
  };
  for (unsigned char c : text) {
    if (is_token_byte(c)) {
      token.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
    } else {
      flush();
    }
  }
  flush();
}

}  // namespace detail

inline TokenBag text_preprocess(const Issue& issue) {
  TokenBag bag{issue.key, {}};
  detail::tokenize_into(issue.title, bag.counts);
  detail::tokenize_into(issue.description, bag.counts);
  return bag;
}

}  // namespace depgraph
