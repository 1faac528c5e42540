#pragma once

// TF-IDF vector space over issue token bags.
//
//   weight(t, d) = tf(t, d) * idf(t)
//   idf(t)       = ln((1 + n_docs) / (1 + df(t))) + 1
//
// Vectors are L2-normalized, so cosine similarity is a plain dot product.
// The idf table is frozen at fit time; later upserts re-vectorize against it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "depgraph/errors.hpp"
#include "depgraph/text.hpp"

namespace depgraph {

using TermId = std::uint32_t;
using DocId = std::uint32_t;

/// Sorted by term id.
using SparseVector = std::vector<std::pair<TermId, double>>;

inline double dot(const SparseVector& a, const SparseVector& b) {
  double sum = 0.0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      sum += i->second * j->second;
      ++i;
      ++j;
    }
  }
  return sum;
}

class TfidfModel {
 public:
  TfidfModel() = default;

  static TfidfModel fit(std::span<const TokenBag> bags) {
    TfidfModel m;
    m.n_docs_ = bags.size();
    for (const auto& bag : bags) {
      for (const auto& [token, count] : bag.counts) ++m.doc_freq_[m.intern(token)];
    }
    for (const auto& bag : bags) m.upsert(bag);
    return m;
  }

  std::size_t n_docs() const { return n_docs_; }
  std::size_t vocabulary_size() const { return terms_.size(); }
  std::size_t documents() const { return keys_.size(); }

  std::optional<TermId> term(const std::string& token) const {
    auto it = vocabulary_.find(token);
    if (it == vocabulary_.end()) return std::nullopt;
    return it->second;
  }
  const std::string& token(TermId t) const { return terms_[t]; }
  std::size_t doc_freq(TermId t) const { return doc_freq_[t]; }

  double idf(TermId t) const {
    return std::log((1.0 + static_cast<double>(n_docs_)) / (1.0 + static_cast<double>(doc_freq_[t]))) + 1.0;
  }

  /// Adds or re-vectorizes one document without touching the idf table.
  void upsert(const TokenBag& bag) {
    auto [it, inserted] = doc_index_.try_emplace(bag.issue, static_cast<DocId>(keys_.size()));
    DocId doc = it->second;
    if (inserted) {
      keys_.push_back(bag.issue);
      vectors_.emplace_back();
    } else {
      for (const auto& [t, w] : vectors_[doc]) {
        auto& list = postings_[t];
        list.erase(std::remove_if(list.begin(), list.end(), [doc](const auto& p) { return p.first == doc; }),
                   list.end());
      }
    }

    SparseVector v;
    v.reserve(bag.counts.size());
    for (const auto& [token, count] : bag.counts) {
      TermId t = intern(token);
      v.emplace_back(t, static_cast<double>(count) * idf(t));
    }
    std::sort(v.begin(), v.end());
    double norm = 0.0;
    for (const auto& [t, w] : v) norm += w * w;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (auto& [t, w] : v) w /= norm;
    }
    for (const auto& [t, w] : v) postings_[t].emplace_back(doc, w);
    vectors_[doc] = std::move(v);
  }

  bool contains(const IssueKey& key) const { return doc_index_.contains(key); }

  std::optional<DocId> doc(const IssueKey& key) const {
    auto it = doc_index_.find(key);
    if (it == doc_index_.end()) return std::nullopt;
    return it->second;
  }

  const IssueKey& key(DocId d) const { return keys_[d]; }
  const SparseVector& vector(DocId d) const { return vectors_[d]; }

  const SparseVector& vector(const IssueKey& key) const {
    auto it = doc_index_.find(key);
    if (it == doc_index_.end()) throw NotFoundError("issue " + key.str() + " is not vectorized");
    return vectors_[it->second];
  }

  /// (doc, weight) pairs for one term.
  std::span<const std::pair<DocId, double>> postings(TermId t) const { return postings_[t]; }

 private:
  TermId intern(const std::string& token) {
    auto [it, inserted] = vocabulary_.try_emplace(token, static_cast<TermId>(terms_.size()));
    if (inserted) {
      terms_.push_back(token);
      doc_freq_.push_back(0);
      postings_.emplace_back();
    }
    return it->second;
  }

  std::size_t n_docs_ = 0;
  std::unordered_map<std::string, TermId> vocabulary_;
  std::vector<std::string> terms_;
  std::vector<std::size_t> doc_freq_;
  std::vector<std::vector<std::pair<DocId, double>>> postings_;

  std::unordered_map<IssueKey, DocId, IssueKeyHash> doc_index_;
  std::vector<IssueKey> keys_;
  std::vector<SparseVector> vectors_;
};

/// Cosine similarity in [0, 1]; 0 when either vector is empty.
inline double cosine_sim(const TfidfModel& m, const IssueKey& a, const IssueKey& b) {
  double s = dot(m.vector(a), m.vector(b));
  return std::clamp(s, 0.0, 1.0);
}

inline double cosine_sim(const TfidfModel& m, DocId a, DocId b) {
  return std::clamp(dot(m.vector(a), m.vector(b)), 0.0, 1.0);
}

/// Documents sharing at least one term with `doc`, excluding itself; when
/// `only_greater` is set, restricted to ids above `doc`.
inline std::vector<DocId> blocked_neighbors(const TfidfModel& m, DocId doc, bool only_greater,
                                            std::vector<char>& mark) {
  mark.resize(m.documents(), 0);
  std::vector<DocId> out;
  for (const auto& [t, w] : m.vector(doc)) {
    for (const auto& [other, ow] : m.postings(t)) {
      if (other == doc || (only_greater && other < doc) || mark[other]) continue;
      mark[other] = 1;
      out.push_back(other);
    }
  }
  for (auto d : out) mark[d] = 0;
  std::sort(out.begin(), out.end());
  return out;
}

/// Inverted-index blocking: exactly the unordered pairs sharing a term.
inline std::vector<std::pair<DocId, DocId>> candidate_pairs(const TfidfModel& m) {
  std::vector<std::pair<DocId, DocId>> pairs;
  std::vector<char> mark;
  for (DocId d = 0; d < m.documents(); ++d) {
    for (auto other : blocked_neighbors(m, d, true, mark)) pairs.emplace_back(d, other);
  }
  return pairs;
}

}  // namespace depgraph
