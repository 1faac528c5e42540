#pragma once

// FastDiag: divide-and-conquer computation of the preferred minimal diagnosis
// of an inconsistent constraint set under a total importance order.
//
// Candidates are given most important first. The result is the complement of
// the lexicographically best consistent subset: a more important candidate is
// kept whenever possible, even if every less important one has to go.

#include <algorithm>
#include <chrono>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "depgraph/errors.hpp"

namespace depgraph {

class DeadlineExceeded : public std::runtime_error {
 public:
  DeadlineExceeded() : std::runtime_error("time limit exceeded") {}
};

/// Cooperative time budget; `check()` throws once it has passed.
class Deadline {
 public:
  using Clock = std::chrono::steady_clock;

  static Deadline never() { return Deadline(Clock::time_point::max()); }
  static Deadline after(Clock::duration budget) { return Deadline(Clock::now() + budget); }

  bool expired() const { return end_ != Clock::time_point::max() && Clock::now() >= end_; }
  void check() const {
    if (expired()) throw DeadlineExceeded();
  }

 private:
  explicit Deadline(Clock::time_point end) : end_(end) {}
  Clock::time_point end_;
};

namespace detail {

// `kept` flags candidate membership in the tested set; the background is
// implicit. Standard FastDiag recursion over candidate index lists where the
// first half is the one tried for removal first, i.e. least important first.
template <typename Oracle>
class FastDiagRun {
 public:
  FastDiagRun(std::size_t n, Oracle& consistent) : kept_(n, 1), consistent_(consistent) {}

  std::vector<std::size_t> run(const std::vector<std::size_t>& order) {
    return fd(false, order);
  }

  bool test() { return consistent_(static_cast<const std::vector<char>&>(kept_)); }

 private:
  void set(const std::vector<std::size_t>& items, char v) {
    for (auto i : items) kept_[i] = v;
  }

  // `kept_` encodes AC on entry and is restored on exit.
  std::vector<std::size_t> fd(bool has_delta, const std::vector<std::size_t>& c) {
    if (has_delta && test()) return {};
    if (c.size() == 1) return c;
    auto k = c.size() / 2;
    std::vector<std::size_t> c1(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(k));
    std::vector<std::size_t> c2(c.begin() + static_cast<std::ptrdiff_t>(k), c.end());

    set(c1, 0);
    auto d1 = fd(!c1.empty(), c2);
    set(c1, 1);

    set(d1, 0);
    auto d2 = fd(!d1.empty(), c1);
    set(d1, 1);

    d1.insert(d1.end(), d2.begin(), d2.end());
    return d1;
  }

  std::vector<char> kept_;
  Oracle& consistent_;
};

}  // namespace detail

/// Preferred minimal diagnosis as indices into the candidate list.
///
/// `consistent(kept)` decides whether the background together with the
/// candidates flagged in `kept` is consistent. It must be monotone: removing
/// constraints never turns a consistent set inconsistent.
template <typename Oracle>
std::vector<std::size_t> fastdiag_indices(std::size_t n_candidates, Oracle&& consistent) {
  std::vector<char> none(n_candidates, 0);
  if (!consistent(static_cast<const std::vector<char>&>(none))) {
    throw ValidationError("background constraints are inconsistent on their own");
  }
  detail::FastDiagRun<std::remove_reference_t<Oracle>> run(n_candidates, consistent);
  if (n_candidates == 0 || run.test()) return {};
  std::vector<std::size_t> order;
  order.reserve(n_candidates);
  for (std::size_t i = n_candidates; i-- > 0;) order.push_back(i);
  auto diag = run.run(order);
  std::sort(diag.begin(), diag.end());
  return diag;
}

/// Constraint-valued front end. `consistent` receives the background followed
/// by the retained candidates in their original order.
template <typename C, typename Oracle>
std::vector<C> fastdiag(std::span<const C> ordered_candidates, std::span<const C> background, Oracle&& consistent) {
  auto assemble = [&](const std::vector<char>& kept) {
    std::vector<C> set(background.begin(), background.end());
    for (std::size_t i = 0; i < ordered_candidates.size(); ++i) {
      if (kept[i]) set.push_back(ordered_candidates[i]);
    }
    return consistent(std::span<const C>(set));
  };
  auto idx = fastdiag_indices(ordered_candidates.size(), assemble);
  std::vector<C> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(ordered_candidates[i]);
  return out;
}

}  // namespace depgraph
