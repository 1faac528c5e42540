#pragma once

// Seeded synthetic repositories with planted structure: tree-shaped
// components of given sizes, near-copy duplicates, key mentions in comments.
// The returned ground truth is what tests compare against.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "depgraph/errors.hpp"
#include "depgraph/jsonl.hpp"
#include "depgraph/types.hpp"

namespace depgraph {

enum class Schedule {
  random,   // independent random release and priority per issue
  uniform,  // every issue shares one release and priority; all rules hold
};

struct GeneratorParams {
  std::uint64_t seed = 1;
  std::vector<std::string> projects{"QTBUG", "QBS", "QTCREATORBUG"};
  std::uint32_t first_number = 1;
  std::size_t issues = 1000;
  std::size_t dependencies = 250;  // includes the edges of planted components
  std::vector<std::size_t> planted_components;
  std::size_t vocabulary = 5000;
  std::size_t title_words = 6;
  std::size_t description_words = 24;
  std::size_t duplicate_pairs = 0;  // near-copy text, no dependency between them
  std::size_t references = 0;       // comments mentioning another issue's key
  double rule_fraction = 0.4;       // share of random edges typed requires / parent_child
  Schedule schedule = Schedule::random;
};

struct PlantedReference {
  IssueKey from;
  IssueKey to;
};

struct GeneratedRepo {
  std::vector<Issue> issues;
  std::vector<Dependency> dependencies;
  std::vector<std::vector<IssueKey>> components;  // planted, in order
  std::vector<std::pair<IssueKey, IssueKey>> duplicates;
  std::vector<PlantedReference> references;
};

/// Vocabulary word `i`: letters and digits, never a stopword.
inline std::string synthetic_word(std::size_t i) {
  static constexpr char kLetters[] = "bcdfghjklmnpqrstvwxz";
  std::string w;
  w += kLetters[i % 20];
  w += kLetters[(i / 20) % 20];
  w += std::to_string(i);
  return w;
}

inline GeneratedRepo generate_repository(const GeneratorParams& p) {
  if (p.projects.empty()) throw ValidationError("at least one project is required");
  std::size_t planted_nodes = 0;
  std::size_t planted_edges = 0;
  for (auto s : p.planted_components) {
    if (s == 0) throw ValidationError("planted component size must be positive");
    planted_nodes += s;
    planted_edges += s - 1;
  }
  if (planted_nodes > p.issues) throw ValidationError("planted components exceed the issue count");
  if (planted_edges > p.dependencies) throw ValidationError("planted components need more dependencies");
  if (p.duplicate_pairs * 2 > p.issues) throw ValidationError("too many duplicate pairs");

  std::mt19937_64 rng(p.seed);
  auto uniform = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  auto chance = [&](double q) { return std::bernoulli_distribution(q)(rng); };

  GeneratedRepo out;
  out.issues.resize(p.issues);
  std::vector<std::uint32_t> next_number(p.projects.size(), p.first_number);
  static constexpr IssueType kTypes[] = {IssueType::bug, IssueType::epic, IssueType::user_story,
                                         IssueType::suggestion, IssueType::task};
  static constexpr const char* kStatuses[] = {"Open", "In Progress", "Resolved", "Closed"};
  std::optional<int> shared_priority = 2;
  std::optional<Version> shared_release = Version(5, 12, 0);

  auto words = [&](std::size_t n) {
    std::string s;
    for (std::size_t w = 0; w < n; ++w) {
      if (w) s += ' ';
      s += synthetic_word(uniform(p.vocabulary));
    }
    return s;
  };

  for (std::size_t i = 0; i < p.issues; ++i) {
    auto proj = i % p.projects.size();
    Issue& issue = out.issues[i];
    issue.key = IssueKey{p.projects[proj], next_number[proj]++};
    issue.title = words(p.title_words);
    issue.description = words(p.description_words);
    issue.type = kTypes[uniform(5)];
    issue.status = kStatuses[uniform(4)];
    if (p.schedule == Schedule::uniform) {
      issue.priority = shared_priority;
      issue.release = shared_release;
    } else {
      if (!chance(0.1)) issue.priority = static_cast<int>(uniform(6));
      if (!chance(0.15)) {
        issue.release = Version(5, static_cast<std::uint32_t>(10 + uniform(6)), static_cast<std::uint32_t>(uniform(3)));
      }
    }
    issue.created.value = "2019-01-01T00:00:00Z";
    issue.modified.value = "2019-06-01T00:00:00Z";
  }

  // Planted components occupy a random subset of nodes; every other edge
  // stays outside them so their sizes are exact.
  std::vector<std::size_t> perm(p.issues);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::set<std::pair<std::size_t, std::size_t>> used;
  auto random_type = [&] {
    if (chance(p.rule_fraction)) return chance(0.5) ? DependencyType::requires_ : DependencyType::parent_child;
    static constexpr DependencyType kOther[] = {DependencyType::relates, DependencyType::results,
                                                DependencyType::tests, DependencyType::replaces};
    return kOther[uniform(4)];
  };
  auto add_edge = [&](std::size_t a, std::size_t b) {
    used.insert(std::minmax(a, b));
    out.dependencies.push_back(
        {out.issues[a].key, out.issues[b].key, random_type(), DependencyStatus::accepted, 1.0, std::nullopt});
  };

  std::size_t cursor = 0;
  for (auto size : p.planted_components) {
    std::vector<IssueKey> members;
    for (std::size_t m = 0; m < size; ++m) {
      auto node = perm[cursor + m];
      members.push_back(out.issues[node].key);
      if (m > 0) add_edge(perm[cursor + uniform(m)], node);
    }
    std::sort(members.begin(), members.end());
    out.components.push_back(std::move(members));
    cursor += size;
  }

  std::vector<std::size_t> rest(perm.begin() + static_cast<std::ptrdiff_t>(cursor), perm.end());
  std::size_t remaining = p.dependencies - planted_edges;
  std::size_t possible = rest.size() < 2 ? 0 : rest.size() * (rest.size() - 1) / 2;
  if (remaining > possible) throw ValidationError("not enough free issues for the requested dependencies");
  while (remaining > 0) {
    auto a = rest[uniform(rest.size())];
    auto b = rest[uniform(rest.size())];
    if (a == b || used.contains(std::minmax(a, b))) continue;
    add_edge(a, b);
    --remaining;
  }

  // Near-copy duplicates: same title, description plus one extra word.
  std::vector<std::size_t> order(p.issues);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t d = 0; d < p.duplicate_pairs; ++d) {
    auto& original = out.issues[order[2 * d]];
    auto& copy = out.issues[order[2 * d + 1]];
    copy.title = original.title;
    copy.description = original.description + " " + synthetic_word(uniform(p.vocabulary));
    out.duplicates.emplace_back(std::min(original.key, copy.key), std::max(original.key, copy.key));
  }

  std::set<std::pair<IssueKey, IssueKey>> mentioned;
  for (std::size_t r = 0; r < p.references && p.issues >= 2;) {
    auto a = uniform(p.issues);
    auto b = uniform(p.issues);
    if (a == b || !mentioned.insert({out.issues[a].key, out.issues[b].key}).second) continue;
    out.issues[a].comments.push_back("see " + out.issues[b].key.str() + " for context");
    out.references.push_back({out.issues[a].key, out.issues[b].key});
    ++r;
  }
  return out;
}

inline void write_repository(const GeneratedRepo& repo, std::ostream& issues, std::ostream& dependencies) {
  for (const auto& i : repo.issues) write_jsonl_line(issues, to_json(i));
  for (const auto& d : repo.dependencies) write_jsonl_line(dependencies, to_json(d));
}

}  // namespace depgraph
