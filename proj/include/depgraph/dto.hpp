#pragma once

// JSON views of query results, shared by the HTTP service and the CLI.

#include <string>

#include "depgraph/consistency.hpp"
#include "depgraph/detect_dup.hpp"
#include "depgraph/detect_ref.hpp"
#include "depgraph/evaluation.hpp"
#include "depgraph/jsonl.hpp"
#include "depgraph/proposals.hpp"
#include "depgraph/store.hpp"
#include "depgraph/topology.hpp"

namespace depgraph {

inline json to_json(const ReferenceProposal& r) {
  json j{{"from", r.from.str()}, {"to", r.to.str()}, {"source_field", std::string(to_string(r.field))},
         {"matched_text", r.matched_text}};
  if (r.field == SourceField::comment) j["comment_index"] = r.comment_index;
  return j;
}

inline json to_json(const DuplicateProposal& d) { return {{"a", d.a.str()}, {"b", d.b.str()}, {"score", d.score}}; }

inline json to_json(const Cluster& c) {
  json members = json::array();
  for (const auto& k : c.members) members.push_back(k.str());
  json edges = json::array();
  for (const auto& e : c.reported_edges) {
    edges.push_back({{"a", e.a.str()}, {"b", e.b.str()}, {"score", e.score}, {"existing", e.existing}});
  }
  return {{"members", members}, {"reported_edges", edges}};
}

inline json to_json(const RankedProposal& p) {
  json origins = json::array();
  if (p.by_reference) origins.push_back("reference");
  if (p.by_duplicate) origins.push_back("duplicate");
  json factors = json::array();
  for (const auto& f : p.applied_factors) factors.push_back({{"label", f.label}, {"factor", f.factor}});
  return {{"from", p.from.str()},          {"to", p.to.str()},   {"base_score", p.base_score},
          {"ranked_score", p.ranked_score}, {"origins", origins}, {"applied_factors", factors}};
}

inline json to_json(const RuleViolation& v) {
  return {{"dependency", to_json(v.dependency)}, {"rule", std::string(to_string(v.rule))}, {"detail", v.detail}};
}

inline json to_json(const DiagnosisResult& r) {
  json violations = json::array();
  for (const auto& v : r.violations) violations.push_back(to_json(v));
  json j{{"center", r.center.str()},
         {"consistent", r.consistent},
         {"violations", violations},
         {"cross_project_skipped", r.cross_project_skipped},
         {"elapsed_ms", static_cast<double>(r.elapsed.count()) / 1000.0}};
  if (r.diagnosed) {
    json deps = json::array();
    for (const auto& d : r.diag_dependencies) deps.push_back(to_json(d));
    json issues = json::array();
    for (const auto& k : r.diag_issues) issues.push_back(k.str());
    j["diag_dependencies"] = deps;
    j["diag_issues"] = issues;
    j["dep_diag_timed_out"] = r.dep_diag_timed_out;
    j["issue_diag_timed_out"] = r.issue_diag_timed_out;
    if (r.issue_diag_error) j["issue_diag_error"] = *r.issue_diag_error;
  }
  return j;
}

inline json to_json(const CountSummary& s) {
  return {{"min", s.min}, {"avg", s.avg}, {"median", s.median}, {"max", s.max}};
}

inline json to_json(const TopologyReport& r) {
  json hist = json::object();
  for (const auto& [deg, n] : r.degree_histogram) hist[std::to_string(deg)] = n;
  json j{{"issues", r.issues},
         {"dependencies", r.dependencies},
         {"dependencies_per_issue", to_json(r.dependencies_per_issue)},
         {"dependencies_per_linked_issue", to_json(r.dependencies_per_linked_issue)},
         {"degree_histogram", hist},
         {"orphans", r.orphans},
         {"orphan_fraction", r.orphan_fraction},
         {"components", r.components},
         {"component_sizes", r.component_sizes}};
  if (!r.p_depth.empty()) {
    json depth = json::array();
    for (const auto& d : r.p_depth) {
      depth.push_back({{"depth", d.depth}, {"p_depth_graphs", d.graphs}, {"issues_in_p_graphs", to_json(d.issues)}});
    }
    j["p_depth"] = depth;
  }
  return j;
}

inline json to_json(const ParseError& e) { return {{"stream", e.stream}, {"line", e.line}, {"message", e.message}}; }

inline json to_json(const ImportReport& r) {
  json errors = json::array();
  for (const auto& e : r.errors) errors.push_back(to_json(e));
  return {{"issues", r.issues},
          {"dependencies", r.dependencies},
          {"dropped", r.dropped},
          {"parse_errors", r.parse_errors()},
          {"errors", errors}};
}

inline json to_json(const UpdateReport& r) {
  json changed = json::array();
  for (const auto& k : r.changed_issues) changed.push_back(k.str());
  json revisit = json::array();
  for (const auto& p : r.rejections_to_revisit) revisit.push_back({p.first.str(), p.second.str()});
  json errors = json::array();
  for (const auto& e : r.errors) errors.push_back(to_json(e));
  return {{"changed_issues", changed},
          {"new_issues", r.new_issues},
          {"changed_dependencies", r.changed_dependencies},
          {"dropped", r.dropped},
          {"new_projects", r.new_projects},
          {"rejections_to_revisit", revisit},
          {"parse_errors", r.parse_errors()},
          {"errors", errors}};
}

inline json to_json(const Metrics& m) {
  return {{"accuracy", m.accuracy},
          {"recall", m.recall},
          {"precision", m.precision},
          {"f_measure", m.f_measure},
          {"recall_undefined", m.recall_undefined},
          {"precision_undefined", m.precision_undefined},
          {"f_undefined", m.f_undefined},
          {"tp", m.counts.tp},
          {"fp", m.counts.fp},
          {"tn", m.counts.tn},
          {"fn", m.counts.fn}};
}

inline json to_json(const CrossvalResult& r) {
  return {{"reference", to_json(r.reference)},
          {"duplicate", to_json(r.duplicate)},
          {"union", to_json(r.either)},
          {"intersection", to_json(r.both)},
          {"fold_thresholds", r.fold_thresholds}};
}

inline json to_json(const ThresholdSearch& t) {
  json curve = json::array();
  for (const auto& [thr, f] : t.curve) curve.push_back({{"threshold", thr}, {"f_measure", f}});
  return {{"best_threshold", t.best}, {"best_f_measure", t.best_f}, {"curve", curve}};
}

}  // namespace depgraph
