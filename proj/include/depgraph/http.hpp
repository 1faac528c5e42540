#pragma once

// HTTP/JSON front end over a Service.
//
//   GET  /api/graph/{key}?depth=P&include_proposed=BOOL
//   GET  /api/proposals/{key}?min_depth&f_depth&f_orphan&prop=name:value:factor (repeatable)
//   POST /api/decisions        {"from","to","verdict","dep_type"?,"actor"?}
//   GET  /api/consistency/{key}?depth&diagnose&time_limit_ms
//   POST /api/import, /api/update   multipart parts "issues" and "dependencies"
//   GET  /api/stats
//
// Errors are {"error": message} with 400 (bad input), 404 (unknown issue)
// or 500.

#include <charconv>
#include <cstdlib>
#include <memory>
#include <sstream>
#include <string>

#include <httplib.h>

#include "depgraph/dto.hpp"
#include "depgraph/engine.hpp"

namespace depgraph {

struct HttpOptions {
  std::uint32_t max_depth = 5;
  std::string ui_dir;  // served under /ui when non-empty
};

namespace detail {

inline void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

inline std::uint32_t query_uint(const httplib::Request& req, const char* name, std::uint32_t fallback) {
  if (!req.has_param(name)) return fallback;
  auto text = req.get_param_value(name);
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ValidationError(std::string(name) + " must be a non-negative integer, got '" + text + "'");
  }
  return v;
}

inline double query_positive(const httplib::Request& req, const char* name, double fallback) {
  if (!req.has_param(name)) return fallback;
  return parse_positive(req.get_param_value(name), name);
}

inline bool query_bool(const httplib::Request& req, const char* name, bool fallback) {
  if (!req.has_param(name)) return fallback;
  auto v = req.get_param_value(name);
  if (v == "true" || v == "1" || v.empty()) return true;
  if (v == "false" || v == "0") return false;
  throw ValidationError(std::string(name) + " must be true or false, got '" + v + "'");
}

inline IssueKey path_key(const httplib::Request& req) { return IssueKey::parse(req.matches[1].str()); }

inline std::string multipart_part(const httplib::Request& req, const char* name) {
  return req.has_file(name) ? req.get_file_value(name).content : std::string();
}

inline json issue_summary(const Issue& i, std::uint32_t distance) {
  json j{{"key", i.key.str()},
         {"title", i.title},
         {"type", std::string(to_string(i.type))},
         {"status", i.status},
         {"distance", distance}};
  j["priority"] = i.priority ? json(*i.priority) : json(nullptr);
  j["release"] = i.release ? json(i.release->str()) : json(nullptr);
  return j;
}

}  // namespace detail

inline json subgraph_dto(const Snapshot& s, const IssueKey& center, std::uint32_t requested, std::uint32_t max_depth,
                         bool include_proposed) {
  std::uint32_t depth = std::min(requested, max_depth);
  auto sub = s.subgraph(center, depth, include_proposed);
  std::map<NodeId, std::uint32_t> dist;
  for (const auto& [v, level] : bfs_levels(sub, sub.id_of(center), depth)) dist[v] = level;
  json nodes = json::array();
  for (NodeId i = 0; i < sub.size(); ++i) nodes.push_back(detail::issue_summary(sub.issue(i), dist.at(i)));
  json edges = json::array();
  for (const auto& d : sub.edges()) {
    auto e = to_json(d);
    e["proposed"] = d.status == DependencyStatus::proposed;
    edges.push_back(e);
  }
  json out{{"center", center.str()},      {"depth", depth},  {"requested_depth", requested},
           {"clamped", requested > depth}, {"nodes", nodes}, {"edges", edges},
           {"include_proposed", include_proposed}};
  return out;
}

inline std::unique_ptr<httplib::Server> make_server(Service& service, HttpOptions options = {}) {
  auto server = std::make_unique<httplib::Server>();
  auto& srv = *server;

  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const NotFoundError& e) {
      detail::send_json(res, {{"error", e.what()}}, 404);
    } catch (const std::invalid_argument& e) {
      detail::send_json(res, {{"error", e.what()}}, 400);
    } catch (const json::exception& e) {
      detail::send_json(res, {{"error", e.what()}}, 400);
    } catch (const std::exception& e) {
      detail::send_json(res, {{"error", e.what()}}, 500);
    } catch (...) {
      detail::send_json(res, {{"error", "internal error"}}, 500);
    }
  });

  srv.Get(R"(/api/graph/([^/]+))", [&service, options](const httplib::Request& req, httplib::Response& res) {
    auto key = detail::path_key(req);
    auto depth = detail::query_uint(req, "depth", options.max_depth);
    auto include_proposed = detail::query_bool(req, "include_proposed", false);
    auto snap = service.snapshot();
    if (!snap->graph().contains(key)) throw NotFoundError("unknown issue " + key.str());
    detail::send_json(res, subgraph_dto(*snap, key, depth, options.max_depth, include_proposed));
  });

  srv.Get(R"(/api/proposals/([^/]+))", [&service](const httplib::Request& req, httplib::Response& res) {
    auto key = detail::path_key(req);
    ContextParams params;
    params.min_depth = detail::query_uint(req, "min_depth", params.min_depth);
    params.f_depth = detail::query_positive(req, "f_depth", params.f_depth);
    params.f_orphan = detail::query_positive(req, "f_orphan", params.f_orphan);
    for (std::size_t i = 0; i < req.get_param_value_count("prop"); ++i) {
      params.properties.push_back(parse_property_factor(req.get_param_value("prop", i)));
    }
    auto ranked = service.snapshot()->proposals(key, params);
    json list = json::array();
    for (const auto& p : ranked) list.push_back(to_json(p));
    detail::send_json(res, {{"key", key.str()}, {"proposals", list}});
  });

  srv.Post("/api/decisions", [&service](const httplib::Request& req, httplib::Response& res) {
    auto body = json::parse(req.body);
    if (body.is_object() && !body.contains("at")) body["at"] = now_utc().value;
    auto record = decision_from_json(body);
    service.record_decision(record);
    auto snap = service.snapshot();
    json out{{"decision", to_json(record)},
             {"rejected", snap->rejected().contains(KeyPair(record.from, record.to))}};
    out["dependency"] = nullptr;
    if (record.verdict == Verdict::accept) {
      out["dependency"] = to_json(Dependency{record.from, record.to, *record.dep_type, DependencyStatus::accepted, 1.0,
                                             record.at});
    }
    detail::send_json(res, out, 201);
  });

  srv.Get(R"(/api/consistency/([^/]+))", [&service, options](const httplib::Request& req, httplib::Response& res) {
    auto key = detail::path_key(req);
    auto requested = detail::query_uint(req, "depth", options.max_depth);
    auto depth = std::min(requested, options.max_depth);
    DiagnoseOptions diag;
    diag.diagnose = detail::query_bool(req, "diagnose", false);
    diag.time_limit = std::chrono::milliseconds(detail::query_uint(req, "time_limit_ms", 5000));
    auto result = service.snapshot()->consistency(key, depth, diag);
    auto out = to_json(result);
    out["depth"] = depth;
    out["clamped"] = requested > depth;
    detail::send_json(res, out);
  });

  srv.Post("/api/import", [&service](const httplib::Request& req, httplib::Response& res) {
    std::istringstream issues(detail::multipart_part(req, "issues"));
    std::istringstream deps(detail::multipart_part(req, "dependencies"));
    detail::send_json(res, to_json(service.import_snapshot(issues, deps)));
  });

  srv.Post("/api/update", [&service](const httplib::Request& req, httplib::Response& res) {
    std::istringstream issues(detail::multipart_part(req, "issues"));
    std::istringstream deps(detail::multipart_part(req, "dependencies"));
    detail::send_json(res, to_json(service.apply_update(issues, deps)));
  });

  srv.Get("/api/stats", [&service](const httplib::Request&, httplib::Response& res) {
    auto snap = service.snapshot();
    auto report = to_json(graph_stats(snap->graph()));
    report["proposals"] = {{"references", snap->references().proposals.size()},
                           {"duplicates", snap->duplicates().size()},
                           {"rejected_pairs", snap->rejected().size()}};
    detail::send_json(res, report);
  });

  if (!options.ui_dir.empty()) srv.set_mount_point("/ui", options.ui_dir);
  return server;
}

/// Reads DEPGRAPH_* environment variables over the given defaults.
struct ServiceEnv {
  std::string data_dir = "data";
  int port = 8080;
  std::uint32_t max_depth = 5;
  double dup_threshold = 0.6;

  static ServiceEnv from_environment() {
    ServiceEnv env;
    if (const char* v = std::getenv("DEPGRAPH_DATA_DIR")) env.data_dir = v;
    if (const char* v = std::getenv("DEPGRAPH_PORT")) env.port = std::stoi(v);
    if (const char* v = std::getenv("DEPGRAPH_MAX_DEPTH")) env.max_depth = static_cast<std::uint32_t>(std::stoul(v));
    if (const char* v = std::getenv("DEPGRAPH_DUP_THRESHOLD")) env.dup_threshold = std::stod(v);
    return env;
  }
};

}  // namespace depgraph
