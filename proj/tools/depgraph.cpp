// depgraph command line: imports, detector runs, proposals, consistency
// checks and sweeps, evaluation procedures, synthetic data and the server.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "depgraph/depgraph.hpp"
#include "depgraph/http.hpp"

namespace {

using namespace depgraph;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

// Writes to --out when given, else stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

std::vector<IssuePtr> load_issues(const std::string& data_dir) { return Repository::load(data_dir).issues(); }

IssueGraph load_graph(const std::string& data_dir) {
  auto repo = Repository::load(data_dir);
  auto deps = repo.dependencies();
  return IssueGraph::build(repo.issues(), deps);
}

std::set<std::string> split_projects(const std::string& list) {
  std::set<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (!IssueKey::valid_project(item)) throw ValidationError("invalid project acronym '" + item + "'");
    out.insert(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Issue dependency analysis: detection, proposals, consistency"};
  app.require_subcommand(1);
  auto env = ServiceEnv::from_environment();
  std::string data_dir = env.data_dir;
  std::string out_path;
  app.add_option("--data", data_dir, "Data directory")->capture_default_str();

  // import / update
  std::string issues_file, deps_file;
  auto* import_cmd = app.add_subcommand("import", "Replace the repository with JSONL exports");
  auto* update_cmd = app.add_subcommand("update", "Upsert new and changed issues and dependencies");
  for (auto* cmd : {import_cmd, update_cmd}) {
    cmd->add_option("--issues", issues_file, "issues.jsonl")->required();
    cmd->add_option("--deps", deps_file, "dependencies.jsonl");
  }

  // detect refs | dups
  auto* detect = app.add_subcommand("detect", "Run a detector over the repository");
  detect->require_subcommand(1);
  auto* refs_cmd = detect->add_subcommand("refs", "Reference detection");
  std::string projects, since;
  refs_cmd->add_option("--projects", projects, "Comma-separated project acronyms (default: all known)");
  refs_cmd->add_option("--since", since, "Only scan issues modified at or after this timestamp");
  refs_cmd->add_option("--out", out_path);
  auto* dups_cmd = detect->add_subcommand("dups", "Duplicate detection");
  double thr = env.dup_threshold;
  bool exhaustive = false;
  dups_cmd->add_option("--thr", thr, "Similarity threshold in (0,1]")->capture_default_str();
  dups_cmd->add_flag("--exhaustive", exhaustive, "Score all pairs instead of using the inverted index");
  dups_cmd->add_option("--out", out_path);

  // propose
  auto* propose_cmd = app.add_subcommand("propose", "Ranked dependency proposals for one issue");
  std::string key_text;
  ContextParams ctx;
  std::vector<std::string> props;
  propose_cmd->add_option("key", key_text)->required();
  propose_cmd->add_option("--min-depth", ctx.min_depth)->capture_default_str();
  propose_cmd->add_option("--f-depth", ctx.f_depth)->capture_default_str();
  propose_cmd->add_option("--f-orphan", ctx.f_orphan)->capture_default_str();
  propose_cmd->add_option("--prop", props, "name:value:factor (repeatable)");
  propose_cmd->add_option("--thr", thr, "Duplicate threshold")->capture_default_str();

  // check
  auto* check_cmd = app.add_subcommand("check", "Consistency check and diagnosis");
  std::uint32_t depth = 5, max_depth = 10;
  bool do_diagnose = false, all = false;
  std::uint32_t time_limit_ms = 5000;
  unsigned threads = 1;
  check_cmd->add_option("key", key_text);
  check_cmd->add_option("--depth", depth)->capture_default_str();
  check_cmd->add_flag("--diagnose", do_diagnose);
  check_cmd->add_option("--time-limit-ms", time_limit_ms)->capture_default_str();
  check_cmd->add_flag("--all", all, "Sweep every issue and depth; CSV output");
  check_cmd->add_option("--max-depth", max_depth)->capture_default_str();
  check_cmd->add_option("--threads", threads)->capture_default_str();
  check_cmd->add_option("--out", out_path);

  auto* sweep_cmd = app.add_subcommand("sweep", "Per-depth consistency sweep (CSV)");
  sweep_cmd->add_option("--max-depth", max_depth)->capture_default_str();
  sweep_cmd->add_option("--time-limit-ms", time_limit_ms)->capture_default_str();
  sweep_cmd->add_option("--threads", threads)->capture_default_str();
  sweep_cmd->add_option("--out", out_path);

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Topology report");
  std::uint32_t min_depth = 1;
  std::uint32_t analyze_max = 5;
  analyze_cmd->add_option("--min-depth", min_depth)->capture_default_str();
  analyze_cmd->add_option("--max-depth", analyze_max, "0 skips p-depth statistics")->capture_default_str();
  analyze_cmd->add_option("--out", out_path);

  // crossval / tune
  std::string pairs_file;
  CrossvalOptions cv;
  auto* crossval_cmd = app.add_subcommand("crossval", "k-fold cross-validation on labeled pairs");
  crossval_cmd->add_option("--pairs", pairs_file)->required();
  crossval_cmd->add_option("--k", cv.k)->capture_default_str();
  crossval_cmd->add_option("--seed", cv.seed)->capture_default_str();
  crossval_cmd->add_option("--start", cv.start_threshold)->capture_default_str();
  crossval_cmd->add_option("--out", out_path);
  auto* tune_cmd = app.add_subcommand("tune", "Hill-climb the duplicate threshold on labeled pairs");
  tune_cmd->add_option("--pairs", pairs_file)->required();
  tune_cmd->add_option("--start", cv.start_threshold)->capture_default_str();
  tune_cmd->add_option("--out", out_path);

  // generate
  auto* generate_cmd = app.add_subcommand("generate", "Write a seeded synthetic repository");
  GeneratorParams gen;
  std::string gen_dir;
  std::string gen_projects;
  generate_cmd->add_option("--out-dir", gen_dir, "Directory for issues.jsonl and dependencies.jsonl")->required();
  generate_cmd->add_option("--seed", gen.seed)->capture_default_str();
  generate_cmd->add_option("--issues", gen.issues)->capture_default_str();
  generate_cmd->add_option("--deps", gen.dependencies)->capture_default_str();
  generate_cmd->add_option("--component", gen.planted_components, "Planted component size (repeatable)");
  generate_cmd->add_option("--duplicates", gen.duplicate_pairs)->capture_default_str();
  generate_cmd->add_option("--references", gen.references)->capture_default_str();
  generate_cmd->add_option("--vocabulary", gen.vocabulary)->capture_default_str();
  generate_cmd->add_option("--projects", gen_projects, "Comma-separated project acronyms");
  generate_cmd->add_option("--first-number", gen.first_number)->capture_default_str();
  generate_cmd->add_flag("--consistent", "Give every issue the same release and priority");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "HTTP API");
  int port = env.port;
  std::uint32_t serve_max_depth = env.max_depth;
  std::string ui_dir;
  serve_cmd->add_option("--port", port)->capture_default_str();
  serve_cmd->add_option("--max-depth", serve_max_depth)->capture_default_str();
  serve_cmd->add_option("--thr", thr)->capture_default_str();
  serve_cmd->add_option("--ui", ui_dir, "Static files served under /ui");

  CLI11_PARSE(app, argc, argv);

  try {
    if (import_cmd->parsed() || update_cmd->parsed()) {
      auto issues = open_input(issues_file);
      std::ifstream deps_in;
      std::istringstream empty;
      if (!deps_file.empty()) deps_in = open_input(deps_file);
      std::istream& deps = deps_file.empty() ? static_cast<std::istream&>(empty) : deps_in;
      if (import_cmd->parsed()) {
        auto repo = std::filesystem::exists(data_dir) ? Repository::load(data_dir) : Repository();
        auto report = repo.import_snapshot(issues, deps);
        repo.save(data_dir);
        std::cout << to_json(report).dump(2) << '\n';
      } else {
        auto repo = Repository::load(data_dir);
        auto report = repo.apply_update(issues, deps);
        repo.save(data_dir);
        std::cout << to_json(report).dump(2) << '\n';
      }
    } else if (refs_cmd->parsed()) {
      auto repo = Repository::load(data_dir);
      auto issues = repo.issues();
      ReferenceOptions opts;
      if (!since.empty()) opts.since = Timestamp{since};
      auto pids = projects.empty() ? repo.project_ids() : split_projects(projects);
      auto result = detect_references(std::span<const IssuePtr>(issues), pids,
                                      [&](const IssueKey& k) { return repo.contains(k); }, opts);
      Output out(out_path);
      for (const auto& p : result.proposals) write_jsonl_line(out.stream(), to_json(p));
      std::cerr << result.proposals.size() << " proposals, " << result.dangling << " dangling mentions, "
                << result.self_references << " self-references\n";
    } else if (dups_cmd->parsed()) {
      auto g = load_graph(data_dir);
      auto model = build_model(g);
      auto result = detect_duplicates(g, model, thr, exhaustive ? PairScan::exhaustive : PairScan::blocking);
      Output out(out_path);
      for (const auto& p : result.proposals) {
        auto j = to_json(p);
        j["kind"] = "proposal";
        write_jsonl_line(out.stream(), j);
      }
      for (const auto& c : result.clusters) {
        auto j = to_json(c);
        j["kind"] = "cluster";
        write_jsonl_line(out.stream(), j);
      }
    } else if (propose_cmd->parsed()) {
      for (const auto& p : props) ctx.properties.push_back(parse_property_factor(p));
      EngineConfig config;
      config.dup_threshold = thr;
      auto snap = Snapshot::build(std::make_shared<const Repository>(Repository::load(data_dir)), config);
      json list = json::array();
      for (const auto& p : snap->proposals(IssueKey::parse(key_text), ctx)) list.push_back(to_json(p));
      std::cout << list.dump(2) << '\n';
    } else if (check_cmd->parsed() || sweep_cmd->parsed()) {
      auto g = load_graph(data_dir);
      if (sweep_cmd->parsed() || all) {
        SweepOptions opts{max_depth, std::chrono::milliseconds(time_limit_ms), threads};
        auto rows = sweep_consistency(g, opts);
        Output out(out_path);
        write_sweep_csv(out.stream(), rows);
      } else {
        if (key_text.empty()) throw ValidationError("check needs an issue key or --all");
        auto key = IssueKey::parse(key_text);
        DiagnoseOptions opts{std::chrono::milliseconds(time_limit_ms), do_diagnose};
        auto result = diagnose(key, p_depth_subgraph(g, key, depth), opts);
        Output out(out_path);
        out.stream() << to_json(result).dump(2) << '\n';
      }
    } else if (analyze_cmd->parsed()) {
      auto g = load_graph(data_dir);
      StatsOptions opts;
      opts.min_depth = min_depth;
      opts.max_depth = analyze_max;
      Output out(out_path);
      out.stream() << to_json(graph_stats(g, opts)).dump(2) << '\n';
    } else if (crossval_cmd->parsed() || tune_cmd->parsed()) {
      auto in = open_input(pairs_file);
      auto pairs = read_labeled_pairs(in);
      auto issues = load_issues(data_dir);
      Output out(out_path);
      if (crossval_cmd->parsed()) {
        out.stream() << to_json(crossval(issues, pairs, cv)).dump(2) << '\n';
      } else {
        std::vector<TokenBag> bags;
        for (const auto& i : issues) bags.push_back(text_preprocess(*i));
        auto model = TfidfModel::fit(bags);
        std::vector<ScoredPair> scored;
        for (const auto& p : pairs) scored.push_back({cosine_sim(model, p.a, p.b), p.duplicate});
        out.stream() << to_json(tune_threshold(scored, cv.start_threshold)).dump(2) << '\n';
      }
    } else if (generate_cmd->parsed()) {
      if (!gen_projects.empty()) {
        auto set = split_projects(gen_projects);
        gen.projects.assign(set.begin(), set.end());
      }
      if (generate_cmd->count("--consistent")) gen.schedule = Schedule::uniform;
      auto repo = generate_repository(gen);
      std::filesystem::create_directories(gen_dir);
      std::ofstream issues(std::filesystem::path(gen_dir) / "issues.jsonl");
      std::ofstream deps(std::filesystem::path(gen_dir) / "dependencies.jsonl");
      write_repository(repo, issues, deps);
      std::cerr << repo.issues.size() << " issues, " << repo.dependencies.size() << " dependencies written to "
                << gen_dir << '\n';
    } else if (serve_cmd->parsed()) {
      EngineConfig config;
      config.dup_threshold = thr;
      config.max_depth = serve_max_depth;
      auto repo = std::filesystem::exists(data_dir) ? Repository::load(data_dir) : Repository();
      Service service(std::move(repo), config, std::filesystem::path(data_dir));
      auto server = make_server(service, HttpOptions{serve_max_depth, ui_dir});
      std::cerr << "listening on port " << port << '\n';
      if (!server->listen("0.0.0.0", port)) throw std::runtime_error("cannot listen on port " + std::to_string(port));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
