// Command-line front end: one subcommand per pipeline stage, stages talk
// through files in the output directory.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "subblock/baseline.hpp"
#include "subblock/config.hpp"
#include "subblock/errors.hpp"
#include "subblock/fingerprint.hpp"
#include "subblock/io.hpp"
#include "subblock/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace subblock;

namespace {

constexpr const char* kOutputRootEnv = "SUBBLOCK_OUTPUT_ROOT";

struct Options {
  std::string config;
  std::string output;
  std::string edges;
  std::string attributes;
  std::string graph;
  std::string latent;
  std::string labels;
  std::string truth;
  std::vector<std::string> sets;
  std::map<std::string, std::string> params;  // --<name> overrides
  std::map<std::string, std::string> injection;
  std::optional<std::size_t> m;
  std::optional<std::size_t> bins;
  std::optional<std::size_t> trials;
  // generate
  std::size_t gen_nodes = 1000;
  std::size_t gen_attributes = 200;
  double gen_edge_p = 0.01;
  double gen_attr_p = 0.02;
  std::uint64_t gen_seed = 0;
};

json parse_scalar(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

std::string flag_name(std::string name) {
  for (auto& c : name) {
    if (c == '_') c = '-';
  }
  return "--" + name;
}

void add_hyperparameter_flags(CLI::App* cmd, Options& o) {
  const auto defaults = to_json(PipelineConfig{});
  const std::pair<const char*, const std::vector<std::string>*> sections[] = {
      {"loss", &loss_param_names()},
      {"train", &train_param_names()},
      {"cluster", &cluster_param_names()}};
  for (const auto& [section, names] : sections) {
    for (const auto& name : *names) {
      cmd->add_option(flag_name(name), o.params[name],
                      name + " (default " + defaults[section][name].dump() + ")")
          ->group("Hyperparameters");
    }
  }
  cmd->add_option("--set", o.sets, "Override any hyperparameter as name=value")
      ->group("Hyperparameters");
}

void add_io_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("-c,--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("-o,--output", o.output,
                  std::string("Output directory (default $") + kOutputRootEnv + "/subblock-run)");
  cmd->add_option("--edges", o.edges, "Follower edge list TSV (source<TAB>target)");
  cmd->add_option("--attributes", o.attributes, "Node hashtag TSV (node<TAB>hashtag)");
  cmd->add_option("--graph", o.graph, "Graph snapshot JSON (default <output>/graph.json)");
}

void add_injection_flags(CLI::App* cmd, Options& o) {
  const auto defaults = to_json(InjectionSpec{});
  for (const auto& [name, value] : defaults.items()) {
    const auto flag = name == "seed" ? std::string("--inject-seed") : flag_name(name);
    cmd->add_option(flag, o.injection[name], name + " (default " + value.dump() + ")")
        ->group("Injection");
  }
}

RunConfig resolve(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (!o.edges.empty()) cfg.edge_file = o.edges;
  if (!o.attributes.empty()) cfg.attribute_file = o.attributes;
  if (!o.output.empty()) cfg.output_dir = o.output;
  if (cfg.output_dir.empty()) {
    const char* root = std::getenv(kOutputRootEnv);
    cfg.output_dir = fs::path(root && *root ? root : ".") / "subblock-run";
  }
  for (const auto& [name, value] : o.params) {
    if (!value.empty()) apply_param(cfg.pipeline, name, parse_scalar(value));
  }
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects name=value, got '" + kv + "'");
    apply_param(cfg.pipeline, kv.substr(0, eq), parse_scalar(kv.substr(eq + 1)));
  }
  bool touched = false;
  for (const auto& [name, value] : o.injection) touched = touched || !value.empty();
  if (touched) {
    json spec = cfg.injection ? to_json(*cfg.injection) : to_json(InjectionSpec{});
    for (const auto& [name, value] : o.injection) {
      if (!value.empty()) spec[name] = parse_scalar(value);
    }
    cfg.injection = injection_spec_from_json(spec);
  }
  if (o.m) cfg.fingerprint.m = *o.m;
  if (o.bins) cfg.fingerprint.bins = *o.bins;
  if (o.trials) cfg.trials = *o.trials;
  cfg.validate();
  return cfg;
}

// Hash of everything that influences stage outputs (paths excluded).
std::string config_hash(const RunConfig& cfg) {
  json j = to_json(cfg);
  j.erase("paths");
  return io::sha256_hex(j.dump());
}

class Manifest {
 public:
  explicit Manifest(const RunConfig& cfg) : path_(cfg.output_dir / "MANIFEST") {
    if (fs::exists(path_)) {
      try {
        doc_ = json::parse(io::read_text(path_));
      } catch (const json::exception&) {
        doc_ = json::object();
      }
    }
    const auto hash = config_hash(cfg);
    if (doc_.value("config_hash", std::string{}) != hash) doc_ = json::object();
    doc_["config_hash"] = hash;
    doc_["seed"] = cfg.pipeline.train.seed;
    if (!doc_.contains("stages")) doc_["stages"] = json::object();
  }

  void begin(const std::string& stage) {
    doc_["complete"] = false;
    doc_["running_stage"] = stage;
    doc_.erase("failed_stage");
    save();
  }

  void record(const std::string& stage, const std::vector<fs::path>& files) {
    json checksums = json::object();
    for (const auto& f : files) checksums[f.filename().string()] = io::sha256_file(f);
    doc_["stages"][stage] = checksums;
    save();
  }

  void fail(const std::string& stage) {
    doc_["complete"] = false;
    doc_["failed_stage"] = stage;
    doc_.erase("running_stage");
    save();
  }

  void finish() {
    doc_["complete"] = true;
    doc_.erase("running_stage");
    save();
  }

 private:
  void save() const { io::write_text(path_, doc_.dump(2) + "\n"); }

  fs::path path_;
  json doc_ = json::object();
};

struct StageError : std::runtime_error {
  StageError(std::string stage, const std::exception& cause, int code)
      : std::runtime_error("stage '" + stage + "' failed: " + cause.what()), code(code) {}
  int code;
};

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 1;
  if (dynamic_cast<const NumericError*>(&e)) return 3;
  return 2;
}

template <typename F>
auto stage(Manifest& manifest, const std::string& name, F&& body) {
  manifest.begin(name);
  try {
    return body();
  } catch (const std::exception& e) {
    manifest.fail(name);
    throw StageError(name, e, exit_code_for(e));
  }
}

void warn_dropped(const LoadReport& r) {
  if (r.self_loops_dropped > 0) {
    std::cerr << "warning: dropped " << r.self_loops_dropped << " self-loop(s)\n";
  }
  if (r.duplicate_edges > 0) {
    std::cerr << "warning: collapsed " << r.duplicate_edges << " duplicate edge(s)\n";
  }
}

BinaryAttributedGraph input_graph(const Options& o, const RunConfig& cfg) {
  if (!o.graph.empty()) return load_snapshot(o.graph);
  if (!cfg.edge_file.empty() || !cfg.attribute_file.empty()) {
    if (cfg.edge_file.empty() || cfg.attribute_file.empty()) {
      throw ConfigError("both an edge file and an attribute file are required");
    }
    LoadReport report;
    auto g = load_graph(cfg.edge_file, cfg.attribute_file, &report);
    warn_dropped(report);
    return g;
  }
  const auto fallback = cfg.output_dir / "graph.json";
  if (fs::exists(fallback)) return load_snapshot(fallback);
  throw ConfigError("no input graph: pass --graph or --edges/--attributes");
}

fs::path or_default(const std::string& given, const fs::path& fallback) {
  return given.empty() ? fallback : fs::path(given);
}

void write_resolved_config(const RunConfig& cfg) {
  io::write_text(cfg.output_dir / "config.json", to_json(cfg).dump(2) + "\n");
}

std::vector<fs::path> write_training(const BinaryAttributedGraph& g, const TrainResult& r,
                                     const RunConfig& cfg) {
  const auto& dir = cfg.output_dir;
  write_latent_csv(g.node_ids(), r.latent, dir / "latent.csv");
  save_checkpoint(r.params, cfg.pipeline.train.seed, cfg.pipeline.train.epochs,
                  dir / "checkpoint.json");
  std::ostringstream loss;
  loss << "iteration,loss\n";
  for (std::size_t i = 0; i < r.loss_history.size(); ++i) {
    loss << i << ',' << io::format_double(r.loss_history[i]) << '\n';
  }
  io::write_text(dir / "loss_history.csv", loss.str());
  return {dir / "latent.csv", dir / "checkpoint.json", dir / "loss_history.csv"};
}

std::vector<fs::path> write_clusters(const BinaryAttributedGraph& g, const PipelineOutput& out,
                                     const RunConfig& cfg) {
  const auto& dir = cfg.output_dir;
  if (out.reduction.rank_deficient) {
    std::cerr << "warning: latent codes are rank deficient; missing components zero-padded\n";
  }
  write_points_csv(g.node_ids(), out.reduction.points, dir / "reduced.csv");
  write_labels_csv(g.node_ids(), out.clusters.labels, dir / "labels.csv");
  io::write_text(dir / "ranking.json", ranking_json(out.clusters));
  return {dir / "reduced.csv", dir / "labels.csv", dir / "ranking.json"};
}

std::vector<fs::path> write_fingerprints(const BinaryAttributedGraph& g,
                                         const ClusterResult& clusters, const RunConfig& cfg) {
  const json meta{{"config_hash", config_hash(cfg)},
                  {"seed", cfg.pipeline.train.seed},
                  {"num_nodes", g.num_nodes()},
                  {"num_edges", g.num_edges()},
                  {"num_attributes", g.num_attributes()},
                  {"num_clusters", clusters.num_clusters()},
                  {"threshold", cfg.pipeline.cluster.t},
                  {"k", cfg.pipeline.cluster.k}};
  const auto report = cluster_report(g, clusters, cfg.fingerprint.m, cfg.fingerprint.bins, meta);
  return write_report(report, cfg.output_dir);
}

// --- subcommands -------------------------------------------------------------

int cmd_ingest(const Options& o) {
  const auto cfg = resolve(o);
  if (cfg.edge_file.empty() || cfg.attribute_file.empty()) {
    throw ConfigError("ingest needs --edges and --attributes (or paths in the config)");
  }
  fs::create_directories(cfg.output_dir);
  Manifest manifest(cfg);
  stage(manifest, "ingest", [&] {
    LoadReport report;
    const auto g = load_graph(cfg.edge_file, cfg.attribute_file, &report);
    warn_dropped(report);
    save_snapshot(g, cfg.output_dir / "graph.json");
    manifest.record("ingest", {cfg.output_dir / "graph.json"});
    std::cout << "nodes " << g.num_nodes() << " edges " << g.num_edges() << " attributes "
              << g.num_attributes() << "\n";
  });
  manifest.finish();
  return 0;
}

int cmd_generate(const Options& o) {
  const auto cfg = resolve(o);
  fs::create_directories(cfg.output_dir);
  const auto g = generate_background(o.gen_nodes, o.gen_attributes, o.gen_edge_p, o.gen_attr_p,
                                     o.gen_seed);
  save_snapshot(g, cfg.output_dir / "graph.json");
  std::cout << "nodes " << g.num_nodes() << " edges " << g.num_edges() << " attributes "
            << g.num_attributes() << "\n";
  return 0;
}

int cmd_inject(const Options& o) {
  const auto cfg = resolve(o);
  if (!cfg.injection) throw ConfigError("inject needs an injection section or injection flags");
  fs::create_directories(cfg.output_dir);
  Manifest manifest(cfg);
  const auto g = input_graph(o, cfg);
  stage(manifest, "inject", [&] {
    const auto r = inject(g, *cfg.injection);
    const auto dir = cfg.output_dir;
    save_snapshot(r.graph, dir / "injected.json");
    write_ground_truth_csv(r.graph.node_ids(), r.truth, dir / "ground_truth.csv");
    json blocks = json::array();
    for (std::size_t b = 0; b < r.truth.block_memberships.size(); ++b) {
      std::vector<std::string> ids, tags;
      for (auto i : r.truth.block_memberships[b]) ids.push_back(r.graph.node_ids()[i]);
      for (auto c : r.truth.block_attributes[b]) tags.push_back(r.graph.attribute_names()[c]);
      blocks.push_back({{"node_ids", ids}, {"hashtags", tags}});
    }
    io::write_text(dir / "injection.json",
                   json{{"spec", to_json(*cfg.injection)}, {"blocks", blocks}}.dump(2) + "\n");
    manifest.record("inject", {dir / "injected.json", dir / "ground_truth.csv",
                               dir / "injection.json"});
  });
  manifest.finish();
  return 0;
}

int cmd_train(const Options& o) {
  const auto cfg = resolve(o);
  fs::create_directories(cfg.output_dir);
  write_resolved_config(cfg);
  Manifest manifest(cfg);
  const auto g = input_graph(o, cfg);
  stage(manifest, "train", [&] {
    const auto r = train(g, cfg.pipeline.loss, cfg.pipeline.train);
    manifest.record("train", write_training(g, r, cfg));
    std::cout << "final loss " << io::format_double(r.loss_history.back()) << "\n";
  });
  manifest.finish();
  return 0;
}

int cmd_cluster(const Options& o) {
  const auto cfg = resolve(o);
  fs::create_directories(cfg.output_dir);
  Manifest manifest(cfg);
  const auto g = input_graph(o, cfg);
  stage(manifest, "cluster", [&] {
    TrainResult tr;
    tr.latent = read_latent_csv(g.node_ids(), or_default(o.latent, cfg.output_dir / "latent.csv"));
    const auto out = cluster_latent(g, std::move(tr), cfg.pipeline.cluster);
    manifest.record("cluster", write_clusters(g, out, cfg));
    std::cout << "clusters " << out.clusters.num_clusters() << "\n";
  });
  manifest.finish();
  return 0;
}

int cmd_fingerprint(const Options& o) {
  const auto cfg = resolve(o);
  fs::create_directories(cfg.output_dir);
  Manifest manifest(cfg);
  const auto g = input_graph(o, cfg);
  stage(manifest, "fingerprint", [&] {
    const auto labels =
        read_labels_csv(g.node_ids(), or_default(o.labels, cfg.output_dir / "labels.csv"));
    const auto clusters = rank_clusters(g, labels, cfg.pipeline.cluster.k, cfg.pipeline.cluster.t);
    manifest.record("fingerprint", write_fingerprints(g, clusters, cfg));
  });
  manifest.finish();
  return 0;
}

int cmd_run(const Options& o) {
  const auto cfg = resolve(o);
  fs::create_directories(cfg.output_dir);
  write_resolved_config(cfg);
  Manifest manifest(cfg);
  const auto g = stage(manifest, "ingest", [&] {
    auto graph = input_graph(o, cfg);
    save_snapshot(graph, cfg.output_dir / "graph.json");
    manifest.record("ingest", {cfg.output_dir / "graph.json"});
    return graph;
  });
  auto training = stage(manifest, "train", [&] {
    auto r = train(g, cfg.pipeline.loss, cfg.pipeline.train);
    manifest.record("train", write_training(g, r, cfg));
    return r;
  });
  const auto out = stage(manifest, "cluster", [&] {
    auto result = cluster_latent(g, std::move(training), cfg.pipeline.cluster);
    manifest.record("cluster", write_clusters(g, result, cfg));
    return result;
  });
  stage(manifest, "fingerprint", [&] {
    manifest.record("fingerprint", write_fingerprints(g, out.clusters, cfg));
  });
  manifest.finish();
  std::cout << "clusters " << out.clusters.num_clusters() << ", top " << out.clusters.top_k.size()
            << " written to " << cfg.output_dir.string() << "\n";
  return 0;
}

int cmd_search(const Options& o) {
  const auto cfg = resolve(o);
  fs::create_directories(cfg.output_dir);
  Manifest manifest(cfg);
  const auto g = input_graph(o, cfg);
  const auto space = cfg.search ? *cfg.search : SearchSpace::defaults();
  const auto spec = cfg.injection ? *cfg.injection : InjectionSpec{};
  stage(manifest, "search", [&] {
    const auto r = random_search(g, spec, space, cfg.trials, cfg.pipeline.train.seed,
                                 cfg.pipeline);
    const auto dir = cfg.output_dir;
    write_trial_log(r, dir / "trials.csv");
    json best = to_json(r.best);
    io::write_text(dir / "best_config.json",
                   json{{"trial", r.best_trial}, {"f1", r.best_f1}, {"config", best}}.dump(2) +
                       "\n");
    manifest.record("search", {dir / "best_config.json"});
    std::cout << "best f1 " << io::format_double(r.best_f1) << " at trial " << r.best_trial
              << "\n";
  });
  manifest.finish();
  return 0;
}

int cmd_eval(const Options& o) {
  const auto cfg = resolve(o);
  fs::create_directories(cfg.output_dir);
  const auto g = input_graph(o, cfg);
  const auto truth_path = or_default(o.truth, cfg.output_dir / "ground_truth.csv");
  if (!fs::exists(truth_path)) {
    throw ConfigError("missing ground truth: " + truth_path.string());
  }
  const auto truth = read_ground_truth_csv(g.node_ids(), truth_path);
  const auto labels =
      read_labels_csv(g.node_ids(), or_default(o.labels, cfg.output_dir / "labels.csv"));
  const auto& cc = cfg.pipeline.cluster;
  const auto clusters = rank_clusters(g, labels, cc.k, cc.t);
  const auto ours = score_anomalies(predict_anomalies(g, clusters, cc.t, cc.k), truth);

  std::optional<AnomalyScores> base;
  if (g.num_edges() > 0) base = score_anomalies(baseline_predict(g, greedy_densest(g)), truth);

  auto scores_json = [](const AnomalyScores& s) {
    return json{{"f1", s.f1}, {"precision", s.precision}, {"recall", s.recall},
                {"true_positives", s.true_positives}, {"false_positives", s.false_positives},
                {"false_negatives", s.false_negatives}};
  };
  json doc{{"pipeline", scores_json(ours)}};
  doc["baseline"] = base ? scores_json(*base) : json(nullptr);
  io::write_text(cfg.output_dir / "eval.json", doc.dump(2) + "\n");

  std::cout << "pipeline f1 " << io::format_double(ours.f1) << " precision "
            << io::format_double(ours.precision) << " recall " << io::format_double(ours.recall)
            << "\n";
  if (base) {
    std::cout << "baseline f1 " << io::format_double(base->f1) << " precision "
              << io::format_double(base->precision) << " recall "
              << io::format_double(base->recall) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dense sub-block detection in attributed follower graphs"};
  app.require_subcommand(1);
  Options o;

  std::vector<std::pair<CLI::App*, std::function<int(const Options&)>>> commands;
  auto add = [&](const char* name, const char* help, int (*fn)(const Options&)) {
    auto* cmd = app.add_subcommand(name, help);
    add_io_flags(cmd, o);
    add_hyperparameter_flags(cmd, o);
    commands.emplace_back(cmd, fn);
    return cmd;
  };

  add("ingest", "Load TSV inputs and write a graph snapshot", cmd_ingest);
  auto* gen = add("generate", "Write an Erdos-Renyi background graph snapshot", cmd_generate);
  gen->add_option("--nodes", o.gen_nodes, "Number of nodes")->capture_default_str();
  gen->add_option("--hashtags", o.gen_attributes, "Number of hashtag columns")
      ->capture_default_str();
  gen->add_option("--edge-p", o.gen_edge_p, "Directed edge probability")->capture_default_str();
  gen->add_option("--attr-p", o.gen_attr_p, "Hashtag activation probability")
      ->capture_default_str();
  gen->add_option("--gen-seed", o.gen_seed, "Generator seed")->capture_default_str();
  add_injection_flags(add("inject", "Plant dense sub-blocks and write ground truth", cmd_inject),
                      o);
  add("train", "Train the joint autoencoder and export latent codes", cmd_train);
  add("cluster", "Reduce latent codes, run DBSCAN and rank clusters", cmd_cluster)
      ->add_option("--latent", o.latent, "Latent CSV (default <output>/latent.csv)");
  auto* fp = add("fingerprint", "Write per-cluster fingerprint reports", cmd_fingerprint);
  fp->add_option("--labels", o.labels, "Cluster labels CSV (default <output>/labels.csv)");
  auto* run = add("run", "Full pipeline: train, cluster, rank and report", cmd_run);
  auto* search = add("search", "Random hyperparameter search on injected blocks", cmd_search);
  add_injection_flags(search, o);
  search->add_option("--trials", o.trials, "Number of trials (default 30)");
  auto* ev = add("eval", "Score cluster labels against ground truth", cmd_eval);
  ev->add_option("--labels", o.labels, "Cluster labels CSV (default <output>/labels.csv)");
  ev->add_option("--truth", o.truth, "Ground truth CSV (default <output>/ground_truth.csv)");
  for (auto* cmd : {fp, run}) {
    cmd->add_option("--m", o.m, "Popular hashtags per fingerprint (default 30)");
    cmd->add_option("--bins", o.bins, "Clustering-coefficient histogram bins (default 20)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    for (const auto& [cmd, fn] : commands) {
      if (cmd->parsed()) return fn(o);
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 1;
}
