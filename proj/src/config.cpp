#include "subblock/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "subblock/errors.hpp"
#include "subblock/io.hpp"

namespace subblock {

using nlohmann::json;

namespace {

bool contains(const std::vector<std::string>& names, const std::string& name) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

double as_real(const std::string& name, const json& v) {
  if (!v.is_number()) throw ConfigError(name + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(name + ": not finite");
  return x;
}

std::uint64_t as_count(const std::string& name, const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) throw ConfigError(name + ": must be non-negative");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (x >= 0.0 && x < 1.8e19 && std::floor(x) == x) return static_cast<std::uint64_t>(x);
  }
  throw ConfigError(name + ": expected a non-negative integer");
}

std::size_t as_size(const std::string& name, const json& v) {
  return static_cast<std::size_t>(as_count(name, v));
}

void require_object(const json& j, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + " must be a JSON object");
}

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  auto it = j.find(key);
  if (it == j.end()) return empty;
  require_object(*it, key);
  return *it;
}

void check_keys(const json& j, const std::vector<std::string>& allowed, const std::string& what) {
  for (const auto& [key, value] : j.items()) {
    if (!contains(allowed, key)) throw ConfigError("unknown key '" + key + "' in " + what);
  }
}

}  // namespace

const std::vector<std::string>& loss_param_names() {
  static const std::vector<std::string> names{"w_a",    "w_x", "w_recon",       "w_sim",
                                              "lambda", "l2",  "attention_beta"};
  return names;
}

const std::vector<std::string>& train_param_names() {
  static const std::vector<std::string> names{"epochs",     "batch_size", "learning_rate",
                                              "seed",       "sampler",    "latent_dim",
                                              "hidden_a",   "hidden_x"};
  return names;
}

const std::vector<std::string>& cluster_param_names() {
  static const std::vector<std::string> names{"out_dims", "eps", "min_pts", "t", "k"};
  return names;
}

void apply_param(PipelineConfig& cfg, const std::string& name, const json& v) {
  auto& l = cfg.loss;
  auto& tr = cfg.train;
  auto& c = cfg.cluster;
  if (name == "w_a") l.w_a = as_real(name, v);
  else if (name == "w_x") l.w_x = as_real(name, v);
  else if (name == "w_recon") l.w_recon = as_real(name, v);
  else if (name == "w_sim") l.w_sim = as_real(name, v);
  else if (name == "lambda") l.lambda = as_real(name, v);
  else if (name == "l2") l.l2 = as_real(name, v);
  else if (name == "attention_beta") l.attention_beta = as_real(name, v);
  else if (name == "epochs") tr.epochs = as_size(name, v);
  else if (name == "batch_size") tr.batch_size = as_size(name, v);
  else if (name == "learning_rate") tr.learning_rate = as_real(name, v);
  else if (name == "seed") tr.seed = as_count(name, v);
  else if (name == "sampler") {
    if (!v.is_string()) throw ConfigError("sampler: expected a string");
    tr.sampler = sampler_from_string(v.get<std::string>());
  } else if (name == "latent_dim") tr.latent_dim = as_size(name, v);
  else if (name == "hidden_a") tr.hidden_a = as_size(name, v);
  else if (name == "hidden_x") tr.hidden_x = as_size(name, v);
  else if (name == "out_dims") c.out_dims = as_size(name, v);
  else if (name == "eps") c.eps = as_real(name, v);
  else if (name == "min_pts") c.min_pts = as_size(name, v);
  else if (name == "t") c.t = as_real(name, v);
  else if (name == "k") c.k = as_size(name, v);
  else throw ConfigError("unknown hyperparameter '" + name + "'");
}

json to_json(const PipelineConfig& cfg) {
  const auto& l = cfg.loss;
  const auto& tr = cfg.train;
  const auto& c = cfg.cluster;
  return json{
      {"loss",
       {{"w_a", l.w_a},
        {"w_x", l.w_x},
        {"w_recon", l.w_recon},
        {"w_sim", l.w_sim},
        {"lambda", l.lambda},
        {"l2", l.l2},
        {"attention_beta", l.attention_beta}}},
      {"train",
       {{"epochs", tr.epochs},
        {"batch_size", tr.batch_size},
        {"learning_rate", tr.learning_rate},
        {"seed", tr.seed},
        {"sampler", to_string(tr.sampler)},
        {"latent_dim", tr.latent_dim},
        {"hidden_a", tr.hidden_a},
        {"hidden_x", tr.hidden_x}}},
      {"cluster",
       {{"out_dims", c.out_dims}, {"eps", c.eps}, {"min_pts", c.min_pts}, {"t", c.t}, {"k", c.k}}},
  };
}

PipelineConfig pipeline_config_from_json(const json& j, const PipelineConfig& base) {
  require_object(j, "pipeline config");
  check_keys(j, {"loss", "train", "cluster"}, "pipeline config");
  PipelineConfig cfg = base;
  const std::pair<const char*, const std::vector<std::string>*> sections[] = {
      {"loss", &loss_param_names()},
      {"train", &train_param_names()},
      {"cluster", &cluster_param_names()}};
  for (const auto& [key, names] : sections) {
    const auto& s = section(j, key);
    check_keys(s, *names, key);
    for (const auto& [name, value] : s.items()) apply_param(cfg, name, value);
  }
  return cfg;
}

json to_json(const InjectionSpec& s) {
  return json{{"num_blocks", s.num_blocks},
              {"block_size", s.block_size},
              {"adj_density", s.adj_density},
              {"attr_density", s.attr_density},
              {"smoothing_k", s.smoothing_k},
              {"sharpen_lambda", s.sharpen_lambda},
              {"hashtags_per_block", s.hashtags_per_block},
              {"seed", s.seed}};
}

InjectionSpec injection_spec_from_json(const json& j) {
  require_object(j, "injection");
  check_keys(j,
             {"num_blocks", "block_size", "adj_density", "attr_density", "smoothing_k",
              "sharpen_lambda", "hashtags_per_block", "seed"},
             "injection");
  InjectionSpec s;
  for (const auto& [key, v] : j.items()) {
    if (key == "num_blocks") s.num_blocks = as_size(key, v);
    else if (key == "block_size") s.block_size = as_size(key, v);
    else if (key == "adj_density") s.adj_density = as_real(key, v);
    else if (key == "attr_density") s.attr_density = as_real(key, v);
    else if (key == "smoothing_k") s.smoothing_k = as_real(key, v);
    else if (key == "sharpen_lambda") s.sharpen_lambda = as_real(key, v);
    else if (key == "hashtags_per_block") s.hashtags_per_block = as_size(key, v);
    else if (key == "seed") s.seed = as_count(key, v);
  }
  return s;
}

json to_json(const SearchSpace& space) {
  json out = json::object();
  for (const auto& [name, d] : space.params) {
    switch (d.kind) {
      case ParamDistribution::Kind::fixed:
        out[name] = {{"fixed", d.choices.at(0)}};
        break;
      case ParamDistribution::Kind::uniform:
        out[name] = {{"uniform", {d.lo, d.hi}}};
        break;
      case ParamDistribution::Kind::log_uniform:
        out[name] = {{"log_uniform", {d.lo, d.hi}}};
        break;
      case ParamDistribution::Kind::choice:
        out[name] = {{"choice", d.choices}};
        break;
    }
  }
  return out;
}

SearchSpace search_space_from_json(const json& j) {
  require_object(j, "search space");
  SearchSpace space;
  for (const auto& [name, spec] : j.items()) {
    if (!spec.is_object() || spec.size() != 1) {
      throw ConfigError("search space entry '" + name + "' must have exactly one kind");
    }
    ParamDistribution d;
    const auto& [kind, arg] = *spec.items().begin();
    if (kind == "fixed") {
      d.kind = ParamDistribution::Kind::fixed;
      d.choices = {arg};
    } else if (kind == "uniform" || kind == "log_uniform") {
      d.kind = kind == "uniform" ? ParamDistribution::Kind::uniform
                                 : ParamDistribution::Kind::log_uniform;
      if (!arg.is_array() || arg.size() != 2) {
        throw ConfigError(name + ": range must be [lo, hi]");
      }
      d.lo = as_real(name, arg[0]);
      d.hi = as_real(name, arg[1]);
    } else if (kind == "choice") {
      if (!arg.is_array()) throw ConfigError(name + ": choice must be a list");
      d.kind = ParamDistribution::Kind::choice;
      d.choices.assign(arg.begin(), arg.end());
    } else {
      throw ConfigError(name + ": unknown distribution '" + kind + "'");
    }
    space.params[name] = std::move(d);
  }
  space.validate();
  return space;
}

void FingerprintConfig::validate() const {
  if (m < 1) throw ConfigError("fingerprint m must be >= 1");
  if (bins < 1) throw ConfigError("fingerprint bins must be >= 1");
}

void RunConfig::validate() const {
  pipeline.validate();
  fingerprint.validate();
  if (search) {
    search->validate();
    if (trials < 1) throw ConfigError("trials must be >= 1");
  }
}

json to_json(const RunConfig& cfg) {
  json j = to_json(cfg.pipeline);
  j["paths"] = {{"edge_file", cfg.edge_file.string()},
                {"attribute_file", cfg.attribute_file.string()},
                {"output_dir", cfg.output_dir.string()}};
  j["fingerprint"] = {{"m", cfg.fingerprint.m}, {"bins", cfg.fingerprint.bins}};
  if (cfg.injection) j["injection"] = to_json(*cfg.injection);
  if (cfg.search) j["search"] = {{"space", to_json(*cfg.search)}, {"trials", cfg.trials}};
  return j;
}

RunConfig run_config_from_json(const json& j) {
  require_object(j, "config");
  check_keys(j, {"paths", "loss", "train", "cluster", "fingerprint", "injection", "search"},
             "config");
  RunConfig cfg;
  json pipeline = json::object();
  for (const char* key : {"loss", "train", "cluster"}) {
    if (j.contains(key)) pipeline[key] = j[key];
  }
  cfg.pipeline = pipeline_config_from_json(pipeline);

  const auto& paths = section(j, "paths");
  check_keys(paths, {"edge_file", "attribute_file", "output_dir"}, "paths");
  for (const auto& [key, v] : paths.items()) {
    if (!v.is_string()) throw ConfigError("paths." + key + ": expected a string");
    if (key == "edge_file") cfg.edge_file = v.get<std::string>();
    else if (key == "attribute_file") cfg.attribute_file = v.get<std::string>();
    else cfg.output_dir = v.get<std::string>();
  }

  const auto& fp = section(j, "fingerprint");
  check_keys(fp, {"m", "bins"}, "fingerprint");
  if (fp.contains("m")) cfg.fingerprint.m = as_size("m", fp["m"]);
  if (fp.contains("bins")) cfg.fingerprint.bins = as_size("bins", fp["bins"]);

  if (j.contains("injection")) cfg.injection = injection_spec_from_json(j["injection"]);
  if (j.contains("search")) {
    const auto& s = section(j, "search");
    check_keys(s, {"space", "trials"}, "search");
    cfg.search = s.contains("space") ? search_space_from_json(s["space"]) : SearchSpace::defaults();
    if (s.contains("trials")) cfg.trials = as_size("trials", s["trials"]);
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace subblock
