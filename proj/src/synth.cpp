#include "subblock/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "subblock/config.hpp"
#include "subblock/errors.hpp"
#include "subblock/io.hpp"

namespace subblock {

namespace {

using Pairs = std::vector<std::pair<NodeIndex, NodeIndex>>;

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(what) + " must lie in [0,1]");
}

// Bernoulli(p) over positions [0, total) via geometric gaps.
template <typename Emit>
void bernoulli_positions(std::uint64_t total, double p, Rng& rng, Emit emit) {
  if (p <= 0.0 || total == 0) return;
  if (p >= 1.0) {
    for (std::uint64_t pos = 0; pos < total; ++pos) emit(pos);
    return;
  }
  std::geometric_distribution<std::uint64_t> gap(p);
  for (std::uint64_t pos = gap(rng); pos < total; pos += gap(rng) + 1) emit(pos);
}

// Efraimidis–Spirakis: the `count` largest keys log(u)/w.
std::vector<std::size_t> weighted_sample(const std::vector<double>& weights, std::size_t count,
                                         Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::pair<double, std::size_t>> keys(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double u = unif(rng);
    while (u <= 0.0) u = unif(rng);
    keys[i] = {std::log(u) / weights[i], i};
  }
  std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(count), keys.end(),
                    [](const auto& a, const auto& b) {
                      return a.first != b.first ? a.first > b.first : a.second < b.second;
                    });
  std::vector<std::size_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = keys[i].second;
  std::sort(out.begin(), out.end());
  return out;
}

// Floyd's algorithm: `count` distinct positions from [0, total), ascending.
std::vector<std::uint64_t> distinct_positions(std::uint64_t total, std::uint64_t count, Rng& rng) {
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(count * 2);
  for (std::uint64_t j = total - count; j < total; ++j) {
    std::uniform_int_distribution<std::uint64_t> pick(0, j);
    const auto t = pick(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> numbered_names(const char* prefix, std::size_t count) {
  std::vector<std::string> names(count);
  for (std::size_t i = 0; i < count; ++i) names[i] = prefix + std::to_string(i);
  return names;
}

}  // namespace

BinaryAttributedGraph generate_background(std::size_t n, std::size_t d, double edge_p,
                                          double attr_p, std::uint64_t seed) {
  check_probability(edge_p, "edge_p");
  check_probability(attr_p, "attr_p");
  if (n == 0) throw ConfigError("background needs at least one node");
  Rng rng(seed);

  Pairs edges;
  const std::uint64_t off = n - 1;
  bernoulli_positions(static_cast<std::uint64_t>(n) * off, edge_p, rng, [&](std::uint64_t pos) {
    const auto i = pos / off;
    auto j = pos % off;
    if (j >= i) ++j;
    edges.emplace_back(static_cast<NodeIndex>(i), static_cast<NodeIndex>(j));
  });
  Pairs attrs;
  bernoulli_positions(static_cast<std::uint64_t>(n) * d, attr_p, rng, [&](std::uint64_t pos) {
    attrs.emplace_back(static_cast<NodeIndex>(pos / d), static_cast<NodeIndex>(pos % d));
  });
  return BinaryAttributedGraph(numbered_names("u", n), numbered_names("#tag", d),
                               std::move(edges), std::move(attrs));
}

BinaryAttributedGraph generate_sized(std::size_t n, std::size_t d, std::size_t num_edges,
                                     std::size_t num_entries, std::uint64_t seed) {
  if (n == 0) throw ConfigError("graph needs at least one node");
  const std::uint64_t off = n - 1;
  const std::uint64_t edge_slots = static_cast<std::uint64_t>(n) * off;
  const std::uint64_t entry_slots = static_cast<std::uint64_t>(n) * d;
  if (num_edges > edge_slots) throw ConfigError("num_edges exceeds n(n-1)");
  if (num_entries > entry_slots) throw ConfigError("num_entries exceeds n*d");
  Rng rng(seed);

  Pairs edges;
  edges.reserve(num_edges);
  for (auto pos : distinct_positions(edge_slots, num_edges, rng)) {
    const auto i = pos / off;
    auto j = pos % off;
    if (j >= i) ++j;
    edges.emplace_back(static_cast<NodeIndex>(i), static_cast<NodeIndex>(j));
  }
  Pairs attrs;
  attrs.reserve(num_entries);
  for (auto pos : distinct_positions(entry_slots, num_entries, rng)) {
    attrs.emplace_back(static_cast<NodeIndex>(pos / d), static_cast<NodeIndex>(pos % d));
  }
  return BinaryAttributedGraph(numbered_names("u", n), numbered_names("#tag", d),
                               std::move(edges), std::move(attrs));
}

void InjectionSpec::validate(std::size_t n, std::size_t d) const {
  check_probability(adj_density, "adj_density");
  check_probability(attr_density, "attr_density");
  if (!(smoothing_k > 0.0) || !std::isfinite(smoothing_k)) {
    throw ConfigError("smoothing_k must be positive");
  }
  if (!(sharpen_lambda >= 0.0) || !std::isfinite(sharpen_lambda)) {
    throw ConfigError("sharpen_lambda must be non-negative");
  }
  if (block_size > 0 && num_blocks > n / block_size) {
    throw ConfigError("num_blocks * block_size = " + std::to_string(num_blocks * block_size) +
                      " exceeds n = " + std::to_string(n));
  }
  if (hashtags_per_block > d) {
    throw ConfigError("hashtags_per_block = " + std::to_string(hashtags_per_block) +
                      " exceeds d = " + std::to_string(d));
  }
}

std::vector<double> hashtag_distribution(const BinaryAttributedGraph& g, double smoothing_k,
                                         double sharpen_lambda) {
  const auto d = g.num_attributes();
  std::vector<double> p(d);
  double total = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    p[j] = static_cast<double>(g.users_of(static_cast<NodeIndex>(j)).size()) + smoothing_k;
    total += p[j];
  }
  double peak = 0.0;
  for (auto& v : p) {
    v /= total;
    peak = std::max(peak, v);
  }
  double z = 0.0;
  for (auto& v : p) {
    v = std::exp(sharpen_lambda * (v - peak));
    z += v;
  }
  for (auto& v : p) v /= z;
  return p;
}

InjectionResult inject(const BinaryAttributedGraph& g, const InjectionSpec& spec) {
  const auto n = g.num_nodes();
  const auto d = g.num_attributes();
  spec.validate(n, d);
  Rng rng(spec.seed);
  std::bernoulli_distribution edge_coin(spec.adj_density);
  std::bernoulli_distribution attr_coin(spec.attr_density);

  std::vector<NodeIndex> perm(n);
  std::iota(perm.begin(), perm.end(), NodeIndex{0});
  const auto planted = spec.num_blocks * spec.block_size;
  for (std::size_t i = 0; i < planted; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(perm[i], perm[pick(rng)]);
  }

  const auto q = hashtag_distribution(g, spec.smoothing_k, spec.sharpen_lambda);

  auto edges = g.edge_list();
  auto attrs = g.attribute_pairs();
  GroundTruth truth;
  truth.anomaly_labels.assign(n, 0);
  for (std::size_t b = 0; b < spec.num_blocks; ++b) {
    auto first = perm.begin() + static_cast<std::ptrdiff_t>(b * spec.block_size);
    std::vector<NodeIndex> members(first, first + static_cast<std::ptrdiff_t>(spec.block_size));
    std::sort(members.begin(), members.end());

    for (auto u : members) {
      for (auto v : members) {
        if (u != v && edge_coin(rng)) edges.emplace_back(u, v);
      }
      truth.anomaly_labels[u] = 1;
    }

    const auto columns = weighted_sample(q, spec.hashtags_per_block, rng);
    for (auto u : members) {
      for (auto c : columns) {
        if (attr_coin(rng)) attrs.emplace_back(u, static_cast<NodeIndex>(c));
      }
    }
    truth.block_memberships.emplace_back(std::move(members));
    truth.block_attributes.emplace_back(std::vector<NodeIndex>(columns.begin(), columns.end()));
  }

  return {BinaryAttributedGraph(g.node_ids(), g.attribute_names(), std::move(edges),
                                std::move(attrs)),
          std::move(truth)};
}

AnomalyScores score_anomalies(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) {
    throw ConfigError("prediction length " + std::to_string(predicted.size()) +
                      " != truth length " + std::to_string(truth.size()));
  }
  AnomalyScores s;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predicted[i] != 0;
    const bool t = truth[i] != 0;
    if (p && t) ++s.true_positives;
    else if (p) ++s.false_positives;
    else if (t) ++s.false_negatives;
  }
  const auto tp = static_cast<double>(s.true_positives);
  if (s.true_positives + s.false_positives > 0) {
    s.precision = tp / static_cast<double>(s.true_positives + s.false_positives);
  }
  if (s.true_positives + s.false_negatives > 0) {
    s.recall = tp / static_cast<double>(s.true_positives + s.false_negatives);
  }
  if (s.precision + s.recall > 0.0) {
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

double f1_anomaly(const std::vector<int>& predicted, const GroundTruth& truth) {
  return score_anomalies(predicted, truth.anomaly_labels).f1;
}

std::vector<int> predict_anomalies(const BinaryAttributedGraph& g, const ClusterResult& clusters,
                                   double t, std::size_t k) {
  std::vector<int> flags(g.num_nodes(), 0);
  const auto limit = std::min(k, clusters.top_k.size());
  std::vector<char> chosen(clusters.num_clusters(), 0);
  for (std::size_t r = 0; r < limit; ++r) {
    const int c = clusters.top_k[r];
    if (clusters.induced_densities[static_cast<std::size_t>(c)] >= t) {
      chosen[static_cast<std::size_t>(c)] = 1;
    }
  }
  for (std::size_t i = 0; i < flags.size() && i < clusters.labels.size(); ++i) {
    const int c = clusters.labels[i];
    if (c >= 0 && chosen[static_cast<std::size_t>(c)]) flags[i] = 1;
  }
  return flags;
}

void SearchSpace::validate() const {
  PipelineConfig probe;
  for (const auto& [name, d] : params) {
    switch (d.kind) {
      case ParamDistribution::Kind::fixed:
        if (d.choices.size() != 1) throw ConfigError(name + ": fixed needs one value");
        apply_param(probe, name, d.choices[0]);
        break;
      case ParamDistribution::Kind::choice:
        if (d.choices.empty()) throw ConfigError(name + ": empty choice list");
        for (const auto& c : d.choices) apply_param(probe, name, c);
        break;
      case ParamDistribution::Kind::uniform:
      case ParamDistribution::Kind::log_uniform:
        if (!(d.lo <= d.hi) || !std::isfinite(d.lo) || !std::isfinite(d.hi)) {
          throw ConfigError(name + ": range must satisfy lo <= hi");
        }
        if (d.kind == ParamDistribution::Kind::log_uniform && !(d.lo > 0.0)) {
          throw ConfigError(name + ": log_uniform needs lo > 0");
        }
        apply_param(probe, name, d.lo);
        break;
    }
  }
}

PipelineConfig SearchSpace::sample(const PipelineConfig& base, std::mt19937_64& rng) const {
  PipelineConfig cfg = base;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const auto& [name, d] : params) {
    switch (d.kind) {
      case ParamDistribution::Kind::fixed:
        apply_param(cfg, name, d.choices.at(0));
        break;
      case ParamDistribution::Kind::choice: {
        std::uniform_int_distribution<std::size_t> pick(0, d.choices.size() - 1);
        apply_param(cfg, name, d.choices[pick(rng)]);
        break;
      }
      case ParamDistribution::Kind::uniform:
        apply_param(cfg, name, d.lo + (d.hi - d.lo) * unif(rng));
        break;
      case ParamDistribution::Kind::log_uniform: {
        const double a = std::log(d.lo);
        const double b = std::log(d.hi);
        apply_param(cfg, name, std::exp(a + (b - a) * unif(rng)));
        break;
      }
    }
  }
  return cfg;
}

SearchSpace SearchSpace::defaults() {
  using K = ParamDistribution::Kind;
  SearchSpace s;
  s.params["learning_rate"] = {K::log_uniform, 1e-4, 3e-3, {}};
  s.params["w_sim"] = {K::log_uniform, 0.01, 1.0, {}};
  s.params["eps"] = {K::log_uniform, 0.5, 20.0, {}};
  s.params["min_pts"] = {K::choice, 0, 0, {5, 10}};
  return s;
}

AnomalyScores evaluate_config(const InjectionResult& injected, const PipelineConfig& cfg) {
  const auto out = run_pipeline(injected.graph, cfg);
  const auto predicted = predict_anomalies(injected.graph, out.clusters, cfg.cluster.t,
                                           cfg.cluster.k);
  return score_anomalies(predicted, injected.truth.anomaly_labels);
}

SearchResult random_search(const BinaryAttributedGraph& g_clean, const InjectionSpec& spec,
                           const SearchSpace& space, std::size_t trials, std::uint64_t seed,
                           const PipelineConfig& base) {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  space.validate();
  spec.validate(g_clean.num_nodes(), g_clean.num_attributes());

  SearchResult result;
  result.trials.reserve(trials);
  for (std::size_t i = 0; i < trials; ++i) {
    Trial trial;
    trial.index = i;
    trial.seed = seed + i;
    std::seed_seq seq{static_cast<std::uint32_t>(trial.seed),
                      static_cast<std::uint32_t>(trial.seed >> 32), 0x5eedu};
    std::mt19937_64 rng(seq);
    trial.config = space.sample(base, rng);
    trial.config.train.seed = trial.seed;

    const auto start = std::chrono::steady_clock::now();
    InjectionSpec trial_spec = spec;
    trial_spec.seed = trial.seed;
    try {
      trial.config.validate();
      trial.scores = evaluate_config(inject(g_clean, trial_spec), trial.config);
    } catch (const NumericError& e) {
      trial.failure = e.what();
    } catch (const DegenerateInputError& e) {
      trial.failure = e.what();
    }
    trial.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (i == 0 || trial.scores.f1 > result.best_f1) {
      result.best_f1 = trial.scores.f1;
      result.best = trial.config;
      result.best_trial = i;
    }
    result.trials.push_back(std::move(trial));
  }
  return result;
}

void write_ground_truth_csv(const std::vector<std::string>& node_ids, const GroundTruth& truth,
                            const std::filesystem::path& path) {
  if (node_ids.size() != truth.anomaly_labels.size()) {
    throw ConfigError("ground truth length does not match node count");
  }
  std::ostringstream out;
  out << "node_id,label\n";
  for (std::size_t i = 0; i < node_ids.size(); ++i) {
    out << node_ids[i] << ',' << truth.anomaly_labels[i] << '\n';
  }
  io::write_text(path, out.str());
}

std::vector<int> read_ground_truth_csv(const std::vector<std::string>& node_ids,
                                       const std::filesystem::path& path) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < node_ids.size(); ++i) index.emplace(node_ids[i], i);
  const auto lines = io::read_lines(path);
  if (lines.empty() || lines[0] != "node_id,label") {
    throw DataError(path.string() + ": expected header 'node_id,label'");
  }
  std::vector<int> labels(node_ids.size(), -1);
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto where = path.string() + ":" + std::to_string(ln + 1);
    const auto fields = io::split(lines[ln], ',');
    if (fields.size() != 2) throw DataError(where + ": expected 2 fields");
    auto it = index.find(fields[0]);
    if (it == index.end()) throw DataError(where + ": unknown node id '" + fields[0] + "'");
    if (labels[it->second] != -1) throw DataError(where + ": duplicate node id");
    const auto v = io::parse_int(fields[1], where);
    if (v != 0 && v != 1) throw DataError(where + ": label must be 0 or 1");
    labels[it->second] = static_cast<int>(v);
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == -1) throw DataError(path.string() + ": no label for '" + node_ids[i] + "'");
  }
  return labels;
}

void write_trial_log(const SearchResult& result, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "trial,config_json,f1,runtime_s\n";
  for (const auto& t : result.trials) {
    std::string cfg = to_json(t.config).dump();
    std::string quoted;
    for (char c : cfg) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    out << t.index << ",\"" << quoted << "\"," << io::format_double(t.scores.f1) << ','
        << io::format_double(t.runtime_s) << '\n';
  }
  io::write_text(path, out.str());
}

}  // namespace subblock
