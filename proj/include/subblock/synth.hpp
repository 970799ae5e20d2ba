#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "subblock/graph.hpp"
#include "subblock/pipeline.hpp"

namespace subblock {

/// Directed Erdős–Rényi follower graph with iid attribute activations.
/// Node ids are "u<i>", attribute names "#tag<j>".
BinaryAttributedGraph generate_background(std::size_t n, std::size_t d, double edge_p,
                                          double attr_p, std::uint64_t seed);

/// Uniform directed graph with exactly num_edges edges and num_entries
/// attribute entries (G(n, m) style). Throws ConfigError when a count
/// exceeds the number of available positions.
BinaryAttributedGraph generate_sized(std::size_t n, std::size_t d, std::size_t num_edges,
                                     std::size_t num_entries, std::uint64_t seed);

struct InjectionSpec {
  std::size_t num_blocks = 3;
  std::size_t block_size = 500;
  double adj_density = 0.4;
  double attr_density = 0.4;
  double smoothing_k = 1.0;
  double sharpen_lambda = 10.0;
  std::size_t hashtags_per_block = 20;
  std::uint64_t seed = 0;

  /// Throws ConfigError when the injection does not fit a graph of n nodes and
  /// d attribute columns, or when a parameter is out of range.
  void validate(std::size_t n, std::size_t d) const;
};

struct GroundTruth {
  std::vector<int> anomaly_labels;              // length n, 0/1
  std::vector<NodeSubset> block_memberships;    // disjoint
  std::vector<NodeSubset> block_attributes;     // sampled hashtag columns per block
};

struct InjectionResult {
  BinaryAttributedGraph graph;
  GroundTruth truth;
};

/// Column-sum usage distribution with add-k smoothing, sharpened by
/// q_i ∝ exp(sharpen_lambda * p_i).
std::vector<double> hashtag_distribution(const BinaryAttributedGraph& g, double smoothing_k,
                                         double sharpen_lambda);

/// Plants spec.num_blocks random dense sub-blocks (adjacency and
/// node×hashtag) on top of g. Existing entries are never removed.
InjectionResult inject(const BinaryAttributedGraph& g, const InjectionSpec& spec);

struct AnomalyScores {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Precision/recall/F1 over the anomaly class. Throws ConfigError on a
/// length mismatch.
AnomalyScores score_anomalies(const std::vector<int>& predicted, const std::vector<int>& truth);
double f1_anomaly(const std::vector<int>& predicted, const GroundTruth& truth);

/// Flags members of the first k ranked clusters whose density is >= t.
std::vector<int> predict_anomalies(const BinaryAttributedGraph& g, const ClusterResult& clusters,
                                   double t, std::size_t k);

/// Distribution of one searchable hyperparameter.
struct ParamDistribution {
  enum class Kind { fixed, uniform, log_uniform, choice };
  Kind kind = Kind::fixed;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<nlohmann::json> choices;  // also holds the fixed value
};

/// Hyperparameter name -> distribution. Names are the PipelineConfig
/// fields: learning_rate, epochs, batch_size, latent_dim, hidden_a,
/// hidden_x, sampler, w_a, w_x, w_recon, w_sim, lambda, l2,
/// attention_beta, out_dims, eps, min_pts, t, k.
struct SearchSpace {
  std::map<std::string, ParamDistribution> params;

  /// Throws ConfigError on unknown names or empty/inverted ranges.
  void validate() const;
  /// Samples in name order; parameters not listed keep their base value.
  PipelineConfig sample(const PipelineConfig& base, std::mt19937_64& rng) const;

  /// Defaults used by the synthetic benchmark.
  static SearchSpace defaults();
};

struct Trial {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  PipelineConfig config;
  AnomalyScores scores;
  double runtime_s = 0.0;
  std::string failure;  // non-empty when the trial diverged
};

struct SearchResult {
  PipelineConfig best;
  double best_f1 = 0.0;
  std::size_t best_trial = 0;
  std::vector<Trial> trials;
};

/// One fresh injection and one sampled configuration per trial, with trial
/// seed = seed + index. Diverged trials score F1 = 0.
SearchResult random_search(const BinaryAttributedGraph& g_clean, const InjectionSpec& spec,
                           const SearchSpace& space, std::size_t trials, std::uint64_t seed,
                           const PipelineConfig& base = {});

/// CSV `node_id,label`.
void write_ground_truth_csv(const std::vector<std::string>& node_ids, const GroundTruth& truth,
                            const std::filesystem::path& path);
/// Labels in node order. Throws DataError on unknown, missing or duplicate ids.
std::vector<int> read_ground_truth_csv(const std::vector<std::string>& node_ids,
                                       const std::filesystem::path& path);

/// CSV `trial,config_json,f1,runtime_s`, config quoted.
void write_trial_log(const SearchResult& result, const std::filesystem::path& path);

/// Full pipeline on an injected graph, scored against its ground truth.
AnomalyScores evaluate_config(const InjectionResult& injected, const PipelineConfig& cfg);

}  // namespace subblock
