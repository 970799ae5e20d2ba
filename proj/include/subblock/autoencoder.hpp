#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "subblock/graph.hpp"
#include "subblock/similarity.hpp"

namespace subblock {

/// Weights of the joint loss
///   w_recon * (w_a * recon_a + w_x * recon_x)
/// + w_sim   * (w_a * sim_a   + w_x * sim_x)
/// + l2 * sum ||W||_F^2.
/// Reconstruction errors weight target-one entries by attention_beta and
/// target-zero entries by 1.
struct LossWeights {
  double w_a = 1.0;
  double w_x = 1.0;
  double w_recon = 1.0;
  double w_sim = 0.1;
  double lambda = 1.0;
  double l2 = 1e-4;
  double attention_beta = 5.0;

  /// Throws ConfigError when a weight is negative or attention_beta < 1.
  void validate() const;
};

enum class Activation { relu, identity, logistic };

struct Layer {
  Matrix weight;  // fan_in x fan_out
  Vector bias;    // fan_out
  Activation activation = Activation::relu;
};

using LayerStack = std::vector<Layer>;

/// Hidden layer sizes of each of the five functions. Every encoder/decoder
/// is a stack of affine layers; hidden layers use ReLU, the A/X encoders
/// end in ReLU, the joint encoder ends in identity (the latent code) and
/// the decoders end in a logistic output.
struct Architecture {
  std::vector<std::size_t> encoder_a{64};  // last entry is h_A
  std::vector<std::size_t> encoder_x{64};  // last entry is h_X
  std::vector<std::size_t> encoder_joint;  // hidden sizes before the latent layer
  std::vector<std::size_t> decoder_a;      // hidden sizes before the n-wide output
  std::vector<std::size_t> decoder_x;      // hidden sizes before the d-wide output
  std::size_t latent_dim = 32;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Parameters of (enc_A, enc_X, enc_J, dec_A, dec_X). Gradients share
/// this shape.
struct ModelParams {
  std::size_t n = 0;
  std::size_t d = 0;
  Architecture arch;
  LayerStack encoder_a;
  LayerStack encoder_x;
  LayerStack encoder_joint;
  LayerStack decoder_a;
  LayerStack decoder_x;

  std::size_t latent_dim() const { return arch.latent_dim; }

  /// Visits every layer in a fixed order.
  void for_each_layer(const std::function<void(Layer&)>& fn);
  void for_each_layer(const std::function<void(const Layer&)>& fn) const;
  std::size_t parameter_count() const;
};

/// Weights ~ N(0, 1/fan_in), biases zero. Deterministic given seed.
/// Throws ConfigError on a zero-width layer or n/d of zero.
ModelParams init_params(std::size_t n, std::size_t d, const Architecture& arch,
                        std::uint64_t seed);

/// Same layout as `like`, all entries zero.
ModelParams zeros_like(const ModelParams& like);

struct ForwardResult {
  Matrix h;      // b x k
  Matrix a_hat;  // b x n, entries in (0,1)
  Matrix x_hat;  // b x d, entries in (0,1)
};

/// a_batch and x_batch hold the A- and X-rows of the same b nodes.
ForwardResult forward(const ModelParams& params, const Matrix& a_batch, const Matrix& x_batch);

struct LossParts {
  double recon_a = 0.0;
  double recon_x = 0.0;
  double sim_a = 0.0;
  double sim_x = 0.0;
  double reg = 0.0;  // sum of squared weight entries, before the l2 factor
};

struct LossValue {
  double total = 0.0;
  LossParts parts;
};

/// Joint loss on one batch (b >= 2). Jaccard targets are computed from the
/// batch rows themselves.
LossValue loss_joint(const ModelParams& params, const Matrix& a_batch, const Matrix& x_batch,
                     const LossWeights& weights);

struct LossAndGradient {
  LossValue loss;
  ModelParams gradient;
};

/// Analytic gradient of loss_joint's total w.r.t. every weight and bias.
LossAndGradient gradients(const ModelParams& params, const Matrix& a_batch, const Matrix& x_batch,
                          const LossWeights& weights);

/// Batch loss/gradient when the pairwise Jaccard targets are already known.
LossAndGradient loss_and_gradient(const ModelParams& params, const Matrix& a_batch,
                                  const Matrix& x_batch, const Matrix& jaccard_a,
                                  const Matrix& jaccard_x, const LossWeights& weights,
                                  bool want_gradient = true);

enum class SamplerKind { uniform, similarity_weighted };

struct TrainConfig {
  std::size_t epochs = 500;  // number of SGD iterations
  std::size_t batch_size = 64;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
  SamplerKind sampler = SamplerKind::similarity_weighted;
  std::size_t latent_dim = 32;
  std::size_t hidden_a = 64;
  std::size_t hidden_x = 64;

  Architecture architecture() const;
  /// Throws ConfigError on batch_size < 2, latent_dim < 1, learning_rate <= 0.
  void validate() const;
};

std::string to_string(SamplerKind kind);
SamplerKind sampler_from_string(const std::string& name);

using Rng = std::mt19937_64;

/// Anchor drawn uniformly, then batch_size - 1 further distinct nodes drawn
/// without replacement: uniformly, or with weight
/// (1 - jaccard_distance(A-row anchor, A-row candidate)) + 0.01.
NodeSubset sample_batch(const BinaryAttributedGraph& g, const TrainConfig& cfg, Rng& rng);

/// Same draw, also reporting which node was the anchor.
NodeSubset sample_batch(const BinaryAttributedGraph& g, const TrainConfig& cfg, Rng& rng,
                        NodeIndex& anchor);

/// Dense 0/1 A- and X-rows of the selected nodes.
Matrix adjacency_rows(const BinaryAttributedGraph& g, std::span<const NodeIndex> nodes);
Matrix attribute_rows(const BinaryAttributedGraph& g, std::span<const NodeIndex> nodes);

struct LatentMatrix {
  Matrix h;  // n x k, row i belongs to node i
};

struct TrainResult {
  LatentMatrix latent;
  std::vector<double> loss_history;
  ModelParams params;
};

/// Plain SGD with fixed learning rate for cfg.epochs iterations, then one
/// forward pass over all nodes. Throws TrainingDivergedError on a
/// non-finite loss.
TrainResult train(const BinaryAttributedGraph& g, const LossWeights& weights,
                  const TrainConfig& cfg);

/// Latent codes for every node, computed in chunks.
LatentMatrix encode_all(const BinaryAttributedGraph& g, const ModelParams& params,
                        std::size_t chunk = 512);

void save_checkpoint(const ModelParams& params, std::uint64_t seed, std::size_t iterations,
                     const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

/// CSV with header node_id,h_0,...,h_{k-1}.
void write_latent_csv(const std::vector<std::string>& node_ids, const LatentMatrix& latent,
                      const std::filesystem::path& path);
/// Rows are matched to `node_ids` by id. Throws DataError on mismatch.
LatentMatrix read_latent_csv(const std::vector<std::string>& node_ids,
                             const std::filesystem::path& path);

}  // namespace subblock
