#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "subblock/autoencoder.hpp"
#include "subblock/graph.hpp"

namespace subblock {

struct Reduction {
  Matrix points;                 // n x out_dims
  Matrix components;             // k x out_dims, orthonormal columns (zero when padded)
  Vector explained_variance;     // per output dimension, descending
  bool rank_deficient = false;   // some requested components had zero variance
};

/// n x k latent codes -> n x m points for clustering.
class Reducer {
 public:
  virtual ~Reducer() = default;
  virtual Reduction reduce(const LatentMatrix& latent, std::size_t out_dims) const = 0;
  virtual std::string name() const = 0;
};

/// Principal-component projection of the mean-centred codes. Each component
/// is sign-fixed so its largest-magnitude entry is positive. Components with
/// (numerically) zero variance are replaced by zero columns and the result is
/// flagged rank-deficient.
class PcaReducer final : public Reducer {
 public:
  Reduction reduce(const LatentMatrix& latent, std::size_t out_dims) const override;
  std::string name() const override { return "pca"; }
};

/// PCA reduction. Throws ConfigError when out_dims > k or out_dims == 0.
Reduction reduce(const LatentMatrix& latent, std::size_t out_dims);

inline constexpr int kNoise = -1;

/// DBSCAN with closed Euclidean eps-balls that include the point itself.
/// Points are visited in ascending index order; a border point joins the
/// first cluster whose expansion reaches it. Throws ConfigError on
/// eps <= 0 or min_pts < 1, NumericError on non-finite points.
std::vector<int> dbscan(const Matrix& points, double eps, std::size_t min_pts);

struct ClusterResult {
  std::vector<int> labels;                 // length n, kNoise or 0..c-1
  std::vector<std::size_t> cluster_sizes;  // length c
  std::vector<double> induced_densities;   // length c, 0 for singleton clusters
  std::vector<int> top_k;                  // densest first, ties by smaller id
  std::vector<bool> above_threshold;       // length c, density >= t
  double threshold = 0.0;

  std::size_t num_clusters() const { return cluster_sizes.size(); }
  NodeSubset members(int cluster) const;
};

/// Per-cluster induced follower-network density and the top-k ranking.
/// Throws ConfigError on k < 1, t outside [0,1] or a label-length mismatch.
ClusterResult rank_clusters(const BinaryAttributedGraph& g, const std::vector<int>& labels,
                            std::size_t k, double t);

/// CSV `node_id,cluster_label`.
void write_labels_csv(const std::vector<std::string>& node_ids, const std::vector<int>& labels,
                      const std::filesystem::path& path);
std::vector<int> read_labels_csv(const std::vector<std::string>& node_ids,
                                 const std::filesystem::path& path);

/// CSV `node_id,r_0,...` of the reduced points.
void write_points_csv(const std::vector<std::string>& node_ids, const Matrix& points,
                      const std::filesystem::path& path);

/// JSON array of {cluster_id, size, induced_density, above_threshold} in
/// top-k order.
std::string ranking_json(const ClusterResult& result);

}  // namespace subblock
