#pragma once

#include <cstddef>

#include "subblock/autoencoder.hpp"
#include "subblock/cluster.hpp"
#include "subblock/graph.hpp"

namespace subblock {

struct ClusterConfig {
  std::size_t out_dims = 2;
  double eps = 0.5;
  std::size_t min_pts = 5;
  double t = 0.1;  // density threshold
  std::size_t k = 10;

  void validate() const;
};

struct PipelineConfig {
  LossWeights loss;
  TrainConfig train;
  ClusterConfig cluster;

  void validate() const;
};

struct PipelineOutput {
  TrainResult training;
  Reduction reduction;
  ClusterResult clusters;
};

/// train -> reduce -> dbscan -> rank_clusters.
PipelineOutput run_pipeline(const BinaryAttributedGraph& g, const PipelineConfig& cfg,
                            const Reducer& reducer = PcaReducer{});

/// Clustering stages only, from an existing latent matrix.
PipelineOutput cluster_latent(const BinaryAttributedGraph& g, TrainResult training,
                              const ClusterConfig& cfg, const Reducer& reducer = PcaReducer{});

}  // namespace subblock
