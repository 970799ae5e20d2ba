#include "subblock/pipeline.hpp"

#include <cmath>

#include "subblock/errors.hpp"

namespace subblock {

void ClusterConfig::validate() const {
  if (out_dims < 1) throw ConfigError("out_dims must be >= 1");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("eps must be positive");
  if (min_pts < 1) throw ConfigError("min_pts must be >= 1");
  if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("t must lie in [0,1]");
  if (k < 1) throw ConfigError("k must be >= 1");
}

void PipelineConfig::validate() const {
  loss.validate();
  train.validate();
  cluster.validate();
  if (cluster.out_dims > train.latent_dim) {
    throw ConfigError("out_dims exceeds latent_dim");
  }
}

PipelineOutput cluster_latent(const BinaryAttributedGraph& g, TrainResult training,
                              const ClusterConfig& cfg, const Reducer& reducer) {
  cfg.validate();
  PipelineOutput out;
  out.training = std::move(training);
  out.reduction = reducer.reduce(out.training.latent, cfg.out_dims);
  const auto labels = dbscan(out.reduction.points, cfg.eps, cfg.min_pts);
  out.clusters = rank_clusters(g, labels, cfg.k, cfg.t);
  return out;
}

PipelineOutput run_pipeline(const BinaryAttributedGraph& g, const PipelineConfig& cfg,
                            const Reducer& reducer) {
  cfg.validate();
  return cluster_latent(g, train(g, cfg.loss, cfg.train), cfg.cluster, reducer);
}

}  // namespace subblock
