#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "subblock/cluster.hpp"
#include "subblock/graph.hpp"

namespace subblock {

struct HashtagFingerprint {
  int cluster_id = 0;
  std::vector<std::string> hashtag_names;   // globally most popular first
  std::vector<double> relative_frequency;   // share of cluster members using each

  bool operator==(const HashtagFingerprint&) const = default;
};

struct ClusteringFingerprint {
  int cluster_id = 0;
  std::vector<double> bin_edges;     // bins + 1 edges from 0 to 1
  std::vector<double> density;       // per bin, integrates to 1
  std::vector<double> coefficients;  // raw per-member values, ascending node index

  bool operator==(const ClusteringFingerprint&) const = default;
};

/// Column indices of the m hashtags with the most distinct users, ties by
/// smaller column. Throws ConfigError when m > d.
std::vector<NodeIndex> popular_hashtags(const BinaryAttributedGraph& g, std::size_t m);

/// Throws DegenerateInputError on an empty cluster, ConfigError when m > d.
HashtagFingerprint hashtag_fingerprint(const BinaryAttributedGraph& g, const NodeSubset& cluster,
                                       std::size_t m, int cluster_id = 0);

/// Histogram of local clustering coefficients in the cluster-induced
/// undirected subgraph. Bins are [e_j, e_{j+1}) except the last, which is
/// closed. Throws DegenerateInputError for clusters smaller than 2.
ClusteringFingerprint clustering_fingerprint(const BinaryAttributedGraph& g,
                                             const NodeSubset& cluster, std::size_t bins,
                                             int cluster_id = 0);

struct AuthorityScore {
  std::string node_id;
  double score = 0.0;
  bool operator==(const AuthorityScore&) const = default;
};

struct ClusterSummary {
  int id = 0;
  std::size_t size = 0;
  double density = 0.0;
  HashtagFingerprint hashtags;
  ClusteringFingerprint clustering;  // empty for singleton clusters
  std::vector<AuthorityScore> authority;
  std::vector<std::pair<std::string, std::string>> edges;  // directed, within the cluster

  bool operator==(const ClusterSummary&) const = default;
};

struct ClusterReport {
  nlohmann::json run_metadata = nlohmann::json::object();
  std::vector<ClusterSummary> clusters;  // top-k order

  bool operator==(const ClusterReport&) const = default;
};

/// One summary per top-k cluster. m is capped at d. Authority scores come
/// from HITS on the cluster-induced subgraph (all zero when it has no edges).
ClusterReport cluster_report(const BinaryAttributedGraph& g, const ClusterResult& result,
                             std::size_t m = 30, std::size_t bins = 20,
                             nlohmann::json run_metadata = nlohmann::json::object());

nlohmann::json to_json(const ClusterReport& report);
ClusterReport report_from_json(const nlohmann::json& j);

/// report.json plus hashtag_fingerprints.csv, clustering_histogram.csv,
/// clustering_coefficients.csv, authority.csv and cluster_edges.csv.
std::vector<std::filesystem::path> write_report(const ClusterReport& report,
                                                const std::filesystem::path& dir);

}  // namespace subblock
