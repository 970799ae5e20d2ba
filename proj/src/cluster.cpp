#include "subblock/cluster.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <unordered_map>

#include "json.hpp"
#include "subblock/errors.hpp"
#include "subblock/io.hpp"
#include "subblock/metrics.hpp"

namespace subblock {

Reduction PcaReducer::reduce(const LatentMatrix& latent, std::size_t out_dims) const {
  const auto& h = latent.h;
  const auto k = static_cast<std::size_t>(h.cols());
  if (out_dims == 0) throw ConfigError("out_dims must be >= 1");
  if (out_dims > k) {
    throw ConfigError("out_dims (" + std::to_string(out_dims) + ") exceeds latent dimension (" +
                      std::to_string(k) + ")");
  }
  if (!h.allFinite()) throw NumericError("latent matrix has non-finite entries");
  const auto m = static_cast<Eigen::Index>(out_dims);

  const Matrix centered = h.rowwise() - h.colwise().mean();
  const double denom = std::max<double>(1.0, static_cast<double>(h.rows()) - 1.0);
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericError("covariance eigendecomposition failed");

  const double trace = std::max(0.0, cov.trace());
  Reduction r;
  r.components = Matrix::Zero(static_cast<Eigen::Index>(k), m);
  r.explained_variance = Vector::Zero(m);
  for (Eigen::Index c = 0; c < m; ++c) {
    // Eigen sorts eigenvalues ascending.
    const Eigen::Index src = static_cast<Eigen::Index>(k) - 1 - c;
    const double value = eig.eigenvalues()[src];
    if (trace == 0.0 || value <= 1e-12 * trace) {
      r.rank_deficient = true;
      continue;
    }
    Eigen::VectorXd v = eig.eigenvectors().col(src);
    Eigen::Index biggest = 0;
    v.cwiseAbs().maxCoeff(&biggest);
    if (v[biggest] < 0.0) v = -v;
    r.components.col(c) = v;
    r.explained_variance[c] = value;
  }
  r.points = centered * r.components;
  return r;
}

Reduction reduce(const LatentMatrix& latent, std::size_t out_dims) {
  return PcaReducer{}.reduce(latent, out_dims);
}

std::vector<int> dbscan(const Matrix& points, double eps, std::size_t min_pts) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("dbscan eps must be positive");
  if (min_pts < 1) throw ConfigError("dbscan min_pts must be >= 1");
  if (!points.allFinite()) throw NumericError("dbscan input has non-finite coordinates");

  const auto n = static_cast<std::size_t>(points.rows());
  const double eps2 = eps * eps;
  auto neighbours = [&](std::size_t i, std::vector<std::size_t>& out) {
    out.clear();
    const auto p = points.row(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < n; ++j) {
      if ((points.row(static_cast<Eigen::Index>(j)) - p).squaredNorm() <= eps2) out.push_back(j);
    }
  };

  constexpr int kUnvisited = -2;
  std::vector<int> labels(n, kUnvisited);
  std::vector<std::size_t> nbrs;
  std::vector<std::size_t> inner;
  std::deque<std::size_t> frontier;
  int next_cluster = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != kUnvisited) continue;
    neighbours(i, nbrs);
    if (nbrs.size() < min_pts) {
      labels[i] = kNoise;
      continue;
    }
    const int cluster = next_cluster++;
    labels[i] = cluster;
    frontier.assign(nbrs.begin(), nbrs.end());
    while (!frontier.empty()) {
      const auto j = frontier.front();
      frontier.pop_front();
      if (labels[j] == kNoise) labels[j] = cluster;  // border point
      if (labels[j] != kUnvisited) continue;
      labels[j] = cluster;
      neighbours(j, inner);
      if (inner.size() >= min_pts) {
        for (auto q : inner) {
          if (labels[q] == kUnvisited || labels[q] == kNoise) frontier.push_back(q);
        }
      }
    }
  }
  return labels;
}

NodeSubset ClusterResult::members(int cluster) const {
  std::vector<NodeIndex> idx;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == cluster) idx.push_back(static_cast<NodeIndex>(i));
  }
  return NodeSubset(std::move(idx));
}

ClusterResult rank_clusters(const BinaryAttributedGraph& g, const std::vector<int>& labels,
                            std::size_t k, double t) {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("density threshold t must lie in [0,1]");
  if (labels.size() != g.num_nodes()) throw ConfigError("labels length does not match graph");

  ClusterResult r;
  r.labels = labels;
  r.threshold = t;
  int max_label = kNoise;
  for (int l : labels) {
    if (l < kNoise) throw ConfigError("invalid cluster label " + std::to_string(l));
    max_label = std::max(max_label, l);
  }
  const auto c = static_cast<std::size_t>(max_label + 1);
  std::vector<std::vector<NodeIndex>> members(c);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= 0) members[labels[i]].push_back(static_cast<NodeIndex>(i));
  }
  r.cluster_sizes.resize(c);
  r.induced_densities.assign(c, 0.0);
  r.above_threshold.assign(c, false);
  for (std::size_t id = 0; id < c; ++id) {
    r.cluster_sizes[id] = members[id].size();
    if (members[id].size() >= 2) {
      r.induced_densities[id] = induced_density(g, NodeSubset(std::move(members[id])));
    }
    r.above_threshold[id] = r.cluster_sizes[id] > 0 && r.induced_densities[id] >= t;
  }

  std::vector<int> order;
  for (std::size_t id = 0; id < c; ++id) {
    if (r.cluster_sizes[id] > 0) order.push_back(static_cast<int>(id));
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return r.induced_densities[a] > r.induced_densities[b];
  });
  if (order.size() > k) order.resize(k);
  r.top_k = std::move(order);
  return r;
}

// ---------------------------------------------------------------------------

void write_labels_csv(const std::vector<std::string>& node_ids, const std::vector<int>& labels,
                      const std::filesystem::path& path) {
  if (node_ids.size() != labels.size()) throw ConfigError("labels length does not match node ids");
  std::string out = "node_id,cluster_label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += node_ids[i] + "," + std::to_string(labels[i]) + "\n";
  }
  io::write_text(path, out);
}

std::vector<int> read_labels_csv(const std::vector<std::string>& node_ids,
                                 const std::filesystem::path& path) {
  const auto lines = io::read_lines(path);
  if (lines.empty() || lines[0] != "node_id,cluster_label") {
    throw DataError("'" + path.string() + "': expected header node_id,cluster_label");
  }
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < node_ids.size(); ++i) index.emplace(node_ids[i], i);
  std::vector<int> labels(node_ids.size(), kNoise);
  std::vector<char> seen(node_ids.size(), 0);
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto context = path.string() + ":" + std::to_string(ln + 1);
    const auto fields = io::split(lines[ln], ',');
    if (fields.size() != 2) throw DataError(context + ": expected 2 fields");
    const auto it = index.find(fields[0]);
    if (it == index.end()) throw DataError(context + ": unknown node id '" + fields[0] + "'");
    labels[it->second] = static_cast<int>(io::parse_int(fields[1], context));
    seen[it->second] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw DataError("'" + path.string() + "' does not cover every node");
  }
  return labels;
}

void write_points_csv(const std::vector<std::string>& node_ids, const Matrix& points,
                      const std::filesystem::path& path) {
  std::string out = "node_id";
  for (Eigen::Index c = 0; c < points.cols(); ++c) out += ",r_" + std::to_string(c);
  out += '\n';
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    out += node_ids[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < points.cols(); ++c) out += "," + io::format_double(points(r, c));
    out += '\n';
  }
  io::write_text(path, out);
}

std::string ranking_json(const ClusterResult& result) {
  auto arr = nlohmann::json::array();
  for (int id : result.top_k) {
    arr.push_back({{"cluster_id", id},
                   {"size", result.cluster_sizes[id]},
                   {"induced_density", result.induced_densities[id]},
                   {"above_threshold", static_cast<bool>(result.above_threshold[id])}});
  }
  return arr.dump(2) + "\n";
}

}  // namespace subblock
