#include "subblock/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "subblock/errors.hpp"

namespace subblock {

double induced_density(const BinaryAttributedGraph& g, const NodeSubset& s) {
  if (s.size() < 2) throw DegenerateInputError("induced density needs at least 2 nodes");
  const auto inside = s.mask(g.num_nodes());
  std::size_t edges = 0;
  for (auto i : s) {
    for (auto j : g.out_neighbors(i)) edges += static_cast<std::size_t>(inside[j]);
  }
  const double k = static_cast<double>(s.size());
  return static_cast<double>(edges) / (k * (k - 1.0));
}

double bipartite_density(const BinaryAttributedGraph& g, const NodeSubset& nodes,
                         const NodeSubset& attributes) {
  if (nodes.empty() || attributes.empty()) {
    throw DegenerateInputError("bipartite density needs non-empty node and attribute subsets");
  }
  const auto cols = attributes.mask(g.num_attributes());
  std::size_t ones = 0;
  for (auto i : nodes) {
    if (i >= g.num_nodes()) throw ConfigError("node index out of range");
    for (auto c : g.attributes_of(i)) ones += static_cast<std::size_t>(cols[c]);
  }
  return static_cast<double>(ones) /
         (static_cast<double>(nodes.size()) * static_cast<double>(attributes.size()));
}

std::vector<double> clustering_coefficients(const BinaryAttributedGraph& g) {
  const auto n = g.num_nodes();
  const auto nbrs = g.undirected_neighbors();
  std::vector<double> coeff(n, 0.0);
  std::vector<char> marked(n, 0);
  for (std::size_t u = 0; u < n; ++u) {
    const auto& nu = nbrs[u];
    const auto deg = nu.size();
    if (deg < 2) continue;
    for (auto v : nu) marked[v] = 1;
    // Each neighbour pair {v, w} is counted once via v < w.
    std::size_t links = 0;
    for (auto v : nu) {
      for (auto w : nbrs[v]) {
        if (w > v && marked[w]) ++links;
      }
    }
    for (auto v : nu) marked[v] = 0;
    coeff[u] = 2.0 * static_cast<double>(links) /
               (static_cast<double>(deg) * static_cast<double>(deg - 1));
  }
  return coeff;
}

namespace {

void normalize(std::vector<double>& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq == 0.0) return;
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
}

}  // namespace

HitsScores hits_scores(const BinaryAttributedGraph& g, std::size_t max_iters, double tol) {
  if (g.num_edges() == 0) throw DegenerateInputError("HITS is undefined on a graph without edges");
  if (max_iters < 1) throw ConfigError("HITS max_iters must be >= 1");
  if (!(tol > 0.0)) throw ConfigError("HITS tolerance must be positive");

  const auto n = g.num_nodes();
  HitsScores s;
  s.hub.assign(n, 1.0);
  normalize(s.hub);
  s.authority.assign(n, 0.0);

  std::vector<double> auth(n);
  std::vector<double> hub(n);
  for (std::size_t it = 0; it < max_iters; ++it) {
    for (std::size_t v = 0; v < n; ++v) {
      double acc = 0.0;
      for (auto u : g.in_neighbors(static_cast<NodeIndex>(v))) acc += s.hub[u];
      auth[v] = acc;
    }
    normalize(auth);
    for (std::size_t u = 0; u < n; ++u) {
      double acc = 0.0;
      for (auto v : g.out_neighbors(static_cast<NodeIndex>(u))) acc += auth[v];
      hub[u] = acc;
    }
    normalize(hub);

    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      change = std::max({change, std::abs(auth[i] - s.authority[i]), std::abs(hub[i] - s.hub[i])});
    }
    s.authority.swap(auth);
    s.hub.swap(hub);
    s.iterations = it + 1;
    if (change < tol) break;
  }
  return s;
}

}  // namespace subblock
