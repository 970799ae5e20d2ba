#pragma once

#include <cstddef>
#include <vector>

#include "subblock/graph.hpp"

namespace subblock {

/// Directed edges inside `s` over the |s|(|s|-1) ordered pairs.
/// Throws DegenerateInputError when |s| < 2.
double induced_density(const BinaryAttributedGraph& g, const NodeSubset& s);

/// Fraction of ones in X restricted to rows `nodes` and columns `attributes`.
/// Throws DegenerateInputError when either subset is empty.
double bipartite_density(const BinaryAttributedGraph& g, const NodeSubset& nodes,
                         const NodeSubset& attributes);

/// Local clustering coefficient on the undirected projection of A.
/// Nodes of degree < 2 get 0.
std::vector<double> clustering_coefficients(const BinaryAttributedGraph& g);

struct HitsScores {
  std::vector<double> authority;
  std::vector<double> hub;
  std::size_t iterations = 0;
};

/// Kleinberg hub/authority power iteration on the directed graph. Each step
/// sets authority = A^T hub, then hub = A authority, L2-normalising both.
/// Stops once neither vector moves by more than `tol` in any entry.
HitsScores hits_scores(const BinaryAttributedGraph& g, std::size_t max_iters = 1000,
                       double tol = 1e-10);

}  // namespace subblock
