#pragma once

#include <span>

#include <Eigen/Dense>

#include "subblock/graph.hpp"

namespace subblock {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class DistanceKind { jaccard, euclidean, transformed };

struct DistanceMatrix {
  Matrix values;
  DistanceKind kind = DistanceKind::euclidean;
};

/// Jaccard distance of two sorted supports. Two empty supports are
/// identical rows and get distance 0.
double jaccard_distance(std::span<const NodeIndex> a, std::span<const NodeIndex> b);

/// Pairwise Jaccard distance of the rows of a dense 0/1 matrix.
/// Throws ConfigError on a non-binary entry.
DistanceMatrix pairwise_jaccard(const Matrix& rows);

/// Pairwise Jaccard distance between the selected rows of a sparse matrix.
DistanceMatrix pairwise_jaccard(const BinaryCsr& rows, std::span<const NodeIndex> selection);

/// Throws NumericError on non-finite input.
DistanceMatrix pairwise_euclidean(const Matrix& h);

/// Entrywise exp(-lambda * dist). Requires a euclidean matrix and lambda >= 0.
DistanceMatrix similarity_transform(const DistanceMatrix& dist, double lambda);

}  // namespace subblock
