#include "subblock/similarity.hpp"

#include <cmath>
#include <vector>

#include "subblock/errors.hpp"

namespace subblock {

double jaccard_distance(std::span<const NodeIndex> a, std::span<const NodeIndex> b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  const auto uni = a.size() + b.size() - common;
  return 1.0 - static_cast<double>(common) / static_cast<double>(uni);
}

namespace {

DistanceMatrix jaccard_from_supports(const std::vector<std::span<const NodeIndex>>& supports) {
  const auto n = static_cast<Eigen::Index>(supports.size());
  DistanceMatrix out{Matrix::Zero(n, n), DistanceKind::jaccard};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dist = jaccard_distance(supports[i], supports[j]);
      out.values(i, j) = dist;
      out.values(j, i) = dist;
    }
  }
  return out;
}

}  // namespace

DistanceMatrix pairwise_jaccard(const Matrix& rows) {
  std::vector<std::vector<NodeIndex>> storage(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      const double v = rows(i, c);
      if (v == 1.0) {
        storage[i].push_back(static_cast<NodeIndex>(c));
      } else if (v != 0.0) {
        throw ConfigError("pairwise_jaccard expects a binary matrix");
      }
    }
  }
  std::vector<std::span<const NodeIndex>> supports(storage.begin(), storage.end());
  return jaccard_from_supports(supports);
}

DistanceMatrix pairwise_jaccard(const BinaryCsr& rows, std::span<const NodeIndex> selection) {
  std::vector<std::span<const NodeIndex>> supports;
  supports.reserve(selection.size());
  for (auto r : selection) {
    if (r >= rows.rows) throw ConfigError("row index out of range");
    supports.push_back(rows.row(r));
  }
  return jaccard_from_supports(supports);
}

DistanceMatrix pairwise_euclidean(const Matrix& h) {
  if (!h.allFinite()) throw NumericError("pairwise_euclidean: non-finite input");
  const auto n = h.rows();
  DistanceMatrix out{Matrix::Zero(n, n), DistanceKind::euclidean};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dist = (h.row(i) - h.row(j)).norm();
      out.values(i, j) = dist;
      out.values(j, i) = dist;
    }
  }
  return out;
}

DistanceMatrix similarity_transform(const DistanceMatrix& dist, double lambda) {
  if (dist.kind != DistanceKind::euclidean) {
    throw ConfigError("similarity_transform expects a euclidean distance matrix");
  }
  if (!(lambda >= 0.0)) throw ConfigError("similarity_transform: lambda must be >= 0");
  return {(-lambda * dist.values.array()).exp().matrix(), DistanceKind::transformed};
}

}  // namespace subblock
