#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace subblock {

using NodeIndex = std::uint32_t;

/// Strictly increasing set of indices. Used for node subsets and for
/// attribute-column subsets alike.
class NodeSubset {
 public:
  NodeSubset() = default;

  /// Throws ConfigError unless `indices` is strictly increasing.
  explicit NodeSubset(std::vector<NodeIndex> indices);

  /// Sorts and deduplicates.
  static NodeSubset from_unsorted(std::vector<NodeIndex> indices);

  /// {0, 1, ..., n-1}
  static NodeSubset all(std::size_t n);

  std::span<const NodeIndex> indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  bool contains(NodeIndex i) const;
  NodeIndex operator[](std::size_t pos) const { return indices_[pos]; }
  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }

  /// Membership mask of length n. Throws ConfigError if an index is >= n.
  std::vector<char> mask(std::size_t n) const;

  friend bool operator==(const NodeSubset&, const NodeSubset&) = default;

 private:
  std::vector<NodeIndex> indices_;
};

/// Compressed sparse rows of a binary matrix; column indices sorted per row.
struct BinaryCsr {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<NodeIndex> columns;

  std::span<const NodeIndex> row(std::size_t r) const {
    return {columns.data() + offsets[r], offsets[r + 1] - offsets[r]};
  }
  std::size_t nnz() const noexcept { return columns.size(); }
  bool contains(std::size_t r, NodeIndex c) const;

  /// Builds from (row, col) pairs; duplicates collapse to one entry.
  static BinaryCsr from_pairs(std::size_t rows, std::size_t cols,
                              std::vector<std::pair<NodeIndex, NodeIndex>> pairs);
  BinaryCsr transposed() const;
};

/// Directed follower graph plus binary node-attribute (hashtag) matrix.
///
/// Immutable after construction. Both A and X are stored sparse, with
/// row-wise and column-wise views so in/out neighbourhoods and attribute
/// users are O(degree) to enumerate.
class BinaryAttributedGraph {
 public:
  struct BuildReport {
    std::size_t self_loops_dropped = 0;
    std::size_t duplicate_edges = 0;
    std::size_t duplicate_attributes = 0;
  };

  BinaryAttributedGraph() = default;

  /// Validates ids/indices, drops self-loops and collapses duplicates.
  BinaryAttributedGraph(std::vector<std::string> node_ids,
                        std::vector<std::string> attribute_names,
                        std::vector<std::pair<NodeIndex, NodeIndex>> edges,
                        std::vector<std::pair<NodeIndex, NodeIndex>> attribute_pairs,
                        BuildReport* report = nullptr);

  std::size_t num_nodes() const noexcept { return node_ids_.size(); }
  std::size_t num_attributes() const noexcept { return attribute_names_.size(); }
  std::size_t num_edges() const noexcept { return out_.nnz(); }
  std::size_t num_attribute_entries() const noexcept { return attrs_.nnz(); }

  const std::vector<std::string>& node_ids() const noexcept { return node_ids_; }
  const std::vector<std::string>& attribute_names() const noexcept { return attribute_names_; }

  std::span<const NodeIndex> out_neighbors(NodeIndex i) const { return out_.row(i); }
  std::span<const NodeIndex> in_neighbors(NodeIndex i) const { return in_.row(i); }
  std::span<const NodeIndex> attributes_of(NodeIndex i) const { return attrs_.row(i); }
  std::span<const NodeIndex> users_of(NodeIndex attribute) const { return attr_users_.row(attribute); }

  bool has_edge(NodeIndex src, NodeIndex dst) const { return out_.contains(src, dst); }
  bool has_attribute(NodeIndex node, NodeIndex attribute) const {
    return attrs_.contains(node, attribute);
  }

  const BinaryCsr& adjacency() const noexcept { return out_; }
  const BinaryCsr& attributes() const noexcept { return attrs_; }

  /// Sorted union of in- and out-neighbours.
  std::vector<std::vector<NodeIndex>> undirected_neighbors() const;

  /// Edge list in row-major order.
  std::vector<std::pair<NodeIndex, NodeIndex>> edge_list() const;
  std::vector<std::pair<NodeIndex, NodeIndex>> attribute_pairs() const;

  /// Throws DataError when the id is unknown.
  NodeIndex index_of(const std::string& node_id) const;

  friend bool operator==(const BinaryAttributedGraph& a, const BinaryAttributedGraph& b);

 private:
  std::vector<std::string> node_ids_;
  std::vector<std::string> attribute_names_;
  std::unordered_map<std::string, NodeIndex> index_;
  BinaryCsr out_;
  BinaryCsr in_;
  BinaryCsr attrs_;
  BinaryCsr attr_users_;
};

struct LoadReport {
  std::size_t edge_lines = 0;
  std::size_t attribute_lines = 0;
  std::size_t self_loops_dropped = 0;
  std::size_t duplicate_edges = 0;
};

/// Reads `src<TAB>dst` and `node_id<TAB>attribute_name` TSV files.
/// Lines starting with '#' and blank lines are skipped. Any id in either
/// file becomes a node (order of first appearance, edge file first);
/// attribute columns are ordered by first appearance.
BinaryAttributedGraph load_graph(const std::filesystem::path& edge_file,
                                 const std::filesystem::path& attribute_file,
                                 LoadReport* report = nullptr);

/// Subgraph induced by `s`, with node ids and all attribute columns kept.
BinaryAttributedGraph induced_subgraph(const BinaryAttributedGraph& g, const NodeSubset& s);

void save_snapshot(const BinaryAttributedGraph& g, const std::filesystem::path& path);
BinaryAttributedGraph load_snapshot(const std::filesystem::path& path);

/// Writes the graph back out in the TSV ingestion format.
void save_tsv(const BinaryAttributedGraph& g, const std::filesystem::path& edge_file,
              const std::filesystem::path& attribute_file);

}  // namespace subblock
