#pragma once

#include <string>
#include <vector>

#include "subblock/graph.hpp"

namespace subblock {

struct GreedyResult {
  NodeSubset selected;
  std::vector<double> score_history;  // [0] is the full node set, then one entry per removal
  double best_score = 0.0;
};

/// Adjacency-only dense-subgraph baseline: greedy peeling of the undirected
/// projection maximising edges(S)/|S|. The minimum-degree node (smallest
/// index on ties) is removed each step; the earliest prefix attaining the
/// best score is returned. Within a factor 2 of the optimum.
/// Throws DegenerateInputError on an edgeless graph.
GreedyResult greedy_densest(const BinaryAttributedGraph& g);

/// 0/1 vector flagging exactly the selected nodes.
std::vector<int> baseline_predict(const BinaryAttributedGraph& g, const GreedyResult& result);

/// {"selected_node_ids": [...], "best_score": x}
std::string greedy_json(const BinaryAttributedGraph& g, const GreedyResult& result);

}  // namespace subblock
