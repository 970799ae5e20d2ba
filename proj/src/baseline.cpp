#include "subblock/baseline.hpp"

#include <set>

#include "json.hpp"
#include "subblock/errors.hpp"

namespace subblock {

GreedyResult greedy_densest(const BinaryAttributedGraph& g) {
  if (g.num_edges() == 0) throw DegenerateInputError("greedy peeling needs at least one edge");
  const auto n = g.num_nodes();
  const auto nbrs = g.undirected_neighbors();

  std::vector<std::size_t> degree(n);
  std::size_t edges = 0;
  std::set<std::pair<std::size_t, NodeIndex>> queue;
  for (std::size_t i = 0; i < n; ++i) {
    degree[i] = nbrs[i].size();
    edges += degree[i];
    queue.emplace(degree[i], static_cast<NodeIndex>(i));
  }
  edges /= 2;

  GreedyResult r;
  r.score_history.reserve(n);
  r.score_history.push_back(static_cast<double>(edges) / static_cast<double>(n));
  r.best_score = r.score_history.front();
  std::size_t best_removed = 0;

  std::vector<char> removed(n, 0);
  std::vector<NodeIndex> order;
  order.reserve(n);
  for (std::size_t alive = n; alive > 1; --alive) {
    const auto [deg, v] = *queue.begin();
    queue.erase(queue.begin());
    removed[v] = 1;
    order.push_back(v);
    edges -= deg;
    for (auto u : nbrs[v]) {
      if (removed[u]) continue;
      queue.erase({degree[u], u});
      --degree[u];
      queue.emplace(degree[u], u);
    }
    const double score = static_cast<double>(edges) / static_cast<double>(alive - 1);
    r.score_history.push_back(score);
    if (score > r.best_score) {
      r.best_score = score;
      best_removed = order.size();
    }
  }

  std::vector<char> dropped(n, 0);
  for (std::size_t p = 0; p < best_removed; ++p) dropped[order[p]] = 1;
  std::vector<NodeIndex> keep;
  for (std::size_t i = 0; i < n; ++i) {
    if (!dropped[i]) keep.push_back(static_cast<NodeIndex>(i));
  }
  r.selected = NodeSubset(std::move(keep));
  return r;
}

std::vector<int> baseline_predict(const BinaryAttributedGraph& g, const GreedyResult& result) {
  std::vector<int> flags(g.num_nodes(), 0);
  for (auto i : result.selected) flags.at(i) = 1;
  return flags;
}

std::string greedy_json(const BinaryAttributedGraph& g, const GreedyResult& result) {
  std::vector<std::string> ids;
  for (auto i : result.selected) ids.push_back(g.node_ids()[i]);
  nlohmann::json doc{{"selected_node_ids", ids}, {"best_score", result.best_score}};
  return doc.dump(2) + "\n";
}

}  // namespace subblock
