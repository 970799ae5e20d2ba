#include "subblock/graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "subblock/errors.hpp"

namespace subblock {

namespace {

using Pair = std::pair<NodeIndex, NodeIndex>;

std::size_t sort_unique(std::vector<Pair>& pairs) {
  std::sort(pairs.begin(), pairs.end());
  const auto before = pairs.size();
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return before - pairs.size();
}

std::string trim_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// NodeSubset
// ---------------------------------------------------------------------------

NodeSubset::NodeSubset(std::vector<NodeIndex> indices) : indices_(std::move(indices)) {
  for (std::size_t i = 1; i < indices_.size(); ++i) {
    if (indices_[i - 1] >= indices_[i]) {
      throw ConfigError("NodeSubset indices must be strictly increasing");
    }
  }
}

NodeSubset NodeSubset::from_unsorted(std::vector<NodeIndex> indices) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return NodeSubset(std::move(indices));
}

NodeSubset NodeSubset::all(std::size_t n) {
  std::vector<NodeIndex> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<NodeIndex>(i);
  return NodeSubset(std::move(idx));
}

bool NodeSubset::contains(NodeIndex i) const {
  return std::binary_search(indices_.begin(), indices_.end(), i);
}

std::vector<char> NodeSubset::mask(std::size_t n) const {
  std::vector<char> m(n, 0);
  for (auto i : indices_) {
    if (i >= n) throw ConfigError("subset index " + std::to_string(i) + " out of range");
    m[i] = 1;
  }
  return m;
}

// ---------------------------------------------------------------------------
// BinaryCsr
// ---------------------------------------------------------------------------

bool BinaryCsr::contains(std::size_t r, NodeIndex c) const {
  const auto cols = row(r);
  return std::binary_search(cols.begin(), cols.end(), c);
}

BinaryCsr BinaryCsr::from_pairs(std::size_t rows, std::size_t cols, std::vector<Pair> pairs) {
  sort_unique(pairs);
  BinaryCsr m;
  m.rows = rows;
  m.cols = cols;
  m.offsets.assign(rows + 1, 0);
  m.columns.reserve(pairs.size());
  for (const auto& [r, c] : pairs) {
    ++m.offsets[r + 1];
    m.columns.push_back(c);
  }
  for (std::size_t r = 0; r < rows; ++r) m.offsets[r + 1] += m.offsets[r];
  return m;
}

BinaryCsr BinaryCsr::transposed() const {
  std::vector<Pair> pairs;
  pairs.reserve(nnz());
  for (std::size_t r = 0; r < rows; ++r) {
    for (auto c : row(r)) pairs.emplace_back(c, static_cast<NodeIndex>(r));
  }
  return from_pairs(cols, rows, std::move(pairs));
}

// ---------------------------------------------------------------------------
// BinaryAttributedGraph
// ---------------------------------------------------------------------------

BinaryAttributedGraph::BinaryAttributedGraph(std::vector<std::string> node_ids,
                                             std::vector<std::string> attribute_names,
                                             std::vector<Pair> edges,
                                             std::vector<Pair> attribute_pairs,
                                             BuildReport* report)
    : node_ids_(std::move(node_ids)), attribute_names_(std::move(attribute_names)) {
  const auto n = node_ids_.size();
  const auto d = attribute_names_.size();
  index_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!index_.emplace(node_ids_[i], static_cast<NodeIndex>(i)).second) {
      throw DataError("duplicate node id '" + node_ids_[i] + "'");
    }
  }

  BuildReport local;
  std::erase_if(edges, [&](const Pair& e) {
    if (e.first >= n || e.second >= n) {
      throw DataError("edge endpoint out of range");
    }
    if (e.first == e.second) {
      ++local.self_loops_dropped;
      return true;
    }
    return false;
  });
  local.duplicate_edges = sort_unique(edges);
  for (const auto& [v, a] : attribute_pairs) {
    if (v >= n || a >= d) throw DataError("attribute entry out of range");
  }
  local.duplicate_attributes = sort_unique(attribute_pairs);

  out_ = BinaryCsr::from_pairs(n, n, std::move(edges));
  in_ = out_.transposed();
  attrs_ = BinaryCsr::from_pairs(n, d, std::move(attribute_pairs));
  attr_users_ = attrs_.transposed();
  if (report) *report = local;
}

std::vector<std::vector<NodeIndex>> BinaryAttributedGraph::undirected_neighbors() const {
  const auto n = num_nodes();
  std::vector<std::vector<NodeIndex>> nbrs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto out = out_neighbors(static_cast<NodeIndex>(i));
    const auto in = in_neighbors(static_cast<NodeIndex>(i));
    auto& u = nbrs[i];
    u.reserve(out.size() + in.size());
    std::set_union(out.begin(), out.end(), in.begin(), in.end(), std::back_inserter(u));
  }
  return nbrs;
}

std::vector<Pair> BinaryAttributedGraph::edge_list() const {
  std::vector<Pair> edges;
  edges.reserve(num_edges());
  for (std::size_t i = 0; i < num_nodes(); ++i) {
    for (auto j : out_.row(i)) edges.emplace_back(static_cast<NodeIndex>(i), j);
  }
  return edges;
}

std::vector<Pair> BinaryAttributedGraph::attribute_pairs() const {
  std::vector<Pair> pairs;
  pairs.reserve(num_attribute_entries());
  for (std::size_t i = 0; i < num_nodes(); ++i) {
    for (auto c : attrs_.row(i)) pairs.emplace_back(static_cast<NodeIndex>(i), c);
  }
  return pairs;
}

NodeIndex BinaryAttributedGraph::index_of(const std::string& node_id) const {
  const auto it = index_.find(node_id);
  if (it == index_.end()) throw DataError("unknown node id '" + node_id + "'");
  return it->second;
}

bool operator==(const BinaryAttributedGraph& a, const BinaryAttributedGraph& b) {
  return a.node_ids_ == b.node_ids_ && a.attribute_names_ == b.attribute_names_ &&
         a.out_.offsets == b.out_.offsets && a.out_.columns == b.out_.columns &&
         a.attrs_.offsets == b.attrs_.offsets && a.attrs_.columns == b.attrs_.columns;
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

namespace {

struct IdTable {
  std::vector<std::string> names;
  std::unordered_map<std::string, NodeIndex> index;

  NodeIndex intern(const std::string& name) {
    auto [it, inserted] = index.emplace(name, static_cast<NodeIndex>(names.size()));
    if (inserted) names.push_back(name);
    return it->second;
  }
};

template <typename OnPair>
std::size_t read_tsv_pairs(const std::filesystem::path& path, OnPair&& on_pair) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read file '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  std::size_t records = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim_cr(std::move(line));
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": malformed line, expected two tab-separated fields");
    }
    on_pair(line.substr(0, tab), line.substr(tab + 1));
    ++records;
  }
  return records;
}

}  // namespace

BinaryAttributedGraph load_graph(const std::filesystem::path& edge_file,
                                 const std::filesystem::path& attribute_file,
                                 LoadReport* report) {
  IdTable nodes;
  IdTable attrs;
  std::vector<Pair> edges;
  std::vector<Pair> entries;

  LoadReport local;
  local.edge_lines = read_tsv_pairs(edge_file, [&](const std::string& a, const std::string& b) {
    const auto src = nodes.intern(a);
    const auto dst = nodes.intern(b);
    edges.emplace_back(src, dst);
  });
  local.attribute_lines =
      read_tsv_pairs(attribute_file, [&](const std::string& v, const std::string& name) {
        const auto node = nodes.intern(v);
        const auto col = attrs.intern(name);
        entries.emplace_back(node, col);
      });
  if (local.edge_lines == 0 && local.attribute_lines == 0) {
    throw DataError("no records in '" + edge_file.string() + "' or '" +
                    attribute_file.string() + "'");
  }

  BinaryAttributedGraph::BuildReport build;
  BinaryAttributedGraph g(std::move(nodes.names), std::move(attrs.names), std::move(edges),
                          std::move(entries), &build);
  local.self_loops_dropped = build.self_loops_dropped;
  local.duplicate_edges = build.duplicate_edges;
  if (report) *report = local;
  return g;
}

BinaryAttributedGraph induced_subgraph(const BinaryAttributedGraph& g, const NodeSubset& s) {
  const auto n = g.num_nodes();
  std::vector<std::int64_t> local(n, -1);
  std::vector<std::string> ids;
  ids.reserve(s.size());
  for (std::size_t p = 0; p < s.size(); ++p) {
    if (s[p] >= n) throw ConfigError("subset index out of range");
    local[s[p]] = static_cast<std::int64_t>(p);
    ids.push_back(g.node_ids()[s[p]]);
  }
  std::vector<Pair> edges;
  std::vector<Pair> entries;
  for (std::size_t p = 0; p < s.size(); ++p) {
    for (auto j : g.out_neighbors(s[p])) {
      if (local[j] >= 0) edges.emplace_back(static_cast<NodeIndex>(p), static_cast<NodeIndex>(local[j]));
    }
    for (auto c : g.attributes_of(s[p])) entries.emplace_back(static_cast<NodeIndex>(p), c);
  }
  return BinaryAttributedGraph(std::move(ids), g.attribute_names(), std::move(edges),
                               std::move(entries));
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

void save_snapshot(const BinaryAttributedGraph& g, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["format"] = "subblock-graph";
  doc["version"] = 1;
  doc["node_ids"] = g.node_ids();
  doc["attribute_names"] = g.attribute_names();
  doc["edges"] = g.edge_list();
  doc["attributes"] = g.attribute_pairs();
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << doc.dump() << '\n';
}

BinaryAttributedGraph load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read file '" + path.string() + "'");
  try {
    const auto doc = nlohmann::json::parse(in);
    if (doc.value("format", "") != "subblock-graph") {
      throw DataError("'" + path.string() + "' is not a graph snapshot");
    }
    return BinaryAttributedGraph(doc.at("node_ids").get<std::vector<std::string>>(),
                                 doc.at("attribute_names").get<std::vector<std::string>>(),
                                 doc.at("edges").get<std::vector<Pair>>(),
                                 doc.at("attributes").get<std::vector<Pair>>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError("'" + path.string() + "': " + e.what());
  }
}

namespace {

// Orders lines so that reloading introduces node ids and attribute names in
// exactly the current index order; leftovers follow in row-major order.
std::vector<Pair> introduction_order_edges(const BinaryAttributedGraph& g,
                                           std::size_t& nodes_introduced) {
  const auto n = g.num_nodes();
  std::set<Pair> used;
  std::vector<Pair> lines;
  std::size_t next = 0;
  while (next < n) {
    const auto k = static_cast<NodeIndex>(next);
    const auto in = g.in_neighbors(k);
    const auto out = g.out_neighbors(k);
    if (!in.empty() && in.front() < k) {
      lines.emplace_back(in.front(), k);
    } else if (!out.empty() && out.front() < k) {
      lines.emplace_back(k, out.front());
    } else if (next + 1 < n && g.has_edge(k, k + 1)) {
      lines.emplace_back(k, k + 1);
      ++next;
    } else {
      break;
    }
    used.insert(lines.back());
    ++next;
  }
  nodes_introduced = next;
  for (const auto& e : g.edge_list()) {
    if (!used.contains(e)) lines.push_back(e);
  }
  return lines;
}

std::vector<Pair> introduction_order_attributes(const BinaryAttributedGraph& g,
                                                std::size_t next_node) {
  const auto n = g.num_nodes();
  const auto d = g.num_attributes();
  std::set<Pair> used;
  std::vector<Pair> lines;
  std::size_t next_col = 0;
  auto emit = [&](NodeIndex v, NodeIndex c) {
    lines.emplace_back(v, c);
    used.emplace(v, c);
  };
  while (next_col < d || next_node < n) {
    if (next_col < d) {
      const auto users = g.users_of(static_cast<NodeIndex>(next_col));
      if (!users.empty() && users.front() < next_node) {
        emit(users.front(), static_cast<NodeIndex>(next_col++));
        continue;
      }
    }
    if (next_node >= n) break;
    const auto v = static_cast<NodeIndex>(next_node);
    const auto cols = g.attributes_of(v);
    if (!cols.empty() && cols.front() < next_col) {
      emit(v, cols.front());
      ++next_node;
    } else if (next_col < d && g.has_attribute(v, static_cast<NodeIndex>(next_col))) {
      emit(v, static_cast<NodeIndex>(next_col++));
      ++next_node;
    } else {
      break;
    }
  }
  for (const auto& p : g.attribute_pairs()) {
    if (!used.contains(p)) lines.push_back(p);
  }
  return lines;
}

}  // namespace

void save_tsv(const BinaryAttributedGraph& g, const std::filesystem::path& edge_file,
              const std::filesystem::path& attribute_file) {
  std::ofstream edges(edge_file);
  if (!edges) throw DataError("cannot write '" + edge_file.string() + "'");
  std::ofstream attrs(attribute_file);
  if (!attrs) throw DataError("cannot write '" + attribute_file.string() + "'");

  std::size_t introduced = 0;
  const auto& ids = g.node_ids();
  for (const auto& [s, t] : introduction_order_edges(g, introduced)) {
    edges << ids[s] << '\t' << ids[t] << '\n';
  }
  const auto& names = g.attribute_names();
  for (const auto& [v, c] : introduction_order_attributes(g, introduced)) {
    attrs << ids[v] << '\t' << names[c] << '\n';
  }
}

}  // namespace subblock
