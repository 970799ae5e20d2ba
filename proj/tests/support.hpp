#pragma once

// Shared fixtures and brute-force oracles for the test suites. The oracles
// work on dense 0/1 matrices and never call into the library's algorithms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "subblock/graph.hpp"

namespace subblock::testing {

using DenseBinary = std::vector<std::vector<int>>;

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("subblock_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<std::string> numbered(const std::string& prefix, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

inline BinaryAttributedGraph make_graph(std::size_t n,
                                        std::vector<std::pair<NodeIndex, NodeIndex>> edges,
                                        std::size_t d = 1,
                                        std::vector<std::pair<NodeIndex, NodeIndex>> attrs = {}) {
  return BinaryAttributedGraph(numbered("v", n), numbered("#t", d), std::move(edges),
                               std::move(attrs));
}

inline DenseBinary random_dense(std::size_t rows, std::size_t cols, double p, std::mt19937_64& rng,
                                bool zero_diagonal = false) {
  std::bernoulli_distribution coin(p);
  DenseBinary m(rows, std::vector<int>(cols, 0));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (zero_diagonal && i == j) continue;
      m[i][j] = coin(rng) ? 1 : 0;
    }
  }
  return m;
}

inline BinaryAttributedGraph graph_from_dense(const DenseBinary& a, const DenseBinary& x,
                                              std::size_t d) {
  std::vector<std::pair<NodeIndex, NodeIndex>> edges;
  std::vector<std::pair<NodeIndex, NodeIndex>> attrs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (a[i][j]) edges.emplace_back(i, j);
    }
    for (std::size_t c = 0; c < d; ++c) {
      if (x[i][c]) attrs.emplace_back(i, c);
    }
  }
  return make_graph(a.size(), std::move(edges), d, std::move(attrs));
}

// --- oracles ---------------------------------------------------------------

inline double oracle_induced_density(const DenseBinary& a, const std::vector<NodeIndex>& s) {
  int edges = 0;
  for (auto i : s) {
    for (auto j : s) {
      if (i != j && a[i][j]) ++edges;
    }
  }
  const double k = static_cast<double>(s.size());
  return edges / (k * (k - 1));
}

inline double oracle_bipartite_density(const DenseBinary& x, const std::vector<NodeIndex>& rows,
                                       const std::vector<NodeIndex>& cols) {
  int ones = 0;
  for (auto r : rows) {
    for (auto c : cols) ones += x[r][c];
  }
  return static_cast<double>(ones) / static_cast<double>(rows.size() * cols.size());
}

inline DenseBinary undirected(const DenseBinary& a) {
  DenseBinary u = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) u[i][j] = (a[i][j] || a[j][i]) && i != j;
  }
  return u;
}

inline std::vector<double> oracle_clustering(const DenseBinary& a) {
  const auto u = undirected(a);
  const auto n = u.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    int deg = 0;
    for (std::size_t j = 0; j < n; ++j) deg += u[v][j];
    if (deg < 2) continue;
    int tri = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j && u[v][i] && u[v][j] && u[i][j]) ++tri;
      }
    }
    // ordered pairs count each triangle twice
    out[v] = static_cast<double>(tri) / (deg * (deg - 1.0));
  }
  return out;
}

inline double oracle_jaccard(const std::vector<int>& a, const std::vector<int>& b) {
  int inter = 0;
  int uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += a[i] && b[i];
    uni += a[i] || b[i];
  }
  if (uni == 0) return 0.0;
  return 1.0 - static_cast<double>(inter) / uni;
}

/// Average-degree objective edges(S)/|S| on the undirected projection.
inline double oracle_avg_degree(const DenseBinary& u, const std::vector<NodeIndex>& s) {
  if (s.empty()) return 0.0;
  int e = 0;
  for (std::size_t p = 0; p < s.size(); ++p) {
    for (std::size_t q = p + 1; q < s.size(); ++q) e += u[s[p]][s[q]];
  }
  return static_cast<double>(e) / static_cast<double>(s.size());
}

inline double oracle_densest_value(const DenseBinary& a) {
  const auto u = undirected(a);
  const auto n = u.size();
  double best = 0.0;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<NodeIndex> s;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) s.push_back(static_cast<NodeIndex>(i));
    }
    best = std::max(best, oracle_avg_degree(u, s));
  }
  return best;
}

/// Peeling recomputed from scratch every step: O(n^3) but obviously correct.
inline std::vector<NodeIndex> oracle_peeling(const DenseBinary& a) {
  const auto u = undirected(a);
  const auto n = u.size();
  std::vector<NodeIndex> alive;
  for (std::size_t i = 0; i < n; ++i) alive.push_back(static_cast<NodeIndex>(i));
  std::vector<NodeIndex> best = alive;
  double best_f = oracle_avg_degree(u, alive);
  while (alive.size() > 1) {
    std::size_t victim = 0;
    int victim_deg = 1 << 30;
    for (std::size_t p = 0; p < alive.size(); ++p) {
      int deg = 0;
      for (auto q : alive) deg += u[alive[p]][q];
      if (deg < victim_deg) {
        victim_deg = deg;
        victim = p;
      }
    }
    alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(victim));
    const double f = oracle_avg_degree(u, alive);
    if (f > best_f) {
      best_f = f;
      best = alive;
    }
  }
  return best;
}

/// DBSCAN from neighbourhood sets, core components via flood fill and
/// border points assigned to the adjacent component with the smallest
/// minimum core index. Cluster ids follow that same minimum-core order.
inline std::vector<int> oracle_dbscan(const std::vector<std::vector<double>>& pts, double eps,
                                      std::size_t min_pts) {
  const auto n = pts.size();
  auto dist = [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < pts[i].size(); ++c) s += (pts[i][c] - pts[j][c]) * (pts[i][c] - pts[j][c]);
    return std::sqrt(s);
  };
  std::vector<std::vector<std::size_t>> nbr(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (dist(i, j) <= eps) nbr[i].push_back(j);
    }
  }
  std::vector<char> core(n);
  for (std::size_t i = 0; i < n; ++i) core[i] = nbr[i].size() >= min_pts;
  std::vector<int> comp(n, -1);
  int comps = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] || comp[i] >= 0) continue;
    std::vector<std::size_t> stack{i};
    comp[i] = comps;
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      for (auto w : nbr[v]) {
        if (core[w] && comp[w] < 0) {
          comp[w] = comps;
          stack.push_back(w);
        }
      }
    }
    ++comps;
  }
  std::vector<int> labels(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      labels[i] = comp[i];
      continue;
    }
    int best = -1;
    for (auto w : nbr[i]) {
      if (core[w] && (best < 0 || comp[w] < best)) best = comp[w];
    }
    labels[i] = best;
  }
  return labels;
}

/// Canonical relabelling: clusters renumbered by first appearance.
inline std::vector<int> canonical_labels(const std::vector<int>& labels) {
  std::map<int, int> remap;
  std::vector<int> out;
  for (int l : labels) {
    if (l < 0) {
      out.push_back(-1);
      continue;
    }
    auto [it, inserted] = remap.emplace(l, static_cast<int>(remap.size()));
    out.push_back(it->second);
  }
  return out;
}

}  // namespace subblock::testing
