#include <fstream>
#include <random>

#include "doctest.h"
#include "subblock/errors.hpp"
#include "subblock/graph.hpp"
#include "subblock/metrics.hpp"
#include "support.hpp"

using namespace subblock;
using namespace subblock::testing;

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("load_graph transcribes edges and attributes") {
  TempDir dir;
  write_file(dir / "e.tsv", "a\tb\nb\ta\n");
  write_file(dir / "x.tsv", "a\t#x\n");
  const auto g = load_graph(dir / "e.tsv", dir / "x.tsv");
  CHECK(g.num_nodes() == 2);
  CHECK(g.num_edges() == 2);
  CHECK(g.num_attributes() == 1);
  CHECK(g.has_attribute(g.index_of("a"), 0));
  CHECK_FALSE(g.has_attribute(g.index_of("b"), 0));
}

TEST_CASE("load_graph drops self-loops and reports them") {
  TempDir dir;
  write_file(dir / "e.tsv", "a\ta\n");
  write_file(dir / "x.tsv", "");
  LoadReport report;
  const auto g = load_graph(dir / "e.tsv", dir / "x.tsv", &report);
  CHECK(g.num_nodes() == 1);
  CHECK(g.num_edges() == 0);
  CHECK(report.self_loops_dropped == 1);
}

TEST_CASE("load_graph deduplicates edges") {
  TempDir dir;
  write_file(dir / "e.tsv", "# comment\na\tb\na\tb\n\n");
  write_file(dir / "x.tsv", "b\t#y\n");
  LoadReport report;
  const auto g = load_graph(dir / "e.tsv", dir / "x.tsv", &report);
  CHECK(g.has_edge(g.index_of("a"), g.index_of("b")));
  CHECK(g.num_edges() == 1);
  CHECK(report.duplicate_edges == 1);
}

TEST_CASE("load_graph reports malformed lines and unreadable files") {
  TempDir dir;
  write_file(dir / "e.tsv", "a\tb\nbroken line\n");
  write_file(dir / "x.tsv", "a\t#x\n");
  try {
    load_graph(dir / "e.tsv", dir / "x.tsv");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  CHECK_THROWS_AS(load_graph(dir / "missing.tsv", dir / "x.tsv"), DataError);
  write_file(dir / "empty.tsv", "");
  CHECK_THROWS_AS(load_graph(dir / "empty.tsv", dir / "empty.tsv"), DataError);
}

TEST_CASE("attribute columns follow first appearance") {
  TempDir dir;
  write_file(dir / "e.tsv", "a\tb\n");
  write_file(dir / "x.tsv", "b\t#second\na\t#first\nc\t#second\n");
  const auto g = load_graph(dir / "e.tsv", dir / "x.tsv");
  REQUIRE(g.attribute_names() == std::vector<std::string>{"#second", "#first"});
  CHECK(g.node_ids() == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("TSV and snapshot round trips reproduce the graph") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    TempDir dir;
    // Build TSV files with ids in a shuffled order so first-appearance order
    // differs from any sorted order.
    const std::size_t n = 25;
    auto a = random_dense(n, n, 0.08, rng, true);
    auto x = random_dense(n, 6, 0.2, rng);
    std::vector<std::string> ids = numbered("n", n);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::string edges;
    std::string attrs;
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (a[i][j]) pairs.emplace_back(i, j);
      }
    }
    std::shuffle(pairs.begin(), pairs.end(), rng);
    for (auto [i, j] : pairs) edges += ids[i] + "\t" + ids[j] + "\n";
    std::vector<std::pair<int, int>> apairs;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < 6; ++c) {
        if (x[i][c]) apairs.emplace_back(i, c);
      }
    }
    std::shuffle(apairs.begin(), apairs.end(), rng);
    for (auto [i, c] : apairs) attrs += ids[i] + "\t#h" + std::to_string(c) + "\n";
    write_file(dir / "e.tsv", edges);
    write_file(dir / "x.tsv", attrs.empty() ? "n0\t#h0\n" : attrs);

    const auto g = load_graph(dir / "e.tsv", dir / "x.tsv");
    save_tsv(g, dir / "e2.tsv", dir / "x2.tsv");
    const auto g2 = load_graph(dir / "e2.tsv", dir / "x2.tsv");
    CHECK(g == g2);

    save_snapshot(g, dir / "g.json");
    CHECK(load_snapshot(dir / "g.json") == g);
  }
}

TEST_CASE("graph construction rejects duplicate ids") {
  CHECK_THROWS_AS(BinaryAttributedGraph({"a", "a"}, {"#x"}, {}, {}), DataError);
}

TEST_CASE("NodeSubset enforces strictly increasing indices") {
  CHECK_THROWS_AS(NodeSubset({2, 1}), ConfigError);
  CHECK_THROWS_AS(NodeSubset({1, 1}), ConfigError);
  const auto s = NodeSubset::from_unsorted({5, 1, 5, 3});
  CHECK(std::vector<NodeIndex>(s.begin(), s.end()) == std::vector<NodeIndex>{1, 3, 5});
}

// ---------------------------------------------------------------------------

TEST_CASE("induced density examples") {
  const auto complete = make_graph(3, {{0, 1}, {1, 0}, {0, 2}, {2, 0}, {1, 2}, {2, 1}});
  CHECK(induced_density(complete, NodeSubset::all(3)) == 1.0);

  const auto empty = make_graph(3, {});
  CHECK(induced_density(empty, NodeSubset::all(3)) == 0.0);

  const auto path = make_graph(3, {{0, 1}, {1, 2}});
  CHECK(induced_density(path, NodeSubset::all(3)) == doctest::Approx(2.0 / 6.0).epsilon(1e-15));

  CHECK_THROWS_AS(induced_density(path, NodeSubset({1})), DegenerateInputError);
}

TEST_CASE("bipartite density examples") {
  const auto g = make_graph(3, {}, 2, {{0, 0}, {1, 1}, {2, 0}});
  CHECK(bipartite_density(g, NodeSubset::all(3), NodeSubset::all(2)) == 0.5);
  CHECK(bipartite_density(g, NodeSubset({0, 2}), NodeSubset({0})) == 1.0);
  CHECK(bipartite_density(g, NodeSubset({0, 2}), NodeSubset({1})) == 0.0);
  CHECK_THROWS_AS(bipartite_density(g, NodeSubset(), NodeSubset({1})), DegenerateInputError);
  CHECK_THROWS_AS(bipartite_density(g, NodeSubset({0}), NodeSubset()), DegenerateInputError);
}

TEST_CASE("densities match oracles and stay in [0,1]") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 49;
    const std::size_t d = 1 + rng() % 30;
    const auto a = random_dense(n, n, 0.3, rng, true);
    const auto x = random_dense(n, d, 0.3, rng);
    const auto g = graph_from_dense(a, x, d);

    std::vector<NodeIndex> s;
    for (NodeIndex i = 0; i < n; ++i) {
      if (rng() % 2) s.push_back(i);
    }
    if (s.size() < 2) s = {0, 1};
    std::vector<NodeIndex> cols;
    for (NodeIndex c = 0; c < d; ++c) {
      if (rng() % 2) cols.push_back(c);
    }
    if (cols.empty()) cols = {0};

    const double dens = induced_density(g, NodeSubset(s));
    CHECK(dens == doctest::Approx(oracle_induced_density(a, s)).epsilon(1e-12));
    CHECK(dens >= 0.0);
    CHECK(dens <= 1.0);
    const double bip = bipartite_density(g, NodeSubset(s), NodeSubset(cols));
    CHECK(bip == doctest::Approx(oracle_bipartite_density(x, s, cols)).epsilon(1e-12));

    // Adding an internal edge never lowers the density.
    auto a2 = a;
    a2[s[0]][s[1]] = 1;
    CHECK(induced_density(graph_from_dense(a2, x, d), NodeSubset(s)) >= dens);
  }
}

TEST_CASE("clustering coefficient examples") {
  const auto triangle = make_graph(3, {{0, 1}, {1, 2}, {2, 0}});
  CHECK(clustering_coefficients(triangle)[0] == 1.0);

  const auto star = make_graph(5, {{0, 1}, {0, 2}, {0, 3}, {4, 0}});
  CHECK(clustering_coefficients(star)[0] == 0.0);
  CHECK(clustering_coefficients(star)[1] == 0.0);  // degree 1

  const auto one_link = make_graph(4, {{0, 1}, {0, 2}, {3, 0}, {1, 2}});
  CHECK(clustering_coefficients(one_link)[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("clustering coefficients match the triple-loop oracle") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 50;
    const double p = 0.05 + 0.5 * static_cast<double>(rng() % 100) / 100.0;
    const auto a = random_dense(n, n, p, rng, true);
    const auto g = graph_from_dense(a, random_dense(n, 1, 0.0, rng), 1);
    const auto got = clustering_coefficients(g);
    const auto want = oracle_clustering(a);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < n; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("HITS examples") {
  const auto single = make_graph(2, {{0, 1}});
  auto s = hits_scores(single, 100, 1e-12);
  CHECK(s.authority[1] == doctest::Approx(1.0));
  CHECK(s.authority[0] == doctest::Approx(0.0));
  CHECK(s.hub[0] == doctest::Approx(1.0));
  CHECK(s.hub[1] == doctest::Approx(0.0));

  const auto k3 = make_graph(3, {{0, 1}, {1, 0}, {0, 2}, {2, 0}, {1, 2}, {2, 1}});
  s = hits_scores(k3, 100, 1e-12);
  for (double v : s.authority) CHECK(v == doctest::Approx(1.0 / std::sqrt(3.0)));

  const auto fan_in = make_graph(3, {{0, 2}, {1, 2}});
  s = hits_scores(fan_in, 100, 1e-12);
  CHECK(s.authority[2] == doctest::Approx(1.0));
  CHECK(s.hub[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(s.hub[1] == doctest::Approx(1.0 / std::sqrt(2.0)));

  CHECK_THROWS_AS(hits_scores(make_graph(3, {}), 10, 1e-6), DegenerateInputError);
  CHECK_THROWS_AS(hits_scores(fan_in, 0, 1e-6), ConfigError);
  CHECK_THROWS_AS(hits_scores(fan_in, 10, 0.0), ConfigError);
}

TEST_CASE("HITS authority is a fixed point and permutation equivariant") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 5 + rng() % 30;
    auto a = random_dense(n, n, 0.25, rng, true);
    a[0][1] = 1;
    const auto g = graph_from_dense(a, random_dense(n, 1, 0.0, rng), 1);
    const double tol = 1e-12;
    const auto s = hits_scores(g, 5000, tol);

    std::vector<double> next(n, 0.0);
    double norm = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t u = 0; u < n; ++u) next[v] += a[u][v] * s.hub[u];
      norm += next[v] * next[v];
    }
    norm = std::sqrt(norm);
    for (std::size_t v = 0; v < n; ++v) {
      CHECK(s.authority[v] >= 0.0);
      CHECK(std::abs(next[v] / norm - s.authority[v]) < 1e-8);
    }

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    DenseBinary b(n, std::vector<int>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) b[perm[i]][perm[j]] = a[i][j];
    }
    const auto sp = hits_scores(graph_from_dense(b, random_dense(n, 1, 0.0, rng), 1), 5000, tol);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(sp.authority[perm[i]] - s.authority[i]) < 1e-8);
    }
  }
}
