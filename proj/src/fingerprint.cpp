#include "subblock/fingerprint.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "subblock/errors.hpp"
#include "subblock/io.hpp"
#include "subblock/metrics.hpp"

namespace subblock {

using nlohmann::json;

std::vector<NodeIndex> popular_hashtags(const BinaryAttributedGraph& g, std::size_t m) {
  const auto d = g.num_attributes();
  if (m > d) {
    throw ConfigError("m = " + std::to_string(m) + " exceeds d = " + std::to_string(d));
  }
  std::vector<NodeIndex> cols(d);
  std::iota(cols.begin(), cols.end(), NodeIndex{0});
  std::stable_sort(cols.begin(), cols.end(), [&](NodeIndex a, NodeIndex b) {
    return g.users_of(a).size() > g.users_of(b).size();
  });
  cols.resize(m);
  return cols;
}

HashtagFingerprint hashtag_fingerprint(const BinaryAttributedGraph& g, const NodeSubset& cluster,
                                       std::size_t m, int cluster_id) {
  if (cluster.empty()) throw DegenerateInputError("hashtag fingerprint of an empty cluster");
  const auto popular = popular_hashtags(g, m);
  const auto inside = cluster.mask(g.num_nodes());

  HashtagFingerprint fp;
  fp.cluster_id = cluster_id;
  for (auto c : popular) {
    std::size_t users = 0;
    for (auto u : g.users_of(c)) users += inside[u] ? 1 : 0;
    fp.hashtag_names.push_back(g.attribute_names()[c]);
    fp.relative_frequency.push_back(static_cast<double>(users) /
                                    static_cast<double>(cluster.size()));
  }
  return fp;
}

ClusteringFingerprint clustering_fingerprint(const BinaryAttributedGraph& g,
                                             const NodeSubset& cluster, std::size_t bins,
                                             int cluster_id) {
  if (bins < 1) throw ConfigError("bins must be >= 1");
  if (cluster.size() < 2) {
    throw DegenerateInputError("clustering fingerprint needs at least 2 nodes");
  }
  ClusteringFingerprint fp;
  fp.cluster_id = cluster_id;
  fp.coefficients = clustering_coefficients(induced_subgraph(g, cluster));

  fp.bin_edges.resize(bins + 1);
  for (std::size_t j = 0; j <= bins; ++j) {
    fp.bin_edges[j] = static_cast<double>(j) / static_cast<double>(bins);
  }
  std::vector<std::size_t> counts(bins, 0);
  for (double c : fp.coefficients) {
    auto it = std::upper_bound(fp.bin_edges.begin(), fp.bin_edges.end(), c);
    auto bin = static_cast<std::size_t>(it - fp.bin_edges.begin());
    bin = bin == 0 ? 0 : std::min(bin - 1, bins - 1);
    ++counts[bin];
  }
  // count / (N * width) with width = 1 / bins
  const double total = static_cast<double>(fp.coefficients.size());
  fp.density.resize(bins);
  for (std::size_t j = 0; j < bins; ++j) {
    fp.density[j] = static_cast<double>(counts[j] * bins) / total;
  }
  return fp;
}

ClusterReport cluster_report(const BinaryAttributedGraph& g, const ClusterResult& result,
                             std::size_t m, std::size_t bins, json run_metadata) {
  ClusterReport report;
  report.run_metadata = std::move(run_metadata);
  m = std::min(m, g.num_attributes());
  for (int id : result.top_k) {
    const auto members = result.members(id);
    ClusterSummary s;
    s.id = id;
    s.size = members.size();
    s.density = result.induced_densities.at(static_cast<std::size_t>(id));
    s.hashtags = hashtag_fingerprint(g, members, m, id);
    if (members.size() >= 2) {
      s.clustering = clustering_fingerprint(g, members, bins, id);
    } else {
      s.clustering.cluster_id = id;
    }

    const auto sub = induced_subgraph(g, members);
    std::vector<double> authority(sub.num_nodes(), 0.0);
    if (sub.num_edges() > 0) authority = hits_scores(sub).authority;
    for (std::size_t p = 0; p < sub.num_nodes(); ++p) {
      s.authority.push_back({sub.node_ids()[p], authority[p]});
    }
    for (const auto& [u, v] : sub.edge_list()) {
      s.edges.emplace_back(sub.node_ids()[u], sub.node_ids()[v]);
    }
    report.clusters.push_back(std::move(s));
  }
  return report;
}

json to_json(const ClusterReport& report) {
  json clusters = json::array();
  for (const auto& s : report.clusters) {
    json authority = json::array();
    for (const auto& a : s.authority) authority.push_back({{"node_id", a.node_id}, {"score", a.score}});
    json edges = json::array();
    for (const auto& [u, v] : s.edges) edges.push_back({u, v});
    clusters.push_back({
        {"id", s.id},
        {"size", s.size},
        {"density", s.density},
        {"hashtag_fingerprint",
         {{"hashtag_names", s.hashtags.hashtag_names},
          {"relative_frequency", s.hashtags.relative_frequency}}},
        {"clustering_fingerprint",
         {{"bin_edges", s.clustering.bin_edges},
          {"density", s.clustering.density},
          {"coefficients", s.clustering.coefficients}}},
        {"authority", authority},
        {"edges", edges},
    });
  }
  return json{{"run_metadata", report.run_metadata}, {"clusters", clusters}};
}

ClusterReport report_from_json(const json& j) {
  try {
    ClusterReport report;
    report.run_metadata = j.at("run_metadata");
    for (const auto& c : j.at("clusters")) {
      ClusterSummary s;
      s.id = c.at("id").get<int>();
      s.size = c.at("size").get<std::size_t>();
      s.density = c.at("density").get<double>();
      const auto& h = c.at("hashtag_fingerprint");
      s.hashtags.cluster_id = s.id;
      s.hashtags.hashtag_names = h.at("hashtag_names").get<std::vector<std::string>>();
      s.hashtags.relative_frequency = h.at("relative_frequency").get<std::vector<double>>();
      const auto& cf = c.at("clustering_fingerprint");
      s.clustering.cluster_id = s.id;
      s.clustering.bin_edges = cf.at("bin_edges").get<std::vector<double>>();
      s.clustering.density = cf.at("density").get<std::vector<double>>();
      s.clustering.coefficients = cf.at("coefficients").get<std::vector<double>>();
      for (const auto& a : c.at("authority")) {
        s.authority.push_back({a.at("node_id").get<std::string>(), a.at("score").get<double>()});
      }
      for (const auto& e : c.at("edges")) {
        s.edges.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
      }
      report.clusters.push_back(std::move(s));
    }
    return report;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed cluster report: ") + e.what());
  }
}

std::vector<std::filesystem::path> write_report(const ClusterReport& report,
                                                const std::filesystem::path& dir) {
  using io::format_double;
  std::ostringstream hashtags, histogram, coefficients, authority, edges;
  hashtags << "cluster_id,hashtag,relative_frequency\n";
  histogram << "cluster_id,bin_lo,bin_hi,density\n";
  coefficients << "cluster_id,node_id,clustering_coefficient\n";
  authority << "cluster_id,node_id,authority\n";
  edges << "cluster_id,source,target\n";
  for (const auto& s : report.clusters) {
    for (std::size_t j = 0; j < s.hashtags.hashtag_names.size(); ++j) {
      hashtags << s.id << ',' << s.hashtags.hashtag_names[j] << ','
               << format_double(s.hashtags.relative_frequency[j]) << '\n';
    }
    for (std::size_t j = 0; j < s.clustering.density.size(); ++j) {
      histogram << s.id << ',' << format_double(s.clustering.bin_edges[j]) << ','
                << format_double(s.clustering.bin_edges[j + 1]) << ','
                << format_double(s.clustering.density[j]) << '\n';
    }
    for (std::size_t p = 0; p < s.clustering.coefficients.size(); ++p) {
      coefficients << s.id << ',' << s.authority[p].node_id << ','
                   << format_double(s.clustering.coefficients[p]) << '\n';
    }
    for (const auto& a : s.authority) {
      authority << s.id << ',' << a.node_id << ',' << format_double(a.score) << '\n';
    }
    for (const auto& [u, v] : s.edges) edges << s.id << ',' << u << ',' << v << '\n';
  }

  std::vector<std::filesystem::path> written{
      dir / "report.json", dir / "hashtag_fingerprints.csv", dir / "clustering_histogram.csv",
      dir / "clustering_coefficients.csv", dir / "authority.csv", dir / "cluster_edges.csv"};
  io::write_text(written[0], to_json(report).dump(2) + "\n");
  io::write_text(written[1], hashtags.str());
  io::write_text(written[2], histogram.str());
  io::write_text(written[3], coefficients.str());
  io::write_text(written[4], authority.str());
  io::write_text(written[5], edges.str());
  return written;
}

}  // namespace subblock
