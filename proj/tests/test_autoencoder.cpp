#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "gradcheck.hpp"
#include "subblock/autoencoder.hpp"
#include "subblock/errors.hpp"
#include "support.hpp"

using namespace subblock;
using namespace subblock::testing;

namespace {

Architecture toy_arch(std::size_t h_a = 8, std::size_t h_x = 6, std::size_t k = 4) {
  Architecture arch;
  arch.encoder_a = {h_a};
  arch.encoder_x = {h_x};
  arch.latent_dim = k;
  return arch;
}

bool same_params(const ModelParams& a, const ModelParams& b) {
  std::vector<const Layer*> la;
  std::vector<const Layer*> lb;
  a.for_each_layer([&](const Layer& l) { la.push_back(&l); });
  b.for_each_layer([&](const Layer& l) { lb.push_back(&l); });
  if (la.size() != lb.size()) return false;
  for (std::size_t i = 0; i < la.size(); ++i) {
    if (la[i]->weight != lb[i]->weight || la[i]->bias != lb[i]->bias) return false;
  }
  return true;
}

Matrix m(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) out(r, c++) = v;
    ++r;
  }
  return out;
}

// The fixed 2-node model shared with the scalar oracle below.
ModelParams toy_two_node() {
  auto p = init_params(2, 2, toy_arch(1, 1, 1), 0);
  p.encoder_a[0].weight = m({{0.3}, {-0.2}});
  p.encoder_a[0].bias << 0.1;
  p.encoder_x[0].weight = m({{0.5}, {0.4}});
  p.encoder_x[0].bias << -0.1;
  p.encoder_joint[0].weight = m({{0.7}, {-0.6}});
  p.encoder_joint[0].bias << 0.05;
  p.decoder_a[0].weight = m({{0.9, -0.8}});
  p.decoder_a[0].bias << 0.1, -0.2;
  p.decoder_x[0].weight = m({{-0.5, 0.6}});
  p.decoder_x[0].bias << 0.0, 0.3;
  return p;
}

LossWeights toy_weights() {
  LossWeights w;
  w.w_a = 1.5;
  w.w_x = 0.5;
  w.w_recon = 1.0;
  w.w_sim = 2.0;
  w.lambda = 0.7;
  w.l2 = 0.01;
  w.attention_beta = 3.0;
  return w;
}

// Plain scalar arithmetic for the 2-node toy; no Eigen, no library calls.
double scalar_toy_total() {
  const double A[2][2] = {{0, 1}, {1, 0}};
  const double X[2][2] = {{1, 0}, {1, 1}};
  const double wa[2] = {0.3, -0.2}, wx[2] = {0.5, 0.4}, wj[2] = {0.7, -0.6};
  const double wda[2] = {0.9, -0.8}, bda[2] = {0.1, -0.2};
  const double wdx[2] = {-0.5, 0.6}, bdx[2] = {0.0, 0.3};
  const auto w = toy_weights();
  auto relu = [](double v) { return v > 0 ? v : 0.0; };
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  double h[2];
  double ra = 0, rx = 0;
  for (int i = 0; i < 2; ++i) {
    const double ea = relu(A[i][0] * wa[0] + A[i][1] * wa[1] + 0.1);
    const double ex = relu(X[i][0] * wx[0] + X[i][1] * wx[1] - 0.1);
    h[i] = ea * wj[0] + ex * wj[1] + 0.05;
    for (int c = 0; c < 2; ++c) {
      const double att_a = A[i][c] == 1 ? w.attention_beta : 1.0;
      const double att_x = X[i][c] == 1 ? w.attention_beta : 1.0;
      ra += std::pow((sig(h[i] * wda[c] + bda[c]) - A[i][c]) * att_a, 2);
      rx += std::pow((sig(h[i] * wdx[c] + bdx[c]) - X[i][c]) * att_x, 2);
    }
  }
  // Jaccard distances: A rows disjoint -> 1; X rows {0} vs {0,1} -> 1/2.
  const double jac_a[2][2] = {{0, 1}, {1, 0}};
  const double jac_x[2][2] = {{0, 0.5}, {0.5, 0}};
  double sa = 0, sx = 0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double e = std::exp(-w.lambda * std::abs(h[i] - h[j]));
      sa += std::pow(e - jac_a[i][j], 2);
      sx += std::pow(e - jac_x[i][j], 2);
    }
  }
  double reg = 0;
  for (double v : {0.3, -0.2, 0.5, 0.4, 0.7, -0.6, 0.9, -0.8, -0.5, 0.6}) reg += v * v;
  return w.w_recon * (w.w_a * ra + w.w_x * rx) + w.w_sim * (w.w_a * sa + w.w_x * sx) +
         w.l2 * reg;
}

}  // namespace

TEST_CASE("init_params is deterministic with zero biases") {
  const auto a = init_params(30, 12, toy_arch(), 42);
  const auto b = init_params(30, 12, toy_arch(), 42);
  const auto c = init_params(30, 12, toy_arch(), 43);
  CHECK(same_params(a, b));
  CHECK_FALSE(same_params(a, c));
  a.for_each_layer([](const Layer& l) { CHECK(l.bias.isZero(0.0)); });
}

TEST_CASE("init_params chains dimensions") {
  const auto p = init_params(30, 12, toy_arch(8, 6, 4), 1);
  CHECK(p.encoder_a[0].weight.rows() == 30);
  CHECK(p.encoder_a[0].weight.cols() == 8);
  CHECK(p.encoder_x[0].weight.rows() == 12);
  CHECK(p.encoder_joint[0].weight.rows() == 14);
  CHECK(p.encoder_joint[0].weight.cols() == 4);
  CHECK(p.decoder_a[0].weight.cols() == 30);
  CHECK(p.decoder_x[0].weight.cols() == 12);
  Architecture bad = toy_arch();
  bad.encoder_a = {0};
  CHECK_THROWS_AS(init_params(30, 12, bad, 1), ConfigError);
  CHECK_THROWS_AS(init_params(0, 12, toy_arch(), 1), ConfigError);
}

TEST_CASE("init weight variance is about 1/fan_in") {
  Architecture arch;
  arch.encoder_a = {1000};
  arch.encoder_x = {1};
  arch.latent_dim = 1;
  const auto p = init_params(1000, 1, arch, 9);
  const auto& w = p.encoder_a[0].weight;
  const double mean = w.mean();
  const double var = (w.array() - mean).square().mean();
  CHECK(var == doctest::Approx(1.0 / 1000.0).epsilon(0.2));
  CHECK(std::abs(mean) < 1e-3);
}

TEST_CASE("forward shapes, row determinism and logistic range") {
  std::mt19937_64 rng(1);
  const auto p = init_params(20, 10, toy_arch(), 3);
  Matrix a = random_binary(5, 20, 0.3, rng);
  Matrix x = random_binary(5, 10, 0.3, rng);
  a.row(4) = a.row(1);
  x.row(4) = x.row(1);
  const auto f = forward(p, a, x);
  CHECK(f.h.rows() == 5);
  CHECK(f.h.cols() == 4);
  CHECK(f.a_hat.rows() == 5);
  CHECK(f.a_hat.cols() == 20);
  CHECK(f.x_hat.cols() == 10);
  CHECK(f.h.row(4) == f.h.row(1));
  CHECK(f.a_hat.row(4) == f.a_hat.row(1));
  CHECK(f.a_hat.minCoeff() > 0.0);
  CHECK(f.a_hat.maxCoeff() < 1.0);
  CHECK(f.x_hat.minCoeff() > 0.0);
  CHECK(f.x_hat.maxCoeff() < 1.0);
  CHECK_THROWS_AS(forward(p, random_binary(5, 19, 0.3, rng), x), ConfigError);
  CHECK_THROWS_AS(forward(p, a, random_binary(4, 10, 0.3, rng)), ConfigError);
}

TEST_CASE("loss is zero with every term switched off") {
  std::mt19937_64 rng(2);
  const auto p = init_params(20, 10, toy_arch(), 3);
  LossWeights w;
  w.w_recon = 0.0;
  w.w_sim = 0.0;
  w.l2 = 0.0;
  const auto v = loss_joint(p, random_binary(6, 20, 0.3, rng), random_binary(6, 10, 0.3, rng), w);
  CHECK(v.total == 0.0);
}

TEST_CASE("attention_beta = 1 gives the plain squared Frobenius error") {
  std::mt19937_64 rng(4);
  const auto p = init_params(20, 10, toy_arch(), 3);
  const Matrix a = random_binary(6, 20, 0.3, rng);
  const Matrix x = random_binary(6, 10, 0.3, rng);
  LossWeights w;
  w.attention_beta = 1.0;
  const auto v = loss_joint(p, a, x, w);
  const auto f = forward(p, a, x);
  CHECK(v.parts.recon_a == doctest::Approx((f.a_hat - a).squaredNorm()).epsilon(1e-14));
  CHECK(v.parts.recon_x == doctest::Approx((f.x_hat - x).squaredNorm()).epsilon(1e-14));
}

TEST_CASE("2-node toy batch matches the scalar oracle") {
  const auto p = toy_two_node();
  const Matrix a = m({{0, 1}, {1, 0}});
  const Matrix x = m({{1, 0}, {1, 1}});
  const auto v = loss_joint(p, a, x, toy_weights());
  // Frozen from an independent Python evaluation of the same toy.
  constexpr double kFrozenTotal = 19.327078071468925;
  CHECK(std::abs(v.total - scalar_toy_total()) < 1e-10);
  CHECK(std::abs(v.total - kFrozenTotal) < 1e-10);
  CHECK(std::abs(v.parts.recon_a - 5.151688139308277) < 1e-10);
  CHECK(std::abs(v.parts.sim_x - 2.446301538178299) < 1e-10);
  CHECK(v.parts.reg == doctest::Approx(3.45).epsilon(1e-14));
}

TEST_CASE("loss parts are non-negative and sum to the total") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = init_params(20, 10, toy_arch(), trial);
    const auto w = toy_weights();
    const auto v = loss_joint(p, random_binary(6, 20, 0.3, rng), random_binary(6, 10, 0.3, rng), w);
    const auto& q = v.parts;
    for (double part : {q.recon_a, q.recon_x, q.sim_a, q.sim_x, q.reg}) CHECK(part >= 0.0);
    const double expect = w.w_recon * (w.w_a * q.recon_a + w.w_x * q.recon_x) +
                          w.w_sim * (w.w_a * q.sim_a + w.w_x * q.sim_x) + w.l2 * q.reg;
    CHECK(v.total == expect);
  }
}

TEST_CASE("permuting batch rows leaves the loss unchanged") {
  std::mt19937_64 rng(8);
  const auto p = init_params(20, 10, toy_arch(), 5);
  const Matrix a = random_binary(6, 20, 0.3, rng);
  const Matrix x = random_binary(6, 10, 0.3, rng);
  std::vector<int> perm(6);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix ap(6, 20);
  Matrix xp(6, 10);
  for (int i = 0; i < 6; ++i) {
    ap.row(i) = a.row(perm[i]);
    xp.row(i) = x.row(perm[i]);
  }
  const auto w = toy_weights();
  const auto v1 = loss_joint(p, a, x, w);
  const auto v2 = loss_joint(p, ap, xp, w);
  CHECK(v1.total == doctest::Approx(v2.total).epsilon(1e-13));
  CHECK(v1.parts.sim_a == doctest::Approx(v2.parts.sim_a).epsilon(1e-13));
}

TEST_CASE("loss rejects single-row batches and bad weights") {
  std::mt19937_64 rng(1);
  const auto p = init_params(20, 10, toy_arch(), 5);
  CHECK_THROWS_AS(
      loss_joint(p, random_binary(1, 20, 0.3, rng), random_binary(1, 10, 0.3, rng), LossWeights{}),
      ConfigError);
  LossWeights w;
  w.attention_beta = 0.5;
  CHECK_THROWS_AS(w.validate(), ConfigError);
  w = LossWeights{};
  w.w_sim = -1.0;
  CHECK_THROWS_AS(w.validate(), ConfigError);
}

TEST_CASE("analytic gradient matches central finite differences") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto rep = toy_gradient_check(seed);
    INFO("seed " << seed << " worst " << rep.worst);
    CHECK(rep.entries > 300);
    CHECK(rep.max_rel_error < 1e-4);
  }
}

TEST_CASE("gradient with deeper stacks") {
  std::mt19937_64 rng(12);
  Architecture arch;
  arch.encoder_a = {7, 5};
  arch.encoder_x = {4};
  arch.encoder_joint = {6};
  arch.decoder_a = {5};
  arch.decoder_x = {3};
  arch.latent_dim = 3;
  const auto p = init_params(12, 8, arch, 12);
  const auto rep = finite_difference_check(p, random_binary(5, 12, 0.4, rng),
                                           random_binary(5, 8, 0.4, rng), toy_weights());
  INFO("worst " << rep.worst);
  CHECK(rep.max_rel_error < 1e-4);
}

TEST_CASE("zero loss weights leave only the L2 gradient 2*l2*W") {
  std::mt19937_64 rng(10);
  const auto p = init_params(20, 10, toy_arch(), 5);
  LossWeights w;
  w.w_recon = 0.0;
  w.w_sim = 0.0;
  w.l2 = 0.03;
  const auto g = gradients(p, random_binary(6, 20, 0.3, rng), random_binary(6, 10, 0.3, rng), w);
  std::vector<const Layer*> src;
  p.for_each_layer([&](const Layer& l) { src.push_back(&l); });
  std::size_t i = 0;
  g.gradient.for_each_layer([&](const Layer& l) {
    CHECK(l.bias.isZero(0.0));
    CHECK((l.weight - 2.0 * 0.03 * src[i]->weight).cwiseAbs().maxCoeff() < 1e-15);
    ++i;
  });
}

TEST_CASE("reconstruction error falls as decoder logits move toward targets") {
  // One memorisable pair of rows, similarity loss off, attention off.
  std::mt19937_64 rng(13);
  auto p = init_params(6, 4, toy_arch(4, 4, 2), 2);
  const Matrix a = random_binary(2, 6, 0.5, rng);
  const Matrix x = random_binary(2, 4, 0.5, rng);
  LossWeights w;
  w.w_sim = 0.0;
  w.l2 = 0.0;
  w.attention_beta = 1.0;
  double previous = loss_joint(p, a, x, w).parts.recon_a;
  for (double logit : {1.0, 2.0, 4.0, 8.0}) {
    p.decoder_a[0].weight.setZero();
    for (Eigen::Index c = 0; c < 6; ++c) p.decoder_a[0].bias[c] = a(0, c) == 1.0 ? logit : -logit;
    Matrix same = a;
    same.row(1) = a.row(0);
    const double now = loss_joint(p, same, x, w).parts.recon_a;
    CHECK(now < previous);
    CHECK(now > 0.0);
    previous = now;
  }
}

// ---------------------------------------------------------------------------

TEST_CASE("sample_batch returns the anchor plus distinct nodes") {
  std::mt19937_64 grng(1);
  const auto g = graph_from_dense(random_dense(40, 40, 0.1, grng, true),
                                  random_dense(40, 5, 0.2, grng), 5);
  for (auto kind : {SamplerKind::uniform, SamplerKind::similarity_weighted}) {
    TrainConfig cfg;
    cfg.batch_size = 12;
    cfg.sampler = kind;
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
      NodeIndex anchor = 0;
      const auto s = sample_batch(g, cfg, rng, anchor);
      CHECK(s.size() == 12);
      CHECK(s.contains(anchor));
    }
    cfg.batch_size = 41;
    CHECK_THROWS_AS(sample_batch(g, cfg, rng), ConfigError);
  }
}

TEST_CASE("uniform sampler frequencies are within 3 sigma of uniform") {
  const std::size_t n = 20;
  const auto g = make_graph(n, {{0, 1}});
  TrainConfig cfg;
  cfg.batch_size = 5;
  cfg.sampler = SamplerKind::uniform;
  Rng rng(17);
  // Condition on anchor == 0: every other node is included with
  // probability 4/19.
  std::vector<int> hits(n, 0);
  int draws = 0;
  for (int i = 0; i < 100000 && draws < 8000; ++i) {
    NodeIndex anchor = 0;
    const auto s = sample_batch(g, cfg, rng, anchor);
    if (anchor != 0) continue;
    ++draws;
    for (auto v : s) hits[v]++;
  }
  REQUIRE(draws > 3000);
  const double p = 4.0 / 19.0;
  const double mean = draws * p;
  const double sigma = std::sqrt(draws * p * (1 - p));
  double chi2 = 0.0;
  for (std::size_t v = 1; v < n; ++v) {
    CHECK(std::abs(hits[v] - mean) < 3.0 * sigma + 1.0);
    chi2 += (hits[v] - mean) * (hits[v] - mean) / mean;
  }
  // 18 degrees of freedom (19 cells, fixed total), 99.9% quantile ~ 42.3.
  CHECK(chi2 < 42.3);
}

TEST_CASE("similarity sampler prefers nodes sharing followees with the anchor") {
  // Node 0 is the anchor; node 1 follows exactly what 0 follows, node 2
  // follows something else.
  std::vector<std::pair<NodeIndex, NodeIndex>> edges;
  for (NodeIndex t = 10; t < 15; ++t) {
    edges.emplace_back(0, t);
    edges.emplace_back(1, t);
  }
  edges.emplace_back(2, 20);
  const auto g = make_graph(30, edges);
  TrainConfig cfg;
  cfg.batch_size = 3;
  cfg.sampler = SamplerKind::similarity_weighted;
  Rng rng(99);
  int u = 0;
  int v = 0;
  int draws = 0;
  while (draws < 10000) {
    NodeIndex anchor = 0;
    const auto s = sample_batch(g, cfg, rng, anchor);
    if (anchor != 0) continue;
    ++draws;
    u += s.contains(1);
    v += s.contains(2);
  }
  CHECK(u > v);
  CHECK(u > 9000);
}

// ---------------------------------------------------------------------------

namespace {

BinaryAttributedGraph two_cliques() {
  std::vector<std::pair<NodeIndex, NodeIndex>> edges;
  std::vector<std::pair<NodeIndex, NodeIndex>> attrs;
  for (NodeIndex base : {0u, 10u}) {
    for (NodeIndex i = 0; i < 10; ++i) {
      for (NodeIndex j = 0; j < 10; ++j) {
        if (i != j) edges.emplace_back(base + i, base + j);
      }
      for (NodeIndex c = 0; c < 4; ++c) attrs.emplace_back(base + i, (base / 10) * 4 + c);
    }
  }
  return make_graph(20, edges, 8, attrs);
}

}  // namespace

TEST_CASE("training is deterministic for a fixed seed") {
  const auto g = two_cliques();
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.batch_size = 6;
  cfg.latent_dim = 4;
  cfg.hidden_a = 8;
  cfg.hidden_x = 8;
  const auto r1 = train(g, LossWeights{}, cfg);
  const auto r2 = train(g, LossWeights{}, cfg);
  CHECK(r1.latent.h == r2.latent.h);
  CHECK(r1.loss_history == r2.loss_history);
  CHECK(r1.loss_history.size() == 30);
  CHECK(r1.latent.h.rows() == 20);
  CHECK(r1.latent.h.cols() == 4);
}

TEST_CASE("two disjoint cliques separate in latent space") {
  const auto g = two_cliques();
  TrainConfig cfg;
  cfg.epochs = 400;
  cfg.batch_size = 8;
  cfg.latent_dim = 4;
  cfg.hidden_a = 16;
  cfg.hidden_x = 8;
  cfg.learning_rate = 0.01;
  const auto r = train(g, LossWeights{}, cfg);
  double intra = 0.0;
  double inter = 0.0;
  int n_intra = 0;
  int n_inter = 0;
  for (int i = 0; i < 20; ++i) {
    for (int j = i + 1; j < 20; ++j) {
      const double dist = (r.latent.h.row(i) - r.latent.h.row(j)).norm();
      if ((i < 10) == (j < 10)) {
        intra += dist;
        ++n_intra;
      } else {
        inter += dist;
        ++n_inter;
      }
    }
  }
  CHECK(intra / n_intra < inter / n_inter);
  const auto& hist = r.loss_history;
  const double head = std::accumulate(hist.begin(), hist.begin() + 100, 0.0) / 100.0;
  const double tail = std::accumulate(hist.end() - 100, hist.end(), 0.0) / 100.0;
  CHECK(tail < head);
}

TEST_CASE("divergent training reports the iteration") {
  const auto g = two_cliques();
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.batch_size = 6;
  cfg.learning_rate = 1e6;
  CHECK_THROWS_AS(train(g, LossWeights{}, cfg), TrainingDivergedError);
}

TEST_CASE("train validates its configuration") {
  const auto g = two_cliques();
  TrainConfig cfg;
  cfg.batch_size = 1;
  CHECK_THROWS_AS(train(g, LossWeights{}, cfg), ConfigError);
  cfg = TrainConfig{};
  cfg.batch_size = 21;
  CHECK_THROWS_AS(train(g, LossWeights{}, cfg), ConfigError);
  cfg = TrainConfig{};
  cfg.batch_size = 4;
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(train(g, LossWeights{}, cfg), ConfigError);
}

TEST_CASE("checkpoint and latent CSV round trip") {
  TempDir dir;
  const auto g = two_cliques();
  Architecture arch = toy_arch(5, 3, 2);
  arch.decoder_a = {4};
  const auto p = init_params(20, 8, arch, 77);
  save_checkpoint(p, 77, 12, dir / "ckpt.json");
  const auto q = load_checkpoint(dir / "ckpt.json");
  CHECK(q.arch == p.arch);
  CHECK(same_params(p, q));

  const auto latent = encode_all(g, p);
  write_latent_csv(g.node_ids(), latent, dir / "h.csv");
  const auto back = read_latent_csv(g.node_ids(), dir / "h.csv");
  CHECK(back.h == latent.h);
  auto ids = g.node_ids();
  ids.push_back("extra");
  CHECK_THROWS_AS(read_latent_csv(ids, dir / "h.csv"), DataError);
}
