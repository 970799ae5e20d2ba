#include "subblock/autoencoder.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "subblock/errors.hpp"
#include "subblock/io.hpp"

namespace subblock {

namespace {

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

constexpr double kSamplerEpsilon = 0.01;

// Logistic outputs are kept strictly inside (0, 1).
constexpr double kLogisticLo = std::numeric_limits<double>::min();
constexpr double kLogisticHi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;

void activate(Matrix& z, Activation act) {
  switch (act) {
    case Activation::relu:
      z = z.cwiseMax(0.0);
      break;
    case Activation::identity:
      break;
    case Activation::logistic:
      z = z.unaryExpr([](double v) {
        return std::clamp(1.0 / (1.0 + std::exp(-v)), kLogisticLo, kLogisticHi);
      });
      break;
  }
}

// d(out)/d(z) expressed through the layer output.
Matrix activation_slope(const Matrix& out, Activation act) {
  switch (act) {
    case Activation::relu:
      return (out.array() > 0.0).cast<double>().matrix();
    case Activation::identity:
      return Matrix::Ones(out.rows(), out.cols());
    case Activation::logistic:
      return (out.array() * (1.0 - out.array())).matrix();
  }
  return {};
}

// outputs[l] is the activated output of layer l.
struct StackTrace {
  std::vector<Matrix> outputs;
  const Matrix& last() const { return outputs.back(); }
};

template <typename Input>
StackTrace run_stack(const LayerStack& stack, const Input& input) {
  StackTrace t;
  t.outputs.reserve(stack.size());
  for (std::size_t l = 0; l < stack.size(); ++l) {
    const auto& layer = stack[l];
    Matrix z = (l == 0) ? Matrix(input * layer.weight) : Matrix(t.outputs.back() * layer.weight);
    z.rowwise() += layer.bias.transpose();
    activate(z, layer.activation);
    t.outputs.push_back(std::move(z));
  }
  return t;
}

// Fills `grad` for every layer of `stack`; returns d(loss)/d(input) when
// requested, otherwise an empty matrix.
template <typename Input>
Matrix backprop_stack(const LayerStack& stack, const Input& input, const StackTrace& trace,
                      Matrix d_out, LayerStack& grad, bool want_input_grad) {
  for (std::size_t l = stack.size(); l-- > 0;) {
    const auto& layer = stack[l];
    Matrix dz = d_out.cwiseProduct(activation_slope(trace.outputs[l], layer.activation));
    if (l == 0) {
      grad[l].weight = Matrix(input.transpose() * dz);
    } else {
      grad[l].weight = trace.outputs[l - 1].transpose() * dz;
    }
    grad[l].bias = dz.colwise().sum().transpose();
    if (l > 0 || want_input_grad) d_out = dz * layer.weight.transpose();
  }
  return want_input_grad ? d_out : Matrix();
}

struct Forward {
  StackTrace enc_a;
  StackTrace enc_x;
  Matrix joint;
  StackTrace enc_j;
  StackTrace dec_a;
  StackTrace dec_x;

  const Matrix& h() const { return enc_j.last(); }
};

void check_batch(const ModelParams& p, Eigen::Index a_rows, Eigen::Index a_cols,
                 Eigen::Index x_rows, Eigen::Index x_cols) {
  if (a_cols != static_cast<Eigen::Index>(p.n) || x_cols != static_cast<Eigen::Index>(p.d)) {
    throw ConfigError("batch width does not match model dimensions (n=" + std::to_string(p.n) +
                      ", d=" + std::to_string(p.d) + ")");
  }
  if (a_rows != x_rows) throw ConfigError("A and X batches have different row counts");
}

Matrix encode_joint(const ModelParams& p, const SparseRows& a, const SparseRows& x,
                    StackTrace* enc_a_out, StackTrace* enc_x_out, Matrix* joint_out,
                    StackTrace* enc_j_out) {
  auto ea = run_stack(p.encoder_a, a);
  auto ex = run_stack(p.encoder_x, x);
  Matrix joint(a.rows(), ea.last().cols() + ex.last().cols());
  joint << ea.last(), ex.last();
  auto ej = run_stack(p.encoder_joint, joint);
  Matrix h = ej.last();
  if (enc_a_out) *enc_a_out = std::move(ea);
  if (enc_x_out) *enc_x_out = std::move(ex);
  if (joint_out) *joint_out = std::move(joint);
  if (enc_j_out) *enc_j_out = std::move(ej);
  return h;
}

Forward forward_internal(const ModelParams& p, const SparseRows& a, const SparseRows& x) {
  Forward f;
  encode_joint(p, a, x, &f.enc_a, &f.enc_x, &f.joint, &f.enc_j);
  f.dec_a = run_stack(p.decoder_a, f.h());
  f.dec_x = run_stack(p.decoder_x, f.h());
  return f;
}

Matrix pairwise_distances(const Matrix& h) {
  const auto b = h.rows();
  Matrix dist = Matrix::Zero(b, b);
  for (Eigen::Index i = 0; i < b; ++i) {
    for (Eigen::Index j = i + 1; j < b; ++j) {
      const double v = (h.row(i) - h.row(j)).norm();
      dist(i, j) = v;
      dist(j, i) = v;
    }
  }
  return dist;
}

Matrix attention(const Matrix& target, double beta) {
  return (target.array() == 1.0).select(Matrix::Constant(target.rows(), target.cols(), beta),
                                        Matrix::Ones(target.rows(), target.cols()));
}

LayerStack make_stack(std::size_t fan_in, const std::vector<std::size_t>& widths,
                      Activation hidden, Activation last) {
  LayerStack stack;
  for (std::size_t l = 0; l < widths.size(); ++l) {
    if (widths[l] == 0 || fan_in == 0) throw ConfigError("layer widths must be positive");
    Layer layer;
    layer.weight = Matrix::Zero(static_cast<Eigen::Index>(fan_in),
                                static_cast<Eigen::Index>(widths[l]));
    layer.bias = Vector::Zero(static_cast<Eigen::Index>(widths[l]));
    layer.activation = (l + 1 == widths.size()) ? last : hidden;
    stack.push_back(std::move(layer));
    fan_in = widths[l];
  }
  return stack;
}

std::vector<std::size_t> with_output(std::vector<std::size_t> hidden, std::size_t out) {
  hidden.push_back(out);
  return hidden;
}

ModelParams layout(std::size_t n, std::size_t d, const Architecture& arch) {
  if (n == 0 || d == 0) throw ConfigError("model needs n >= 1 and d >= 1");
  if (arch.encoder_a.empty() || arch.encoder_x.empty()) {
    throw ConfigError("A and X encoders need at least one layer");
  }
  if (arch.latent_dim == 0) throw ConfigError("latent_dim must be >= 1");
  ModelParams p;
  p.n = n;
  p.d = d;
  p.arch = arch;
  p.encoder_a = make_stack(n, arch.encoder_a, Activation::relu, Activation::relu);
  p.encoder_x = make_stack(d, arch.encoder_x, Activation::relu, Activation::relu);
  p.encoder_joint = make_stack(arch.encoder_a.back() + arch.encoder_x.back(),
                               with_output(arch.encoder_joint, arch.latent_dim),
                               Activation::relu, Activation::identity);
  p.decoder_a = make_stack(arch.latent_dim, with_output(arch.decoder_a, n), Activation::relu,
                           Activation::logistic);
  p.decoder_x = make_stack(arch.latent_dim, with_output(arch.decoder_x, d), Activation::relu,
                           Activation::logistic);
  return p;
}

SparseRows sparse_rows(const BinaryCsr& m, std::span<const NodeIndex> nodes) {
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t r = 0; r < nodes.size(); ++r) {
    for (auto c : m.row(nodes[r])) {
      trips.emplace_back(static_cast<int>(r), static_cast<int>(c), 1.0);
    }
  }
  SparseRows s(static_cast<Eigen::Index>(nodes.size()), static_cast<Eigen::Index>(m.cols));
  s.setFromTriplets(trips.begin(), trips.end());
  return s;
}

Matrix dense_rows(const BinaryCsr& m, std::span<const NodeIndex> nodes) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(nodes.size()),
                            static_cast<Eigen::Index>(m.cols));
  for (std::size_t r = 0; r < nodes.size(); ++r) {
    if (nodes[r] >= m.rows) throw ConfigError("node index out of range");
    for (auto c : m.row(nodes[r])) out(static_cast<Eigen::Index>(r), c) = 1.0;
  }
  return out;
}

LossAndGradient evaluate(const ModelParams& params, const Matrix& a, const Matrix& x,
                         const SparseRows& a_in, const SparseRows& x_in, const Matrix& jac_a,
                         const Matrix& jac_x, const LossWeights& w, bool want_gradient) {
  w.validate();
  if (a.rows() < 2) throw ConfigError("batch needs at least 2 rows for pairwise losses");
  check_batch(params, a.rows(), a.cols(), x.rows(), x.cols());
  if (jac_a.rows() != a.rows() || jac_a.cols() != a.rows() || jac_x.rows() != a.rows() ||
      jac_x.cols() != a.rows()) {
    throw ConfigError("Jaccard target shape does not match the batch");
  }

  const Forward f = forward_internal(params, a_in, x_in);
  const Matrix& h = f.h();
  const Matrix& a_hat = f.dec_a.last();
  const Matrix& x_hat = f.dec_x.last();

  const Matrix att_a = attention(a, w.attention_beta);
  const Matrix att_x = attention(x, w.attention_beta);
  const Matrix res_a = (a_hat - a).cwiseProduct(att_a);
  const Matrix res_x = (x_hat - x).cwiseProduct(att_x);

  const Matrix dist = pairwise_distances(h);
  const Matrix sim = (-w.lambda * dist.array()).exp().matrix();
  const Matrix gap_a = sim - jac_a;
  const Matrix gap_x = sim - jac_x;

  LossAndGradient out;
  auto& parts = out.loss.parts;
  parts.recon_a = res_a.squaredNorm();
  parts.recon_x = res_x.squaredNorm();
  parts.sim_a = gap_a.squaredNorm();
  parts.sim_x = gap_x.squaredNorm();
  params.for_each_layer([&](const Layer& l) { parts.reg += l.weight.squaredNorm(); });
  out.loss.total = w.w_recon * (w.w_a * parts.recon_a + w.w_x * parts.recon_x) +
                   w.w_sim * (w.w_a * parts.sim_a + w.w_x * parts.sim_x) + w.l2 * parts.reg;
  if (!std::isfinite(out.loss.total)) throw NumericError("joint loss is not finite");
  if (!want_gradient) return out;

  ModelParams& g = out.gradient;
  g = zeros_like(params);

  // Reconstruction: d/d(hat) of w * ||(hat - t) .* att||^2.
  const Matrix d_a_hat = (2.0 * w.w_recon * w.w_a) * res_a.cwiseProduct(att_a);
  const Matrix d_x_hat = (2.0 * w.w_recon * w.w_x) * res_x.cwiseProduct(att_x);
  Matrix d_h = backprop_stack(params.decoder_a, h, f.dec_a, d_a_hat, g.decoder_a, true);
  d_h += backprop_stack(params.decoder_x, h, f.dec_x, d_x_hat, g.decoder_x, true);

  // Similarity: loss depends on H through D_ij = ||h_i - h_j|| for every
  // ordered pair; coincident rows contribute a zero subgradient.
  const Matrix d_dist = (2.0 * w.w_sim) *
                        (w.w_a * gap_a + w.w_x * gap_x).cwiseProduct(-w.lambda * sim);
  const auto b = h.rows();
  Matrix coupling = Matrix::Zero(b, b);
  for (Eigen::Index i = 0; i < b; ++i) {
    for (Eigen::Index j = 0; j < b; ++j) {
      if (i != j && dist(i, j) > 0.0) coupling(i, j) = (d_dist(i, j) + d_dist(j, i)) / dist(i, j);
    }
  }
  d_h += coupling.rowwise().sum().asDiagonal() * h - coupling * h;

  const Matrix d_joint =
      backprop_stack(params.encoder_joint, f.joint, f.enc_j, d_h, g.encoder_joint, true);
  const auto h_a = f.enc_a.last().cols();
  const auto h_x = f.enc_x.last().cols();
  backprop_stack(params.encoder_a, a_in, f.enc_a, d_joint.leftCols(h_a), g.encoder_a, false);
  backprop_stack(params.encoder_x, x_in, f.enc_x, d_joint.rightCols(h_x), g.encoder_x, false);

  // L2 term on weights only.
  auto src = std::vector<const Layer*>{};
  params.for_each_layer([&](const Layer& l) { src.push_back(&l); });
  std::size_t idx = 0;
  g.for_each_layer([&](Layer& l) { l.weight += (2.0 * w.l2) * src[idx++]->weight; });
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

void LossWeights::validate() const {
  for (double v : {w_a, w_x, w_recon, w_sim, lambda, l2}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConfigError("loss weights must be finite and non-negative");
    }
  }
  if (!(attention_beta >= 1.0) || !std::isfinite(attention_beta)) {
    throw ConfigError("attention_beta must be >= 1");
  }
}

void ModelParams::for_each_layer(const std::function<void(Layer&)>& fn) {
  for (auto* stack : {&encoder_a, &encoder_x, &encoder_joint, &decoder_a, &decoder_x}) {
    for (auto& l : *stack) fn(l);
  }
}

void ModelParams::for_each_layer(const std::function<void(const Layer&)>& fn) const {
  for (const auto* stack : {&encoder_a, &encoder_x, &encoder_joint, &decoder_a, &decoder_x}) {
    for (const auto& l : *stack) fn(l);
  }
}

std::size_t ModelParams::parameter_count() const {
  std::size_t count = 0;
  for_each_layer([&](const Layer& l) {
    count += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  });
  return count;
}

ModelParams init_params(std::size_t n, std::size_t d, const Architecture& arch,
                        std::uint64_t seed) {
  ModelParams p = layout(n, d, arch);
  Rng rng(seed);
  p.for_each_layer([&](Layer& l) {
    std::normal_distribution<double> dist(0.0, std::sqrt(1.0 / static_cast<double>(l.weight.rows())));
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = dist(rng);
  });
  return p;
}

ModelParams zeros_like(const ModelParams& like) {
  ModelParams z = like;
  z.for_each_layer([](Layer& l) {
    l.weight.setZero();
    l.bias.setZero();
  });
  return z;
}

ForwardResult forward(const ModelParams& params, const Matrix& a_batch, const Matrix& x_batch) {
  check_batch(params, a_batch.rows(), a_batch.cols(), x_batch.rows(), x_batch.cols());
  const SparseRows a_in = a_batch.sparseView();
  const SparseRows x_in = x_batch.sparseView();
  Forward f = forward_internal(params, a_in, x_in);
  return {f.h(), f.dec_a.last(), f.dec_x.last()};
}

LossAndGradient loss_and_gradient(const ModelParams& params, const Matrix& a_batch,
                                  const Matrix& x_batch, const Matrix& jaccard_a,
                                  const Matrix& jaccard_x, const LossWeights& weights,
                                  bool want_gradient) {
  check_batch(params, a_batch.rows(), a_batch.cols(), x_batch.rows(), x_batch.cols());
  const SparseRows a_in = a_batch.sparseView();
  const SparseRows x_in = x_batch.sparseView();
  return evaluate(params, a_batch, x_batch, a_in, x_in, jaccard_a, jaccard_x, weights,
                  want_gradient);
}

LossValue loss_joint(const ModelParams& params, const Matrix& a_batch, const Matrix& x_batch,
                     const LossWeights& weights) {
  if (a_batch.rows() < 2) throw ConfigError("batch needs at least 2 rows for pairwise losses");
  return loss_and_gradient(params, a_batch, x_batch, pairwise_jaccard(a_batch).values,
                           pairwise_jaccard(x_batch).values, weights, false)
      .loss;
}

LossAndGradient gradients(const ModelParams& params, const Matrix& a_batch, const Matrix& x_batch,
                          const LossWeights& weights) {
  if (a_batch.rows() < 2) throw ConfigError("batch needs at least 2 rows for pairwise losses");
  return loss_and_gradient(params, a_batch, x_batch, pairwise_jaccard(a_batch).values,
                           pairwise_jaccard(x_batch).values, weights, true);
}

// ---------------------------------------------------------------------------
// Sampling and training
// ---------------------------------------------------------------------------

Architecture TrainConfig::architecture() const {
  Architecture arch;
  arch.encoder_a = {hidden_a};
  arch.encoder_x = {hidden_x};
  arch.latent_dim = latent_dim;
  return arch;
}

void TrainConfig::validate() const {
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
  if (hidden_a < 1 || hidden_x < 1) throw ConfigError("hidden layer widths must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive");
  }
}

std::string to_string(SamplerKind kind) {
  return kind == SamplerKind::uniform ? "uniform" : "similarity_weighted";
}

SamplerKind sampler_from_string(const std::string& name) {
  if (name == "uniform") return SamplerKind::uniform;
  if (name == "similarity_weighted") return SamplerKind::similarity_weighted;
  throw ConfigError("unknown sampler '" + name + "'");
}

NodeSubset sample_batch(const BinaryAttributedGraph& g, const TrainConfig& cfg, Rng& rng) {
  NodeIndex anchor = 0;
  return sample_batch(g, cfg, rng, anchor);
}

NodeSubset sample_batch(const BinaryAttributedGraph& g, const TrainConfig& cfg, Rng& rng,
                        NodeIndex& anchor) {
  const auto n = g.num_nodes();
  if (cfg.batch_size > n) {
    throw ConfigError("batch_size " + std::to_string(cfg.batch_size) + " exceeds node count " +
                      std::to_string(n));
  }
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  anchor = static_cast<NodeIndex>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
  const std::size_t extra = cfg.batch_size - 1;

  std::vector<NodeIndex> picked{anchor};
  picked.reserve(cfg.batch_size);
  if (cfg.sampler == SamplerKind::uniform) {
    std::vector<NodeIndex> pool;
    pool.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (i != anchor) pool.push_back(static_cast<NodeIndex>(i));
    }
    for (std::size_t s = 0; s < extra; ++s) {
      const auto j = std::uniform_int_distribution<std::size_t>(s, pool.size() - 1)(rng);
      std::swap(pool[s], pool[j]);
      picked.push_back(pool[s]);
    }
  } else {
    // Efraimidis-Spirakis: keep the `extra` largest log(u)/w keys.
    std::vector<std::uint32_t> common(n, 0);
    const auto anchor_row = g.out_neighbors(anchor);
    for (auto t : anchor_row) {
      for (auto c : g.in_neighbors(t)) ++common[c];
    }
    std::uniform_real_distribution<double> unit(std::nextafter(0.0, 1.0), 1.0);
    std::vector<std::pair<double, NodeIndex>> keys;
    keys.reserve(n - 1);
    for (std::size_t c = 0; c < n; ++c) {
      if (c == anchor) continue;
      const auto uni = anchor_row.size() + g.out_neighbors(static_cast<NodeIndex>(c)).size() -
                       common[c];
      const double similarity =
          uni == 0 ? 1.0 : static_cast<double>(common[c]) / static_cast<double>(uni);
      const double weight = similarity + kSamplerEpsilon;
      keys.emplace_back(std::log(unit(rng)) / weight, static_cast<NodeIndex>(c));
    }
    auto larger = [](const auto& x, const auto& y) {
      return x.first != y.first ? x.first > y.first : x.second < y.second;
    };
    std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(extra), keys.end(),
                      larger);
    for (std::size_t s = 0; s < extra; ++s) picked.push_back(keys[s].second);
  }
  return NodeSubset::from_unsorted(std::move(picked));
}

Matrix adjacency_rows(const BinaryAttributedGraph& g, std::span<const NodeIndex> nodes) {
  return dense_rows(g.adjacency(), nodes);
}

Matrix attribute_rows(const BinaryAttributedGraph& g, std::span<const NodeIndex> nodes) {
  return dense_rows(g.attributes(), nodes);
}

LatentMatrix encode_all(const BinaryAttributedGraph& g, const ModelParams& params,
                        std::size_t chunk) {
  if (params.n != g.num_nodes() || params.d != g.num_attributes()) {
    throw ConfigError("model dimensions do not match the graph");
  }
  chunk = std::max<std::size_t>(chunk, 1);
  const auto n = g.num_nodes();
  LatentMatrix out{Matrix(static_cast<Eigen::Index>(n),
                          static_cast<Eigen::Index>(params.latent_dim()))};
  std::vector<NodeIndex> rows;
  for (std::size_t start = 0; start < n; start += chunk) {
    const auto stop = std::min(n, start + chunk);
    rows.resize(stop - start);
    std::iota(rows.begin(), rows.end(), static_cast<NodeIndex>(start));
    const SparseRows a = sparse_rows(g.adjacency(), rows);
    const SparseRows x = sparse_rows(g.attributes(), rows);
    out.h.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(rows.size())) =
        encode_joint(params, a, x, nullptr, nullptr, nullptr, nullptr);
  }
  if (!out.h.allFinite()) throw NumericError("latent matrix has non-finite entries");
  return out;
}

TrainResult train(const BinaryAttributedGraph& g, const LossWeights& weights,
                  const TrainConfig& cfg) {
  weights.validate();
  cfg.validate();
  if (cfg.batch_size > g.num_nodes()) throw ConfigError("batch_size exceeds node count");

  TrainResult result;
  result.params = init_params(g.num_nodes(), g.num_attributes(), cfg.architecture(), cfg.seed);
  result.loss_history.reserve(cfg.epochs);
  Rng rng(cfg.seed);

  for (std::size_t it = 0; it < cfg.epochs; ++it) {
    const NodeSubset batch = sample_batch(g, cfg, rng);
    const auto nodes = batch.indices();
    const Matrix a = dense_rows(g.adjacency(), nodes);
    const Matrix x = dense_rows(g.attributes(), nodes);
    const SparseRows a_in = sparse_rows(g.adjacency(), nodes);
    const SparseRows x_in = sparse_rows(g.attributes(), nodes);
    const Matrix jac_a = pairwise_jaccard(g.adjacency(), nodes).values;
    const Matrix jac_x = pairwise_jaccard(g.attributes(), nodes).values;

    LossAndGradient step;
    try {
      step = evaluate(result.params, a, x, a_in, x_in, jac_a, jac_x, weights, true);
    } catch (const NumericError&) {
      throw TrainingDivergedError(it);
    }
    result.loss_history.push_back(step.loss.total);

    std::vector<const Layer*> grads;
    step.gradient.for_each_layer([&](const Layer& l) { grads.push_back(&l); });
    std::size_t idx = 0;
    result.params.for_each_layer([&](Layer& l) {
      l.weight -= cfg.learning_rate * grads[idx]->weight;
      l.bias -= cfg.learning_rate * grads[idx]->bias;
      ++idx;
    });
  }

  try {
    result.latent = encode_all(g, result.params);
  } catch (const NumericError&) {
    throw TrainingDivergedError(cfg.epochs);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::relu:
      return "relu";
    case Activation::identity:
      return "identity";
    case Activation::logistic:
      return "logistic";
  }
  return "?";
}

nlohmann::json stack_to_json(const LayerStack& stack) {
  auto arr = nlohmann::json::array();
  for (const auto& l : stack) {
    arr.push_back({{"rows", l.weight.rows()},
                   {"cols", l.weight.cols()},
                   {"activation", activation_name(l.activation)},
                   {"weight", std::vector<double>(l.weight.data(), l.weight.data() + l.weight.size())},
                   {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  return arr;
}

void stack_from_json(const nlohmann::json& arr, LayerStack& stack, const std::string& name) {
  if (!arr.is_array() || arr.size() != stack.size()) {
    throw DataError("checkpoint stack '" + name + "' has the wrong number of layers");
  }
  for (std::size_t l = 0; l < stack.size(); ++l) {
    const auto& j = arr[l];
    auto& layer = stack[l];
    const auto w = j.at("weight").get<std::vector<double>>();
    const auto b = j.at("bias").get<std::vector<double>>();
    if (j.at("rows").get<Eigen::Index>() != layer.weight.rows() ||
        j.at("cols").get<Eigen::Index>() != layer.weight.cols() ||
        w.size() != static_cast<std::size_t>(layer.weight.size()) ||
        b.size() != static_cast<std::size_t>(layer.bias.size()) ||
        j.at("activation").get<std::string>() != activation_name(layer.activation)) {
      throw DataError("checkpoint layer " + name + "[" + std::to_string(l) +
                      "] does not match the declared architecture");
    }
    std::copy(w.begin(), w.end(), layer.weight.data());
    std::copy(b.begin(), b.end(), layer.bias.data());
  }
}

}  // namespace

void save_checkpoint(const ModelParams& params, std::uint64_t seed, std::size_t iterations,
                     const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["format"] = "subblock-checkpoint";
  doc["version"] = 1;
  doc["n"] = params.n;
  doc["d"] = params.d;
  doc["seed"] = seed;
  doc["iterations"] = iterations;
  doc["architecture"] = {{"encoder_a", params.arch.encoder_a},
                         {"encoder_x", params.arch.encoder_x},
                         {"encoder_joint", params.arch.encoder_joint},
                         {"decoder_a", params.arch.decoder_a},
                         {"decoder_x", params.arch.decoder_x},
                         {"latent_dim", params.arch.latent_dim}};
  doc["encoder_a"] = stack_to_json(params.encoder_a);
  doc["encoder_x"] = stack_to_json(params.encoder_x);
  doc["encoder_joint"] = stack_to_json(params.encoder_joint);
  doc["decoder_a"] = stack_to_json(params.decoder_a);
  doc["decoder_x"] = stack_to_json(params.decoder_x);
  io::write_text(path, doc.dump() + "\n");
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  try {
    const auto doc = nlohmann::json::parse(io::read_text(path));
    if (doc.value("format", "") != "subblock-checkpoint") {
      throw DataError("'" + path.string() + "' is not a model checkpoint");
    }
    Architecture arch;
    const auto& a = doc.at("architecture");
    arch.encoder_a = a.at("encoder_a").get<std::vector<std::size_t>>();
    arch.encoder_x = a.at("encoder_x").get<std::vector<std::size_t>>();
    arch.encoder_joint = a.at("encoder_joint").get<std::vector<std::size_t>>();
    arch.decoder_a = a.at("decoder_a").get<std::vector<std::size_t>>();
    arch.decoder_x = a.at("decoder_x").get<std::vector<std::size_t>>();
    arch.latent_dim = a.at("latent_dim").get<std::size_t>();
    ModelParams p = layout(doc.at("n").get<std::size_t>(), doc.at("d").get<std::size_t>(), arch);
    stack_from_json(doc.at("encoder_a"), p.encoder_a, "encoder_a");
    stack_from_json(doc.at("encoder_x"), p.encoder_x, "encoder_x");
    stack_from_json(doc.at("encoder_joint"), p.encoder_joint, "encoder_joint");
    stack_from_json(doc.at("decoder_a"), p.decoder_a, "decoder_a");
    stack_from_json(doc.at("decoder_x"), p.decoder_x, "decoder_x");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("'" + path.string() + "': " + e.what());
  }
}

void write_latent_csv(const std::vector<std::string>& node_ids, const LatentMatrix& latent,
                      const std::filesystem::path& path) {
  if (static_cast<Eigen::Index>(node_ids.size()) != latent.h.rows()) {
    throw ConfigError("latent rows do not match node count");
  }
  std::string out = "node_id";
  for (Eigen::Index c = 0; c < latent.h.cols(); ++c) out += ",h_" + std::to_string(c);
  out += '\n';
  for (Eigen::Index r = 0; r < latent.h.rows(); ++r) {
    out += node_ids[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < latent.h.cols(); ++c) {
      out += ',';
      out += io::format_double(latent.h(r, c));
    }
    out += '\n';
  }
  io::write_text(path, out);
}

LatentMatrix read_latent_csv(const std::vector<std::string>& node_ids,
                             const std::filesystem::path& path) {
  const auto lines = io::read_lines(path);
  if (lines.empty()) throw DataError("'" + path.string() + "' is empty");
  const auto header = io::split(lines[0], ',');
  if (header.empty() || header[0] != "node_id") {
    throw DataError("'" + path.string() + "': expected header node_id,h_0,...");
  }
  const auto k = static_cast<Eigen::Index>(header.size() - 1);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < node_ids.size(); ++i) index.emplace(node_ids[i], i);

  LatentMatrix out{Matrix::Zero(static_cast<Eigen::Index>(node_ids.size()), k)};
  std::vector<char> seen(node_ids.size(), 0);
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto context = path.string() + ":" + std::to_string(ln + 1);
    const auto fields = io::split(lines[ln], ',');
    if (static_cast<Eigen::Index>(fields.size()) != k + 1) {
      throw DataError(context + ": expected " + std::to_string(k + 1) + " fields");
    }
    const auto it = index.find(fields[0]);
    if (it == index.end()) throw DataError(context + ": unknown node id '" + fields[0] + "'");
    seen[it->second] = 1;
    for (Eigen::Index c = 0; c < k; ++c) {
      out.h(static_cast<Eigen::Index>(it->second), c) =
          io::parse_double(fields[static_cast<std::size_t>(c + 1)], context);
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw DataError("'" + path.string() + "' does not cover every node");
  }
  return out;
}

}  // namespace subblock
