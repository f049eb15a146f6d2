#include "milattn/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "milattn/error.hpp"
#include "milattn/io_util.hpp"
#include "milattn/loss.hpp"
#include "milattn/rng.hpp"

namespace milattn {

namespace {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

struct PoolState {
  MlpCache featurizer;
  Matrix embeddings;  // M x K
  Matrix hidden;      // M x L
  AttentionProfile attention;
  std::vector<double> pooled;  // K
};

// Softmax whose normalizer is summed in sorted order, so permuting the
// instances permutes the weights bit for bit.
std::vector<double> attention_softmax(std::span<const double> scores) {
  std::vector<double> out(scores.size());
  const double mx = *std::max_element(scores.begin(), scores.end());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = std::exp(scores[i] - mx);
  std::vector<double> sorted = out;
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (double v : sorted) total += v;
  for (double& v : out) v /= total;
  return out;
}

PoolState featurize_and_pool(const MilModel& model, const Matrix& instances) {
  if (instances.cols() != model.config.input_dim) {
    throw ConfigError("bag has instance dimension " + std::to_string(instances.cols()) +
                      ", model expects " + std::to_string(model.config.input_dim));
  }
  if (instances.rows() == 0) throw DataError("empty bag");
  PoolState s;
  auto fwd = mlp_forward(model.featurizer, instances);
  s.embeddings = std::move(fwd.output);
  s.featurizer = std::move(fwd.cache);
  s.hidden = affine_rows(s.embeddings, model.attention_V);
  for (double& h : s.hidden.values()) h = std::tanh(h);
  std::vector<double> scores(s.hidden.rows());
  for (std::size_t m = 0; m < s.hidden.rows(); ++m) {
    const auto hr = s.hidden.row(m);
    double acc = 0.0;
    for (std::size_t l = 0; l < hr.size(); ++l) acc += model.attention_w[l] * hr[l];
    scores[m] = acc;
  }
  s.attention = attention_softmax(scores);
  s.pooled.assign(s.embeddings.cols(), 0.0);
  for (std::size_t m = 0; m < s.embeddings.rows(); ++m) {
    const auto zr = s.embeddings.row(m);
    const double a = s.attention[m];
    for (std::size_t k = 0; k < zr.size(); ++k) s.pooled[k] += a * zr[k];
  }
  return s;
}

struct ModelGrads {
  MlpGrads featurizer;
  Matrix V;
  std::vector<double> w;
  MlpGrads classifier;

  explicit ModelGrads(const MilModel& m)
      : featurizer(MlpGrads::zeros_like(m.featurizer)),
        V(m.attention_V.rows(), m.attention_V.cols()),
        w(m.attention_w.size(), 0.0),
        classifier(MlpGrads::zeros_like(m.classifier)) {}

  std::vector<double> pack() const {
    std::vector<double> out;
    auto put_mlp = [&out](const MlpGrads& g) {
      for (std::size_t i = 0; i < g.weight.size(); ++i) {
        const auto wv = g.weight[i].values();
        out.insert(out.end(), wv.begin(), wv.end());
        out.insert(out.end(), g.bias[i].begin(), g.bias[i].end());
      }
    };
    put_mlp(featurizer);
    const auto vv = V.values();
    out.insert(out.end(), vv.begin(), vv.end());
    out.insert(out.end(), w.begin(), w.end());
    put_mlp(classifier);
    return out;
  }
};

// Backpropagates d(loss)/d(pooled) through pooling, attention and featurizer.
void pool_backward(const MilModel& model, const PoolState& s, std::span<const double> d_pooled,
                   ModelGrads& grads) {
  const std::size_t M = s.embeddings.rows();
  const std::size_t K = s.embeddings.cols();
  const std::size_t L = s.hidden.cols();

  // Pooling: Z = sum a_m z_m.
  Matrix d_embed(M, K);
  std::vector<double> d_attn(M);
  for (std::size_t m = 0; m < M; ++m) {
    const auto zr = s.embeddings.row(m);
    auto dr = d_embed.row(m);
    double dot = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      dot += zr[k] * d_pooled[k];
      dr[k] = s.attention[m] * d_pooled[k];
    }
    d_attn[m] = dot;
  }
  // Softmax: ds_m = a_m (da_m - sum_j a_j da_j).
  double mean_da = 0.0;
  for (std::size_t m = 0; m < M; ++m) mean_da += s.attention[m] * d_attn[m];
  // Scores s_m = w . h_m, h = tanh(V z).
  Matrix d_pre(M, L);
  for (std::size_t m = 0; m < M; ++m) {
    const double ds = s.attention[m] * (d_attn[m] - mean_da);
    const auto hr = s.hidden.row(m);
    auto dp = d_pre.row(m);
    for (std::size_t l = 0; l < L; ++l) {
      grads.w[l] += ds * hr[l];
      dp[l] = ds * model.attention_w[l] * (1.0 - hr[l] * hr[l]);
    }
  }
  const Matrix dV = matmul_tn(d_pre, s.embeddings);
  {
    auto dst = grads.V.values();
    const auto src = dV.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  const Matrix d_embed_attn = matmul(d_pre, model.attention_V);
  {
    auto dst = d_embed.values();
    const auto src = d_embed_attn.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  if (model.featurizer.depth() > 0) {
    const auto back = mlp_backward(model.featurizer, s.featurizer, d_embed, /*need_input_grad=*/false);
    grads.featurizer.accumulate(back.params);
  }
}

void append_mlp(const Mlp& net, std::vector<double>& out) {
  for (const auto& l : net.layers) {
    const auto wv = l.weight.values();
    out.insert(out.end(), wv.begin(), wv.end());
    out.insert(out.end(), l.bias.begin(), l.bias.end());
  }
}

std::size_t read_mlp(Mlp& net, std::span<const double> flat, std::size_t pos) {
  for (auto& l : net.layers) {
    for (double& v : l.weight.values()) v = flat[pos++];
    for (double& v : l.bias) v = flat[pos++];
  }
  return pos;
}

}  // namespace

void ModelConfig::validate() const {
  if (input_dim == 0) throw ConfigError("input_dim must be positive");
  if (embed_dim == 0) throw ConfigError("embed_dim (hidden layer size) must be positive");
  if (attention_dim == 0) throw ConfigError("attention_dim must be positive");
  if (classifier_depth == 0) throw ConfigError("classifier_depth must be at least 1");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw ConfigError("weight_decay must be non-negative");
  }
}

ModelConfig ModelConfig::normalized() const {
  validate();
  ModelConfig c = *this;
  if (c.featurizer_depth == 0) c.embed_dim = c.input_dim;
  return c;
}

std::string ModelConfig::id() const {
  std::string s = "e" + std::to_string(epochs) + "_lr" + format_real(learning_rate) + "_k" +
                  std::to_string(embed_dim) + "_l" + std::to_string(attention_dim) + "_f" +
                  std::to_string(featurizer_depth) + "_c" + std::to_string(classifier_depth) +
                  "_b" + std::to_string(batch_size) + "_wd" + format_real(weight_decay);
  if (hidden_activation == Activation::Tanh) s += "_tanh";
  if (hidden_activation == Activation::Identity) s += "_lin";
  return s;
}

std::size_t MilModel::parameter_count() const noexcept {
  return featurizer.parameter_count() + attention_V.size() + attention_w.size() +
         classifier.parameter_count();
}

std::vector<double> MilModel::parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  append_mlp(featurizer, out);
  const auto vv = attention_V.values();
  out.insert(out.end(), vv.begin(), vv.end());
  out.insert(out.end(), attention_w.begin(), attention_w.end());
  append_mlp(classifier, out);
  return out;
}

void MilModel::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw ConfigError("set_parameters: expected " + std::to_string(parameter_count()) +
                      " values, got " + std::to_string(flat.size()));
  }
  std::size_t pos = read_mlp(featurizer, flat, 0);
  for (double& v : attention_V.values()) v = flat[pos++];
  for (double& v : attention_w) v = flat[pos++];
  read_mlp(classifier, flat, pos);
}

MilModel init_model(const ModelConfig& config, std::uint64_t seed) {
  MilModel model;
  model.config = config.normalized();
  const auto& c = model.config;
  Rng rng(derive_seed(seed, {0x696e6974ULL}));

  std::vector<std::size_t> fdims{c.input_dim};
  for (std::size_t i = 0; i < c.featurizer_depth; ++i) fdims.push_back(c.embed_dim);
  model.featurizer = make_mlp(fdims, c.hidden_activation, /*activate_output=*/true, rng);

  const double v_limit = std::sqrt(6.0 / static_cast<double>(c.embed_dim + c.attention_dim));
  model.attention_V = Matrix(c.attention_dim, c.embed_dim);
  for (double& v : model.attention_V.values()) v = (2.0 * uniform01(rng) - 1.0) * v_limit;
  const double w_limit = std::sqrt(6.0 / static_cast<double>(c.attention_dim + 1));
  model.attention_w.resize(c.attention_dim);
  for (double& v : model.attention_w) v = (2.0 * uniform01(rng) - 1.0) * w_limit;

  std::vector<std::size_t> cdims{c.embed_dim};
  for (std::size_t i = 1; i < c.classifier_depth; ++i) cdims.push_back(c.embed_dim);
  cdims.push_back(2);
  model.classifier = make_mlp(cdims, c.hidden_activation, /*activate_output=*/false, rng);
  return model;
}

AttentionProfile attention_scores(const Matrix& embeddings, const Matrix& V,
                                  std::span<const double> w) {
  if (embeddings.rows() == 0) throw DataError("attention over an empty bag");
  if (V.cols() != embeddings.cols() || V.rows() != w.size()) {
    throw ConfigError("attention parameter shapes do not match embeddings");
  }
  Matrix hidden = affine_rows(embeddings, V);
  std::vector<double> scores(hidden.rows());
  for (std::size_t m = 0; m < hidden.rows(); ++m) {
    double acc = 0.0;
    for (std::size_t l = 0; l < w.size(); ++l) acc += w[l] * std::tanh(hidden(m, l));
    scores[m] = acc;
  }
  return attention_softmax(scores);
}

BagForward forward_bag(const MilModel& model, const Matrix& instances) {
  PoolState s = featurize_and_pool(model, instances);
  BagForward out;
  Matrix pooled(1, s.pooled.size(), s.pooled);
  auto cls = mlp_forward(model.classifier, pooled);
  out.logits = {cls.output(0, 0), cls.output(0, 1)};
  out.attention = std::move(s.attention);
  out.cache.featurizer = std::move(s.featurizer);
  out.cache.embeddings = std::move(s.embeddings);
  out.cache.hidden = std::move(s.hidden);
  out.cache.pooled = std::move(pooled);
  out.cache.classifier = std::move(cls.cache);
  return out;
}

BagPrediction predict_bag(const MilModel& model, const Matrix& instances) {
  if (instances.cols() != model.config.input_dim) {
    throw ConfigError("bag has instance dimension " + std::to_string(instances.cols()) +
                      ", model expects " + std::to_string(model.config.input_dim));
  }
  const Matrix z = mlp_apply(model.featurizer, instances);
  BagPrediction p;
  p.attention = attention_scores(z, model.attention_V, model.attention_w);
  Matrix pooled(1, z.cols());
  for (std::size_t m = 0; m < z.rows(); ++m)
    for (std::size_t k = 0; k < z.cols(); ++k) pooled(0, k) += p.attention[m] * z(m, k);
  const Matrix logits = mlp_apply(model.classifier, pooled);
  p.logits = {logits(0, 0), logits(0, 1)};
  return p;
}

LossAndGrads loss_and_grads(const MilModel& model, std::span<const Bag* const> batch) {
  if (batch.empty()) throw ConfigError("loss_and_grads: empty batch");
  const std::size_t B = batch.size();
  const std::size_t K = model.attention_V.cols();

  std::vector<PoolState> states;
  states.reserve(B);
  Matrix pooled(B, K);
  std::vector<int> labels(B);
  for (std::size_t b = 0; b < B; ++b) {
    states.push_back(featurize_and_pool(model, batch[b]->instances));
    std::copy(states.back().pooled.begin(), states.back().pooled.end(), pooled.row(b).begin());
    labels[b] = batch[b]->label;
  }
  auto cls = mlp_forward(model.classifier, pooled);
  if (!cls.output.all_finite()) throw DivergenceError("non-finite logits");
  const LossResult loss = softmax_cross_entropy(cls.output, labels);
  if (!std::isfinite(loss.mean_loss)) throw DivergenceError("non-finite loss");

  ModelGrads grads(model);
  auto cls_back = mlp_backward(model.classifier, cls.cache, loss.logit_grad);
  grads.classifier.accumulate(cls_back.params);
  for (std::size_t b = 0; b < B; ++b) {
    pool_backward(model, states[b], cls_back.input_grad.row(b), grads);
  }
  return {loss.mean_loss, grads.pack()};
}

std::string encode_model_parameters(const MilModel& model) {
  BinaryWriter w;
  w.bytes("MILMODL1", 8);
  const auto params = model.parameters();
  w.u64(params.size());
  for (double v : params) w.f64(v);
  return w.take();
}

}  // namespace milattn
