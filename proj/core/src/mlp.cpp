#include "milattn/mlp.hpp"

#include <cmath>
#include <string>

#include "milattn/error.hpp"

namespace milattn {

namespace {

double activate_grad(Activation act, double pre, double post) noexcept {
  switch (act) {
    case Activation::ReLU:
      return pre > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh:
      return 1.0 - post * post;
    case Activation::Identity:
      return 1.0;
  }
  return 1.0;
}

void check_input(const Mlp& net, const Matrix& input) {
  if (net.depth() == 0) return;
  const auto in_dim = net.layers.front().weight.cols();
  if (input.cols() != in_dim) {
    throw ConfigError("mlp input has " + std::to_string(input.cols()) + " columns, expected " +
                      std::to_string(in_dim));
  }
}

// y = x W^T + b
Matrix affine(const DenseLayer& layer, const Matrix& x) { return affine_rows(x, layer.weight, layer.bias); }

}  // namespace

double activate(Activation act, double x) noexcept {
  switch (act) {
    case Activation::ReLU:
      return x > 0.0 ? x : 0.0;
    case Activation::Tanh:
      return std::tanh(x);
    case Activation::Identity:
      return x;
  }
  return x;
}

std::size_t Mlp::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

Mlp make_mlp(std::span<const std::size_t> dims, Activation hidden, bool activate_output,
             Rng& rng) {
  if (dims.empty()) throw ConfigError("make_mlp: empty dimension list");
  Mlp net;
  net.hidden_activation = hidden;
  net.activate_output = activate_output;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const std::size_t in = dims[i];
    const std::size_t out = dims[i + 1];
    if (in == 0 || out == 0) throw ConfigError("make_mlp: zero-width layer");
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    DenseLayer layer{Matrix(out, in), std::vector<double>(out, 0.0)};
    for (double& w : layer.weight.values()) w = (2.0 * uniform01(rng) - 1.0) * limit;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

MlpGrads MlpGrads::zeros_like(const Mlp& net) {
  MlpGrads g;
  for (const auto& l : net.layers) {
    g.weight.emplace_back(l.weight.rows(), l.weight.cols());
    g.bias.emplace_back(l.bias.size(), 0.0);
  }
  return g;
}

void MlpGrads::accumulate(const MlpGrads& other) {
  if (other.weight.size() != weight.size()) throw InternalError("MlpGrads depth mismatch");
  for (std::size_t i = 0; i < weight.size(); ++i) {
    auto dst = weight[i].values();
    auto src = other.weight[i].values();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    for (std::size_t j = 0; j < bias[i].size(); ++j) bias[i][j] += other.bias[i][j];
  }
}

MlpForward mlp_forward(const Mlp& net, const Matrix& input) {
  check_input(net, input);
  MlpForward out;
  out.cache.activations.reserve(net.depth() + 1);
  out.cache.pre_activations.reserve(net.depth());
  out.cache.activations.push_back(input);
  for (std::size_t i = 0; i < net.depth(); ++i) {
    Matrix pre = affine(net.layers[i], out.cache.activations.back());
    Matrix post = pre;
    if (net.layer_is_activated(i)) {
      for (double& v : post.values()) v = activate(net.hidden_activation, v);
    }
    out.cache.pre_activations.push_back(std::move(pre));
    out.cache.activations.push_back(std::move(post));
  }
  out.output = out.cache.activations.back();
  return out;
}

Matrix mlp_apply(const Mlp& net, const Matrix& input) {
  check_input(net, input);
  Matrix x = input;
  for (std::size_t i = 0; i < net.depth(); ++i) {
    x = affine(net.layers[i], x);
    if (net.layer_is_activated(i)) {
      for (double& v : x.values()) v = activate(net.hidden_activation, v);
    }
  }
  return x;
}

MlpBackward mlp_backward(const Mlp& net, const MlpCache& cache, const Matrix& output_grad,
                         bool need_input_grad) {
  if (cache.activations.size() != net.depth() + 1 ||
      cache.pre_activations.size() != net.depth()) {
    throw InternalError("mlp_backward: cache depth does not match network");
  }
  for (std::size_t i = 0; i < net.depth(); ++i) {
    const auto& w = net.layers[i].weight;
    if (cache.activations[i].cols() != w.cols() || cache.pre_activations[i].cols() != w.rows()) {
      throw InternalError("mlp_backward: cache shapes do not match layer " + std::to_string(i));
    }
  }
  const Matrix& out = cache.activations.back();
  if (output_grad.rows() != out.rows() || output_grad.cols() != out.cols()) {
    throw InternalError("mlp_backward: output gradient shape does not match cached output");
  }

  MlpBackward result;
  result.params = MlpGrads::zeros_like(net);
  Matrix grad = output_grad;
  for (std::size_t li = net.depth(); li-- > 0;) {
    if (net.layer_is_activated(li)) {
      const auto pre = cache.pre_activations[li].values();
      const auto post = cache.activations[li + 1].values();
      auto g = grad.values();
      for (std::size_t j = 0; j < g.size(); ++j)
        g[j] *= activate_grad(net.hidden_activation, pre[j], post[j]);
    }
    result.params.weight[li] = matmul_tn(grad, cache.activations[li]);
    auto& db = result.params.bias[li];
    for (std::size_t r = 0; r < grad.rows(); ++r) {
      const auto row = grad.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) db[c] += row[c];
    }
    if (li > 0 || need_input_grad) {
      grad = matmul(grad, net.layers[li].weight);
    } else {
      grad = Matrix();
    }
  }
  result.input_grad = std::move(grad);
  return result;
}

}  // namespace milattn
