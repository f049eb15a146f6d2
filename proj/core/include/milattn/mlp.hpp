#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "milattn/matrix.hpp"
#include "milattn/rng.hpp"

namespace milattn {

enum class Activation { ReLU, Tanh, Identity };

struct DenseLayer {
  Matrix weight;  // out_dim x in_dim
  std::vector<double> bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Multilayer perceptron with a shared hidden activation.
///
/// Every layer except the last is followed by `hidden_activation`. The last
/// layer is also activated when `activate_output` is set, which is how the
/// featurizer is built; the classifier keeps a linear output for logits.
/// A network with no layers is the identity map.
struct Mlp {
  std::vector<DenseLayer> layers;
  Activation hidden_activation = Activation::ReLU;
  bool activate_output = false;

  std::size_t depth() const noexcept { return layers.size(); }
  bool layer_is_activated(std::size_t i) const noexcept {
    return i + 1 < layers.size() || activate_output;
  }
  std::size_t parameter_count() const noexcept;

  friend bool operator==(const Mlp&, const Mlp&) = default;
};

// Glorot-uniform weights, zero biases. dims = {in, h1, ..., out}; a single
// entry gives the identity network.
Mlp make_mlp(std::span<const std::size_t> dims, Activation hidden, bool activate_output,
             Rng& rng);

struct MlpCache {
  // activations[0] is the input, activations[i + 1] the output of layer i.
  std::vector<Matrix> activations;
  std::vector<Matrix> pre_activations;
};

struct MlpGrads {
  std::vector<Matrix> weight;
  std::vector<std::vector<double>> bias;

  static MlpGrads zeros_like(const Mlp& net);
  void accumulate(const MlpGrads& other);
};

struct MlpForward {
  Matrix output;
  MlpCache cache;
};

struct MlpBackward {
  MlpGrads params;
  Matrix input_grad;
};

MlpForward mlp_forward(const Mlp& net, const Matrix& input);

// Forward pass without a cache; inference only.
Matrix mlp_apply(const Mlp& net, const Matrix& input);

// input_grad is left empty when need_input_grad is false.
MlpBackward mlp_backward(const Mlp& net, const MlpCache& cache, const Matrix& output_grad,
                         bool need_input_grad = true);

double activate(Activation act, double x) noexcept;

}  // namespace milattn
