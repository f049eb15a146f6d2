#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "milattn/bag.hpp"
#include "milattn/matrix.hpp"
#include "milattn/mlp.hpp"

namespace milattn {

/// Architecture and optimization hyperparameters of one grid point.
struct ModelConfig {
  std::size_t input_dim = 4;
  std::size_t embed_dim = 8;        // K, width of the featurizer output
  std::size_t attention_dim = 4;    // L, rows of V
  std::size_t featurizer_depth = 1; // 0 means identity featurizer (K = input_dim)
  std::size_t classifier_depth = 1; // >= 1; the last layer emits 2 logits
  double learning_rate = 0.01;
  std::size_t epochs = 100;
  std::size_t batch_size = 100;     // bags per mini-batch
  double weight_decay = 1e-4;
  Activation hidden_activation = Activation::ReLU;

  // Throws ConfigError. A zero-depth featurizer with K != input_dim is
  // accepted here and resolved by normalized().
  void validate() const;
  ModelConfig normalized() const;

  // Stable human-readable identifier, e.g. "e100_lr0.01_k8_l4_f1_c2_b100_wd0.0001".
  std::string id() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

using AttentionProfile = std::vector<double>;

/// Attention-pooled set classifier.
///
///   z_m = featurizer(x_m)
///   a   = softmax_m( w . tanh(V z_m) )
///   Z   = sum_m a_m z_m
///   logits = classifier(Z)
struct MilModel {
  ModelConfig config;
  Mlp featurizer;
  Matrix attention_V;                // L x K
  std::vector<double> attention_w;   // L
  Mlp classifier;                    // K -> ... -> 2

  std::size_t parameter_count() const noexcept;
  // Flat parameter vector: featurizer layers (W, b), V, w, classifier layers.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  friend bool operator==(const MilModel&, const MilModel&) = default;
};

MilModel init_model(const ModelConfig& config, std::uint64_t seed);

AttentionProfile attention_scores(const Matrix& embeddings, const Matrix& V,
                                  std::span<const double> w);

struct BagCache {
  MlpCache featurizer;
  Matrix embeddings;   // M x K
  Matrix hidden;       // tanh(V z), M x L
  Matrix pooled;       // 1 x K
  MlpCache classifier;
};

struct BagForward {
  std::array<double, 2> logits{};
  AttentionProfile attention;
  BagCache cache;
};

BagForward forward_bag(const MilModel& model, const Matrix& instances);

// Inference-only variant: logits and attention.
struct BagPrediction {
  std::array<double, 2> logits{};
  AttentionProfile attention;
  int predicted_label() const noexcept { return logits[1] > logits[0] ? 1 : 0; }
};
BagPrediction predict_bag(const MilModel& model, const Matrix& instances);

struct LossAndGrads {
  double mean_loss = 0.0;
  std::vector<double> gradient;  // same layout as MilModel::parameters()
};

// Mean softmax cross-entropy of the batch and its exact gradient. Throws
// DivergenceError when the loss is not finite.
LossAndGrads loss_and_grads(const MilModel& model, std::span<const Bag* const> batch);

// Flat-vector serialization of a trained model (config JSON is stored by the caller).
std::string encode_model_parameters(const MilModel& model);

}  // namespace milattn
