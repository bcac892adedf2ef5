#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sigdiag/kernels.hpp"
#include "sigdiag/linalg.hpp"
#include "sigdiag/rng.hpp"

namespace sigdiag {

enum class Activation { Sigmoid, Relu, Identity };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct DenseLayer {
  Matrix weights;  // out x in; row j holds the fan-in of output neuron j
  Vector biases;   // out
  Activation activation = Activation::Identity;
  bool frozen = false;

  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out, Activation act)
      : weights(out, in), biases(out, 0.0), activation(act) {}

  std::size_t in_dim() const { return weights.cols; }
  std::size_t out_dim() const { return weights.rows; }
};

struct DenseNetwork {
  std::vector<DenseLayer> layers;

  std::size_t in_dim() const { return layers.front().in_dim(); }
  std::size_t out_dim() const { return layers.back().out_dim(); }
  // Consecutive layers must agree on their shared dimension.
  void validate_chain() const;
};

// Post-activation values kept for the backward pass. Derivatives of all three
// supported activations are recoverable from outputs alone, so
// pre-activations are not stored.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> post;
};

// Elementwise activation, in place.
void apply_activation(Activation act, Matrix& z);
// In place dpost -> dz; all supported activations recover their derivative
// from post-activation values.
void activation_backward(Activation act, const Matrix& post, Matrix& d);

// Batched forward pass; rows are samples. Pass a cache to enable backward.
Matrix forward(const DenseNetwork& net, const Matrix& input, ForwardCache* cache = nullptr);
Vector forward(const DenseNetwork& net, const Vector& input);

struct LayerGrads {
  Matrix dw;
  Vector db;
};

struct Gradients {
  std::vector<LayerGrads> layers;
};

// Backpropagate dloss_dout (batch x out_dim) through the cached pass. Writes
// parameter gradients (overwriting; frozen layers get none) and returns the
// gradient with respect to the input. Throws StateError if the cache does not
// match the network and batch.
Matrix backward(const DenseNetwork& net, const ForwardCache& cache, Matrix dloss_dout,
                Gradients& grads);

// ---- losses ----------------------------------------------------------------

// Probabilities are clamped to [kProbEpsilon, 1 - kProbEpsilon] before logs.
inline constexpr double kProbEpsilon = 1e-7;

double clamp_prob(double p);

// Reconstruction loss of one training pair: squared error summed over both
// members' dimensions (channels contribute symmetrically).
double mse_loss(const Vector& pred_i, const Vector& pred_j, const Vector& target_i,
                const Vector& target_j);

// Binary cross-entropy of a predicted probability against label in {0,1}.
double cross_entropy_loss(double prob, int label);
double cross_entropy_grad(double prob, int label);

// Focal loss: -alpha * (1 - yhat)^gamma * log(yhat) where yhat is prob for
// label 1 and (1 - prob) for label 0. gamma = 0 reduces it to cross-entropy
// scaled by alpha.
double focal_loss(double prob, int label, double alpha, double gamma);
double focal_grad(double prob, int label, double alpha, double gamma);

// ---- optimizers ------------------------------------------------------------

enum class OptimizerRule { Sgd, Adam };

const char* to_string(OptimizerRule r);
OptimizerRule optimizer_rule_from_string(const std::string& name);

struct OptimizerConfig {
  OptimizerRule rule = OptimizerRule::Adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Per-parameter state; moment buffers mirror the parameter shapes.
struct OptimizerState {
  OptimizerConfig config;
  long long step_count = 0;
  std::vector<LayerGrads> m;
  std::vector<LayerGrads> v;

  static OptimizerState create(const DenseNetwork& net, const OptimizerConfig& config);
};

// Apply one update. Frozen layers are skipped entirely; their moments do not
// advance. Throws SchemaError if gradient shapes do not match the network.
void step(DenseNetwork& net, const Gradients& grads, OptimizerState& state);

// Xavier/Glorot uniform init, biases zero. Layers are filled in order,
// weights row by row, so a fixed seed gives identical parameters.
void xavier_init(DenseNetwork& net, Rng& rng);
void xavier_init(DenseLayer& layer, Rng& rng);

}  // namespace sigdiag
