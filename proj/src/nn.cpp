#include "sigdiag/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sigdiag {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::Sigmoid:
      return "sigmoid";
    case Activation::Relu:
      return "relu";
    case Activation::Identity:
      return "identity";
  }
  return "identity";
}

Activation activation_from_string(const std::string& name) {
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "relu") return Activation::Relu;
  if (name == "identity") return Activation::Identity;
  throw SchemaError("unknown activation '" + name + "'");
}

const char* to_string(OptimizerRule r) {
  return r == OptimizerRule::Sgd ? "sgd" : "adam";
}

OptimizerRule optimizer_rule_from_string(const std::string& name) {
  if (name == "sgd") return OptimizerRule::Sgd;
  if (name == "adam") return OptimizerRule::Adam;
  throw SchemaError("unknown optimizer rule '" + name + "'");
}

void DenseNetwork::validate_chain() const {
  if (layers.empty()) {
    throw SchemaError("network has no layers");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].in_dim() == 0 || layers[l].out_dim() == 0) {
      throw SchemaError("layer " + std::to_string(l) + " has a zero dimension");
    }
    if (layers[l].biases.size() != layers[l].out_dim()) {
      throw SchemaError("layer " + std::to_string(l) + " bias length mismatch");
    }
    if (l > 0 && layers[l].in_dim() != layers[l - 1].out_dim()) {
      throw SchemaError("layer " + std::to_string(l) + " input dimension " +
                        std::to_string(layers[l].in_dim()) + " does not match previous output " +
                        std::to_string(layers[l - 1].out_dim()));
    }
  }
}

void apply_activation(Activation act, Matrix& z) {
  switch (act) {
    case Activation::Identity:
      return;
    case Activation::Relu:
      for (double& v : z.data) {
        if (v < 0.0) v = 0.0;
      }
      return;
    case Activation::Sigmoid:
      for (double& v : z.data) {
        v = 1.0 / (1.0 + std::exp(-v));
      }
      return;
  }
}

void activation_backward(Activation act, const Matrix& post, Matrix& d) {
  switch (act) {
    case Activation::Identity:
      return;
    case Activation::Relu:
      for (std::size_t i = 0; i < d.data.size(); ++i) {
        if (post.data[i] <= 0.0) d.data[i] = 0.0;
      }
      return;
    case Activation::Sigmoid:
      for (std::size_t i = 0; i < d.data.size(); ++i) {
        const double p = post.data[i];
        d.data[i] *= p * (1.0 - p);
      }
      return;
  }
}

Matrix forward(const DenseNetwork& net, const Matrix& input, ForwardCache* cache) {
  net.validate_chain();
  if (input.cols != net.in_dim()) {
    throw SchemaError("forward: input width " + std::to_string(input.cols) +
                      " does not match network input " + std::to_string(net.in_dim()));
  }
  if (cache) {
    cache->input = input;
    cache->post.clear();
    cache->post.reserve(net.layers.size());
  }
  Matrix current = input;
  Matrix next;
  for (const DenseLayer& layer : net.layers) {
    kernels::linear_forward(current, layer.weights, layer.biases, next);
    apply_activation(layer.activation, next);
    if (cache) {
      cache->post.push_back(next);
    }
    std::swap(current, next);
  }
  return current;
}

Vector forward(const DenseNetwork& net, const Vector& input) {
  Matrix m(1, input.size());
  std::copy(input.begin(), input.end(), m.row(0));
  Matrix out = forward(net, m);
  return Vector(out.row(0), out.row(0) + out.cols);
}

Matrix backward(const DenseNetwork& net, const ForwardCache& cache, Matrix dloss_dout,
                Gradients& grads) {
  net.validate_chain();
  const std::size_t n_layers = net.layers.size();
  if (cache.post.size() != n_layers) {
    throw StateError("backward: cache does not match network depth");
  }
  if (dloss_dout.rows != cache.input.rows || dloss_dout.cols != net.out_dim()) {
    throw StateError("backward: loss gradient shape does not match cached batch");
  }
  for (std::size_t l = 0; l < n_layers; ++l) {
    if (cache.post[l].rows != cache.input.rows ||
        cache.post[l].cols != net.layers[l].out_dim()) {
      throw StateError("backward: stale forward cache");
    }
  }
  if (grads.layers.size() != n_layers) {
    grads.layers.resize(n_layers);
  }

  Matrix delta = std::move(dloss_dout);
  Matrix dprev;
  for (std::size_t l = n_layers; l-- > 0;) {
    const DenseLayer& layer = net.layers[l];
    activation_backward(layer.activation, cache.post[l], delta);
    const Matrix& below = (l == 0) ? cache.input : cache.post[l - 1];
    if (!layer.frozen) {
      kernels::linear_backward_params(below, delta, grads.layers[l].dw, grads.layers[l].db);
    } else {
      grads.layers[l].dw.resize(0, 0);
      grads.layers[l].db.clear();
    }
    kernels::linear_backward_data(delta, layer.weights, dprev);
    std::swap(delta, dprev);
  }
  return delta;
}

double clamp_prob(double p) {
  return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
}

double mse_loss(const Vector& pred_i, const Vector& pred_j, const Vector& target_i,
                const Vector& target_j) {
  if (pred_i.size() != target_i.size() || pred_j.size() != target_j.size()) {
    throw SchemaError("mse_loss: prediction/target length mismatch");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < pred_i.size(); ++k) {
    const double e = pred_i[k] - target_i[k];
    total += e * e;
  }
  for (std::size_t k = 0; k < pred_j.size(); ++k) {
    const double e = pred_j[k] - target_j[k];
    total += e * e;
  }
  return total;
}

double cross_entropy_loss(double prob, int label) {
  const double p = clamp_prob(prob);
  return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

double cross_entropy_grad(double prob, int label) {
  const double p = clamp_prob(prob);
  return label == 1 ? -1.0 / p : 1.0 / (1.0 - p);
}

double focal_loss(double prob, int label, double alpha, double gamma) {
  if (alpha < 0.0 || gamma < 0.0) {
    throw SchemaError("focal_loss: alpha and gamma must be non-negative");
  }
  const double yhat = clamp_prob(label == 1 ? prob : 1.0 - prob);
  return -alpha * std::pow(1.0 - yhat, gamma) * std::log(yhat);
}

double focal_grad(double prob, int label, double alpha, double gamma) {
  if (alpha < 0.0 || gamma < 0.0) {
    throw SchemaError("focal_grad: alpha and gamma must be non-negative");
  }
  const double yhat = clamp_prob(label == 1 ? prob : 1.0 - prob);
  // d/dyhat of -alpha (1-yhat)^gamma log(yhat); the gamma term vanishes when
  // gamma == 0 so the cross-entropy slope is recovered exactly.
  double g = -alpha * std::pow(1.0 - yhat, gamma) / yhat;
  if (gamma > 0.0) {
    g += alpha * gamma * std::pow(1.0 - yhat, gamma - 1.0) * std::log(yhat);
  }
  return label == 1 ? g : -g;
}

OptimizerState OptimizerState::create(const DenseNetwork& net, const OptimizerConfig& config) {
  OptimizerState state;
  state.config = config;
  state.m.resize(net.layers.size());
  state.v.resize(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const DenseLayer& layer = net.layers[l];
    state.m[l].dw = Matrix(layer.weights.rows, layer.weights.cols);
    state.m[l].db = Vector(layer.out_dim(), 0.0);
    state.v[l].dw = Matrix(layer.weights.rows, layer.weights.cols);
    state.v[l].db = Vector(layer.out_dim(), 0.0);
  }
  return state;
}

namespace {

void adam_update(double* param, const double* grad, double* m, double* v, std::size_t n,
                 const OptimizerConfig& cfg, double bias1, double bias2) {
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    const double mhat = m[i] / bias1;
    const double vhat = v[i] / bias2;
    param[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
  }
}

void sgd_update(double* param, const double* grad, std::size_t n, double lr) {
  for (std::size_t i = 0; i < n; ++i) {
    param[i] -= lr * grad[i];
  }
}

}  // namespace

void step(DenseNetwork& net, const Gradients& grads, OptimizerState& state) {
  if (grads.layers.size() != net.layers.size() || state.m.size() != net.layers.size()) {
    throw SchemaError("step: gradient or state layer count mismatch");
  }
  ++state.step_count;
  const OptimizerConfig& cfg = state.config;
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step_count));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step_count));
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    DenseLayer& layer = net.layers[l];
    if (layer.frozen) {
      continue;
    }
    const LayerGrads& g = grads.layers[l];
    if (!g.dw.same_shape(layer.weights) || g.db.size() != layer.biases.size()) {
      throw SchemaError("step: gradient shape mismatch at layer " + std::to_string(l));
    }
    if (cfg.rule == OptimizerRule::Adam) {
      adam_update(layer.weights.data.data(), g.dw.data.data(), state.m[l].dw.data.data(),
                  state.v[l].dw.data.data(), layer.weights.size(), cfg, bias1, bias2);
      adam_update(layer.biases.data(), g.db.data(), state.m[l].db.data(),
                  state.v[l].db.data(), layer.biases.size(), cfg, bias1, bias2);
    } else {
      sgd_update(layer.weights.data.data(), g.dw.data.data(), layer.weights.size(),
                 cfg.learning_rate);
      sgd_update(layer.biases.data(), g.db.data(), layer.biases.size(), cfg.learning_rate);
    }
  }
}

void xavier_init(DenseLayer& layer, Rng& rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(layer.in_dim() + layer.out_dim()));
  for (double& w : layer.weights.data) {
    w = rng.uniform(-limit, limit);
  }
  std::fill(layer.biases.begin(), layer.biases.end(), 0.0);
}

void xavier_init(DenseNetwork& net, Rng& rng) {
  for (DenseLayer& layer : net.layers) {
    xavier_init(layer, rng);
  }
}

}  // namespace sigdiag
