#include "sigdiag/siamese.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <string>

namespace sigdiag {

double cosine_similarity(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw SchemaError("cosine_similarity: length mismatch (" + std::to_string(a.size()) +
                      " vs " + std::to_string(b.size()) + ")");
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < 1e-12 || nb < 1e-12) {
    return 0.0;
  }
  return dot / (na * nb);
}

namespace {

Vector dense_single(const DenseLayer& layer, const Vector& input) {
  if (input.size() != layer.in_dim()) {
    throw SchemaError("layer input length " + std::to_string(input.size()) +
                      " does not match in-dim " + std::to_string(layer.in_dim()));
  }
  Matrix x(1, input.size());
  std::copy(input.begin(), input.end(), x.row(0));
  Matrix y;
  kernels::linear_forward(x, layer.weights, layer.biases, y);
  apply_activation(layer.activation, y);
  return Vector(y.row(0), y.row(0) + y.cols);
}

// d cos(u,w) / du given the cosine s; zero when a norm degenerates.
void cosine_grad(const Vector& u, const Vector& w, double s, Vector& du) {
  du.assign(u.size(), 0.0);
  double nu = 0.0;
  double nw = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    nu += u[k] * u[k];
    nw += w[k] * w[k];
  }
  nu = std::sqrt(nu);
  nw = std::sqrt(nw);
  if (nu < 1e-12 || nw < 1e-12) {
    return;
  }
  const double inv = 1.0 / (nu * nw);
  const double self = s / (nu * nu);
  for (std::size_t k = 0; k < u.size(); ++k) {
    du[k] = w[k] * inv - self * u[k];
  }
}

}  // namespace

Vector similarity_feature(const SiameseHead& head, const Vector& code) {
  return dense_single(head.fc1, code);
}

VerificationOutputs verification_forward(const SiameseHead& head, const Vector& c_i,
                                         const Vector& c_j) {
  VerificationOutputs out;
  out.v_i = dense_single(head.fc1, c_i);
  out.v_j = dense_single(head.fc1, c_j);
  out.pair_similarity = cosine_similarity(out.v_i, out.v_j);
  out.prob_i = dense_single(head.cls_head, out.v_i)[0];
  out.prob_j = dense_single(head.cls_head, out.v_j)[0];
  return out;
}

double multitask_loss(const VerificationOutputs& outputs, bool same_label, int label_i,
                      int label_j, const LossWeights& weights) {
  const double mapped = (outputs.pair_similarity + 1.0) / 2.0;
  const double l_ver = focal_loss(mapped, same_label ? 1 : 0, weights.alpha, weights.gamma);
  const double l_cls =
      cross_entropy_loss(outputs.prob_i, label_i) + cross_entropy_loss(outputs.prob_j, label_j);
  return l_ver + l_cls;
}

SiameseHead train_siamese(const AutoencoderStack* stack, std::span<const Vector> subjects,
                          std::span<const Label> labels, std::span<const TrainingPair> pairs,
                          const SiameseConfig& config, SiameseStats* stats) {
  if (subjects.empty() || labels.size() != subjects.size()) {
    throw SchemaError("train_siamese: subjects and labels must align");
  }
  if (pairs.empty()) {
    throw InsufficientDataError("train_siamese: no training pairs");
  }
  if (config.sim_dim == 0 || config.batch_pairs == 0) {
    throw ConfigError("train_siamese: sim_dim and batch_pairs must be positive");
  }
  if (config.loss.alpha <= 0.0 || config.loss.gamma < 0.0) {
    throw ConfigError("train_siamese: alpha must be positive, gamma non-negative");
  }
  const std::size_t dim = subjects.front().size();
  for (const Vector& v : subjects) {
    if (v.size() != dim) {
      throw SchemaError("train_siamese: inconsistent subject dimensions");
    }
  }
  for (const TrainingPair& p : pairs) {
    if (p.i >= subjects.size() || p.j >= subjects.size() || p.i == p.j) {
      throw SchemaError("train_siamese: pair indices out of range");
    }
    if (p.same_label != (labels[p.i] == labels[p.j])) {
      throw SchemaError("train_siamese: pair label flag contradicts subject labels");
    }
  }

  // Codes are fixed for the whole phase: the compressor is frozen here, so
  // each subject is compressed exactly once.
  Matrix codes;
  if (stack != nullptr) {
    Matrix inputs(subjects.size(), dim);
    for (std::size_t s = 0; s < subjects.size(); ++s) {
      std::copy(subjects[s].begin(), subjects[s].end(), inputs.row(s));
    }
    codes = compress_batch(*stack, inputs);
  } else {
    codes.resize(subjects.size(), dim);
    for (std::size_t s = 0; s < subjects.size(); ++s) {
      std::copy(subjects[s].begin(), subjects[s].end(), codes.row(s));
    }
  }
  const std::size_t code_dim = codes.cols;

  Rng rng(config.seed);
  DenseNetwork head_net;
  head_net.layers.reserve(2);
  head_net.layers.emplace_back(code_dim, config.sim_dim, Activation::Identity);  // fc1
  head_net.layers.emplace_back(config.sim_dim, 1, Activation::Sigmoid);          // cls_head
  xavier_init(head_net, rng);
  const DenseLayer& fc1 = head_net.layers[0];
  const DenseLayer& cls = head_net.layers[1];

  OptimizerState opt = OptimizerState::create(head_net, config.optimizer);
  Gradients grads;
  grads.layers.resize(2);

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  Matrix c_batch;
  Matrix v_batch;
  Matrix p_batch;
  Matrix dv;
  Matrix delta_cls;
  Matrix dv_from_cls;
  Vector grad_u;
  Vector vu;
  Vector vw;

  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  bool warned = false;
  if (stats) {
    stats->epoch_loss.clear();
    stats->convergence_warning = false;
  }

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_pairs) {
      const std::size_t count = std::min(config.batch_pairs, order.size() - begin);
      const double inv_n = 1.0 / static_cast<double>(count);

      c_batch.resize(2 * count, code_dim);
      for (std::size_t p = 0; p < count; ++p) {
        const TrainingPair& pair = pairs[order[begin + p]];
        std::copy(codes.row(pair.i), codes.row(pair.i) + code_dim, c_batch.row(2 * p));
        std::copy(codes.row(pair.j), codes.row(pair.j) + code_dim, c_batch.row(2 * p + 1));
      }

      kernels::linear_forward(c_batch, fc1.weights, fc1.biases, v_batch);
      kernels::linear_forward(v_batch, cls.weights, cls.biases, p_batch);
      apply_activation(Activation::Sigmoid, p_batch);

      dv.resize(2 * count, config.sim_dim);
      std::fill(dv.data.begin(), dv.data.end(), 0.0);
      delta_cls.resize(2 * count, 1);

      double batch_loss = 0.0;
      for (std::size_t p = 0; p < count; ++p) {
        const TrainingPair& pair = pairs[order[begin + p]];
        const std::size_t ra = 2 * p;
        const std::size_t rb = 2 * p + 1;
        vu.assign(v_batch.row(ra), v_batch.row(ra) + config.sim_dim);
        vw.assign(v_batch.row(rb), v_batch.row(rb) + config.sim_dim);

        const double s = cosine_similarity(vu, vw);
        const double mapped = (s + 1.0) / 2.0;
        const int y_pair = pair.same_label ? 1 : 0;
        batch_loss += focal_loss(mapped, y_pair, config.loss.alpha, config.loss.gamma);
        const double dl_ds =
            0.5 * focal_grad(mapped, y_pair, config.loss.alpha, config.loss.gamma);

        cosine_grad(vu, vw, s, grad_u);
        for (std::size_t k = 0; k < config.sim_dim; ++k) {
          dv(ra, k) += dl_ds * inv_n * grad_u[k];
        }
        cosine_grad(vw, vu, s, grad_u);
        for (std::size_t k = 0; k < config.sim_dim; ++k) {
          dv(rb, k) += dl_ds * inv_n * grad_u[k];
        }

        const int y_i = labels[pair.i] == Label::Asd ? 1 : 0;
        const int y_j = labels[pair.j] == Label::Asd ? 1 : 0;
        const double p_i = p_batch(ra, 0);
        const double p_j = p_batch(rb, 0);
        batch_loss += cross_entropy_loss(p_i, y_i) + cross_entropy_loss(p_j, y_j);
        // Sigmoid + CE collapses to (p - y) at the pre-activation.
        delta_cls(ra, 0) = (p_i - static_cast<double>(y_i)) * inv_n;
        delta_cls(rb, 0) = (p_j - static_cast<double>(y_j)) * inv_n;
      }
      loss_sum += batch_loss;
      batch_loss *= inv_n;

      kernels::linear_backward_params(v_batch, delta_cls, grads.layers[1].dw,
                                      grads.layers[1].db);
      kernels::linear_backward_data(delta_cls, cls.weights, dv_from_cls);
      for (std::size_t idx = 0; idx < dv.data.size(); ++idx) {
        dv.data[idx] += dv_from_cls.data[idx];
      }
      kernels::linear_backward_params(c_batch, dv, grads.layers[0].dw, grads.layers[0].db);
      step(head_net, grads, opt);
    }

    const double epoch_loss = loss_sum / static_cast<double>(pairs.size());
    if (stats) {
      stats->epoch_loss.push_back(epoch_loss);
    }
    if (epoch_loss < best) {
      best = epoch_loss;
      since_best = 0;
    } else {
      ++since_best;
      if (since_best >= config.patience && !warned) {
        warned = true;
        std::cerr << "warning: siamese loss has not improved for " << since_best
                  << " epochs\n";
      }
    }
  }
  if (stats) {
    stats->convergence_warning = warned;
  }

  SiameseHead head;
  head.fc1 = std::move(head_net.layers[0]);
  head.cls_head = std::move(head_net.layers[1]);

  if (stats) {
    std::size_t correct = 0;
    for (const TrainingPair& pair : pairs) {
      Vector ci(codes.row(pair.i), codes.row(pair.i) + code_dim);
      Vector cj(codes.row(pair.j), codes.row(pair.j) + code_dim);
      const Vector vi = similarity_feature(head, ci);
      const Vector vj = similarity_feature(head, cj);
      const double s = cosine_similarity(vi, vj);
      const bool predicted_same = (s + 1.0) / 2.0 > 0.5;
      if (predicted_same == pair.same_label) {
        ++correct;
      }
    }
    stats->train_verification_accuracy =
        static_cast<double>(correct) / static_cast<double>(pairs.size());
  }
  return head;
}

}  // namespace sigdiag
