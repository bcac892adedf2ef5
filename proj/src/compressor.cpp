#include "sigdiag/compressor.hpp"

#include <algorithm>
#include <iostream>
#include <limits>
#include <numeric>
#include <string>

namespace sigdiag {

std::vector<TrainingPair> make_pairs(std::span<const Label> labels) {
  const std::size_t n = labels.size();
  if (n < 2) {
    throw InsufficientDataError("make_pairs: need at least two subjects, got " +
                                std::to_string(n));
  }
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw CapacityError("make_pairs: too many subjects");
  }
  std::vector<TrainingPair> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      pairs.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                       labels[i] == labels[j]});
    }
  }
  return pairs;
}

namespace {

void check_training_inputs(std::span<const Vector> subjects,
                           std::span<const TrainingPair> pairs) {
  if (subjects.empty()) {
    throw InsufficientDataError("autoencoder training: no subjects");
  }
  if (pairs.empty()) {
    throw InsufficientDataError("autoencoder training: no training pairs");
  }
  const std::size_t dim = subjects.front().size();
  if (dim == 0) {
    throw SchemaError("autoencoder training: zero-dimensional subjects");
  }
  for (const Vector& v : subjects) {
    if (v.size() != dim) {
      throw SchemaError("autoencoder training: inconsistent subject dimensions");
    }
  }
  for (const TrainingPair& p : pairs) {
    if (p.i >= subjects.size() || p.j >= subjects.size() || p.i == p.j) {
      throw SchemaError("autoencoder training: pair indices out of range");
    }
  }
}

// Two rows per pair, members interleaved, in the shuffled pair order.
void gather_pair_batch(std::span<const Vector> subjects, std::span<const TrainingPair> pairs,
                       std::span<const std::size_t> order, std::size_t begin, std::size_t count,
                       Matrix& x) {
  const std::size_t dim = subjects.front().size();
  x.resize(2 * count, dim);
  for (std::size_t p = 0; p < count; ++p) {
    const TrainingPair& pair = pairs[order[begin + p]];
    std::copy(subjects[pair.i].begin(), subjects[pair.i].end(), x.row(2 * p));
    std::copy(subjects[pair.j].begin(), subjects[pair.j].end(), x.row(2 * p + 1));
  }
}

// Shared reconstruction loop for both stages: minimize the pair MSE of the
// network output against its own input. Returns per-epoch mean per-pair loss.
void run_reconstruction_training(DenseNetwork& net, std::span<const Vector> subjects,
                                 std::span<const TrainingPair> pairs,
                                 const AutoencoderConfig& config, std::size_t epochs, Rng& rng,
                                 const char* stage_name, std::vector<double>& epoch_losses,
                                 bool& convergence_warning) {
  OptimizerState opt = OptimizerState::create(net, config.optimizer);
  Gradients grads;
  ForwardCache cache;
  Matrix x;
  Matrix dy;

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  epoch_losses.clear();
  epoch_losses.reserve(epochs);

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_pairs) {
      const std::size_t count = std::min(config.batch_pairs, order.size() - begin);
      gather_pair_batch(subjects, pairs, order, begin, count, x);
      const Matrix y = forward(net, x, &cache);

      // Eq.-3 style batch loss: squared error over both members of every
      // pair, divided by the number of pairs in the batch.
      const double inv_n = 1.0 / static_cast<double>(count);
      double batch_loss = 0.0;
      dy.resize(y.rows, y.cols);
      for (std::size_t idx = 0; idx < y.data.size(); ++idx) {
        const double e = y.data[idx] - x.data[idx];
        batch_loss += e * e;
        dy.data[idx] = 2.0 * e * inv_n;
      }
      batch_loss *= inv_n;
      loss_sum += batch_loss * static_cast<double>(count);

      backward(net, cache, std::move(dy), grads);
      dy = Matrix();
      step(net, grads, opt);
    }
    const double epoch_loss = loss_sum / static_cast<double>(pairs.size());
    epoch_losses.push_back(epoch_loss);

    if (epoch_loss < best) {
      best = epoch_loss;
      since_best = 0;
    } else {
      ++since_best;
      if (since_best >= config.patience && !convergence_warning) {
        convergence_warning = true;
        std::cerr << "warning: " << stage_name << " reconstruction loss has not improved for "
                  << since_best << " epochs\n";
      }
    }
  }
}

}  // namespace

AutoencoderStack train_hierarchical(std::span<const Vector> subjects,
                                    std::span<const TrainingPair> pairs,
                                    const AutoencoderConfig& config, TrainStats* stats) {
  check_training_inputs(subjects, pairs);
  if (config.hidden_dim == 0 || config.code_dim == 0) {
    throw ConfigError("autoencoder dimensions must be positive");
  }
  if (config.batch_pairs == 0) {
    throw ConfigError("batch_pairs must be positive");
  }
  const std::size_t dim = subjects.front().size();

  Rng rng(config.seed);
  AutoencoderStack stack;
  stack.net.layers.reserve(4);
  stack.net.layers.emplace_back(dim, config.hidden_dim, Activation::Relu);
  stack.net.layers.emplace_back(config.hidden_dim, config.code_dim, Activation::Relu);
  stack.net.layers.emplace_back(config.code_dim, config.hidden_dim, Activation::Relu);
  stack.net.layers.emplace_back(config.hidden_dim, dim, Activation::Sigmoid);
  xavier_init(stack.net, rng);

  TrainStats local;
  TrainStats& st = stats ? *stats : local;

  // Stage 1: the outer shell trains alone as a shallow autoencoder.
  stack.stage = StackStage::OuterTraining;
  {
    DenseNetwork outer;
    outer.layers.reserve(2);
    outer.layers.push_back(std::move(stack.net.layers[0]));
    outer.layers.push_back(std::move(stack.net.layers[3]));
    run_reconstruction_training(outer, subjects, pairs, config, config.outer_epochs, rng,
                                "stage 1", st.outer_epoch_loss, st.outer_convergence_warning);
    stack.net.layers[0] = std::move(outer.layers[0]);
    stack.net.layers[3] = std::move(outer.layers[1]);
  }
  stack.stage = StackStage::InnerTraining;
  if (config.stage_hook) {
    config.stage_hook(1, stack);
  }

  // Stage 2: freeze the shell, insert the inner pair, train against the full
  // four-layer reconstruction of the input.
  stack.net.layers[0].frozen = true;
  stack.net.layers[3].frozen = true;
  run_reconstruction_training(stack.net, subjects, pairs, config, config.inner_epochs, rng,
                              "stage 2", st.inner_epoch_loss, st.inner_convergence_warning);
  stack.net.layers[0].frozen = false;
  stack.net.layers[3].frozen = false;

  stack.stage = StackStage::Trained;
  if (config.stage_hook) {
    config.stage_hook(2, stack);
  }
  return stack;
}

Matrix compress_batch(const AutoencoderStack& stack, const Matrix& inputs) {
  if (stack.stage != StackStage::Trained) {
    throw StateError("compress: stack is not trained");
  }
  if (inputs.cols != stack.net.in_dim()) {
    throw SchemaError("compress: input width " + std::to_string(inputs.cols) +
                      " does not match stack input " + std::to_string(stack.net.in_dim()));
  }
  Matrix hidden;
  Matrix code;
  kernels::linear_forward(inputs, stack.outer_encoder().weights, stack.outer_encoder().biases,
                          hidden);
  apply_activation(stack.outer_encoder().activation, hidden);
  kernels::linear_forward(hidden, stack.inner_encoder().weights, stack.inner_encoder().biases,
                          code);
  apply_activation(stack.inner_encoder().activation, code);
  return code;
}

Vector compress(const AutoencoderStack& stack, const Vector& input) {
  Matrix m(1, input.size());
  std::copy(input.begin(), input.end(), m.row(0));
  const Matrix code = compress_batch(stack, m);
  return Vector(code.row(0), code.row(0) + code.cols);
}

}  // namespace sigdiag
