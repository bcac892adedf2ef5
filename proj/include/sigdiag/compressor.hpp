#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sigdiag/features.hpp"
#include "sigdiag/nn.hpp"

namespace sigdiag {

// Unordered subject index pair; i < j always. same_label mirrors the label
// agreement of the two members.
struct TrainingPair {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  bool same_label = false;
};

// All unordered pairs over a subject pool, sorted by (i, j). Throws
// InsufficientDataError for fewer than two subjects.
std::vector<TrainingPair> make_pairs(std::span<const Label> labels);

enum class StackStage { OuterTraining, InnerTraining, Trained };

// Dual-channel stacked autoencoder. Both pair members pass through the same
// parameters; the "channels" share weights. Layer order in net:
// [0] input -> hidden, [1] hidden -> code, [2] code -> hidden,
// [3] hidden -> input.
struct AutoencoderStack {
  DenseNetwork net;
  StackStage stage = StackStage::OuterTraining;

  const DenseLayer& outer_encoder() const { return net.layers[0]; }
  const DenseLayer& inner_encoder() const { return net.layers[1]; }
  const DenseLayer& inner_decoder() const { return net.layers[2]; }
  const DenseLayer& outer_decoder() const { return net.layers[3]; }
};

struct AutoencoderConfig {
  std::size_t hidden_dim = 128;
  std::size_t code_dim = 16;
  std::size_t outer_epochs = 4;
  std::size_t inner_epochs = 4;
  std::size_t batch_pairs = 64;
  std::size_t patience = 10;  // epochs without improvement before warning
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  // Called after each completed stage (1 or 2); used to audit the freeze
  // contract between stages.
  std::function<void(int stage, const AutoencoderStack&)> stage_hook;
};

struct TrainStats {
  std::vector<double> outer_epoch_loss;  // mean per-pair loss per epoch
  std::vector<double> inner_epoch_loss;
  bool outer_convergence_warning = false;
  bool inner_convergence_warning = false;
};

// Hierarchical training. Stage 1 trains the outer pair (layers 0 and 3) as a
// shallow autoencoder on the subject vectors. Stage 2 freezes them, inserts
// the inner pair, and trains only layers 1 and 2 against the full four-layer
// reconstruction of the input. The outer parameters are bit-identical before
// and after stage 2.
AutoencoderStack train_hierarchical(std::span<const Vector> subjects,
                                    std::span<const TrainingPair> pairs,
                                    const AutoencoderConfig& config,
                                    TrainStats* stats = nullptr);

// Encoder-only forward to the code layer. Requires a trained stack.
Vector compress(const AutoencoderStack& stack, const Vector& input);
Matrix compress_batch(const AutoencoderStack& stack, const Matrix& inputs);

}  // namespace sigdiag
