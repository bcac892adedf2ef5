#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sigdiag/compressor.hpp"
#include "sigdiag/nn.hpp"

namespace sigdiag {

// Focal-loss weights for the verification branch.
struct LossWeights {
  double alpha = 1.0;
  double gamma = 2.0;
};

// fc1 produces the similarity feature from a compressed code and is shared
// between the two channels; cls_head is a sigmoid unit on the similarity
// feature, shared between both classification branches. fc1 carries the
// identity activation: the cosine needs signed components to reach its full
// [-1,1] range.
struct SiameseHead {
  DenseLayer fc1;
  DenseLayer cls_head;
};

struct VerificationOutputs {
  double pair_similarity = 0.0;  // cosine of the two similarity features
  double prob_i = 0.0;           // per-member class probabilities
  double prob_j = 0.0;
  Vector v_i;
  Vector v_j;
};

// dot(a,b) / (|a| |b|); 0 when either norm is below 1e-12.
double cosine_similarity(const Vector& a, const Vector& b);

// fc1 applied to one code.
Vector similarity_feature(const SiameseHead& head, const Vector& code);

// Full dual-channel forward for a pair of codes.
VerificationOutputs verification_forward(const SiameseHead& head, const Vector& c_i,
                                         const Vector& c_j);

// L_ver + L_cls: focal loss on the similarity mapped to (0,1) via
// p = (cos + 1)/2, plus cross-entropy of both member branches. Labels are
// 1 for the positive class.
double multitask_loss(const VerificationOutputs& outputs, bool same_label, int label_i,
                      int label_j, const LossWeights& weights);

struct SiameseConfig {
  std::size_t sim_dim = 4;
  std::size_t epochs = 40;
  std::size_t batch_pairs = 64;
  std::size_t patience = 10;
  LossWeights loss;
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
};

struct SiameseStats {
  std::vector<double> epoch_loss;  // mean per-pair multitask loss
  double train_verification_accuracy = 0.0;
  bool convergence_warning = false;
};

// Train the head on pair batches. When stack is non-null the subjects are
// compressed through it once up front (the stack itself is const and never
// updated); when null the subject vectors feed fc1 directly. Label Asd maps
// to class 1.
SiameseHead train_siamese(const AutoencoderStack* stack, std::span<const Vector> subjects,
                          std::span<const Label> labels, std::span<const TrainingPair> pairs,
                          const SiameseConfig& config, SiameseStats* stats = nullptr);

}  // namespace sigdiag
