#pragma once

#include <cstdint>

#include "sigdiag/nn.hpp"

namespace sigdiag {

// Ablation arms. Flags are independent toggles except for the combinations
// rejected by RunConfig::validate below.
struct AblationFlags {
  bool no_binarization = false;  // min-max normalize instead of median bits
  bool no_ps = false;            // zero the cortical signature segments
  bool no_ps_shrink = false;     // drop the cortical signature segments (285-dim input)
  bool no_ae = false;            // feed preprocessed vectors straight to the head
  bool no_weight = false;        // uniform voting weights
  bool comp_weight = false;      // weights from compressed codes instead of bits
  bool no_gender = false;        // zero the gender one-hot
};

struct RunConfig {
  std::uint64_t seed = 42;
  std::size_t folds = 10;

  std::size_t cortical_level = 3;
  std::size_t volume_level = 1;

  std::size_t hidden_dim = 128;
  std::size_t code_dim = 16;
  std::size_t sim_dim = 4;

  // Pair epochs are expensive: every subject recurs in ~n_train pairs, so one
  // pass over all pairs revisits each subject ~140 times at cohort scale.
  // These budgets keep a two-cohort 10-fold evaluation within minutes on one
  // core while converging on separable cohorts; raise them for harder data.
  std::size_t outer_epochs = 4;
  std::size_t inner_epochs = 4;
  std::size_t siamese_epochs = 40;
  std::size_t batch_pairs = 64;
  std::size_t patience = 10;

  double focal_alpha = 1.0;
  double focal_gamma = 2.0;
  OptimizerConfig optimizer;

  AblationFlags ablation;

  // Upper bound on concurrently trained folds; 0 = hardware default.
  std::size_t jobs = 0;

  // Throws ConfigError on invalid values or flag combinations.
  void validate() const;
};

}  // namespace sigdiag
