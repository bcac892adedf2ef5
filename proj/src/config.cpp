#include "sigdiag/config.hpp"

#include <cmath>

#include "sigdiag/common.hpp"

namespace sigdiag {

void RunConfig::validate() const {
  if (folds < 2) {
    throw ConfigError("folds must be at least 2");
  }
  if (cortical_level == 0 || volume_level == 0) {
    throw ConfigError("signature truncation levels must be positive");
  }
  if (hidden_dim == 0 || code_dim == 0 || sim_dim == 0) {
    throw ConfigError("layer sizes must be positive");
  }
  if (batch_pairs == 0) {
    throw ConfigError("batch_pairs must be positive");
  }
  if (patience == 0) {
    throw ConfigError("patience must be positive");
  }
  if (!(focal_alpha > 0.0) || !std::isfinite(focal_alpha)) {
    throw ConfigError("focal alpha must be positive");
  }
  if (focal_gamma < 0.0 || !std::isfinite(focal_gamma)) {
    throw ConfigError("focal gamma must be non-negative");
  }
  if (!(optimizer.learning_rate > 0.0) || !std::isfinite(optimizer.learning_rate)) {
    throw ConfigError("learning rate must be positive");
  }
  if (optimizer.beta1 < 0.0 || optimizer.beta1 >= 1.0 || optimizer.beta2 < 0.0 ||
      optimizer.beta2 >= 1.0) {
    throw ConfigError("adam betas must lie in [0, 1)");
  }
  if (!(optimizer.epsilon > 0.0)) {
    throw ConfigError("optimizer epsilon must be positive");
  }
  if (ablation.no_ps && ablation.no_ps_shrink) {
    throw ConfigError("no_ps and no_ps_shrink are mutually exclusive");
  }
  if (ablation.no_weight && ablation.comp_weight) {
    throw ConfigError("no_weight and comp_weight are mutually exclusive");
  }
  if (ablation.no_ae && ablation.comp_weight) {
    throw ConfigError("comp_weight needs the autoencoder (conflicts with no_ae)");
  }
}

}  // namespace sigdiag
