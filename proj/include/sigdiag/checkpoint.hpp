#pragma once

#include <string>

#include "sigdiag/config.hpp"
#include "sigdiag/inference.hpp"

namespace sigdiag {

// Everything needed to rerun one fold's inference path or to extract region
// importances later: preprocessing parameters, the (optional) autoencoder
// stack, and the Siamese head. Serialized as a versioned JSON document; the
// exact layout is documented in the README.
struct FoldModel {
  std::size_t fold_index = 0;
  FeatureLayout layout;
  AblationFlags ablation;

  BinarizationThresholds thresholds;  // empty under no_binarization
  Vector norm_min;                    // set under no_binarization
  Vector norm_range;

  bool has_stack = false;
  AutoencoderStack stack;
  SiameseHead head;
};

// Snapshot of one fold from a finished cross-validation run.
FoldModel fold_model_from_artifacts(const FoldArtifacts& fold, const RunConfig& config);

// JSON text of the model (schema "sigdiag.fold_model", format_version 1).
std::string fold_model_json(const FoldModel& model);

// Parse back; throws SchemaError on unknown schema/version or inconsistent
// shapes, IoError on malformed JSON.
FoldModel fold_model_from_json(const std::string& text);

void save_fold_model(const std::string& path, const FoldModel& model);
FoldModel load_fold_model(const std::string& path);

}  // namespace sigdiag
