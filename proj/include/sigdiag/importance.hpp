#pragma once

#include <span>
#include <string>
#include <vector>

#include "sigdiag/compressor.hpp"
#include "sigdiag/features.hpp"

namespace sigdiag {

// Per-neuron importance factors at one layer boundary; non-negative.
struct ImportanceVector {
  Vector values;
};

// Backward importance iteration over a layer list. Output factors of the last
// layer start at 1; per layer (last to first) w' = I_j * |w_jk|, entries
// strictly below the per-output-neuron median of its fan-in w' are zeroed,
// and the previous boundary gets I_k = sum_j I_j * w'_jk.
ImportanceVector importance_backward(std::span<const DenseLayer> layers);

// Importance of the 1265 input dimensions under the trained encoder
// (layers 1-2 of the stack only). Throws StateError on an untrained stack.
ImportanceVector input_importance(const AutoencoderStack& stack);

struct RegionScore {
  std::string name;
  char hemisphere = 'L';
  double raw = 0.0;
  double normalized = 0.0;
  int rank = 0;
};

struct RegionImportanceReport {
  std::vector<RegionScore> regions;  // sorted by rank (descending score)
  double volume_raw = 0.0;
  double volume_normalized = 0.0;
  double gender_raw = 0.0;
  double gender_normalized = 0.0;
};

// Region score = sum of the 18 dimension importances of that region; volume
// and gender sum their own segments. Region scores are min-max mapped onto
// [0.2, 1]; volume and gender go through the same affine map and may land
// outside it. All-equal region scores map everything to 1.0.
RegionImportanceReport aggregate_regions(const ImportanceVector& imp,
                                         const FeatureLayout& layout = {});

// Average the raw per-dimension importances of several folds, then aggregate.
RegionImportanceReport aggregate_regions_mean(std::span<const ImportanceVector> per_fold,
                                              const FeatureLayout& layout = {});

// CSV rendering: region rows in rank order, then total_volume and gender.
std::string region_report_csv(const RegionImportanceReport& report);

}  // namespace sigdiag
