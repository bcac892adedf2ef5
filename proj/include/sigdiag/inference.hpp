#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sigdiag/compressor.hpp"
#include "sigdiag/config.hpp"
#include "sigdiag/features.hpp"
#include "sigdiag/rng.hpp"
#include "sigdiag/siamese.hpp"

namespace sigdiag {

// Voting weight source. Binarized is the standard arm; the other two are the
// "w/o weight" and "Comp_weight" ablations.
enum class WeightMode { Binarized, Uniform, Compressed };

// Test-phase view of one subject.
struct SubjectFeatures {
  Vector preprocessed;  // b: binarized bits (normalized values under ablation)
  Vector compressed;    // c: code-layer output
  Vector similarity;    // v: fc1 output
};

struct ReferenceBank {
  std::vector<SubjectFeatures> asd;  // D_a
  std::vector<SubjectFeatures> nc;   // D_n
};

struct VoteContribution {
  double weight = 0.0;
  double similarity = 0.0;
  Label ref_label = Label::Nc;
};

struct Verdict {
  Label predicted = Label::Nc;  // ASD iff score_asd > score_nc
  double score_asd = 0.0;       // S_a
  double score_nc = 0.0;        // S_n
  std::vector<VoteContribution> contributions;  // ASD references first
};

// Weighted vote of the test subject against the bank: S_a is the mean over
// ASD references of w_j * cos(v_test, v_j), S_n likewise; w_j depends on the
// mode. In Binarized mode negative weights are rejected (cosines of {0,1}
// vectors cannot be negative).
Verdict vote(const SubjectFeatures& test, const ReferenceBank& bank,
             WeightMode mode = WeightMode::Binarized);

struct MetricsReport {
  long long tp = 0;
  long long fp = 0;
  long long tn = 0;
  long long fn = 0;
  double accuracy = 0.0;
  double sensitivity = 0.0;  // TP / (TP + FN)
  double specificity = 0.0;  // TN / (TN + FP)
  double precision = 0.0;    // TP / (TP + FP)
  double f1 = 0.0;
  // Degenerate denominators produce a 0 metric plus the matching flag.
  bool sensitivity_degenerate = false;
  bool specificity_degenerate = false;
  bool precision_degenerate = false;
  bool f1_degenerate = false;
};

// (predicted, actual) pairs; Asd is the positive class.
MetricsReport compute_metrics(std::span<const std::pair<Label, Label>> predictions);

// Stratified fold assignment: per-class seeded shuffle, then consecutive
// slices; class counts per fold differ by at most one. Returns test-index
// lists per fold. Throws ConfigError when a fold would leave a training
// partition without one of the classes.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const Label> labels,
                                                       std::size_t k, Rng& rng);

struct PredictionRecord {
  std::string subject_id;
  std::size_t fold = 0;
  double score_asd = 0.0;
  double score_nc = 0.0;
  Label predicted = Label::Nc;
  Label actual = Label::Nc;
};

// Everything trained or decided inside one fold.
struct FoldArtifacts {
  std::size_t fold_index = 0;
  std::vector<std::size_t> test_indices;
  BinarizationThresholds thresholds;  // empty under no_binarization
  Vector norm_min;                    // set under no_binarization
  Vector norm_range;
  bool has_stack = false;
  AutoencoderStack stack;
  SiameseHead head;
  TrainStats stack_stats;
  SiameseStats head_stats;
  MetricsReport metrics;
  std::vector<PredictionRecord> predictions;
};

struct CrossValResult {
  MetricsReport pooled;
  std::vector<FoldArtifacts> folds;
};

// The full harness: stratify, then per fold fit thresholds on the training
// partition only, preprocess, train the compressor and head, build the bank,
// vote on the test partition; pool predictions across folds. Deterministic
// for a fixed config (fold workers draw from forked, fold-indexed streams).
CrossValResult run_cross_validation(std::span<const SubjectRecord> cohort,
                                    const RunConfig& config);

// Audit CSV content for the pooled predictions (header + one row each).
std::string audit_csv(std::span<const PredictionRecord> predictions);

}  // namespace sigdiag
