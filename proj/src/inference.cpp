#include "sigdiag/inference.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sigdiag/io_util.hpp"

namespace sigdiag {

Verdict vote(const SubjectFeatures& test, const ReferenceBank& bank, WeightMode mode) {
  if (bank.asd.empty() || bank.nc.empty()) {
    throw InsufficientDataError("vote: both reference partitions must be non-empty");
  }

  const auto weight_of = [&](const SubjectFeatures& ref) -> double {
    switch (mode) {
      case WeightMode::Uniform:
        return 1.0;
      case WeightMode::Compressed:
        return cosine_similarity(test.compressed, ref.compressed);
      case WeightMode::Binarized:
        break;
    }
    const double w = cosine_similarity(test.preprocessed, ref.preprocessed);
    if (w < 0.0) {
      throw SchemaError("vote: negative weight for supposedly binarized features");
    }
    return w;
  };

  Verdict verdict;
  verdict.contributions.reserve(bank.asd.size() + bank.nc.size());
  double sum_asd = 0.0;
  for (const SubjectFeatures& ref : bank.asd) {
    const double w = weight_of(ref);
    const double s = cosine_similarity(test.similarity, ref.similarity);
    sum_asd += w * s;
    verdict.contributions.push_back({w, s, Label::Asd});
  }
  double sum_nc = 0.0;
  for (const SubjectFeatures& ref : bank.nc) {
    const double w = weight_of(ref);
    const double s = cosine_similarity(test.similarity, ref.similarity);
    sum_nc += w * s;
    verdict.contributions.push_back({w, s, Label::Nc});
  }
  verdict.score_asd = sum_asd / static_cast<double>(bank.asd.size());
  verdict.score_nc = sum_nc / static_cast<double>(bank.nc.size());
  verdict.predicted = verdict.score_asd > verdict.score_nc ? Label::Asd : Label::Nc;
  return verdict;
}

MetricsReport compute_metrics(std::span<const std::pair<Label, Label>> predictions) {
  if (predictions.empty()) {
    throw InsufficientDataError("compute_metrics: no predictions");
  }
  MetricsReport r;
  for (const auto& [predicted, actual] : predictions) {
    if (actual == Label::Asd) {
      predicted == Label::Asd ? ++r.tp : ++r.fn;
    } else {
      predicted == Label::Asd ? ++r.fp : ++r.tn;
    }
  }
  const double n = static_cast<double>(r.tp + r.fp + r.tn + r.fn);
  r.accuracy = static_cast<double>(r.tp + r.tn) / n;

  if (r.tp + r.fn > 0) {
    r.sensitivity = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
  } else {
    r.sensitivity_degenerate = true;
  }
  if (r.tn + r.fp > 0) {
    r.specificity = static_cast<double>(r.tn) / static_cast<double>(r.tn + r.fp);
  } else {
    r.specificity_degenerate = true;
  }
  if (r.tp + r.fp > 0) {
    r.precision = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
  } else {
    r.precision_degenerate = true;
  }
  const double pr = r.precision + r.sensitivity;
  if (pr > 0.0 && !r.precision_degenerate) {
    r.f1 = 2.0 * r.precision * r.sensitivity / pr;
  } else if (pr > 0.0) {
    // Precision undefined but recall positive cannot happen (tp>0 implies
    // tp+fp>0); kept for clarity.
    r.f1_degenerate = true;
  } else {
    r.f1_degenerate = true;
  }
  return r;
}

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const Label> labels,
                                                       std::size_t k, Rng& rng) {
  const std::size_t n = labels.size();
  if (k < 2) {
    throw ConfigError("stratified_folds: need at least 2 folds");
  }
  if (k > n) {
    throw ConfigError("stratified_folds: more folds (" + std::to_string(k) +
                      ") than subjects (" + std::to_string(n) + ")");
  }

  std::vector<std::size_t> asd_idx;
  std::vector<std::size_t> nc_idx;
  for (std::size_t i = 0; i < n; ++i) {
    (labels[i] == Label::Asd ? asd_idx : nc_idx).push_back(i);
  }
  rng.shuffle(asd_idx);
  rng.shuffle(nc_idx);

  // Deal each class round-robin, carrying the start offset from one class to
  // the next so the per-class remainders land on consecutive folds (mod k)
  // instead of always piling onto the first folds. Without the rotation,
  // leave-one-out on small classes leaves the trailing folds empty; with it,
  // total fold sizes still differ by at most one.
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t offset = 0;
  const auto deal = [&](const std::vector<std::size_t>& cls) {
    std::size_t cursor = 0;
    for (std::size_t f = 0; f < k; ++f) {
      const std::size_t take = cls.size() / k + (f < cls.size() % k ? 1 : 0);
      for (std::size_t t = 0; t < take; ++t) {
        folds[(offset + f) % k].push_back(cls[cursor++]);
      }
    }
    offset = (offset + cls.size() % k) % k;
  };
  deal(asd_idx);
  deal(nc_idx);
  for (std::vector<std::size_t>& fold : folds) {
    std::sort(fold.begin(), fold.end());
  }

  // Training partitions must keep both classes, otherwise the bank cannot be
  // built; fail before any training starts.
  for (std::size_t f = 0; f < k; ++f) {
    std::size_t test_asd = 0;
    std::size_t test_nc = 0;
    for (std::size_t idx : folds[f]) {
      (labels[idx] == Label::Asd ? test_asd : test_nc)++;
    }
    if (asd_idx.size() - test_asd == 0 || nc_idx.size() - test_nc == 0) {
      throw ConfigError("stratified_folds: fold " + std::to_string(f) +
                        " leaves a training partition without one class");
    }
  }
  return folds;
}

namespace {

struct PreparedCohort {
  std::vector<Vector> features;  // after layout + ablation transforms
  std::vector<Label> labels;
  std::vector<std::string> ids;
};

PreparedCohort prepare_cohort(std::span<const SubjectRecord> cohort, const RunConfig& config) {
  const FeatureLayout layout{config.cortical_level, config.volume_level};
  PreparedCohort prep;
  prep.features.reserve(cohort.size());
  prep.labels.reserve(cohort.size());
  prep.ids.reserve(cohort.size());

  for (const SubjectRecord& rec : cohort) {
    FeatureVector fv = assemble_feature(rec, layout);
    if (config.ablation.no_gender) {
      fv.values[layout.gender_offset()] = 0.0;
      fv.values[layout.gender_offset() + 1] = 0.0;
    }
    if (config.ablation.no_ps) {
      // Zero the cortical signature segments; the volume block keeps its
      // single growth term so the arm mirrors no_ps_shrink's 285-dim layout.
      for (std::size_t r = 0; r < kRegionCount; ++r) {
        const std::size_t base = layout.region_offset(r) + 4;
        std::fill_n(fv.values.begin() + base, layout.cortical_ps_terms(), 0.0);
      }
    }
    if (config.ablation.no_ps_shrink) {
      Vector reduced;
      reduced.reserve(4 * kRegionCount + layout.volume_width() + 2);
      for (std::size_t r = 0; r < kRegionCount; ++r) {
        const std::size_t base = layout.region_offset(r);
        reduced.insert(reduced.end(), fv.values.begin() + base, fv.values.begin() + base + 4);
      }
      reduced.insert(reduced.end(), fv.values.begin() + layout.volume_offset(),
                     fv.values.end());
      fv.values = std::move(reduced);
    }
    prep.features.push_back(std::move(fv.values));
    prep.labels.push_back(rec.label);
    prep.ids.push_back(rec.subject_id);
  }
  return prep;
}

FoldArtifacts run_fold(std::size_t fold_index, std::vector<std::size_t> test_indices,
                       const PreparedCohort& prep, const RunConfig& config,
                       std::uint64_t ae_seed, std::uint64_t head_seed) {
  FoldArtifacts fold;
  fold.fold_index = fold_index;
  fold.test_indices = std::move(test_indices);

  const std::size_t n = prep.features.size();
  std::vector<bool> in_test(n, false);
  for (std::size_t idx : fold.test_indices) {
    in_test[idx] = true;
  }
  std::vector<std::size_t> train_indices;
  train_indices.reserve(n - fold.test_indices.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_test[i]) {
      train_indices.push_back(i);
    }
  }

  const std::size_t dim = prep.features.front().size();

  // Preprocessing parameters come from the training partition only.
  std::vector<Vector> preprocessed(n);
  if (!config.ablation.no_binarization) {
    std::vector<FeatureVector> train_feats;
    train_feats.reserve(train_indices.size());
    for (std::size_t idx : train_indices) {
      train_feats.push_back(FeatureVector{prep.features[idx]});
    }
    fold.thresholds = fit_thresholds(train_feats);
    for (std::size_t i = 0; i < n; ++i) {
      preprocessed[i] = binarize(FeatureVector{prep.features[i]}, fold.thresholds).bits;
    }
  } else {
    fold.norm_min.assign(dim, 0.0);
    fold.norm_range.assign(dim, 0.0);
    Vector hi(dim, 0.0);
    for (std::size_t k = 0; k < dim; ++k) {
      double lo = prep.features[train_indices.front()][k];
      double up = lo;
      for (std::size_t t = 1; t < train_indices.size(); ++t) {
        const double v = prep.features[train_indices[t]][k];
        lo = std::min(lo, v);
        up = std::max(up, v);
      }
      fold.norm_min[k] = lo;
      fold.norm_range[k] = up - lo;
    }
    for (std::size_t i = 0; i < n; ++i) {
      Vector& out = preprocessed[i];
      out.resize(dim);
      for (std::size_t k = 0; k < dim; ++k) {
        const double range = fold.norm_range[k];
        if (range <= 0.0) {
          out[k] = 0.0;
        } else {
          out[k] = std::clamp((prep.features[i][k] - fold.norm_min[k]) / range, 0.0, 1.0);
        }
      }
    }
  }

  std::vector<Vector> train_vectors;
  std::vector<Label> train_labels;
  train_vectors.reserve(train_indices.size());
  train_labels.reserve(train_indices.size());
  for (std::size_t idx : train_indices) {
    train_vectors.push_back(preprocessed[idx]);
    train_labels.push_back(prep.labels[idx]);
  }

  const std::vector<TrainingPair> pairs = make_pairs(train_labels);

  if (!config.ablation.no_ae) {
    AutoencoderConfig acfg;
    acfg.hidden_dim = config.hidden_dim;
    acfg.code_dim = config.code_dim;
    acfg.outer_epochs = config.outer_epochs;
    acfg.inner_epochs = config.inner_epochs;
    acfg.batch_pairs = config.batch_pairs;
    acfg.patience = config.patience;
    acfg.optimizer = config.optimizer;
    acfg.seed = ae_seed;
    fold.stack = train_hierarchical(train_vectors, pairs, acfg, &fold.stack_stats);
    fold.has_stack = true;
  }

  SiameseConfig scfg;
  scfg.sim_dim = config.sim_dim;
  scfg.epochs = config.siamese_epochs;
  scfg.batch_pairs = config.batch_pairs;
  scfg.patience = config.patience;
  scfg.loss.alpha = config.focal_alpha;
  scfg.loss.gamma = config.focal_gamma;
  scfg.optimizer = config.optimizer;
  scfg.seed = head_seed;
  fold.head = train_siamese(fold.has_stack ? &fold.stack : nullptr, train_vectors,
                            train_labels, pairs, scfg, &fold.head_stats);

  // Per-subject features for the bank and the test subjects.
  const auto subject_features = [&](std::size_t idx) {
    SubjectFeatures sf;
    sf.preprocessed = preprocessed[idx];
    sf.compressed = fold.has_stack ? compress(fold.stack, sf.preprocessed) : sf.preprocessed;
    sf.similarity = similarity_feature(fold.head, sf.compressed);
    return sf;
  };

  ReferenceBank bank;
  for (std::size_t pos = 0; pos < train_indices.size(); ++pos) {
    const std::size_t idx = train_indices[pos];
    (prep.labels[idx] == Label::Asd ? bank.asd : bank.nc).push_back(subject_features(idx));
  }

  WeightMode mode = WeightMode::Binarized;
  if (config.ablation.no_weight) {
    mode = WeightMode::Uniform;
  } else if (config.ablation.comp_weight) {
    mode = WeightMode::Compressed;
  }

  std::vector<std::pair<Label, Label>> outcome;
  outcome.reserve(fold.test_indices.size());
  for (std::size_t idx : fold.test_indices) {
    const SubjectFeatures sf = subject_features(idx);
    const Verdict verdict = vote(sf, bank, mode);
    PredictionRecord rec;
    rec.subject_id = prep.ids[idx];
    rec.fold = fold_index;
    rec.score_asd = verdict.score_asd;
    rec.score_nc = verdict.score_nc;
    rec.predicted = verdict.predicted;
    rec.actual = prep.labels[idx];
    fold.predictions.push_back(std::move(rec));
    outcome.emplace_back(verdict.predicted, prep.labels[idx]);
  }
  fold.metrics = compute_metrics(outcome);
  return fold;
}

}  // namespace

CrossValResult run_cross_validation(std::span<const SubjectRecord> cohort,
                                    const RunConfig& config) {
  config.validate();
  std::size_t n_asd = 0;
  std::size_t n_nc = 0;
  for (const SubjectRecord& rec : cohort) {
    (rec.label == Label::Asd ? n_asd : n_nc)++;
  }
  if (n_asd < 2 || n_nc < 2) {
    throw InsufficientDataError("cross-validation needs at least 2 subjects per class, got " +
                                std::to_string(n_asd) + " ASD / " + std::to_string(n_nc) +
                                " NC");
  }

  const PreparedCohort prep = prepare_cohort(cohort, config);

  Rng master(config.seed);
  Rng split_rng = master.fork(0);
  std::vector<std::vector<std::size_t>> folds =
      stratified_folds(prep.labels, config.folds, split_rng);

  // Seeds are drawn per fold up front so fold execution order cannot matter.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> fold_seeds(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    Rng fold_rng = master.fork(f + 1);
    fold_seeds[f] = {fold_rng.next_u64(), fold_rng.next_u64()};
  }

  CrossValResult result;
  result.folds.resize(folds.size());
  std::vector<std::exception_ptr> errors(folds.size());

  int n_jobs = 1;
#ifdef _OPENMP
  n_jobs = config.jobs == 0 ? omp_get_max_threads() : static_cast<int>(config.jobs);
  n_jobs = std::max(1, std::min<int>(n_jobs, static_cast<int>(folds.size())));
#endif

#pragma omp parallel for schedule(dynamic, 1) num_threads(n_jobs)
  for (std::size_t f = 0; f < folds.size(); ++f) {
    try {
      result.folds[f] = run_fold(f, std::move(folds[f]), prep, config, fold_seeds[f].first,
                                 fold_seeds[f].second);
    } catch (...) {
      errors[f] = std::current_exception();
    }
  }
  for (const std::exception_ptr& err : errors) {
    if (err) {
      std::rethrow_exception(err);
    }
  }

  std::vector<std::pair<Label, Label>> pooled;
  pooled.reserve(cohort.size());
  for (const FoldArtifacts& fold : result.folds) {
    for (const PredictionRecord& rec : fold.predictions) {
      pooled.emplace_back(rec.predicted, rec.actual);
    }
  }
  result.pooled = compute_metrics(pooled);
  return result;
}

std::string audit_csv(std::span<const PredictionRecord> predictions) {
  std::string out = "subject_id,fold,S_a,S_n,predicted,actual\n";
  for (const PredictionRecord& rec : predictions) {
    out += rec.subject_id;
    out += ',';
    out += std::to_string(rec.fold);
    out += ',';
    out += format_double(rec.score_asd);
    out += ',';
    out += format_double(rec.score_nc);
    out += ',';
    out += to_string(rec.predicted);
    out += ',';
    out += to_string(rec.actual);
    out += '\n';
  }
  return out;
}

}  // namespace sigdiag
