#include "sigdiag/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sigdiag/rng.hpp"

namespace sigdiag {

const char* to_string(Label l) { return l == Label::Asd ? "ASD" : "NC"; }
const char* to_string(Gender g) { return g == Gender::Male ? "M" : "F"; }

Label label_from_string(const std::string& s) {
  if (s == "ASD") return Label::Asd;
  if (s == "NC") return Label::Nc;
  throw SchemaError("unknown label '" + s + "' (expected ASD or NC)");
}

Gender gender_from_string(const std::string& s) {
  if (s == "M") return Gender::Male;
  if (s == "F") return Gender::Female;
  throw SchemaError("unknown gender '" + s + "' (expected M or F)");
}

namespace {

void check_positive(double v, const char* field, const std::string& id) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw SchemaError("subject '" + id + "': field " + field + " must be finite and positive");
  }
}

}  // namespace

void SubjectRecord::validate() const {
  for (std::size_t r = 0; r < kRegionCount; ++r) {
    check_positive(area_6m[r], "area_6m", subject_id);
    check_positive(thickness_6m[r], "thickness_6m", subject_id);
    check_positive(area_12m[r], "area_12m", subject_id);
    check_positive(thickness_12m[r], "thickness_12m", subject_id);
  }
  check_positive(volume_6m, "volume_6m", subject_id);
  check_positive(volume_12m, "volume_12m", subject_id);
}

std::size_t FeatureLayout::cortical_ps_terms() const {
  return SignatureVector::term_count(2, cortical_level);
}

std::size_t FeatureLayout::region_width() const { return 4 + cortical_ps_terms(); }

std::size_t FeatureLayout::region_offset(std::size_t r) const { return r * region_width(); }

std::size_t FeatureLayout::volume_offset() const { return kRegionCount * region_width(); }

std::size_t FeatureLayout::volume_width() const {
  return 2 + SignatureVector::term_count(1, volume_level);
}

std::size_t FeatureLayout::gender_offset() const { return volume_offset() + volume_width(); }

std::size_t FeatureLayout::total_dim() const { return gender_offset() + 2; }

FeatureVector assemble_feature(const SubjectRecord& record, const FeatureLayout& layout) {
  record.validate();
  FeatureVector out;
  out.values.assign(layout.total_dim(), 0.0);

  PiecewiseLinearPath path;
  path.points = {Vector(2), Vector(2)};
  for (std::size_t r = 0; r < kRegionCount; ++r) {
    const std::size_t base = layout.region_offset(r);
    out.values[base + 0] = record.area_6m[r];
    out.values[base + 1] = record.thickness_6m[r];
    out.values[base + 2] = record.area_12m[r];
    out.values[base + 3] = record.thickness_12m[r];
    path.points[0][0] = record.area_6m[r];
    path.points[0][1] = record.thickness_6m[r];
    path.points[1][0] = record.area_12m[r];
    path.points[1][1] = record.thickness_12m[r];
    const SignatureVector sig = signature(path, layout.cortical_level);
    std::copy(sig.terms.begin(), sig.terms.end(), out.values.begin() + base + 4);
  }

  const std::size_t vo = layout.volume_offset();
  out.values[vo + 0] = record.volume_6m;
  out.values[vo + 1] = record.volume_12m;
  PiecewiseLinearPath vol_path;
  vol_path.points = {Vector{record.volume_6m}, Vector{record.volume_12m}};
  const SignatureVector vol_sig = signature(vol_path, layout.volume_level);
  std::copy(vol_sig.terms.begin(), vol_sig.terms.end(), out.values.begin() + vo + 2);

  const std::size_t go = layout.gender_offset();
  out.values[go + 0] = record.gender == Gender::Male ? 1.0 : 0.0;
  out.values[go + 1] = record.gender == Gender::Female ? 1.0 : 0.0;
  return out;
}

BinarizationThresholds fit_thresholds(std::span<const FeatureVector> train) {
  if (train.size() < 2) {
    throw InsufficientDataError("fit_thresholds: need at least two vectors, got " +
                                std::to_string(train.size()));
  }
  const std::size_t dim = train.front().values.size();
  for (const FeatureVector& f : train) {
    if (f.values.size() != dim) {
      throw SchemaError("fit_thresholds: inconsistent feature lengths");
    }
  }
  BinarizationThresholds t;
  t.medians.resize(dim);
  Vector column(train.size());
  for (std::size_t k = 0; k < dim; ++k) {
    for (std::size_t i = 0; i < train.size(); ++i) {
      column[i] = train[i].values[k];
    }
    t.medians[k] = median_of(column);
  }
  return t;
}

BinarizedVector binarize(const FeatureVector& features, const BinarizationThresholds& t) {
  if (features.values.size() != t.medians.size()) {
    throw SchemaError("binarize: feature length " + std::to_string(features.values.size()) +
                      " does not match threshold length " + std::to_string(t.medians.size()));
  }
  BinarizedVector b;
  b.bits.resize(features.values.size());
  for (std::size_t k = 0; k < features.values.size(); ++k) {
    b.bits[k] = features.values[k] > t.medians[k] ? 1.0 : 0.0;
  }
  return b;
}

namespace {

bool is_signal_region(std::size_t r) {
  return std::find(kSignalRegions.begin(), kSignalRegions.end(), r) != kSignalRegions.end();
}

std::string make_id(const char* prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%04zu", prefix, n);
  return buf;
}

}  // namespace

std::vector<SubjectRecord> generate_synthetic_cohort(const SynthConfig& config) {
  if (config.n_asd + config.n_nc == 0) {
    throw ConfigError("synthetic cohort must have at least one subject");
  }
  if (!std::isfinite(config.effect_size) || config.effect_size < 0.0) {
    throw ConfigError("effect size must be finite and non-negative");
  }
  Rng rng(config.seed);
  std::vector<SubjectRecord> cohort;
  cohort.reserve(config.n_asd + config.n_nc);

  // Rare measurement artifacts: any stored cell can be inflated by a
  // segmentation-glitch factor, independent of the label. Median statistics
  // shrug these off while range-based normalizations do not — the robustness
  // gap the binarization stage exists to exploit.
  constexpr double kSpikeProb = 0.01;
  const auto spiked = [&rng](double value) {
    return rng.uniform() < kSpikeProb ? value * rng.uniform(2.0, 5.0) : value;
  };

  // Draw order per subject is fixed (gender, per-region draws with their
  // spike draws, volume draws); changing it would silently change every
  // seeded cohort.
  for (std::size_t s = 0; s < config.n_asd + config.n_nc; ++s) {
    SubjectRecord rec;
    const bool asd = s < config.n_asd;
    rec.label = asd ? Label::Asd : Label::Nc;
    rec.subject_id = asd ? make_id("asd", s + 1) : make_id("nc", s + 1 - config.n_asd);
    rec.gender = rng.uniform() < 0.5 ? Gender::Male : Gender::Female;

    for (std::size_t r = 0; r < kRegionCount; ++r) {
      const double base_area = 250.0 + 17.0 * static_cast<double>(r);
      const double area_sd = 0.10 * base_area;
      const double base_thick = 2.1 + 0.012 * static_cast<double>(r);
      const double thick_sd = 0.22;

      double area6 = base_area + area_sd * rng.normal();
      double growth_a = 1.18 + 0.05 * rng.normal();
      double thick6 = base_thick + thick_sd * rng.normal();
      double growth_t = 1.06 + 0.025 * rng.normal();
      if (asd && is_signal_region(r)) {
        // Most of the group signal lives in the 6->12 month trajectory: the
        // growth rates shift by the full effect while the baselines shift by
        // only half of it, so snapshots overlap substantially and the
        // change-sensitive feature dimensions carry the bulk of the class
        // information.
        area6 += 0.5 * config.effect_size * area_sd;
        thick6 += 0.5 * config.effect_size * thick_sd;
        growth_a += config.effect_size * 0.05;
        growth_t += config.effect_size * 0.025;
      }
      area6 = std::max(area6, 1.0);
      thick6 = std::max(thick6, 0.2);
      growth_a = std::max(growth_a, 0.05);
      growth_t = std::max(growth_t, 0.05);
      rec.area_6m[r] = spiked(area6);
      rec.thickness_6m[r] = spiked(thick6);
      rec.area_12m[r] = spiked(area6 * growth_a);
      rec.thickness_12m[r] = spiked(thick6 * growth_t);
    }

    double vol6 = 5.5e5 + 4.5e4 * rng.normal();
    double growth_v = 1.16 + 0.03 * rng.normal();
    vol6 = std::max(vol6, 1e4);
    growth_v = std::max(growth_v, 0.05);
    rec.volume_6m = spiked(vol6);
    rec.volume_12m = spiked(vol6 * growth_v);
    cohort.push_back(std::move(rec));
  }
  return cohort;
}

}  // namespace sigdiag
