#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sigdiag/linalg.hpp"
#include "sigdiag/sigcore.hpp"

namespace sigdiag {

inline constexpr std::size_t kRegionCount = 70;
inline constexpr std::size_t kRegionsPerHemisphere = 35;

enum class Label : std::uint8_t { Asd, Nc };
enum class Gender : std::uint8_t { Male, Female };

const char* to_string(Label l);
const char* to_string(Gender g);
Label label_from_string(const std::string& s);
Gender gender_from_string(const std::string& s);

// Cortical region names, left hemisphere first. Index r maps to
// kRegionNames[r]; r % kRegionsPerHemisphere identifies the region within its
// hemisphere.
extern const std::array<const char*, kRegionCount> kRegionNames;

// One subject's longitudinal measurements: per-region surface area and mean
// thickness at both visits, plus total brain volume.
struct SubjectRecord {
  std::string subject_id;
  Label label = Label::Nc;
  Gender gender = Gender::Male;
  std::array<double, kRegionCount> area_6m{};
  std::array<double, kRegionCount> thickness_6m{};
  std::array<double, kRegionCount> area_12m{};
  std::array<double, kRegionCount> thickness_12m{};
  double volume_6m = 0.0;
  double volume_12m = 0.0;

  // All measurements must be finite and positive.
  void validate() const;
};

// Index map of the assembled vector. Defaults give the standard 1265-wide
// layout: per region [area6, thick6, area12, thick12, signature terms], then
// [vol6, vol12, volume signature terms], then the gender one-hot.
struct FeatureLayout {
  std::size_t cortical_level = 3;
  std::size_t volume_level = 1;

  std::size_t cortical_ps_terms() const;  // 14 at level 3
  std::size_t region_width() const;       // 18 at level 3
  std::size_t region_offset(std::size_t r) const;
  std::size_t volume_offset() const;  // 1260
  std::size_t volume_width() const;   // 3 at level 1
  std::size_t gender_offset() const;  // 1263
  std::size_t total_dim() const;      // 1265
};

struct FeatureVector {
  Vector values;
};

struct BinarizedVector {
  Vector bits;  // entries are exactly 0.0 or 1.0
};

struct BinarizationThresholds {
  Vector medians;  // one per feature dimension
};

// Assemble one subject's feature vector. The per-region signature is taken
// over the two-point path (area, thickness) at 6 then 12 months; the volume
// signature over (vol6) -> (vol12).
FeatureVector assemble_feature(const SubjectRecord& record, const FeatureLayout& layout = {});

// Per-dimension medians over a training set (at least two vectors).
BinarizationThresholds fit_thresholds(std::span<const FeatureVector> train);

// bit = 1 where value is strictly greater than its threshold, else 0.
BinarizedVector binarize(const FeatureVector& features, const BinarizationThresholds& t);

// ---- synthetic cohorts -----------------------------------------------------

// Regions whose measurements and growth rates carry the group signal in
// synthetic cohorts; every other dimension is label-independent noise.
inline constexpr std::array<std::size_t, 12> kSignalRegions = {2,  6,  11, 19, 26, 33,
                                                               40, 47, 54, 61, 66, 69};

struct SynthConfig {
  std::size_t n_asd = 30;
  std::size_t n_nc = 127;
  // Group mean shift on signal regions, in units of the within-group sd.
  double effect_size = 0.0;
  std::uint64_t seed = 0;
};

// Deterministic synthetic cohort: first n_asd records labelled ASD, then n_nc
// labelled NC. Gender is drawn independently of the label.
std::vector<SubjectRecord> generate_synthetic_cohort(const SynthConfig& config);

// ---- cohort CSV ------------------------------------------------------------

void write_subject_csv(const std::string& path, std::span<const SubjectRecord> records);
std::vector<SubjectRecord> read_subject_csv(const std::string& path);

}  // namespace sigdiag
