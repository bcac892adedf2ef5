#include "sigdiag/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sigdiag/io_util.hpp"

namespace sigdiag {

ImportanceVector importance_backward(std::span<const DenseLayer> layers) {
  if (layers.empty()) {
    throw SchemaError("importance_backward: no layers");
  }
  for (std::size_t l = 1; l < layers.size(); ++l) {
    if (layers[l].in_dim() != layers[l - 1].out_dim()) {
      throw SchemaError("importance_backward: layer dimensions do not chain");
    }
  }

  Vector factors(layers.back().out_dim(), 1.0);
  Vector wprime;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Matrix& w = layers[l].weights;  // out x in
    const std::size_t out = w.rows;
    const std::size_t in = w.cols;
    Vector prev(in, 0.0);
    for (std::size_t j = 0; j < out; ++j) {
      const double* wr = w.row(j);
      wprime.resize(in);
      for (std::size_t k = 0; k < in; ++k) {
        wprime[k] = factors[j] * std::abs(wr[k]);
      }
      // Entries strictly below the fan-in median are discarded; ties stay.
      const double med = median_of(wprime);
      double fj = factors[j];
      for (std::size_t k = 0; k < in; ++k) {
        if (wprime[k] < med) {
          continue;
        }
        prev[k] += fj * wprime[k];
      }
    }
    factors = std::move(prev);
  }
  ImportanceVector out;
  out.values = std::move(factors);
  return out;
}

ImportanceVector input_importance(const AutoencoderStack& stack) {
  if (stack.stage != StackStage::Trained) {
    throw StateError("input_importance: stack is not trained");
  }
  return importance_backward(std::span<const DenseLayer>(stack.net.layers.data(), 2));
}

namespace {

double segment_sum(const Vector& values, std::size_t begin, std::size_t count) {
  double s = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    s += values[begin + k];
  }
  return s;
}

}  // namespace

RegionImportanceReport aggregate_regions(const ImportanceVector& imp,
                                         const FeatureLayout& layout) {
  if (imp.values.size() != layout.total_dim()) {
    throw SchemaError("aggregate_regions: importance length " +
                      std::to_string(imp.values.size()) + " does not match layout width " +
                      std::to_string(layout.total_dim()));
  }

  RegionImportanceReport report;
  report.regions.resize(kRegionCount);
  for (std::size_t r = 0; r < kRegionCount; ++r) {
    RegionScore& score = report.regions[r];
    score.name = kRegionNames[r];
    score.hemisphere = r < kRegionsPerHemisphere ? 'L' : 'R';
    score.raw = segment_sum(imp.values, layout.region_offset(r), layout.region_width());
  }
  report.volume_raw = segment_sum(imp.values, layout.volume_offset(), layout.volume_width());
  report.gender_raw = segment_sum(imp.values, layout.gender_offset(), 2);

  double lo = report.regions.front().raw;
  double hi = lo;
  for (const RegionScore& s : report.regions) {
    lo = std::min(lo, s.raw);
    hi = std::max(hi, s.raw);
  }
  if (hi > lo) {
    const double scale = 0.8 / (hi - lo);
    for (RegionScore& s : report.regions) {
      s.normalized = 0.2 + (s.raw - lo) * scale;
    }
    report.volume_normalized = 0.2 + (report.volume_raw - lo) * scale;
    report.gender_normalized = 0.2 + (report.gender_raw - lo) * scale;
  } else {
    // Degenerate spread: every region ties, everything maps to 1.
    for (RegionScore& s : report.regions) {
      s.normalized = 1.0;
    }
    report.volume_normalized = 1.0;
    report.gender_normalized = 1.0;
  }

  // Rank by descending raw score; ties break toward the lower region index so
  // reruns produce identical reports.
  std::vector<std::size_t> by_score(kRegionCount);
  std::iota(by_score.begin(), by_score.end(), std::size_t{0});
  std::stable_sort(by_score.begin(), by_score.end(), [&](std::size_t a, std::size_t b) {
    return report.regions[a].raw > report.regions[b].raw;
  });
  std::vector<RegionScore> sorted;
  sorted.reserve(kRegionCount);
  for (std::size_t pos = 0; pos < by_score.size(); ++pos) {
    RegionScore s = report.regions[by_score[pos]];
    s.rank = static_cast<int>(pos + 1);
    sorted.push_back(std::move(s));
  }
  report.regions = std::move(sorted);
  return report;
}

RegionImportanceReport aggregate_regions_mean(std::span<const ImportanceVector> per_fold,
                                              const FeatureLayout& layout) {
  if (per_fold.empty()) {
    throw InsufficientDataError("aggregate_regions_mean: no importance vectors");
  }
  ImportanceVector mean;
  mean.values.assign(layout.total_dim(), 0.0);
  for (const ImportanceVector& imp : per_fold) {
    if (imp.values.size() != layout.total_dim()) {
      throw SchemaError("aggregate_regions_mean: inconsistent importance lengths");
    }
    for (std::size_t k = 0; k < mean.values.size(); ++k) {
      mean.values[k] += imp.values[k];
    }
  }
  const double inv = 1.0 / static_cast<double>(per_fold.size());
  for (double& v : mean.values) {
    v *= inv;
  }
  return aggregate_regions(mean, layout);
}

std::string region_report_csv(const RegionImportanceReport& report) {
  std::string out = "region_name,hemisphere,raw_score,normalized_score,rank\n";
  for (const RegionScore& s : report.regions) {
    out += s.name;
    out += ',';
    out += s.hemisphere;
    out += ',';
    out += format_double(s.raw);
    out += ',';
    out += format_double(s.normalized);
    out += ',';
    out += std::to_string(s.rank);
    out += '\n';
  }
  out += "total_volume,-," + format_double(report.volume_raw) + ',' +
         format_double(report.volume_normalized) + ",\n";
  out += "gender,-," + format_double(report.gender_raw) + ',' +
         format_double(report.gender_normalized) + ",\n";
  return out;
}

}  // namespace sigdiag
