#include "sigdiag/sigcore.hpp"

#include <limits>
#include <string>

namespace sigdiag {

void PiecewiseLinearPath::validate() const {
  if (points.size() < 2) {
    throw SchemaError("path needs at least two points, got " + std::to_string(points.size()));
  }
  const std::size_t d = points.front().size();
  if (d == 0) {
    throw SchemaError("path dimension must be at least 1");
  }
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].size() != d) {
      throw SchemaError("path point " + std::to_string(i) + " has dimension " +
                        std::to_string(points[i].size()) + ", expected " + std::to_string(d));
    }
  }
}

std::size_t SignatureVector::term_count(std::size_t dimension, std::size_t level) {
  if (dimension == 0) {
    throw SchemaError("signature dimension must be at least 1");
  }
  if (level == 0) {
    throw SchemaError("signature level must be at least 1");
  }
  const std::size_t max = std::numeric_limits<std::size_t>::max();
  std::size_t total = 0;
  std::size_t block = 1;
  for (std::size_t k = 1; k <= level; ++k) {
    if (block > max / dimension) {
      throw CapacityError("signature term count overflows");
    }
    block *= dimension;
    if (total > max - block) {
      throw CapacityError("signature term count overflows");
    }
    total += block;
  }
  return total;
}

std::size_t SignatureVector::level_offset(std::size_t k) const {
  std::size_t off = 0;
  std::size_t block = 1;
  for (std::size_t j = 1; j < k; ++j) {
    block *= dimension;
    off += block;
  }
  return off;
}

std::size_t SignatureVector::level_size(std::size_t k) const {
  std::size_t block = 1;
  for (std::size_t j = 0; j < k; ++j) {
    block *= dimension;
  }
  return block;
}

namespace {

// Signature of one straight segment with displacement delta:
// level k equals delta^(x)k / k!.
SignatureVector segment_signature(const Vector& delta, std::size_t level, std::size_t total) {
  const std::size_t d = delta.size();
  SignatureVector sig;
  sig.dimension = d;
  sig.level = level;
  sig.terms.resize(total);

  for (std::size_t i = 0; i < d; ++i) {
    sig.terms[i] = delta[i];
  }
  std::size_t prev_off = 0;
  std::size_t prev_size = d;
  for (std::size_t k = 2; k <= level; ++k) {
    const std::size_t off = prev_off + prev_size;
    const std::size_t size = prev_size * d;
    const double inv_k = 1.0 / static_cast<double>(k);
    for (std::size_t q = 0; q < size; ++q) {
      sig.terms[off + q] = sig.terms[prev_off + q / d] * delta[q % d] * inv_k;
    }
    prev_off = off;
    prev_size = size;
  }
  return sig;
}

}  // namespace

SignatureVector signature(const PiecewiseLinearPath& path, std::size_t level,
                          std::size_t term_cap) {
  path.validate();
  const std::size_t d = path.dimension();
  const std::size_t total = SignatureVector::term_count(d, level);
  if (total > term_cap) {
    throw CapacityError("signature would produce " + std::to_string(total) +
                        " terms, cap is " + std::to_string(term_cap));
  }

  Vector delta(d);
  for (std::size_t i = 0; i < d; ++i) {
    delta[i] = path.points[1][i] - path.points[0][i];
  }
  SignatureVector result = segment_signature(delta, level, total);
  for (std::size_t s = 2; s < path.points.size(); ++s) {
    for (std::size_t i = 0; i < d; ++i) {
      delta[i] = path.points[s][i] - path.points[s - 1][i];
    }
    result = chen_concat(result, segment_signature(delta, level, total));
  }
  return result;
}

SignatureVector chen_concat(const SignatureVector& first, const SignatureVector& second) {
  if (first.dimension != second.dimension || first.level != second.level) {
    throw SchemaError("chen_concat: signatures disagree on dimension or level");
  }
  const std::size_t d = first.dimension;
  const std::size_t m = first.level;
  const std::size_t total = SignatureVector::term_count(d, m);
  if (first.terms.size() != total || second.terms.size() != total) {
    throw SchemaError("chen_concat: term storage has wrong length");
  }

  SignatureVector out;
  out.dimension = d;
  out.level = m;
  out.terms.resize(total);

  // Per level: both pure halves plus every interior split a + b = k. The
  // tensor product maps (prefix p, suffix q) to p * d^b + q.
  for (std::size_t k = 1; k <= m; ++k) {
    const std::size_t off_k = first.level_offset(k);
    const std::size_t size_k = first.level_size(k);
    for (std::size_t q = 0; q < size_k; ++q) {
      out.terms[off_k + q] = first.terms[off_k + q] + second.terms[off_k + q];
    }
    for (std::size_t a = 1; a < k; ++a) {
      const std::size_t b = k - a;
      const std::size_t off_a = first.level_offset(a);
      const std::size_t off_b = first.level_offset(b);
      const std::size_t size_b = first.level_size(b);
      for (std::size_t q = 0; q < size_k; ++q) {
        out.terms[off_k + q] +=
            first.terms[off_a + q / size_b] * second.terms[off_b + q % size_b];
      }
    }
  }
  return out;
}

}  // namespace sigdiag
