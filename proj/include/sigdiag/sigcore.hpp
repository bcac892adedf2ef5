#pragma once

#include <cstddef>
#include <vector>

#include "sigdiag/linalg.hpp"

namespace sigdiag {

// A path given by sample points joined with straight segments. All points
// must share one dimension d >= 1 and there must be at least two of them.
struct PiecewiseLinearPath {
  std::vector<Vector> points;

  std::size_t dimension() const { return points.empty() ? 0 : points.front().size(); }
  void validate() const;
};

// Truncated signature: the iterated-integral terms of levels 1..level,
// concatenated. Within level k the d^k terms are ordered lexicographically by
// multi-index (i1,...,ik), first index slowest, so the flat position of a
// term inside its level block is sum_j i_j * d^(k-j) with 0-based indices.
struct SignatureVector {
  std::size_t dimension = 0;
  std::size_t level = 0;
  Vector terms;

  // Total term count d + d^2 + ... + d^m; throws CapacityError on overflow.
  static std::size_t term_count(std::size_t dimension, std::size_t level);

  // Offset of the level-k block in terms, 1 <= k <= level.
  std::size_t level_offset(std::size_t k) const;
  std::size_t level_size(std::size_t k) const;
};

// Default cap on the total number of terms a single call may produce.
inline constexpr std::size_t kDefaultTermCap = 1u << 22;

// Truncated signature of a piecewise-linear path. Per segment the level-k
// block is the k-fold tensor power of the displacement divided by k!;
// segments are combined with chen_concat.
SignatureVector signature(const PiecewiseLinearPath& path, std::size_t level,
                          std::size_t term_cap = kDefaultTermCap);

// Signature of the concatenated path from the signatures of its halves:
// out_k = sum over splits a+b=k of s1_a (x) s2_b, with level 0 equal to 1.
SignatureVector chen_concat(const SignatureVector& first, const SignatureVector& second);

}  // namespace sigdiag
