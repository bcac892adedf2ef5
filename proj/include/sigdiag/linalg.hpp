#pragma once

#include <cstddef>
#include <vector>

#include "sigdiag/common.hpp"

namespace sigdiag {

using Vector = std::vector<double>;

// Dense row-major matrix. Layers store weights as (out x in), one output
// neuron's fan-in per row, so the batched kernels stream each row
// contiguously.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::size_t size() const { return data.size(); }

  void resize(std::size_t r, std::size_t c) {
    rows = r;
    cols = c;
    data.resize(r * c);
  }

  bool same_shape(const Matrix& other) const {
    return rows == other.rows && cols == other.cols;
  }
};

// Median with the midpoint convention: even counts average the two middle
// values. Takes its argument by value because it reorders it.
double median_of(Vector values);

}  // namespace sigdiag
