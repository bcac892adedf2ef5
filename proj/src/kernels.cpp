#include "sigdiag/kernels.hpp"

#include <algorithm>

namespace sigdiag::kernels {

namespace {

void check_forward(const Matrix& x, const Matrix& w, const Vector& bias) {
  if (x.cols != w.cols || bias.size() != w.rows) {
    throw SchemaError("linear_forward: shape mismatch");
  }
}

void check_backward_data(const Matrix& dy, const Matrix& w) {
  if (dy.cols != w.rows) {
    throw SchemaError("linear_backward_data: shape mismatch");
  }
}

void check_backward_params(const Matrix& x, const Matrix& dy) {
  if (x.rows != dy.rows) {
    throw SchemaError("linear_backward_params: batch mismatch");
  }
}

}  // namespace

namespace serial {

void linear_forward(const Matrix& x, const Matrix& w, const Vector& bias, Matrix& y) {
  check_forward(x, w, bias);
  y.resize(x.rows, w.rows);
  const std::size_t in = w.cols;
  const std::size_t out = w.rows;
  for (std::size_t b = 0; b < x.rows; ++b) {
    const double* xr = x.row(b);
    double* yr = y.row(b);
    for (std::size_t o = 0; o < out; ++o) {
      const double* wr = w.row(o);
      double acc = bias[o];
      for (std::size_t k = 0; k < in; ++k) {
        acc += xr[k] * wr[k];
      }
      yr[o] = acc;
    }
  }
}

void linear_backward_data(const Matrix& dy, const Matrix& w, Matrix& dx) {
  check_backward_data(dy, w);
  dx.resize(dy.rows, w.cols);
  const std::size_t in = w.cols;
  const std::size_t out = w.rows;
  for (std::size_t b = 0; b < dy.rows; ++b) {
    const double* dyr = dy.row(b);
    double* dxr = dx.row(b);
    std::fill(dxr, dxr + in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double dv = dyr[o];
      if (dv == 0.0) continue;
      const double* wr = w.row(o);
      for (std::size_t k = 0; k < in; ++k) {
        dxr[k] += dv * wr[k];
      }
    }
  }
}

void linear_backward_params(const Matrix& x, const Matrix& dy, Matrix& dw, Vector& db) {
  check_backward_params(x, dy);
  const std::size_t in = x.cols;
  const std::size_t out = dy.cols;
  const std::size_t batch = x.rows;
  dw.resize(out, in);
  std::fill(dw.data.begin(), dw.data.end(), 0.0);
  db.assign(out, 0.0);
  for (std::size_t o = 0; o < out; ++o) {
    double* dwr = dw.row(o);
    double acc = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      const double dv = dy(b, o);
      acc += dv;
      if (dv == 0.0) continue;
      const double* xr = x.row(b);
      for (std::size_t k = 0; k < in; ++k) {
        dwr[k] += dv * xr[k];
      }
    }
    db[o] = acc;
  }
}

}  // namespace serial

namespace parallel {

// The hot loops block four rows per pass so each streamed operand (a weight
// row in forward/backward_data, an input row in backward_params) is read once
// per four consumers instead of once per consumer; the kernels are memory
// bound, not FLOP bound. Blocking never changes which element accumulates
// what in which order, so results stay independent of the thread count, and
// the backward kernels stay bitwise equal to the serial reference.

void linear_forward(const Matrix& x, const Matrix& w, const Vector& bias, Matrix& y) {
  check_forward(x, w, bias);
  y.resize(x.rows, w.rows);
  const std::size_t rows = x.rows;
  const std::size_t in = w.cols;
  const std::size_t out = w.rows;
  const std::size_t quads = rows / 4;
#pragma omp parallel for schedule(static)
  for (std::size_t q = 0; q < quads; ++q) {
    const std::size_t b = q * 4;
    const double* x0 = x.row(b);
    const double* x1 = x.row(b + 1);
    const double* x2 = x.row(b + 2);
    const double* x3 = x.row(b + 3);
    for (std::size_t o = 0; o < out; ++o) {
      const double* wr = w.row(o);
      double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
#pragma omp simd reduction(+ : a0, a1, a2, a3)
      for (std::size_t k = 0; k < in; ++k) {
        const double wv = wr[k];
        a0 += x0[k] * wv;
        a1 += x1[k] * wv;
        a2 += x2[k] * wv;
        a3 += x3[k] * wv;
      }
      y(b, o) = bias[o] + a0;
      y(b + 1, o) = bias[o] + a1;
      y(b + 2, o) = bias[o] + a2;
      y(b + 3, o) = bias[o] + a3;
    }
  }
#pragma omp parallel for schedule(static)
  for (std::size_t b = quads * 4; b < rows; ++b) {
    const double* xr = x.row(b);
    double* yr = y.row(b);
    for (std::size_t o = 0; o < out; ++o) {
      const double* wr = w.row(o);
      double acc = 0.0;
#pragma omp simd reduction(+ : acc)
      for (std::size_t k = 0; k < in; ++k) {
        acc += xr[k] * wr[k];
      }
      yr[o] = bias[o] + acc;
    }
  }
}

void linear_backward_data(const Matrix& dy, const Matrix& w, Matrix& dx) {
  check_backward_data(dy, w);
  dx.resize(dy.rows, w.cols);
  const std::size_t rows = dy.rows;
  const std::size_t in = w.cols;
  const std::size_t out = w.rows;
  const std::size_t quads = rows / 4;
#pragma omp parallel for schedule(static)
  for (std::size_t q = 0; q < quads; ++q) {
    const std::size_t b = q * 4;
    double* d0 = dx.row(b);
    double* d1 = dx.row(b + 1);
    double* d2 = dx.row(b + 2);
    double* d3 = dx.row(b + 3);
    std::fill(d0, d0 + in, 0.0);
    std::fill(d1, d1 + in, 0.0);
    std::fill(d2, d2 + in, 0.0);
    std::fill(d3, d3 + in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double v0 = dy(b, o);
      const double v1 = dy(b + 1, o);
      const double v2 = dy(b + 2, o);
      const double v3 = dy(b + 3, o);
      const double* wr = w.row(o);
      if (v0 != 0.0 && v1 != 0.0 && v2 != 0.0 && v3 != 0.0) {
#pragma omp simd
        for (std::size_t k = 0; k < in; ++k) {
          const double wv = wr[k];
          d0[k] += v0 * wv;
          d1[k] += v1 * wv;
          d2[k] += v2 * wv;
          d3[k] += v3 * wv;
        }
      } else {
        // Mixed zero/non-zero deltas: per-row axpy keeps the zero skip.
        double* dst[4] = {d0, d1, d2, d3};
        const double dv[4] = {v0, v1, v2, v3};
        for (int r = 0; r < 4; ++r) {
          if (dv[r] == 0.0) continue;
          double* dr = dst[r];
          const double v = dv[r];
#pragma omp simd
          for (std::size_t k = 0; k < in; ++k) {
            dr[k] += v * wr[k];
          }
        }
      }
    }
  }
#pragma omp parallel for schedule(static)
  for (std::size_t b = quads * 4; b < rows; ++b) {
    const double* dyr = dy.row(b);
    double* dxr = dx.row(b);
    std::fill(dxr, dxr + in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double dv = dyr[o];
      if (dv == 0.0) continue;
      const double* wr = w.row(o);
#pragma omp simd
      for (std::size_t k = 0; k < in; ++k) {
        dxr[k] += dv * wr[k];
      }
    }
  }
}

void linear_backward_params(const Matrix& x, const Matrix& dy, Matrix& dw, Vector& db) {
  check_backward_params(x, dy);
  const std::size_t in = x.cols;
  const std::size_t out = dy.cols;
  const std::size_t batch = x.rows;
  dw.resize(out, in);
  db.assign(out, 0.0);
  const std::size_t quads = out / 4;
  // Each dw row (one output neuron) is owned by one thread and filled
  // serially over the batch, matching the serial accumulation order.
#pragma omp parallel for schedule(static)
  for (std::size_t q = 0; q < quads; ++q) {
    const std::size_t o = q * 4;
    double* w0 = dw.row(o);
    double* w1 = dw.row(o + 1);
    double* w2 = dw.row(o + 2);
    double* w3 = dw.row(o + 3);
    std::fill(w0, w0 + in, 0.0);
    std::fill(w1, w1 + in, 0.0);
    std::fill(w2, w2 + in, 0.0);
    std::fill(w3, w3 + in, 0.0);
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      const double* dyr = dy.row(b);
      const double v0 = dyr[o];
      const double v1 = dyr[o + 1];
      const double v2 = dyr[o + 2];
      const double v3 = dyr[o + 3];
      s0 += v0;
      s1 += v1;
      s2 += v2;
      s3 += v3;
      const double* xr = x.row(b);
      if (v0 != 0.0 && v1 != 0.0 && v2 != 0.0 && v3 != 0.0) {
#pragma omp simd
        for (std::size_t k = 0; k < in; ++k) {
          const double xv = xr[k];
          w0[k] += v0 * xv;
          w1[k] += v1 * xv;
          w2[k] += v2 * xv;
          w3[k] += v3 * xv;
        }
      } else {
        double* dst[4] = {w0, w1, w2, w3};
        const double dv[4] = {v0, v1, v2, v3};
        for (int r = 0; r < 4; ++r) {
          if (dv[r] == 0.0) continue;
          double* wr = dst[r];
          const double v = dv[r];
#pragma omp simd
          for (std::size_t k = 0; k < in; ++k) {
            wr[k] += v * xr[k];
          }
        }
      }
    }
    db[o] = s0;
    db[o + 1] = s1;
    db[o + 2] = s2;
    db[o + 3] = s3;
  }
#pragma omp parallel for schedule(static)
  for (std::size_t o = quads * 4; o < out; ++o) {
    double* dwr = dw.row(o);
    std::fill(dwr, dwr + in, 0.0);
    double acc = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      const double dv = dy(b, o);
      acc += dv;
      if (dv == 0.0) continue;
      const double* xr = x.row(b);
#pragma omp simd
      for (std::size_t k = 0; k < in; ++k) {
        dwr[k] += dv * xr[k];
      }
    }
    db[o] = acc;
  }
}

}  // namespace parallel

namespace {

#ifdef _OPENMP
constexpr bool kHaveOpenMp = true;
#else
constexpr bool kHaveOpenMp = false;
#endif

bool use_parallel(std::size_t work) { return kHaveOpenMp && work >= kParallelThreshold; }

}  // namespace

void linear_forward(const Matrix& x, const Matrix& w, const Vector& bias, Matrix& y) {
  if (use_parallel(x.rows * w.rows * w.cols)) {
    parallel::linear_forward(x, w, bias, y);
  } else {
    serial::linear_forward(x, w, bias, y);
  }
}

void linear_backward_data(const Matrix& dy, const Matrix& w, Matrix& dx) {
  if (use_parallel(dy.rows * w.rows * w.cols)) {
    parallel::linear_backward_data(dy, w, dx);
  } else {
    serial::linear_backward_data(dy, w, dx);
  }
}

void linear_backward_params(const Matrix& x, const Matrix& dy, Matrix& dw, Vector& db) {
  if (use_parallel(x.rows * x.cols * dy.cols)) {
    parallel::linear_backward_params(x, dy, dw, db);
  } else {
    serial::linear_backward_params(x, dy, dw, db);
  }
}

}  // namespace sigdiag::kernels
