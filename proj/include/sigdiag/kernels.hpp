#pragma once

#include "sigdiag/linalg.hpp"

namespace sigdiag::kernels {

// Batched dense-layer primitives. x is (batch x in), w is (out x in), y and
// dy are (batch x out). Weight gradients are overwritten, not accumulated.
//
// The parallel variants partition work so that every output element is
// accumulated serially, in a fixed order, by exactly one thread: forward and
// backward_data parallelize over batch rows, backward_params over output
// neurons. Results therefore do not depend on the thread count.
//
// The backward axpy loops skip rows where the streamed delta is exactly zero;
// relu masking makes that common.

namespace serial {
// Plain reference loops, kept deliberately simple; the parallel variants are
// validated against these.
void linear_forward(const Matrix& x, const Matrix& w, const Vector& bias, Matrix& y);
void linear_backward_data(const Matrix& dy, const Matrix& w, Matrix& dx);
void linear_backward_params(const Matrix& x, const Matrix& dy, Matrix& dw, Vector& db);
}  // namespace serial

namespace parallel {
void linear_forward(const Matrix& x, const Matrix& w, const Vector& bias, Matrix& y);
void linear_backward_data(const Matrix& dy, const Matrix& w, Matrix& dx);
void linear_backward_params(const Matrix& x, const Matrix& dy, Matrix& dw, Vector& db);
}  // namespace parallel

// Below this many multiply-adds the dispatchers stay serial: the fork
// overhead dominates.
inline constexpr std::size_t kParallelThreshold = 32768;

// Dispatchers used by the network engine: parallel when OpenMP is compiled in
// and the problem is large enough to amortize the fork, serial otherwise.
void linear_forward(const Matrix& x, const Matrix& w, const Vector& bias, Matrix& y);
void linear_backward_data(const Matrix& dy, const Matrix& w, Matrix& dx);
void linear_backward_params(const Matrix& x, const Matrix& dy, Matrix& dw, Vector& db);

}  // namespace sigdiag::kernels
