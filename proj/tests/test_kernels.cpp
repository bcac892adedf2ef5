#include <cmath>
#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "doctest.h"
#include "helpers.hpp"
#include "sigdiag/common.hpp"
#include "sigdiag/kernels.hpp"
#include "sigdiag/rng.hpp"

using namespace sigdiag;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double zero_fraction = 0.0) {
  Matrix m(rows, cols);
  for (double& v : m.data) {
    v = rng.uniform() < zero_fraction ? 0.0 : rng.uniform(-1.5, 1.5);
  }
  return m;
}

struct Shape {
  std::size_t batch;
  std::size_t in;
  std::size_t out;
};

// Mix of tiny, odd (not multiples of the 4-row blocking), and large-enough-to-
// dispatch-parallel shapes.
const std::vector<Shape> kShapes = {
    {1, 1, 1},   {2, 3, 5},    {3, 7, 2},    {4, 4, 4},    {5, 9, 6},
    {6, 2, 11},  {7, 13, 3},   {17, 31, 29}, {33, 65, 9},  {64, 128, 32},
};

}  // namespace

TEST_CASE("forward: parallel matches serial to floating-point reassociation") {
  for (const Shape& s : kShapes) {
    for (std::uint64_t seed : {1ULL, 2ULL}) {
      Rng rng(seed * 1000 + s.batch);
      const Matrix x = random_matrix(s.batch, s.in, rng);
      const Matrix w = random_matrix(s.out, s.in, rng);
      Vector bias(s.out);
      for (double& b : bias) {
        b = rng.uniform(-0.5, 0.5);
      }
      Matrix ys;
      Matrix yp;
      kernels::serial::linear_forward(x, w, bias, ys);
      kernels::parallel::linear_forward(x, w, bias, yp);
      REQUIRE(ys.rows == yp.rows);
      REQUIRE(ys.cols == yp.cols);
      for (std::size_t i = 0; i < ys.data.size(); ++i) {
        CHECK(yp.data[i] ==
              doctest::Approx(ys.data[i]).epsilon(1e-10));  // simd may reassociate
      }
    }
  }
}

TEST_CASE("backward_data: parallel is bitwise equal to serial") {
  for (const Shape& s : kShapes) {
    for (double zero_fraction : {0.0, 0.5, 0.95}) {
      Rng rng(s.in * 31 + s.out);
      const Matrix dy = random_matrix(s.batch, s.out, rng, zero_fraction);
      const Matrix w = random_matrix(s.out, s.in, rng);
      Matrix dxs;
      Matrix dxp;
      kernels::serial::linear_backward_data(dy, w, dxs);
      kernels::parallel::linear_backward_data(dy, w, dxp);
      REQUIRE(dxs.rows == dxp.rows);
      REQUIRE(dxs.cols == dxp.cols);
      CHECK(dxs.data == dxp.data);  // exact: same per-element accumulation order
    }
  }
}

TEST_CASE("backward_params: parallel is bitwise equal to serial") {
  for (const Shape& s : kShapes) {
    for (double zero_fraction : {0.0, 0.5, 0.95}) {
      Rng rng(s.in * 17 + s.batch);
      const Matrix x = random_matrix(s.batch, s.in, rng);
      const Matrix dy = random_matrix(s.batch, s.out, rng, zero_fraction);
      Matrix dws;
      Matrix dwp;
      Vector dbs;
      Vector dbp;
      kernels::serial::linear_backward_params(x, dy, dws, dbs);
      kernels::parallel::linear_backward_params(x, dy, dwp, dbp);
      REQUIRE(dws.same_shape(dwp));
      CHECK(dws.data == dwp.data);
      CHECK(dbs == dbp);
    }
  }
}

TEST_CASE("forward agrees with a naive triple loop") {
  Rng rng(7);
  const Matrix x = random_matrix(5, 9, rng);
  const Matrix w = random_matrix(4, 9, rng);
  Vector bias = {0.1, -0.2, 0.3, -0.4};
  Matrix y;
  kernels::linear_forward(x, w, bias, y);
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t j = 0; j < 4; ++j) {
      double acc = bias[j];
      for (std::size_t k = 0; k < 9; ++k) {
        acc += x(r, k) * w(j, k);
      }
      CHECK(y(r, j) == doctest::Approx(acc).epsilon(1e-12));
    }
  }
}

TEST_CASE("backward identities on transposed products") {
  // dx = dy * w and dw = dy^T * x, checked against naive loops.
  Rng rng(8);
  const Matrix x = random_matrix(6, 5, rng);
  const Matrix w = random_matrix(3, 5, rng);
  const Matrix dy = random_matrix(6, 3, rng);
  Matrix dx;
  Matrix dw;
  Vector db;
  kernels::linear_backward_data(dy, w, dx);
  kernels::linear_backward_params(x, dy, dw, db);
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t k = 0; k < 5; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < 3; ++j) {
        acc += dy(r, j) * w(j, k);
      }
      CHECK(dx(r, k) == doctest::Approx(acc).epsilon(1e-12));
    }
  }
  for (std::size_t j = 0; j < 3; ++j) {
    double bacc = 0.0;
    for (std::size_t r = 0; r < 6; ++r) {
      bacc += dy(r, j);
    }
    CHECK(db[j] == doctest::Approx(bacc).epsilon(1e-12));
    for (std::size_t k = 0; k < 5; ++k) {
      double acc = 0.0;
      for (std::size_t r = 0; r < 6; ++r) {
        acc += dy(r, j) * x(r, k);
      }
      CHECK(dw(j, k) == doctest::Approx(acc).epsilon(1e-12));
    }
  }
}

TEST_CASE("gradients overwrite, not accumulate") {
  Rng rng(9);
  const Matrix x = random_matrix(4, 3, rng);
  const Matrix dy = random_matrix(4, 2, rng);
  Matrix dw(2, 3, 123.0);  // poisoned
  Vector db = {99.0, 99.0};
  kernels::linear_backward_params(x, dy, dw, db);
  Matrix dw2;
  Vector db2;
  kernels::linear_backward_params(x, dy, dw2, db2);
  CHECK(dw.data == dw2.data);
  CHECK(db == db2);
}

TEST_CASE("shape mismatches throw") {
  Matrix x(2, 3);
  Matrix w(4, 5);  // in 5 != 3
  Vector bias(4);
  Matrix y;
  CHECK_THROWS_AS(kernels::linear_forward(x, w, bias, y), SchemaError);
  Matrix w2(4, 3);
  Vector bias_bad(2);
  CHECK_THROWS_AS(kernels::linear_forward(x, w2, bias_bad, y), SchemaError);
  Matrix dy(2, 9);
  Matrix dx;
  CHECK_THROWS_AS(kernels::linear_backward_data(dy, w2, dx), SchemaError);
  Matrix dw;
  Vector db;
  Matrix dy_bad_rows(7, 4);
  CHECK_THROWS_AS(kernels::linear_backward_params(x, dy_bad_rows, dw, db), SchemaError);
}

#ifdef _OPENMP
TEST_CASE("results are invariant to the OpenMP thread count") {
  const int saved = omp_get_max_threads();
  Rng rng(10);
  // Big enough that the dispatcher actually goes parallel.
  const std::size_t batch = 64;
  const std::size_t in = 96;
  const std::size_t out = 48;
  REQUIRE(batch * in * out >= kernels::kParallelThreshold);
  const Matrix x = random_matrix(batch, in, rng);
  const Matrix w = random_matrix(out, in, rng);
  const Matrix dy = random_matrix(batch, out, rng, 0.6);
  Vector bias(out, 0.125);

  std::vector<Matrix> ys;
  std::vector<Matrix> dxs;
  std::vector<Matrix> dws;
  std::vector<Vector> dbs;
  for (int threads : {1, 2, 3, 8}) {
    omp_set_num_threads(threads);
    Matrix y;
    Matrix dx;
    Matrix dw;
    Vector db;
    kernels::parallel::linear_forward(x, w, bias, y);
    kernels::parallel::linear_backward_data(dy, w, dx);
    kernels::parallel::linear_backward_params(x, dy, dw, db);
    ys.push_back(std::move(y));
    dxs.push_back(std::move(dx));
    dws.push_back(std::move(dw));
    dbs.push_back(std::move(db));
  }
  omp_set_num_threads(saved);
  for (std::size_t i = 1; i < ys.size(); ++i) {
    CHECK(ys[i].data == ys[0].data);  // bitwise: ownership is per-element
    CHECK(dxs[i].data == dxs[0].data);
    CHECK(dws[i].data == dws[0].data);
    CHECK(dbs[i] == dbs[0]);
  }
}
#endif
