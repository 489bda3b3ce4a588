#include "stocon/linalg.hpp"

#include <cmath>

#include "doctest.h"
#include "stocon/error.hpp"
#include "test_util.hpp"

using namespace stocon;
using namespace stocon::linalg;

namespace {

// Observer gain/plant matrices used across the toolkit's example system.
Mat gain_p() { return Mat(2, 2, {-3.0, 5.0, 3.0, 2.0}); }
Mat gain_q() { return Mat(2, 2, {-1.0, 1.0, -1.0, 0.0}); }

Mat hilbert(std::size_t n) {
  Mat h(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h(i, j) = 1.0 / static_cast<double>(i + j + 1);
  return h;
}

}  // namespace

TEST_SUITE_BEGIN("linalg");

TEST_CASE("identity eigendecomposition") {
  const EigenSym e = sym_eigen(Mat::identity(3));
  for (std::size_t i = 0; i < 3; ++i) CHECK(e.values[i] == doctest::Approx(1.0).epsilon(1e-14));
  const Mat vtv = ata(e.vectors);
  CHECK(max_abs(sub(vtv, Mat::identity(3))) < 1e-12);
}

TEST_CASE("diagonal matrix eigenvalues ascend") {
  const EigenSym e = sym_eigen(Mat(2, 2, {5.0, 0.0, 0.0, 2.0}));
  CHECK(e.values[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(e.values[1] == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("symmetric part of P Q P^-1 has the known spectrum") {
  const Mat p = gain_p();
  const Mat pinv = invert(p);
  const Mat s = sym_part(matmul(matmul(p, gain_q()), pinv));
  const EigenSym e = sym_eigen(s);
  // exact values are -16/21 and -5/21
  CHECK(std::abs(e.values[0] - (-0.76)) < 0.01);
  CHECK(std::abs(e.values[1] - (-0.24)) < 0.01);
  CHECK(e.values[0] == doctest::Approx(-16.0 / 21.0).epsilon(1e-10));
  CHECK(e.values[1] == doctest::Approx(-5.0 / 21.0).epsilon(1e-10));
}

TEST_CASE("random symmetric reconstruction") {
  TestRng rng(101);
  const Mat a = random_symmetric(rng, 8, 2.0);
  const EigenSym e = sym_eigen(a);
  // V diag(values) V^T reproduces A
  Mat vd = e.vectors;
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) vd(i, j) *= e.values[j];
  const Mat rec = matmul(vd, transpose(e.vectors));
  CHECK(max_abs(sub(rec, a)) < 1e-8);
  // residual and orthonormality budgets
  const Mat av = matmul(a, e.vectors);
  CHECK(frobenius(sub(av, vd)) < 1e-9 * std::max(1.0, frobenius(a)));
  CHECK(max_abs(sub(ata(e.vectors), Mat::identity(8))) < 1e-9);
}

TEST_CASE("gram matrix shifted by identity has floor one") {
  TestRng rng(7);
  Mat z(6, 6);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) z(i, j) = rng.uniform(-1.0, 1.0);
  const Mat b = add(ata(z), Mat::identity(6));
  const MinMax mm = lambda_min_max(b);
  CHECK(mm.min >= 1.0 - 1e-9);
  CHECK(is_positive_definite(b));
}

TEST_CASE("asymmetric input is rejected with the offending pair named") {
  Mat a(2, 2, {1.0, 2.0, 3.0, 4.0});
  CHECK_THROWS_WITH_AS(sym_eigen(a), doctest::Contains("A(0,1)"), InvalidInput);
  CHECK_THROWS_AS(is_positive_definite(a), InvalidInput);
}

TEST_CASE("positive definiteness by pivots") {
  CHECK(is_positive_definite(Mat::identity(4)));
  CHECK_FALSE(is_positive_definite(Mat(2, 2, {1.0, 0.0, 0.0, -1.0})));
  const Mat ptp = ata(gain_p());
  CHECK(is_positive_definite(ptp));
}

TEST_CASE("invert matches the closed-form 2x2 inverse") {
  const Mat pinv = invert(gain_p());
  // inverse of [[-3,5],[3,2]] is (1/-21) [[2,-5],[-3,-3]]
  const Mat want(2, 2, {2.0 / -21.0, -5.0 / -21.0, -3.0 / -21.0, -3.0 / -21.0});
  CHECK(max_abs(sub(pinv, want)) < 1e-14);
  CHECK(max_abs(sub(matmul(gain_p(), pinv), Mat::identity(2))) < 1e-9);
}

TEST_CASE("solve residual stays small on a well-conditioned system") {
  TestRng rng(13);
  Mat a = Mat::identity(10);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) a(i, j) += 0.3 * rng.uniform(-1.0, 1.0);
  Vec b(10);
  for (std::size_t i = 0; i < 10; ++i) b[i] = rng.uniform(-5.0, 5.0);
  const Vec x = solve(a, b);
  const double res = norm2(sub(matvec(a, x), b));
  CHECK(res <= 1e-10 * (1.0 + norm2(b)));
}

TEST_CASE("hilbert 12x12 is rejected as numerically singular") {
  const Mat h = hilbert(12);
  CHECK(cond_estimate_1(h) >= 1e12);
  Vec b(12, 1.0);
  CHECK_THROWS_AS(solve(h, b), SingularMatrix);
  try {
    invert(h);
    CHECK(false);
  } catch (const SingularMatrix& e) {
    CHECK(e.cond >= 1e12);
  }
}

TEST_CASE("rayleigh quotients stay inside the spectrum") {
  TestRng rng(23);
  const Mat a = random_symmetric(rng, 8, 3.0);
  const MinMax mm = lambda_min_max(a);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec v = random_unit_vec(rng, 8);
    const double q = dot(v, matvec(a, v));
    CHECK(q >= mm.min - 1e-8);
    CHECK(q <= mm.max + 1e-8);
  }
}

TEST_CASE("spectrum is invariant under orthogonal similarity") {
  TestRng rng(31);
  const Mat a = random_symmetric(rng, 6, 2.0);
  // orthonormal R harvested from another symmetric eigendecomposition
  const Mat r = sym_eigen(random_symmetric(rng, 6, 1.0)).vectors;
  const Mat rotated = matmul(transpose(r), matmul(a, r));
  // rotated = R^T A R picks up roundoff asymmetry; symmetrize before use
  const EigenSym ea = sym_eigen(a);
  const EigenSym eb = sym_eigen(sym_part(rotated));
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(ea.values[i] == doctest::Approx(eb.values[i]).epsilon(1e-8));
}

TEST_CASE("pivot test agrees with the smallest eigenvalue") {
  TestRng rng(47);
  for (int trial = 0; trial < 1000; ++trial) {
    Mat a = random_symmetric(rng, 4, 1.0);
    // shift so both signs of lambda_min occur often
    const double shift = rng.uniform(-0.5, 1.5);
    for (std::size_t i = 0; i < 4; ++i) a(i, i) += shift;
    const double lo = lambda_min_max(a).min;
    if (std::abs(lo) < 1e-9) continue;  // skip knife-edge cases
    CHECK(is_positive_definite(a) == (lo > 0.0));
  }
}

TEST_SUITE_END();
