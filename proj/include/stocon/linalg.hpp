#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace stocon::linalg {

class Vec {
 public:
  Vec() = default;
  explicit Vec(std::size_t n, double fill = 0.0) : d_(n, fill) {}
  Vec(std::initializer_list<double> xs) : d_(xs) {}

  std::size_t size() const { return d_.size(); }
  double& operator[](std::size_t i) { return d_[i]; }
  const double& operator[](std::size_t i) const { return d_[i]; }
  double* data() { return d_.data(); }
  const double* data() const { return d_.data(); }
  bool operator==(const Vec&) const = default;

 private:
  std::vector<double> d_;
};

// Dense row-major matrix, sized for small state dimensions (n <= 32 in
// practice; nothing here assumes a cap but algorithms are O(n^3)).
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : r_(rows), c_(cols), d_(rows * cols, fill) {}
  Mat(std::size_t rows, std::size_t cols, std::initializer_list<double> xs);

  static Mat identity(std::size_t n);

  std::size_t rows() const { return r_; }
  std::size_t cols() const { return c_; }
  double& operator()(std::size_t i, std::size_t j) { return d_[i * c_ + j]; }
  const double& operator()(std::size_t i, std::size_t j) const { return d_[i * c_ + j]; }
  double* data() { return d_.data(); }
  const double* data() const { return d_.data(); }
  bool operator==(const Mat&) const = default;

 private:
  std::size_t r_ = 0, c_ = 0;
  std::vector<double> d_;
};

// vector arithmetic
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
Vec scale(double s, const Vec& a);
double dot(const Vec& a, const Vec& b);
double norm2_sq(const Vec& a);
double norm2(const Vec& a);

// matrix arithmetic
Mat add(const Mat& a, const Mat& b);
Mat sub(const Mat& a, const Mat& b);
Mat scale(double s, const Mat& a);
Mat matmul(const Mat& a, const Mat& b);
Vec matvec(const Mat& a, const Vec& x);
Mat transpose(const Mat& a);
// A^T A computed with a fixed summation order so the result is exactly
// symmetric entry-for-entry.
Mat ata(const Mat& a);
// (A + A^T)/2
Mat sym_part(const Mat& a);
double frobenius(const Mat& a);
double max_abs(const Mat& a);
double max_abs_asymmetry(const Mat& a);

bool all_finite(const Vec& a);
bool all_finite(const Mat& a);

struct EigenSym {
  Vec values;   // ascending
  Mat vectors;  // orthonormal columns, aligned with values
};

// Symmetric eigendecomposition by cyclic Jacobi rotations; converges when the
// off-diagonal Frobenius norm drops below tol::kJacobiOffRel * ||A||_F.
// Rejects non-square or asymmetric input (threshold tol::kSymmetryAbs),
// naming the offending entry pair.
EigenSym sym_eigen(const Mat& a);

struct MinMax {
  double min, max;
};
MinMax lambda_min_max(const Mat& a);

// Cholesky pivots all positive. Symmetry is validated first.
bool is_positive_definite(const Mat& a);

// 1-norm condition estimate ||A||_1 ||A^-1||_1 from an explicit LU-based
// inverse; returns +inf when a pivot vanishes.
double cond_estimate_1(const Mat& a);

// Partial-pivot LU solve with one step of iterative refinement. Throws
// SingularMatrix (carrying the estimate) when the condition estimate reaches
// tol::kConditionLimit.
Vec solve(const Mat& a, const Vec& b);
Mat invert(const Mat& a);

}  // namespace stocon::linalg
