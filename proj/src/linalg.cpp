#include "stocon/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "stocon/error.hpp"
#include "stocon/tolerances.hpp"

namespace stocon::linalg {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidInput(msg);
}

void require_square(const Mat& a, const char* op) {
  if (a.rows() != a.cols()) {
    std::ostringstream os;
    os << op << ": matrix must be square, got " << a.rows() << "x" << a.cols();
    throw InvalidInput(os.str());
  }
}

// Throws when A is not symmetric within tol::kSymmetryAbs, naming the worst
// offending entry pair.
void require_symmetric(const Mat& a, const char* op) {
  require_square(a, op);
  double worst = 0.0;
  std::size_t wi = 0, wj = 0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const double d = std::abs(a(i, j) - a(j, i));
      if (d > worst) {
        worst = d;
        wi = i;
        wj = j;
      }
    }
  if (worst > tol::kSymmetryAbs) {
    std::ostringstream os;
    os << op << ": matrix not symmetric, |A(" << wi << "," << wj << ") - A(" << wj << "," << wi
       << ")| = " << worst;
    throw InvalidInput(os.str());
  }
}

void require_finite(const Mat& a, const char* op) {
  if (!all_finite(a)) throw InvalidInput(std::string(op) + ": non-finite matrix entry");
}

}  // namespace

Mat::Mat(std::size_t rows, std::size_t cols, std::initializer_list<double> xs)
    : r_(rows), c_(cols), d_(xs) {
  require(d_.size() == rows * cols, "Mat: initializer size does not match shape");
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vec add(const Vec& a, const Vec& b) {
  require(a.size() == b.size(), "vec add: size mismatch");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Vec sub(const Vec& a, const Vec& b) {
  require(a.size() == b.size(), "vec sub: size mismatch");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Vec scale(double s, const Vec& a) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}

double dot(const Vec& a, const Vec& b) {
  require(a.size() == b.size(), "dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2_sq(const Vec& a) { return dot(a, a); }
double norm2(const Vec& a) { return std::sqrt(norm2_sq(a)); }

Mat add(const Mat& a, const Mat& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "mat add: shape mismatch");
  Mat r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows() * a.cols(); ++i) r.data()[i] = a.data()[i] + b.data()[i];
  return r;
}

Mat sub(const Mat& a, const Mat& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "mat sub: shape mismatch");
  Mat r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows() * a.cols(); ++i) r.data()[i] = a.data()[i] - b.data()[i];
  return r;
}

Mat scale(double s, const Mat& a) {
  Mat r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows() * a.cols(); ++i) r.data()[i] = s * a.data()[i];
  return r;
}

Mat matmul(const Mat& a, const Mat& b) {
  require(a.cols() == b.rows(), "matmul: inner dimension mismatch");
  Mat r(a.rows(), b.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
    }
  return r;
}

Vec matvec(const Mat& a, const Vec& x) {
  require(a.cols() == x.size(), "matvec: dimension mismatch");
  Vec r(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    r[i] = s;
  }
  return r;
}

Mat transpose(const Mat& a) {
  Mat r(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(j, i) = a(i, j);
  return r;
}

Mat ata(const Mat& a) {
  Mat r(a.cols(), a.cols());
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.rows(); ++k) s += a(k, i) * a(k, j);
      r(i, j) = s;
      r(j, i) = s;
    }
  return r;
}

Mat sym_part(const Mat& a) {
  require_square(a, "sym_part");
  Mat r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = 0.5 * (a(i, j) + a(j, i));
  return r;
}

double frobenius(const Mat& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows() * a.cols(); ++i) s += a.data()[i] * a.data()[i];
  return std::sqrt(s);
}

double max_abs(const Mat& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows() * a.cols(); ++i) m = std::max(m, std::abs(a.data()[i]));
  return m;
}

double max_abs_asymmetry(const Mat& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - a(j, i)));
  return m;
}

bool all_finite(const Vec& a) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!std::isfinite(a[i])) return false;
  return true;
}

bool all_finite(const Mat& a) {
  for (std::size_t i = 0; i < a.rows() * a.cols(); ++i)
    if (!std::isfinite(a.data()[i])) return false;
  return true;
}

namespace {

double offdiag_frobenius(const Mat& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

EigenSym sym_eigen(const Mat& input) {
  require_finite(input, "sym_eigen");
  require_symmetric(input, "sym_eigen");
  const std::size_t n = input.rows();
  Mat a = sym_part(input);
  Mat v = Mat::identity(n);
  const double norm = frobenius(a);

  if (n > 1 && norm > 0.0) {
    bool converged = false;
    for (int sweep = 0; sweep < tol::kJacobiMaxSweeps; ++sweep) {
      if (offdiag_frobenius(a) <= tol::kJacobiOffRel * norm) {
        converged = true;
        break;
      }
      for (std::size_t p = 0; p + 1 < n; ++p)
        for (std::size_t q = p + 1; q < n; ++q) {
          const double apq = a(p, q);
          if (apq == 0.0) continue;
          const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
          const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;
          const double app = a(p, p), aqq = a(q, q);
          a(p, p) = app - t * apq;
          a(q, q) = aqq + t * apq;
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          for (std::size_t k = 0; k < n; ++k) {
            if (k != p && k != q) {
              const double akp = a(k, p), akq = a(k, q);
              a(k, p) = c * akp - s * akq;
              a(p, k) = a(k, p);
              a(k, q) = s * akp + c * akq;
              a(q, k) = a(k, q);
            }
            const double vkp = v(k, p), vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
        }
    }
    if (!converged && offdiag_frobenius(a) > tol::kJacobiOffRel * norm)
      throw Error("sym_eigen: Jacobi sweeps exhausted without convergence");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  EigenSym out;
  out.values = Vec(n);
  out.vectors = Mat(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

MinMax lambda_min_max(const Mat& a) {
  const EigenSym e = sym_eigen(a);
  return {e.values[0], e.values[e.values.size() - 1]};
}

bool is_positive_definite(const Mat& input) {
  require_finite(input, "is_positive_definite");
  require_symmetric(input, "is_positive_definite");
  const std::size_t n = input.rows();
  Mat l(n, n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double d = input(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return false;
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = input(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return true;
}

namespace {

struct Lu {
  Mat lu;
  std::vector<std::size_t> piv;
  bool singular = false;
};

Lu lu_factor(const Mat& a) {
  const std::size_t n = a.rows();
  Lu f{a, std::vector<std::size_t>(n), false};
  for (std::size_t i = 0; i < n; ++i) f.piv[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(f.lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(f.lu(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (best == 0.0) {
      f.singular = true;
      return f;
    }
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(p, j));
      std::swap(f.piv[k], f.piv[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      f.lu(i, k) /= f.lu(k, k);
      const double lik = f.lu(i, k);
      if (lik == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) f.lu(i, j) -= lik * f.lu(k, j);
    }
  }
  return f;
}

Vec lu_solve(const Lu& f, const Vec& b) {
  const std::size_t n = f.lu.rows();
  Vec x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[f.piv[i]];
  for (std::size_t i = 1; i < n; ++i) {
    double s = x[i];
    for (std::size_t j = 0; j < i; ++j) s -= f.lu(i, j) * x[j];
    x[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= f.lu(i, j) * x[j];
    x[i] = s / f.lu(i, i);
  }
  return x;
}

Mat inverse_from_lu(const Lu& f) {
  const std::size_t n = f.lu.rows();
  Mat inv(n, n);
  Vec e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    const Vec col = lu_solve(f, e);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
    e[j] = 0.0;
  }
  return inv;
}

double norm1(const Mat& a) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
    m = std::max(m, s);
  }
  return m;
}

struct CheckedLu {
  Lu f;
  double cond;
  Mat inv;
};

CheckedLu checked_factor(const Mat& a, const char* op) {
  require_finite(a, op);
  require_square(a, op);
  CheckedLu c{lu_factor(a), std::numeric_limits<double>::infinity(), Mat()};
  if (!c.f.singular) {
    c.inv = inverse_from_lu(c.f);
    c.cond = norm1(a) * norm1(c.inv);
  }
  if (!(c.cond < tol::kConditionLimit)) {
    std::ostringstream os;
    os << op << ": matrix numerically singular, condition estimate " << c.cond;
    throw SingularMatrix(os.str(), c.cond);
  }
  return c;
}

}  // namespace

double cond_estimate_1(const Mat& a) {
  require_finite(a, "cond_estimate_1");
  require_square(a, "cond_estimate_1");
  const Lu f = lu_factor(a);
  if (f.singular) return std::numeric_limits<double>::infinity();
  return norm1(a) * norm1(inverse_from_lu(f));
}

Vec solve(const Mat& a, const Vec& b) {
  require(a.rows() == b.size(), "solve: rhs size mismatch");
  require(all_finite(b), "solve: non-finite rhs entry");
  const CheckedLu c = checked_factor(a, "solve");
  Vec x = lu_solve(c.f, b);
  // one step of iterative refinement
  Vec r = sub(b, matvec(a, x));
  const Vec dx = lu_solve(c.f, r);
  return add(x, dx);
}

Mat invert(const Mat& a) {
  const CheckedLu c = checked_factor(a, "invert");
  Mat inv = c.inv;
  // refine each column against the unit residual
  const std::size_t n = a.rows();
  Vec e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    Vec col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = inv(i, j);
    const Vec r = sub(e, matvec(a, col));
    const Vec d = lu_solve(c.f, r);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) += d[i];
    e[j] = 0.0;
  }
  return inv;
}

}  // namespace stocon::linalg
