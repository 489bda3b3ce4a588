#include "stocon/system.hpp"

#include <cmath>
#include <string>

#include "stocon/error.hpp"
#include "stocon/tolerances.hpp"

namespace stocon::sys {

bool Domain::contains(const linalg::Vec& a) const {
  if (a.size() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i)
    if (a[i] < lower[i] || a[i] > upper[i]) return false;
  return true;
}

linalg::Vec Domain::clamp(const linalg::Vec& a) const {
  linalg::Vec out = a;
  for (std::size_t i = 0; i < dim() && i < a.size(); ++i) {
    if (out[i] < lower[i]) out[i] = lower[i];
    if (out[i] > upper[i]) out[i] = upper[i];
  }
  return out;
}

Domain Domain::inflate(double factor) const {
  if (factor < 1.0) throw InvalidInput("inflate factor must be >= 1");
  Domain out = *this;
  for (std::size_t i = 0; i < dim(); ++i) {
    const double c = 0.5 * (lower[i] + upper[i]);
    const double half = 0.5 * (upper[i] - lower[i]) * factor;
    out.lower[i] = c - half;
    out.upper[i] = c + half;
  }
  return out;
}

void Domain::validate() const {
  if (lower.size() != upper.size())
    throw InvalidInput("domain bound lists have different lengths");
  for (std::size_t i = 0; i < dim(); ++i) {
    // Equal bounds are allowed: a degenerate axis pins a slice.
    if (!(lower[i] <= upper[i]))
      throw InvalidInput("domain axis " + std::to_string(i) +
                         ": lower bound must not exceed the upper bound");
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]))
      throw InvalidInput("domain bounds must be finite");
  }
  if (!(t0 <= t1)) throw InvalidInput("domain time window is reversed");
}

void ContinuousSystem::validate() const {
  if (n == 0) throw InvalidInput("system dimension n must be positive");
  if (!drift || !diffusion || !theta)
    throw InvalidInput("system is missing drift, diffusion, or theta");
  domain.validate();
  if (domain.dim() != n)
    throw InvalidInput("domain dimension does not match system dimension");
}

void DiscreteSystem::validate() const {
  if (n == 0) throw InvalidInput("system dimension n must be positive");
  if (!map || !diffusion || !theta_k)
    throw InvalidInput("system is missing map, diffusion, or theta");
  domain.validate();
  if (domain.dim() != n)
    throw InvalidInput("domain dimension does not match system dimension");
}

namespace {

linalg::Mat metric_of(const linalg::Mat& th, std::size_t n) {
  if (th.rows() != n || th.cols() != n)
    throw InvalidInput("theta must be square of the system dimension");
  return linalg::ata(th);
}

double step_for(const linalg::Vec& a) {
  return tol::kFdScale * (1.0 + linalg::norm2(a));
}

}  // namespace

linalg::Mat metric(const ContinuousSystem& s, const linalg::Vec& a, double t) {
  return metric_of(s.theta(a, t), s.n);
}

linalg::Mat metric(const DiscreteSystem& s, const linalg::Vec& a, long k) {
  return metric_of(s.theta_k(a, k), s.n);
}

linalg::Mat fd_jacobian(const VectorField& f, const linalg::Vec& a, double t,
                        double h) {
  const std::size_t n = a.size();
  linalg::Mat out(0, 0);
  for (std::size_t j = 0; j < n; ++j) {
    linalg::Vec hi = a, lo = a;
    hi[j] += h;
    lo[j] -= h;
    linalg::Vec fp = f(hi, t);
    linalg::Vec fm = f(lo, t);
    if (fp.size() != fm.size())
      throw InvalidInput("vector field changed output dimension");
    if (out.rows() == 0) out = linalg::Mat(fp.size(), n);
    for (std::size_t i = 0; i < fp.size(); ++i)
      out(i, j) = (fp[i] - fm[i]) / (2.0 * h);
  }
  return out;
}

linalg::Mat drift_jacobian(const ContinuousSystem& s, const linalg::Vec& a,
                           double t) {
  if (s.jacobian) return s.jacobian(a, t);
  return fd_jacobian(s.drift, a, t, step_for(a));
}

linalg::Mat map_jacobian(const DiscreteSystem& s, const linalg::Vec& a, long k) {
  if (s.jacobian) return s.jacobian(a, k);
  auto field = [&](const linalg::Vec& x, double) { return s.map(x, k); };
  return fd_jacobian(field, a, 0.0, step_for(a));
}

linalg::Mat theta_dot(const ContinuousSystem& s, const linalg::Vec& a, double t) {
  const double ht = tol::kFdScale * (1.0 + std::fabs(t));
  linalg::Mat total = linalg::scale(
      1.0 / (2.0 * ht),
      linalg::sub(s.theta(a, t + ht), s.theta(a, t - ht)));

  const linalg::Vec f = s.drift(a, t);
  const double h = step_for(a);
  for (std::size_t j = 0; j < a.size(); ++j) {
    linalg::Vec hi = a, lo = a;
    hi[j] += h;
    lo[j] -= h;
    linalg::Mat dth = linalg::scale(f[j] / (2.0 * h),
                                    linalg::sub(s.theta(hi, t), s.theta(lo, t)));
    total = linalg::add(total, dth);
  }
  return total;
}

DiscreteSystem euler_discretize(const ContinuousSystem& s, double delta) {
  if (!(delta > 0.0)) throw InvalidInput("Euler step must be positive");
  s.validate();
  DiscreteSystem out;
  out.n = s.n;
  out.d = s.d;
  out.domain = s.domain;
  out.name = s.name.empty() ? "euler" : s.name + "-euler";
  const double t0 = s.domain.t0;

  out.map = [s, delta, t0](const linalg::Vec& a, long k) {
    const double t = t0 + delta * static_cast<double>(k);
    return linalg::add(a, linalg::scale(delta, s.drift(a, t)));
  };
  out.diffusion = [s, delta, t0](const linalg::Vec& a, long k) {
    const double t = t0 + delta * static_cast<double>(k);
    return linalg::scale(std::sqrt(delta), s.diffusion(a, t));
  };
  out.theta_k = [s, delta, t0](const linalg::Vec& a, long k) {
    const double t = t0 + delta * static_cast<double>(k);
    return s.theta(a, t);
  };
  if (s.jacobian) {
    out.jacobian = [s, delta, t0](const linalg::Vec& a, long k) {
      const double t = t0 + delta * static_cast<double>(k);
      linalg::Mat j = linalg::scale(delta, s.jacobian(a, t));
      for (std::size_t i = 0; i < s.n; ++i) j(i, i) += 1.0;
      return j;
    };
  }
  return out;
}

}  // namespace stocon::sys
