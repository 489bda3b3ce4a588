#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stocon/linalg.hpp"

namespace stocon::sys {

// Axis-aligned state box plus the time window the hypotheses are checked
// over. Suprema and infima elsewhere are estimated over this set only.
struct Domain {
  std::vector<double> lower, upper;
  double t0 = 0.0, t1 = 0.0;

  std::size_t dim() const { return lower.size(); }
  bool contains(const linalg::Vec& a) const;
  linalg::Vec clamp(const linalg::Vec& a) const;
  // Box scaled about its center by the given factor; time window kept.
  Domain inflate(double factor) const;
  void validate() const;  // throws InvalidInput unless lower < upper per axis
};

using VectorField = std::function<linalg::Vec(const linalg::Vec&, double)>;
using MatrixField = std::function<linalg::Mat(const linalg::Vec&, double)>;
using VectorMap = std::function<linalg::Vec(const linalg::Vec&, long)>;
using MatrixMap = std::function<linalg::Mat(const linalg::Vec&, long)>;

// Ito diffusion da = f(a,t) dt + sigma(a,t) dW with metric factor theta,
// M(a,t) = theta' * theta. Fields are immutable after construction and
// pure, so concurrent evaluation is safe.
struct ContinuousSystem {
  std::size_t n = 0, d = 0;
  VectorField drift;           // (a,t) -> n
  MatrixField diffusion;       // (a,t) -> n x d
  MatrixField theta;           // (a,t) -> n x n, invertible on the domain
  MatrixField jacobian;        // optional analytic d(drift)/da; empty -> FD
  Domain domain;
  std::string name;

  void validate() const;
};

// Stochastic difference system a_{k+1} = f(a_k,k) + sigma(a_k,k) w_{k+1},
// w ~ N(0, I_d), with per-step metric factors.
struct DiscreteSystem {
  std::size_t n = 0, d = 0;
  VectorMap map;               // (a,k) -> n
  MatrixMap diffusion;         // (a,k) -> n x d
  MatrixMap theta_k;           // (a,k) -> n x n
  MatrixMap jacobian;          // optional analytic d(map)/da; empty -> FD
  Domain domain;
  std::string name;

  void validate() const;
};

// M = theta' * theta; exactly symmetric by construction.
linalg::Mat metric(const ContinuousSystem& s, const linalg::Vec& a, double t);
linalg::Mat metric(const DiscreteSystem& s, const linalg::Vec& a, long k);

// Central finite differences of an arbitrary vector field with explicit
// step h (one column per perturbed coordinate).
linalg::Mat fd_jacobian(const VectorField& f, const linalg::Vec& a, double t,
                        double h);

// d(drift)/da: the analytic field when supplied, otherwise central
// differences with h = 1e-5 * (1 + |a|).
linalg::Mat drift_jacobian(const ContinuousSystem& s, const linalg::Vec& a,
                           double t);
linalg::Mat map_jacobian(const DiscreteSystem& s, const linalg::Vec& a, long k);

// Total derivative of theta along the deterministic flow:
//   theta_dot = d(theta)/dt + sum_k d(theta)/da_k * drift_k(a,t),
// every partial by central differences (h policy as above, 1e-5*(1+|t|)
// for the time partial).
linalg::Mat theta_dot(const ContinuousSystem& s, const linalg::Vec& a, double t);

// Euler-Maruyama discretization with step delta: map a + delta*f(a, t_k),
// per-step diffusion sqrt(delta)*sigma, theta_k(a) = theta(a, t_k), where
// t_k = domain.t0 + k*delta.
DiscreteSystem euler_discretize(const ContinuousSystem& s, double delta);

}  // namespace stocon::sys
