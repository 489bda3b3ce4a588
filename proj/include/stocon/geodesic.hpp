#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "stocon/linalg.hpp"
#include "stocon/parallel.hpp"
#include "stocon/system.hpp"
#include "stocon/tolerances.hpp"

namespace stocon::geo {

// Metric evaluated at a state and time. Decoupled from full system
// definitions so closed-form metrics can be fed directly.
using MetricField = std::function<linalg::Mat(const linalg::Vec&, double)>;

MetricField metric_of(const sys::ContinuousSystem& s);
// Discrete systems carry per-step metrics; the time argument is the step.
MetricField metric_of(const sys::DiscreteSystem& s);

// Polyline on parameter u in [0,1] with points[j] = curve(j/m).
struct Curve {
  std::vector<linalg::Vec> points;

  std::size_t segments() const { return points.empty() ? 0 : points.size() - 1; }
  void validate() const;
};

// Straight polyline from a to b with m segments.
Curve straight_line(const linalg::Vec& a, const linalg::Vec& b, std::size_t m);

// Linear-interpolation resampling to a new segment count.
Curve resample(const Curve& c, std::size_t new_segments);

// Midpoint-rule energy: sum over segments of m * d' M(midpoint, t) d,
// d = points[j+1] - points[j]. Equals squared length for constant-speed
// parametrizations, which is what the minimizer converges to.
double curve_energy(const Curve& c, const MetricField& metric, double t,
                    Exec exec = Exec::serial);

struct GeodesicOptions {
  std::size_t segments = tol::kGeoSegments;
  std::size_t max_sweeps = tol::kGeoMaxSweeps;
  // Converged when the relative energy decrease over one accepted sweep
  // falls below this.
  double rel_decrease = tol::kGeoRelDecrease;
  // Box the curve is clamped to after every step; null disables clamping.
  const sys::Domain* domain = nullptr;
  // Warm start: interior points are taken from this curve (resampled to
  // `segments` and blended onto the new endpoints). The optimizer still
  // starts from the straight line instead whenever that has lower energy,
  // so warm starts can only help, never hurt the result.
  const Curve* initial_curve = nullptr;
  Exec exec = Exec::serial;
};

struct GeodesicResult {
  double dist_sq = 0.0;  // energy of the best curve found; upper bound on d^2
  Curve curve;
  std::size_t iterations = 0;  // accepted descent sweeps
  bool converged = false;
  double straight_line_energy = 0.0;
  bool clamped = false;  // minimizer touched the domain boundary
};

// Squared Riemannian distance by energy minimization over discretized
// curves: gradient descent on the interior points with a backtracking
// line search, straight-line initialization. The result is always an
// upper bound on the true d^2; for well-conditioned metrics it is a
// near-minimum. dist_sq <= straight_line_energy + 1e-12 by construction.
GeodesicResult distance_sq(const linalg::Vec& a, const linalg::Vec& b,
                           const MetricField& metric, double t,
                           const GeodesicOptions& opts = {});

// Resamples the result's curve to factor * segments, re-optimizes from it,
// and preserves the original straight_line_energy for bookkeeping.
GeodesicResult refine(const GeodesicResult& r, const MetricField& metric,
                      double t, std::size_t factor,
                      const GeodesicOptions& opts = {});

}  // namespace stocon::geo
