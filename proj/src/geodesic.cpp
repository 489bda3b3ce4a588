#include "stocon/geodesic.hpp"

#include <algorithm>
#include <cmath>

#include "stocon/error.hpp"

namespace stocon::geo {

MetricField metric_of(const sys::ContinuousSystem& s) {
  return [s](const linalg::Vec& a, double t) { return sys::metric(s, a, t); };
}

MetricField metric_of(const sys::DiscreteSystem& s) {
  return [s](const linalg::Vec& a, double t) {
    return sys::metric(s, a, static_cast<long>(std::llround(t)));
  };
}

void Curve::validate() const {
  if (points.size() < 2) throw InvalidInput("curve needs at least two points");
  const std::size_t n = points.front().size();
  for (const auto& p : points) {
    if (p.size() != n) throw InvalidInput("curve points have mixed dimensions");
    for (std::size_t i = 0; i < n; ++i)
      if (!std::isfinite(p[i])) throw InvalidInput("curve point not finite");
  }
}

Curve straight_line(const linalg::Vec& a, const linalg::Vec& b, std::size_t m) {
  if (a.size() != b.size())
    throw InvalidInput("endpoints have different dimensions");
  if (m < 1) throw InvalidInput("curve needs at least one segment");
  Curve c;
  c.points.reserve(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    const double u = static_cast<double>(j) / static_cast<double>(m);
    linalg::Vec p(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      p[i] = (1.0 - u) * a[i] + u * b[i];
    c.points.push_back(std::move(p));
  }
  return c;
}

Curve resample(const Curve& c, std::size_t new_segments) {
  c.validate();
  if (new_segments < 1) throw InvalidInput("curve needs at least one segment");
  const std::size_t m = c.segments();
  Curve out;
  out.points.reserve(new_segments + 1);
  for (std::size_t j = 0; j <= new_segments; ++j) {
    const double u = static_cast<double>(j) / static_cast<double>(new_segments);
    const double pos = u * static_cast<double>(m);
    std::size_t seg = std::min(static_cast<std::size_t>(pos), m - 1);
    const double frac = pos - static_cast<double>(seg);
    const linalg::Vec& lo = c.points[seg];
    const linalg::Vec& hi = c.points[seg + 1];
    linalg::Vec p(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i)
      p[i] = (1.0 - frac) * lo[i] + frac * hi[i];
    out.points.push_back(std::move(p));
  }
  return out;
}

namespace {

linalg::Vec midpoint(const linalg::Vec& a, const linalg::Vec& b) {
  linalg::Vec mid(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) mid[i] = 0.5 * (a[i] + b[i]);
  return mid;
}

double quad_form(const linalg::Mat& m, const linalg::Vec& d) {
  double sum = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) row += m(i, j) * d[j];
    sum += d[i] * row;
  }
  return sum;
}

// Per-segment quantities of one energy/gradient evaluation.
struct SegmentEval {
  double energy = 0.0;        // m * d' M d
  linalg::Vec m_delta;        // M d (for the gradient)
  linalg::Vec metric_deriv;   // k-th entry: d' (dM/dx_k)(mid) d
};

double fd_step(const linalg::Vec& at) {
  return tol::kFdScale * (1.0 + linalg::norm2(at));
}

// Fills per-segment energies; when with_gradient is set also fills the
// M d products and the finite-difference metric derivative terms.
void eval_segments(const Curve& c, const MetricField& metric, double t,
                   bool with_gradient, Exec exec,
                   std::vector<SegmentEval>& out) {
  const std::size_t m = c.segments();
  const double md = static_cast<double>(m);
  out.resize(m);
  parallel_for(exec, m, [&](std::size_t j) {
    const linalg::Vec& lo = c.points[j];
    const linalg::Vec& hi = c.points[j + 1];
    const std::size_t n = lo.size();
    linalg::Vec delta(n);
    for (std::size_t i = 0; i < n; ++i) delta[i] = hi[i] - lo[i];
    const linalg::Vec mid = midpoint(lo, hi);
    const linalg::Mat mm = metric(mid, t);
    if (mm.rows() != n || mm.cols() != n)
      throw InvalidInput("metric dimension does not match the curve");

    SegmentEval& seg = out[j];
    seg.energy = md * quad_form(mm, delta);
    if (!with_gradient) return;

    seg.m_delta = linalg::matvec(mm, delta);
    seg.metric_deriv = linalg::Vec(n);
    const double h = fd_step(mid);
    for (std::size_t k = 0; k < n; ++k) {
      linalg::Vec up = mid, dn = mid;
      up[k] += h;
      dn[k] -= h;
      const double q =
          (quad_form(metric(up, t), delta) - quad_form(metric(dn, t), delta)) /
          (2.0 * h);
      seg.metric_deriv[k] = q;
    }
  });
}

double total_energy(const std::vector<SegmentEval>& segs) {
  double e = 0.0;  // serial, index order: schedule-independent
  for (const auto& s : segs) e += s.energy;
  return e;
}

// dE/dp_i for interior i: 2m (M_{i-1} d_{i-1} - M_i d_i)
// + (m/2)(metric_deriv_{i-1} + metric_deriv_i).
void assemble_gradient(const std::vector<SegmentEval>& segs, std::size_t n,
                       std::vector<linalg::Vec>& grad) {
  const std::size_t m = segs.size();
  const double md = static_cast<double>(m);
  grad.assign(m >= 1 ? m - 1 : 0, linalg::Vec(n));
  for (std::size_t i = 1; i < m; ++i) {
    linalg::Vec& g = grad[i - 1];
    const SegmentEval& prev = segs[i - 1];
    const SegmentEval& next = segs[i];
    for (std::size_t k = 0; k < n; ++k)
      g[k] = 2.0 * md * (prev.m_delta[k] - next.m_delta[k]) +
             0.5 * md * (prev.metric_deriv[k] + next.metric_deriv[k]);
  }
}

double grad_norm_sq(const std::vector<linalg::Vec>& grad) {
  double s = 0.0;
  for (const auto& g : grad) s += linalg::norm2_sq(g);
  return s;
}

// Moves interior points by -alpha * grad and clamps to the domain box.
// Returns whether clamping changed any coordinate.
bool step_curve(const Curve& from, const std::vector<linalg::Vec>& grad,
                double alpha, const sys::Domain* domain, Curve& out) {
  out.points = from.points;
  bool clamped = false;
  for (std::size_t i = 1; i + 1 < out.points.size(); ++i) {
    linalg::Vec& p = out.points[i];
    const linalg::Vec& g = grad[i - 1];
    for (std::size_t k = 0; k < p.size(); ++k) {
      double v = p[k] - alpha * g[k];
      if (domain) {
        if (v < domain->lower[k]) {
          v = domain->lower[k];
          clamped = true;
        } else if (v > domain->upper[k]) {
          v = domain->upper[k];
          clamped = true;
        }
      }
      p[k] = v;
    }
  }
  return clamped;
}

}  // namespace

double curve_energy(const Curve& c, const MetricField& metric, double t,
                    Exec exec) {
  c.validate();
  std::vector<SegmentEval> segs;
  eval_segments(c, metric, t, false, exec, segs);
  return total_energy(segs);
}

GeodesicResult distance_sq(const linalg::Vec& a, const linalg::Vec& b,
                           const MetricField& metric, double t,
                           const GeodesicOptions& opts) {
  if (a.size() != b.size() || a.size() == 0)
    throw InvalidInput("endpoints must share a positive dimension");
  const std::size_t m = opts.segments;
  const std::size_t n = a.size();

  GeodesicResult res;
  Curve line = straight_line(a, b, m);
  res.straight_line_energy = curve_energy(line, metric, t, opts.exec);

  Curve current = line;
  double energy = res.straight_line_energy;
  if (opts.initial_curve) {
    // Blend the warm-start interior onto the requested endpoints, keep it
    // only if it actually beats the straight line.
    Curve warm = resample(*opts.initial_curve, m);
    const linalg::Vec& wa = warm.points.front();
    const linalg::Vec& wb = warm.points.back();
    for (std::size_t j = 0; j <= m; ++j) {
      const double u = static_cast<double>(j) / static_cast<double>(m);
      for (std::size_t k = 0; k < n; ++k)
        warm.points[j][k] += (1.0 - u) * (a[k] - wa[k]) + u * (b[k] - wb[k]);
    }
    warm.points.front() = a;
    warm.points.back() = b;
    const double we = curve_energy(warm, metric, t, opts.exec);
    if (we < energy) {
      current = std::move(warm);
      energy = we;
    }
  }

  std::vector<SegmentEval> segs;
  std::vector<linalg::Vec> grad, prev_grad;
  Curve trial;
  Curve prev_points;
  double alpha = 0.0;
  bool have_prev = false;

  for (std::size_t sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    eval_segments(current, metric, t, true, opts.exec, segs);
    assemble_gradient(segs, n, grad);
    const double gnorm2 = grad_norm_sq(grad);
    if (gnorm2 == 0.0) {
      res.converged = true;  // straight line already optimal
      break;
    }

    if (have_prev) {
      // Barzilai-Borwein trial step from the last accepted move; the
      // backtracking below safeguards it.
      double sy = 0.0, yy = 0.0;
      for (std::size_t i = 1; i + 1 < current.points.size(); ++i) {
        const linalg::Vec& p = current.points[i];
        const linalg::Vec& q = prev_points.points[i];
        const linalg::Vec& g = grad[i - 1];
        const linalg::Vec& h = prev_grad[i - 1];
        for (std::size_t k = 0; k < n; ++k) {
          const double s = p[k] - q[k];
          const double y = g[k] - h[k];
          sy += s * y;
          yy += y * y;
        }
      }
      if (sy > 0.0 && yy > 0.0) alpha = sy / yy;
    }
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      alpha = energy / (2.0 * gnorm2);

    prev_points = current;
    prev_grad = grad;

    double new_energy = energy;
    bool accepted = false;
    bool clamped_step = false;
    for (int bt = 0; bt < 60; ++bt) {
      clamped_step = step_curve(current, grad, alpha, opts.domain, trial);
      eval_segments(trial, metric, t, false, opts.exec, segs);
      const double e = total_energy(segs);
      if (e <= energy - 1e-4 * alpha * gnorm2) {
        new_energy = e;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // No descent representable even at the smallest trial step: the
      // achievable relative decrease is below the convergence threshold.
      res.converged = true;
      break;
    }

    current.points.swap(trial.points);
    res.clamped = res.clamped || clamped_step;
    res.iterations = sweep + 1;
    have_prev = true;

    const double decrease = energy - new_energy;
    energy = new_energy;
    if (decrease <= opts.rel_decrease * std::max(energy, 1e-300)) {
      res.converged = true;
      break;
    }
  }

  res.dist_sq = energy;
  res.curve = std::move(current);
  return res;
}

GeodesicResult refine(const GeodesicResult& r, const MetricField& metric,
                      double t, std::size_t factor,
                      const GeodesicOptions& opts) {
  if (factor < 2) throw InvalidInput("refinement factor must be >= 2");
  GeodesicOptions fine = opts;
  fine.segments = r.curve.segments() * factor;
  fine.initial_curve = &r.curve;
  GeodesicResult out = distance_sq(r.curve.points.front(),
                                   r.curve.points.back(), metric, t, fine);
  out.straight_line_energy = r.straight_line_energy;
  return out;
}

}  // namespace stocon::geo
