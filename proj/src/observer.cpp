#include "stocon/observer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <utility>

#include "stocon/contraction.hpp"
#include "stocon/error.hpp"
#include "stocon/rng.hpp"
#include "stocon/sde.hpp"

namespace stocon::observer {

using linalg::Mat;
using linalg::Vec;

namespace {

constexpr std::uint64_t kTagFigure = 11;

Mat p_matrix() { return Mat(2, 2, {-3.0, 5.0, 3.0, 2.0}); }
Mat q_matrix() { return Mat(2, 2, {-1.0, 1.0, -1.0, 0.0}); }

// Factor of the estimation-chart metric: the raw-chart differential
// [[1, 0], [x1 x2 / s, s]] with s = sqrt(1 + x1^2).
Mat chart_differential(const Vec& x) {
  const double s1 = std::sqrt(1.0 + x[0] * x[0]);
  return Mat(2, 2, {1.0, 0.0, x[0] * x[1] / s1, s1});
}

}  // namespace

Measurement constant_y(double y) {
  return [y](double) { return y; };
}

Measurement grid_measurement(std::vector<double> values, double t0,
                             double dt) {
  if (values.empty()) throw InvalidInput("measurement grid must be nonempty");
  if (!(dt > 0.0)) throw InvalidInput("measurement grid step must be positive");
  return [values = std::move(values), t0, dt](double t) {
    long i = std::lround((t - t0) / dt);
    i = std::clamp(i, 0L, static_cast<long>(values.size()) - 1L);
    return values[static_cast<std::size_t>(i)];
  };
}

bool ObserverConstants::consistent(double rel_tol) const {
  const double derived = c_coeff / (2.0 * gamma0 * lambda);
  return std::abs(ultimate_coeff - derived) <= rel_tol * ultimate_coeff;
}

ObserverConstants shipped_constants(double s) {
  ObserverConstants k;
  k.p = p_matrix();
  k.q = q_matrix();
  k.s = s;
  return k;
}

sys::Domain default_box() {
  sys::Domain d;
  d.lower = {-3.0, -3.0};
  d.upper = {3.0, 3.0};
  d.t0 = d.t1 = 0.0;
  return d;
}

sys::ContinuousSystem plant() {
  sys::ContinuousSystem s;
  s.n = 2;
  s.d = 0;
  s.drift = [](const Vec& x, double) {
    const double s1 = std::sqrt(1.0 + x[0] * x[0]);
    return Vec{x[1] * s1, -x[0] * x[1] * x[1] / s1};
  };
  s.diffusion = [](const Vec&, double) { return Mat(2, 0); };
  s.theta = [](const Vec&, double) { return Mat::identity(2); };
  s.domain.lower = {-16.0, -4.0};
  s.domain.upper = {16.0, 4.0};
  s.domain.t1 = 15.0;
  s.name = "plant";
  return s;
}

sys::ContinuousSystem observer_transformed(Measurement y, double s) {
  if (!y) throw InvalidInput("observer needs a measurement signal");
  sys::ContinuousSystem sy;
  sy.n = 2;
  sy.d = 1;
  sy.drift = [y](const Vec& x, double t) {
    const double s1 = std::sqrt(1.0 + x[0] * x[0]);
    const double u = (x[0] * x[1] - s1) / (s1 * s1);
    const double e = x[0] - y(t);
    return Vec{x[1] * s1 - e, e * u - x[0] * x[1] * x[1] / s1};
  };
  sy.jacobian = [y](const Vec& x, double t) {
    const double s1 = std::sqrt(1.0 + x[0] * x[0]);
    const double s2 = s1 * s1;
    const double u = (x[0] * x[1] - s1) / s2;
    const double e = x[0] - y(t);
    const double du =
        (x[1] - x[0] / s1) / s2 - 2.0 * x[0] * (x[0] * x[1] - s1) / (s2 * s2);
    return Mat(2, 2,
               {x[0] * x[1] / s1 - 1.0, s1,
                u + e * du - x[1] * x[1] / (s2 * s1),
                e * x[0] / s2 - 2.0 * x[0] * x[1] / s1});
  };
  sy.diffusion = [s](const Vec& x, double) {
    const double s1 = std::sqrt(1.0 + x[0] * x[0]);
    const double u = (x[0] * x[1] - s1) / (s1 * s1);
    return Mat(2, 1, {s, -s * u});
  };
  sy.theta = [](const Vec& x, double) {
    return linalg::matmul(p_matrix(), chart_differential(x));
  };
  sy.domain = default_box();
  sy.name = "observer-transformed";
  return sy;
}

sys::ContinuousSystem observer_raw_noisy(Measurement y, double s) {
  if (!y) throw InvalidInput("observer needs a measurement signal");
  sys::ContinuousSystem sy;
  sy.n = 2;
  sy.d = 1;
  sy.drift = [y](const Vec& x, double t) {
    const double e = x[0] - y(t);
    return Vec{x[1] - e, -e};
  };
  sy.jacobian = [](const Vec&, double) { return q_matrix(); };
  sy.diffusion = [s](const Vec&, double) { return Mat(2, 1, {s, s}); };
  sy.theta = [](const Vec&, double) { return p_matrix(); };
  sy.domain.lower = {-3.0, -10.0};
  sy.domain.upper = {3.0, 10.0};
  sy.name = "observer-raw";
  return sy;
}

Vec to_transformed(const Vec& raw) {
  if (raw.size() != 2) throw InvalidInput("raw state must have dimension 2");
  return Vec{raw[0], raw[1] / std::sqrt(1.0 + raw[0] * raw[0])};
}

Vec to_raw(const Vec& xhat) {
  if (xhat.size() != 2)
    throw InvalidInput("estimation state must have dimension 2");
  return Vec{xhat[0], xhat[1] * std::sqrt(1.0 + xhat[0] * xhat[0])};
}

ConstantsReport verify_constants(const sys::Domain& box, std::size_t samples,
                                 std::uint64_t seed) {
  box.validate();
  if (box.dim() != 2) throw InvalidInput("observer box must be 2-dimensional");
  const auto shipped = shipped_constants(1.0);
  const auto sy = observer_transformed(constant_y(0.0), 1.0);

  cert::SampleSpec spec;
  spec.count = samples;
  spec.seed = seed;

  const auto rate = cert::continuous_rate(sy, box, spec);

  const auto pqp = linalg::matmul(
      shipped.p, linalg::matmul(shipped.q, linalg::invert(shipped.p)));
  const auto eig = linalg::sym_eigen(linalg::sym_part(pqp));

  const auto noise = cert::noise_trace_bound(sy, box, spec);

  sys::Domain slice = box;
  slice.lower[1] = slice.upper[1] = 0.0;
  const auto floor0 = cert::metric_floor(sy, slice, spec);

  const double ultimate =
      noise.value / (2.0 * floor0.value * rate.value);

  ConstantsReport rep;
  rep.box = box;
  auto add = [&rep](const std::string& name, double got, double want,
                    double tol) {
    rep.checks.push_back({name, got, want, tol, std::abs(got - want) <= tol});
  };
  add("contraction_rate", rate.value, shipped.lambda, 0.01);
  add("error_matrix_eig_low", eig.values[0], -0.76, 0.01);
  add("error_matrix_eig_high", eig.values[1], -0.24, 0.01);
  add("noise_trace_sup", noise.value, shipped.c_coeff, 0.2);
  add("metric_floor_slice", floor0.value, shipped.gamma0, 0.05);
  add("asymptotic_mse", ultimate, shipped.ultimate_coeff, 0.05);

  for (double b : {0.0, 1.0, box.upper[1]}) {
    sys::Domain sub = box;
    sub.lower[1] = -b;
    sub.upper[1] = b;
    rep.slice_sups.push_back(cert::noise_trace_bound(sy, sub, spec).value);
  }
  rep.sup_ratio = noise.value / shipped.c_coeff;
  rep.all_pass = std::all_of(rep.checks.begin(), rep.checks.end(),
                             [](const ConstantCheck& c) { return c.pass; });
  return rep;
}

std::string ConstantsReport::summary() const {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "constants check over box [" << box.lower[0] << "," << box.upper[0]
     << "] x [" << box.lower[1] << "," << box.upper[1] << "]\n";
  for (const auto& c : checks) {
    os << "  " << std::left << std::setw(24) << c.name << std::right
       << " recomputed " << std::setw(10) << c.recomputed << "  published "
       << std::setw(8) << c.published << "  tol " << c.tolerance << "  "
       << (c.pass ? "pass" : "FAIL") << "\n";
  }
  os << "  noise trace supremum sits at " << sup_ratio
     << "x the published value; sup per |x2| slice (0, 1, full):";
  for (double v : slice_sups) os << " " << v;
  os << "\n";
  return os.str();
}

FigureData reproduce_figure(const FigureOptions& opts) {
  if (!(opts.s >= 0.0)) throw InvalidInput("noise intensity must be >= 0");
  if (opts.n_paths == 0) throw InvalidInput("need at least one sample path");
  if (!(opts.delta > 0.0) || !(opts.horizon > opts.delta))
    throw InvalidInput("horizon must exceed the positive step");
  if (opts.plant_init.size() != 2 || opts.observer_init.size() != 2)
    throw InvalidInput("initial conditions must have dimension 2");

  const auto steps =
      static_cast<std::size_t>(std::llround(opts.horizon / opts.delta));
  const auto pl = plant();
  const auto px = sde::simulate_with_increments(
      pl, opts.plant_init, opts.delta, std::vector<Vec>(steps));
  if (px.states.size() != steps + 1) throw Error("plant integration diverged");

  std::vector<double> y(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) y[k] = px.states[k][0];
  const auto raw =
      observer_raw_noisy(grid_measurement(y, 0.0, opts.delta), opts.s);
  const Vec raw0 = to_raw(opts.observer_init);

  FigureData fd;
  fd.times = px.times;
  fd.plant_x1.resize(steps + 1);
  fd.plant_x2.resize(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    fd.plant_x1[k] = px.states[k][0];
    fd.plant_x2[k] = px.states[k][1];
  }

  const std::size_t total =
      std::max(opts.n_paths, opts.mse_paths ? opts.mse_paths : opts.n_paths);
  fd.mse_paths = total;
  std::vector<double> sum(steps + 1, 0.0), sum_sq(steps + 1, 0.0);
  const double root_dt = std::sqrt(opts.delta);

  for (std::size_t i = 0; i < total; ++i) {
    const auto xi = sde::gaussian_stream(
        rng::derive_seed(opts.seed, i, kTagFigure), steps, 1);
    std::vector<Vec> dw(steps);
    for (std::size_t k = 0; k < steps; ++k)
      dw[k] = Vec{root_dt * xi[k][0]};
    const auto tr = sde::simulate_with_increments(raw, raw0, opts.delta, dw);
    if (tr.states.size() != steps + 1)
      throw Error("observer path diverged during figure reproduction");

    const bool keep = i < opts.n_paths;
    if (keep) {
      fd.xhat1.emplace_back(steps + 1);
      fd.xhat2.emplace_back(steps + 1);
    }
    for (std::size_t k = 0; k <= steps; ++k) {
      const Vec xh = to_transformed(tr.states[k]);
      const double e1 = xh[0] - px.states[k][0];
      const double e2 = xh[1] - px.states[k][1];
      const double sq = e1 * e1 + e2 * e2;
      sum[k] += sq;
      sum_sq[k] += sq * sq;
      if (keep) {
        fd.xhat1.back()[k] = xh[0];
        fd.xhat2.back()[k] = xh[1];
      }
    }
  }

  const double n = static_cast<double>(total);
  fd.mean_mse.resize(steps + 1);
  fd.mse_stderr.resize(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double mean = sum[k] / n;
    fd.mean_mse[k] = mean;
    fd.mse_stderr[k] =
        total > 1
            ? std::sqrt(std::max(0.0, sum_sq[k] / n - mean * mean) / (n - 1.0))
            : 0.0;
  }
  fd.bound_line = shipped_constants(opts.s).ultimate();
  return fd;
}

}  // namespace stocon::observer
