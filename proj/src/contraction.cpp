#include "stocon/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>

#include "stocon/error.hpp"
#include "stocon/geodesic.hpp"
#include "stocon/rng.hpp"
#include "stocon/sde.hpp"

namespace stocon::cert {

namespace {

constexpr std::uint64_t kTagHalton = 7, kTagRegularity = 8, kTagCondInit = 9;

double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv, x = 0.0;
  while (i > 0) {
    x += static_cast<double>(i % base) * f;
    i /= base;
    f *= inv;
  }
  return x;
}

double frac(double x) { return x - std::floor(x); }

}  // namespace

std::vector<SamplePoint> sample_points(const sys::Domain& domain,
                                       const SampleSpec& spec,
                                       bool integer_time) {
  domain.validate();
  if (spec.count == 0) throw InvalidInput("sample budget must be positive");

  const std::size_t n = domain.lower.size();
  const bool time_varies = domain.t1 > domain.t0;
  const std::size_t dims = n + (time_varies ? 1 : 0);

  auto coord = [&](std::size_t d, double u) {
    if (d < n) return domain.lower[d] + u * (domain.upper[d] - domain.lower[d]);
    return domain.t0 + u * (domain.t1 - domain.t0);
  };
  auto push = [&](std::vector<SamplePoint>& out,
                  const std::vector<double>& unit) {
    SamplePoint p;
    p.state = linalg::Vec(n);
    for (std::size_t d = 0; d < n; ++d) p.state[d] = coord(d, unit[d]);
    p.time = time_varies ? coord(n, unit[n]) : domain.t0;
    if (integer_time) p.time = static_cast<double>(std::llround(p.time));
    out.push_back(std::move(p));
  };

  // Regular grid with endpoints, sized to roughly half the budget.
  std::size_t g = 0, grid_total = 0;
  const std::size_t grid_budget = spec.count / 2;
  for (std::size_t c = 2;; ++c) {
    std::size_t total = 1;
    bool overflow = false;
    for (std::size_t d = 0; d < dims; ++d) {
      total *= c;
      if (total > grid_budget) {
        overflow = true;
        break;
      }
    }
    if (overflow) break;
    g = c;
    grid_total = total;
  }

  std::vector<SamplePoint> out;
  out.reserve(spec.count);
  std::vector<double> unit(dims, 0.0);
  for (std::size_t idx = 0; idx < grid_total; ++idx) {
    std::size_t rem = idx;
    for (std::size_t d = 0; d < dims; ++d) {
      const std::size_t q = rem % g;
      rem /= g;
      unit[d] = g == 1 ? 0.5 : static_cast<double>(q) / static_cast<double>(g - 1);
    }
    push(out, unit);
  }

  // Low-discrepancy top-up: Halton points with a seeded rotation.
  static constexpr std::uint64_t kPrimes[] = {2,  3,  5,  7,  11,
                                              13, 17, 19, 23, 29};
  if (dims > std::size(kPrimes))
    throw InvalidInput("sampling supports at most 10 dimensions");
  rng::Stream shift_stream(rng::derive_seed(spec.seed, 0, kTagHalton));
  std::vector<double> shift(dims);
  for (std::size_t d = 0; d < dims; ++d) shift[d] = shift_stream.next_uniform();

  for (std::uint64_t i = 1; out.size() < spec.count; ++i) {
    for (std::size_t d = 0; d < dims; ++d)
      unit[d] = frac(radical_inverse(i, kPrimes[d]) + shift[d]);
    push(out, unit);
  }
  return out;
}

namespace {

enum class Sense { max, min };

using PointFn = std::function<double(const SamplePoint&)>;

Extremum extremize(const std::vector<SamplePoint>& pts, const PointFn& fn,
                   Sense sense, Exec exec) {
  std::vector<double> values(pts.size(), 0.0);
  std::vector<unsigned char> failed(pts.size(), 0);
  parallel_for(exec, pts.size(), [&](std::size_t i) {
    try {
      const double v = fn(pts[i]);
      if (!std::isfinite(v))
        failed[i] = 1;
      else
        values[i] = v;
    } catch (const Error&) {
      failed[i] = 1;
    }
  });

  Extremum out;
  out.evaluated = pts.size();
  bool have = false;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (failed[i]) {
      ++out.failures;
      continue;
    }
    const bool better = !have || (sense == Sense::max ? values[i] > out.value
                                                      : values[i] < out.value);
    if (better) {
      out.value = values[i];
      out.worst = {pts[i].state, pts[i].time, values[i]};
      have = true;
    }
  }
  if (!have) throw Error("every sample-point evaluation failed");
  return out;
}

double trace_weighted_noise(const linalg::Mat& theta, const linalg::Mat& sigma) {
  const double f = linalg::frobenius(linalg::matmul(theta, sigma));
  return f * f;
}

}  // namespace

linalg::Mat generalized_jacobian_discrete(const sys::DiscreteSystem& s,
                                          const linalg::Vec& a, long k) {
  const linalg::Mat th1 = s.theta_k(a, k);
  const linalg::Vec img = s.map(a, k);
  const linalg::Mat th2 = s.theta_k(img, k + 1);
  const linalg::Mat j = sys::map_jacobian(s, a, k);
  return linalg::matmul(linalg::matmul(th2, j), linalg::invert(th1));
}

linalg::Mat continuous_gen_jacobian_sym(const sys::ContinuousSystem& s,
                                        const linalg::Vec& a, double t) {
  const linalg::Mat th = s.theta(a, t);
  const linalg::Mat j = sys::drift_jacobian(s, a, t);
  const linalg::Mat td = sys::theta_dot(s, a, t);
  const linalg::Mat g = linalg::matmul(linalg::add(td, linalg::matmul(th, j)),
                                       linalg::invert(th));
  return linalg::sym_part(g);
}

Extremum discrete_rate(const sys::DiscreteSystem& s, const sys::Domain& domain,
                       const SampleSpec& spec) {
  s.validate();
  const auto pts = sample_points(domain, spec, true);
  return extremize(
      pts,
      [&](const SamplePoint& p) {
        const linalg::Mat f = generalized_jacobian_discrete(
            s, p.state, static_cast<long>(std::llround(p.time)));
        return linalg::lambda_min_max(linalg::ata(f)).max;
      },
      Sense::max, spec.exec);
}

Extremum continuous_rate(const sys::ContinuousSystem& s,
                         const sys::Domain& domain, const SampleSpec& spec) {
  s.validate();
  const auto pts = sample_points(domain, spec, false);
  Extremum worst_eig = extremize(
      pts,
      [&](const SamplePoint& p) {
        return linalg::lambda_min_max(
                   continuous_gen_jacobian_sym(s, p.state, p.time))
            .max;
      },
      Sense::max, spec.exec);
  worst_eig.value = -worst_eig.value;
  return worst_eig;
}

namespace {

Extremum metric_floor_impl(const geo::MetricField& metric,
                           const sys::Domain& domain, const SampleSpec& spec,
                           bool integer_time) {
  const auto pts = sample_points(domain, spec, integer_time);
  return extremize(
      pts,
      [&](const SamplePoint& p) {
        return linalg::lambda_min_max(metric(p.state, p.time)).min;
      },
      Sense::min, spec.exec);
}

}  // namespace

Extremum metric_floor(const sys::ContinuousSystem& s, const sys::Domain& domain,
                      const SampleSpec& spec) {
  s.validate();
  return metric_floor_impl(geo::metric_of(s), domain, spec, false);
}

Extremum metric_floor(const sys::DiscreteSystem& s, const sys::Domain& domain,
                      const SampleSpec& spec) {
  s.validate();
  return metric_floor_impl(geo::metric_of(s), domain, spec, true);
}

Extremum noise_trace_bound(const sys::ContinuousSystem& s,
                           const sys::Domain& domain, const SampleSpec& spec) {
  s.validate();
  const auto pts = sample_points(domain, spec, false);
  return extremize(
      pts,
      [&](const SamplePoint& p) {
        return trace_weighted_noise(s.theta(p.state, p.time),
                                    s.diffusion(p.state, p.time));
      },
      Sense::max, spec.exec);
}

Extremum noise_trace_bound(const sys::DiscreteSystem& s,
                           const sys::Domain& domain, const SampleSpec& spec) {
  s.validate();
  const auto pts = sample_points(domain, spec, true);
  return extremize(
      pts,
      [&](const SamplePoint& p) {
        const long k = static_cast<long>(std::llround(p.time));
        return trace_weighted_noise(s.theta_k(p.state, k),
                                    s.diffusion(p.state, k));
      },
      Sense::max, spec.exec);
}

Extremum sigma_frobenius_sup(const sys::ContinuousSystem& s,
                             const sys::Domain& domain,
                             const SampleSpec& spec) {
  s.validate();
  const auto pts = sample_points(domain, spec, false);
  return extremize(
      pts,
      [&](const SamplePoint& p) {
        return linalg::frobenius(s.diffusion(p.state, p.time));
      },
      Sense::max, spec.exec);
}

Extremum metric_norm_sup(const sys::ContinuousSystem& s,
                         const sys::Domain& domain, const SampleSpec& spec) {
  s.validate();
  const auto metric = geo::metric_of(s);
  const auto pts = sample_points(domain, spec, false);
  return extremize(
      pts,
      [&](const SamplePoint& p) {
        return linalg::lambda_min_max(metric(p.state, p.time)).max;
      },
      Sense::max, spec.exec);
}

RegularityEstimate regularity_check(const sys::ContinuousSystem& s,
                                    const sys::Domain& domain,
                                    std::size_t pairs, std::uint64_t seed) {
  s.validate();
  domain.validate();
  if (pairs == 0) throw InvalidInput("regularity check needs pairs");

  rng::Stream stream(rng::derive_seed(seed, 0, kTagRegularity));
  const std::size_t n = domain.lower.size();
  auto draw_state = [&]() {
    linalg::Vec x(n);
    for (std::size_t i = 0; i < n; ++i)
      x[i] = domain.lower[i] +
             stream.next_uniform() * (domain.upper[i] - domain.lower[i]);
    return x;
  };
  auto draw_time = [&]() {
    return domain.t0 + stream.next_uniform() * (domain.t1 - domain.t0);
  };
  auto growth_at = [&](const linalg::Vec& x, double t) {
    const double fn = linalg::norm2(s.drift(x, t));
    const double sn = s.d > 0 ? linalg::frobenius(s.diffusion(x, t)) : 0.0;
    return (fn * fn + sn * sn) / (1.0 + linalg::norm2_sq(x));
  };

  RegularityEstimate est;
  est.pairs = pairs;
  for (std::size_t i = 0; i < pairs; ++i) {
    const linalg::Vec a = draw_state(), b = draw_state();
    const double t = draw_time();
    est.growth = std::max(est.growth, growth_at(a, t));
    est.growth = std::max(est.growth, growth_at(b, t));

    const double gap = linalg::norm2(linalg::sub(a, b));
    if (gap < 1e-12) continue;
    double num = linalg::norm2(linalg::sub(s.drift(a, t), s.drift(b, t)));
    if (s.d > 0)
      num += linalg::frobenius(
          linalg::sub(s.diffusion(a, t), s.diffusion(b, t)));
    est.lipschitz = std::max(est.lipschitz, num / gap);
  }
  return est;
}

ConditionalTraceEstimate conditional_trace_bound(
    const sys::ContinuousSystem& s, const sys::Domain& initial_region,
    double horizon, double delta, std::size_t paths, std::uint64_t seed,
    Exec exec) {
  s.validate();
  initial_region.validate();
  if (initial_region.lower.size() != s.n)
    throw InvalidInput("initial region dimension does not match the system");
  if (!(horizon > 0.0) || !(delta > 0.0))
    throw InvalidInput("horizon and step must be positive");
  if (paths == 0) throw InvalidInput("conditional bound needs paths");

  const std::size_t steps =
      static_cast<std::size_t>(std::ceil(horizon / delta - 1e-12));
  const std::size_t r_count = steps + 1;

  struct Slot {
    std::vector<double> trace;  // empty when the path diverged
    bool diverged = false;
  };
  std::vector<Slot> slots(paths);
  parallel_for(exec, paths, [&](std::size_t i) {
    rng::Stream init_stream(rng::derive_seed(seed, i, kTagCondInit));
    linalg::Vec a0(s.n);
    for (std::size_t d = 0; d < s.n; ++d)
      a0[d] = initial_region.lower[d] +
              init_stream.next_uniform() *
                  (initial_region.upper[d] - initial_region.lower[d]);
    const auto traj = sde::simulate_single(s, a0, horizon, delta,
                                           rng::derive_seed(seed, i, 0));
    if (traj.diverged) {
      slots[i].diverged = true;
      return;
    }
    slots[i].trace.resize(r_count);
    for (std::size_t r = 0; r < r_count; ++r)
      slots[i].trace[r] = trace_weighted_noise(
          s.theta(traj.states[r], traj.times[r]),
          s.diffusion(traj.states[r], traj.times[r]));
  });

  ConditionalTraceEstimate est;
  est.n_paths = paths;
  std::vector<double> sum(r_count, 0.0), sumsq(r_count, 0.0);
  std::size_t alive = 0;
  for (const Slot& slot : slots) {
    if (slot.diverged) {
      ++est.n_diverged;
      continue;
    }
    ++alive;
    for (std::size_t r = 0; r < r_count; ++r) {
      sum[r] += slot.trace[r];
      sumsq[r] += slot.trace[r] * slot.trace[r];
    }
  }
  est.certifiable = est.n_diverged == 0;
  if (alive == 0) return est;

  const double dt = horizon / static_cast<double>(steps);
  double total = 0.0;
  for (std::size_t r = 0; r < r_count; ++r) {
    const double mean = sum[r] / static_cast<double>(alive);
    total += mean;
    if (r == 0 || mean > est.max_mean_trace) {
      est.max_mean_trace = mean;
      est.time_of_max = s.domain.t0 + dt * static_cast<double>(r);
      if (alive > 1) {
        const double var = std::max(
            0.0, sumsq[r] / static_cast<double>(alive) - mean * mean);
        est.stderr_at_max = std::sqrt(var / static_cast<double>(alive - 1));
      }
    }
  }
  est.overall_mean = total / static_cast<double>(r_count);
  return est;
}

namespace {

CertificationReport assemble(Mode mode, const Extremum& rate,
                             const Extremum& floor, const Extremum& noise,
                             double margin) {
  if (!(margin >= 1.0))
    throw InvalidInput("safety margin must be at least 1");
  CertificationReport rep;
  rep.mode = mode;
  rep.rate_raw = rate.value;
  rep.rate = mode == Mode::discrete ? rate.value * margin : rate.value / margin;
  rep.margin = margin;
  rep.beta = floor.value;
  rep.noise_bound = noise.value;
  rep.worst_rate = rate.worst;
  rep.worst_beta = floor.worst;
  rep.worst_noise = noise.worst;
  rep.sample_count = rate.evaluated;
  rep.eval_failures = rate.failures + floor.failures + noise.failures;

  const std::size_t total_evals =
      rate.evaluated + floor.evaluated + noise.evaluated;
  rep.pass.rate = mode == Mode::discrete ? rep.rate < 1.0 : rep.rate > 0.0;
  rep.pass.floor = rep.beta > 0.0;
  rep.pass.noise = std::isfinite(rep.noise_bound) && rep.noise_bound >= 0.0;
  rep.pass.evaluations =
      static_cast<double>(rep.eval_failures) <=
      tol::kEvalFailFraction * static_cast<double>(total_evals);
  return rep;
}

}  // namespace

CertificationReport certify(const sys::DiscreteSystem& s,
                            const SampleSpec& spec, double margin) {
  return assemble(Mode::discrete, discrete_rate(s, s.domain, spec),
                  metric_floor(s, s.domain, spec),
                  noise_trace_bound(s, s.domain, spec), margin);
}

CertificationReport certify(const sys::ContinuousSystem& s,
                            const SampleSpec& spec, double margin) {
  CertificationReport rep =
      assemble(Mode::continuous, continuous_rate(s, s.domain, spec),
               metric_floor(s, s.domain, spec),
               noise_trace_bound(s, s.domain, spec), margin);
  const RegularityEstimate reg = regularity_check(
      s, s.domain, spec.count, rng::derive_seed(spec.seed, 0, kTagRegularity));
  rep.lipschitz_est = reg.lipschitz;
  rep.growth_est = reg.growth;
  return rep;
}

}  // namespace stocon::cert
