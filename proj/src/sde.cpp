#include "stocon/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stocon/error.hpp"
#include "stocon/geodesic.hpp"

namespace stocon::sde {

namespace {

constexpr std::uint64_t kTagA = 1, kTagB = 2, kTagInit = 3;

linalg::Vec draw_normal_vec(rng::Stream& s, std::size_t dim) {
  linalg::Vec w(dim);
  for (std::size_t i = 0; i < dim; ++i) w[i] = s.next_normal();
  return w;
}

bool inside(const sys::Domain& box, const linalg::Vec& x) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) return false;
    if (x[i] < box.lower[i] || x[i] > box.upper[i]) return false;
  }
  return true;
}

struct Recorder {
  std::size_t stride;
  std::size_t last_step;
  bool want(std::size_t k) const {
    return k % stride == 0 || k == last_step;
  }
};

}  // namespace

std::vector<linalg::Vec> gaussian_stream(std::uint64_t seed, std::size_t count,
                                         std::size_t dim) {
  rng::Stream s(seed);
  std::vector<linalg::Vec> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(draw_normal_vec(s, dim));
  return out;
}

TrajectoryPair simulate_discrete(const sys::DiscreteSystem& s,
                                 const linalg::Vec& a0, const linalg::Vec& b0,
                                 std::size_t steps, Coupling coupling,
                                 std::uint64_t seed,
                                 std::size_t record_stride) {
  s.validate();
  if (a0.size() != s.n || b0.size() != s.n)
    throw InvalidInput("initial conditions do not match the system dimension");
  if (record_stride == 0) record_stride = 1;

  const sys::Domain safety = s.domain.inflate(tol::kSafetyBoxFactor);
  rng::Stream wa(rng::derive_seed(seed, 0, kTagA));
  rng::Stream wb(rng::derive_seed(seed, 0, kTagB));
  Recorder rec{record_stride, steps};

  TrajectoryPair out;
  out.coupling = coupling;
  out.seed = seed;
  out.delta = 1.0;
  linalg::Vec a = a0, b = b0;
  out.times.push_back(0.0);
  out.a_path.push_back(a);
  out.b_path.push_back(b);

  for (std::size_t k = 0; k < steps; ++k) {
    const long kk = static_cast<long>(k);
    linalg::Vec an = s.map(a, kk);
    if (s.d > 0) {
      linalg::Vec w = draw_normal_vec(wa, s.d);
      an = linalg::add(an, linalg::matvec(s.diffusion(a, kk), w));
    }
    linalg::Vec bn = s.map(b, kk);
    if (coupling == Coupling::independent && s.d > 0) {
      linalg::Vec w = draw_normal_vec(wb, s.d);
      bn = linalg::add(bn, linalg::matvec(s.diffusion(b, kk), w));
    }
    if (!inside(safety, an) || !inside(safety, bn)) {
      out.diverged = true;
      break;
    }
    a = std::move(an);
    b = std::move(bn);
    out.steps_taken = k + 1;
    if (rec.want(k + 1)) {
      out.times.push_back(static_cast<double>(k + 1));
      out.a_path.push_back(a);
      out.b_path.push_back(b);
    }
  }
  if (out.diverged && out.times.back() != static_cast<double>(out.steps_taken)) {
    out.times.push_back(static_cast<double>(out.steps_taken));
    out.a_path.push_back(a);
    out.b_path.push_back(b);
  }
  return out;
}

namespace {

// Shared Euler-Maruyama pair loop. Returns the number of completed steps.
TrajectoryPair em_pair(const sys::ContinuousSystem& s, const linalg::Vec& a0,
                       const linalg::Vec& b0, double T, double delta,
                       Coupling coupling, std::uint64_t seed,
                       std::size_t record_stride, bool single) {
  s.validate();
  if (a0.size() != s.n || (!single && b0.size() != s.n))
    throw InvalidInput("initial conditions do not match the system dimension");
  if (!(delta > 0.0) || !(T > 0.0))
    throw InvalidInput("horizon and step must be positive");
  if (record_stride == 0) record_stride = 1;

  const std::size_t steps =
      static_cast<std::size_t>(std::ceil(T / delta - 1e-12));
  const double dt = T / static_cast<double>(steps);
  const double sqdt = std::sqrt(dt);
  const double t0 = s.domain.t0;

  const sys::Domain safety = s.domain.inflate(tol::kSafetyBoxFactor);
  rng::Stream wa(rng::derive_seed(seed, 0, kTagA));
  rng::Stream wb(rng::derive_seed(seed, 0, kTagB));
  Recorder rec{record_stride, steps};

  TrajectoryPair out;
  out.coupling = coupling;
  out.seed = seed;
  out.delta = dt;
  linalg::Vec a = a0, b = single ? a0 : b0;
  out.times.push_back(t0);
  out.a_path.push_back(a);
  if (!single) out.b_path.push_back(b);

  auto em_step = [&](const linalg::Vec& x, double t, rng::Stream* noise) {
    linalg::Vec next = linalg::add(x, linalg::scale(dt, s.drift(x, t)));
    if (noise && s.d > 0) {
      linalg::Vec w = draw_normal_vec(*noise, s.d);
      next = linalg::add(
          next, linalg::matvec(s.diffusion(x, t), linalg::scale(sqdt, w)));
    }
    return next;
  };

  for (std::size_t k = 0; k < steps; ++k) {
    const double t = t0 + dt * static_cast<double>(k);
    linalg::Vec an = em_step(a, t, &wa);
    linalg::Vec bn;
    if (!single) {
      rng::Stream* bs =
          coupling == Coupling::independent ? &wb : nullptr;
      bn = em_step(b, t, bs);
    }
    if (!inside(safety, an) || (!single && !inside(safety, bn))) {
      out.diverged = true;
      break;
    }
    a = std::move(an);
    if (!single) b = std::move(bn);
    out.steps_taken = k + 1;
    if (rec.want(k + 1)) {
      out.times.push_back(t0 + dt * static_cast<double>(k + 1));
      out.a_path.push_back(a);
      if (!single) out.b_path.push_back(b);
    }
  }
  const double t_last = t0 + dt * static_cast<double>(out.steps_taken);
  if (out.diverged && out.times.back() != t_last) {
    out.times.push_back(t_last);
    out.a_path.push_back(a);
    if (!single) out.b_path.push_back(b);
  }
  return out;
}

}  // namespace

TrajectoryPair simulate_continuous(const sys::ContinuousSystem& s,
                                   const linalg::Vec& a0,
                                   const linalg::Vec& b0, double T,
                                   double delta, Coupling coupling,
                                   std::uint64_t seed,
                                   std::size_t record_stride) {
  return em_pair(s, a0, b0, T, delta, coupling, seed, record_stride, false);
}

Trajectory simulate_single(const sys::ContinuousSystem& s,
                           const linalg::Vec& a0, double T, double delta,
                           std::uint64_t seed, std::size_t record_stride) {
  TrajectoryPair pair = em_pair(s, a0, a0, T, delta, Coupling::independent,
                                seed, record_stride, true);
  Trajectory out;
  out.times = std::move(pair.times);
  out.states = std::move(pair.a_path);
  out.diverged = pair.diverged;
  out.delta = pair.delta;
  return out;
}

Trajectory simulate_with_increments(const sys::ContinuousSystem& s,
                                    const linalg::Vec& a0, double delta,
                                    const std::vector<linalg::Vec>& dW) {
  s.validate();
  if (!(delta > 0.0)) throw InvalidInput("step must be positive");
  Trajectory out;
  out.delta = delta;
  linalg::Vec a = a0;
  const double t0 = s.domain.t0;
  out.times.push_back(t0);
  out.states.push_back(a);
  for (std::size_t k = 0; k < dW.size(); ++k) {
    const double t = t0 + delta * static_cast<double>(k);
    linalg::Vec next = linalg::add(a, linalg::scale(delta, s.drift(a, t)));
    if (s.d > 0) {
      if (dW[k].size() != s.d)
        throw InvalidInput("increment dimension does not match noise dimension");
      next = linalg::add(next, linalg::matvec(s.diffusion(a, t), dW[k]));
    }
    a = std::move(next);
    if (!linalg::all_finite(a)) {
      out.diverged = true;
      break;
    }
    out.times.push_back(t0 + delta * static_cast<double>(k + 1));
    out.states.push_back(a);
  }
  return out;
}

InitSampler fixed_init(linalg::Vec a0, linalg::Vec b0) {
  return [a0 = std::move(a0), b0 = std::move(b0)](rng::Stream&) {
    return std::make_pair(a0, b0);
  };
}

namespace {

// One simulated pair reduced to what the ensemble statistics need.
struct PathSlot {
  std::vector<double> sq_err;  // per recorded index, alive prefix only
  std::vector<double> dm_sq;   // per dm index; NaN = not alive
  bool diverged = false;
  TrajectoryPair pair;         // kept only when requested
  bool kept = false;
};

template <typename SimulateFn>
Ensemble run_ensemble_impl(SimulateFn&& simulate, const InitSampler& init,
                           const geo::MetricField& metric,
                           const std::vector<double>& probe_times,
                           const EnsembleOptions& opts) {
  if (opts.n_paths == 0) throw InvalidInput("ensemble needs at least one path");

  const std::size_t R = probe_times.size();
  const std::size_t stride = std::max<std::size_t>(opts.record_stride, 1);
  std::vector<std::size_t> dm_index;
  if (opts.metric_distances && R > 0) {
    const std::size_t want = std::min<std::size_t>(std::max<std::size_t>(
                                 opts.dm_times, 1), R);
    for (std::size_t j = 0; j < want; ++j) {
      const std::size_t idx =
          want == 1 ? R - 1
                    : (j * (R - 1) + (want - 1) / 2) / (want - 1);
      dm_index.push_back(idx);
    }
    dm_index.erase(std::unique(dm_index.begin(), dm_index.end()),
                   dm_index.end());
  }

  Ensemble ens;
  ens.master_seed = opts.seed;
  ens.n_paths = opts.n_paths;
  ens.stats.times = probe_times;
  ens.stats.mean_sq_err.assign(R, 0.0);
  ens.stats.sq_err_stderr.assign(R, 0.0);
  ens.stats.n_alive.assign(R, 0);
  ens.stats.mean_dm_sq.assign(dm_index.size(), 0.0);
  ens.stats.dm_stderr.assign(dm_index.size(), 0.0);
  ens.stats.dm_count.assign(dm_index.size(), 0);

  std::vector<double> sum(R, 0.0), sumsq(R, 0.0);
  std::vector<double> dm_sum(dm_index.size(), 0.0), dm_sumsq(dm_index.size(), 0.0);

  const std::size_t chunk = 256;
  std::vector<PathSlot> slots;
  for (std::size_t base = 0; base < opts.n_paths; base += chunk) {
    const std::size_t count = std::min(chunk, opts.n_paths - base);
    slots.assign(count, PathSlot{});
    parallel_for(opts.exec, count, [&](std::size_t ci) {
      const std::size_t idx = base + ci;
      rng::Stream init_stream(rng::derive_seed(opts.seed, idx, kTagInit));
      auto [a0, b0] = init(init_stream);
      const std::uint64_t pair_seed = rng::derive_seed(opts.seed, idx, 0);
      TrajectoryPair pair = simulate(a0, b0, pair_seed);

      PathSlot& slot = slots[ci];
      slot.diverged = pair.diverged;
      // A truncated pair may end with an off-grid record at the exit step;
      // only the grid-aligned prefix enters the per-time statistics.
      const std::size_t alive =
          pair.diverged ? std::min(pair.steps_taken / stride + 1, R)
                        : std::min(pair.times.size(), R);
      slot.sq_err.resize(alive);
      for (std::size_t r = 0; r < alive; ++r)
        slot.sq_err[r] =
            linalg::norm2_sq(linalg::sub(pair.a_path[r], pair.b_path[r]));

      if (idx < opts.dm_paths && !dm_index.empty()) {
        slot.dm_sq.assign(dm_index.size(),
                          std::numeric_limits<double>::quiet_NaN());
        geo::GeodesicOptions gopts;
        gopts.segments = opts.dm_segments;
        geo::Curve warm;
        bool have_warm = false;
        for (std::size_t j = 0; j < dm_index.size(); ++j) {
          const std::size_t r = dm_index[j];
          if (r >= alive) break;
          gopts.initial_curve = have_warm ? &warm : nullptr;
          auto res = geo::distance_sq(pair.a_path[r], pair.b_path[r], metric,
                                      pair.times[r], gopts);
          slot.dm_sq[j] = res.dist_sq;
          warm = std::move(res.curve);
          have_warm = true;
        }
      }
      if (idx < opts.keep_paths_limit) {
        slot.pair = std::move(pair);
        slot.kept = true;
      }
    });

    // Serial reduction in path order keeps results schedule-independent.
    for (std::size_t ci = 0; ci < count; ++ci) {
      PathSlot& slot = slots[ci];
      if (slot.diverged) ++ens.n_diverged;
      for (std::size_t r = 0; r < slot.sq_err.size(); ++r) {
        sum[r] += slot.sq_err[r];
        sumsq[r] += slot.sq_err[r] * slot.sq_err[r];
        ++ens.stats.n_alive[r];
      }
      for (std::size_t j = 0; j < slot.dm_sq.size(); ++j) {
        if (std::isnan(slot.dm_sq[j])) continue;
        dm_sum[j] += slot.dm_sq[j];
        dm_sumsq[j] += slot.dm_sq[j] * slot.dm_sq[j];
        ++ens.stats.dm_count[j];
      }
      if (slot.kept) ens.kept.push_back(std::move(slot.pair));
    }
  }

  auto finish = [](double s1, double s2, std::size_t n, double& mean,
                   double& se) {
    if (n == 0) {
      mean = 0.0;
      se = 0.0;
      return;
    }
    mean = s1 / static_cast<double>(n);
    if (n == 1) {
      se = 0.0;
      return;
    }
    const double var =
        std::max(0.0, s2 / static_cast<double>(n) - mean * mean);
    se = std::sqrt(var / static_cast<double>(n - 1));
  };
  for (std::size_t r = 0; r < R; ++r)
    finish(sum[r], sumsq[r], ens.stats.n_alive[r], ens.stats.mean_sq_err[r],
           ens.stats.sq_err_stderr[r]);
  for (std::size_t j = 0; j < dm_index.size(); ++j)
    finish(dm_sum[j], dm_sumsq[j], ens.stats.dm_count[j],
           ens.stats.mean_dm_sq[j], ens.stats.dm_stderr[j]);

  ens.stats.dm_times.resize(dm_index.size());
  for (std::size_t j = 0; j < dm_index.size(); ++j)
    ens.stats.dm_times[j] = probe_times[dm_index[j]];
  return ens;
}

std::vector<double> recorded_times(double t0, double dt, std::size_t steps,
                                   std::size_t stride) {
  if (stride == 0) stride = 1;
  std::vector<double> out;
  out.push_back(t0);
  for (std::size_t k = 1; k <= steps; ++k)
    if (k % stride == 0 || k == steps)
      out.push_back(t0 + dt * static_cast<double>(k));
  return out;
}

}  // namespace

Ensemble run_ensemble_discrete(const sys::DiscreteSystem& s,
                               const InitSampler& init, std::size_t steps,
                               const EnsembleOptions& opts) {
  auto sim = [&](const linalg::Vec& a0, const linalg::Vec& b0,
                 std::uint64_t pair_seed) {
    return simulate_discrete(s, a0, b0, steps, opts.coupling, pair_seed,
                             opts.record_stride);
  };
  return run_ensemble_impl(sim, init, geo::metric_of(s),
                           recorded_times(0.0, 1.0, steps, opts.record_stride),
                           opts);
}

Ensemble run_ensemble_continuous(const sys::ContinuousSystem& s,
                                 const InitSampler& init, double T,
                                 double delta, const EnsembleOptions& opts) {
  if (!(delta > 0.0) || !(T > 0.0))
    throw InvalidInput("horizon and step must be positive");
  const std::size_t steps =
      static_cast<std::size_t>(std::ceil(T / delta - 1e-12));
  const double dt = T / static_cast<double>(steps);
  auto sim = [&](const linalg::Vec& a0, const linalg::Vec& b0,
                 std::uint64_t pair_seed) {
    return simulate_continuous(s, a0, b0, T, delta, opts.coupling, pair_seed,
                               opts.record_stride);
  };
  return run_ensemble_impl(
      sim, init, geo::metric_of(s),
      recorded_times(s.domain.t0, dt, steps, opts.record_stride), opts);
}

}  // namespace stocon::sde
