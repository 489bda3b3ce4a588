#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "stocon/linalg.hpp"
#include "stocon/parallel.hpp"
#include "stocon/rng.hpp"
#include "stocon/system.hpp"
#include "stocon/tolerances.hpp"

namespace stocon::sde {

// How the two trajectories of a pair share randomness: two independent
// Gaussian streams, or a deterministic (noise-free) reference as second
// trajectory.
enum class Coupling { independent, noise_free_second };

// Deterministic i.i.d. N(0, I_dim) vectors for a seed.
std::vector<linalg::Vec> gaussian_stream(std::uint64_t seed, std::size_t count,
                                         std::size_t dim);

struct Trajectory {
  std::vector<double> times;
  std::vector<linalg::Vec> states;
  bool diverged = false;
  double delta = 0.0;  // actual uniform step used
};

struct TrajectoryPair {
  std::vector<double> times;   // step index (discrete) or seconds
  std::vector<linalg::Vec> a_path, b_path;
  Coupling coupling = Coupling::independent;
  std::uint64_t seed = 0;      // pair seed all streams derive from
  double delta = 0.0;          // 1 for discrete systems
  bool diverged = false;       // either trajectory left the safety box
  std::size_t steps_taken = 0; // completed steps before truncation
};

// Exact iteration of the difference system for both trajectories. States
// are checked against the domain inflated by 10x; leaving it truncates
// the pair and flags it diverged. record_stride keeps every r-th step
// (step 0 and the last completed step always included).
TrajectoryPair simulate_discrete(const sys::DiscreteSystem& s,
                                 const linalg::Vec& a0, const linalg::Vec& b0,
                                 std::size_t steps, Coupling coupling,
                                 std::uint64_t seed,
                                 std::size_t record_stride = 1);

// Euler-Maruyama with Gaussian increments of variance delta per step. If
// T/delta is not an integer, delta is adjusted down to T/ceil(T/delta)
// and recorded in the result.
TrajectoryPair simulate_continuous(const sys::ContinuousSystem& s,
                                   const linalg::Vec& a0,
                                   const linalg::Vec& b0, double T,
                                   double delta, Coupling coupling,
                                   std::uint64_t seed,
                                   std::size_t record_stride = 1);

// Single noisy trajectory (same stepping and safety-box rules).
Trajectory simulate_single(const sys::ContinuousSystem& s,
                           const linalg::Vec& a0, double T, double delta,
                           std::uint64_t seed, std::size_t record_stride = 1);

// Euler-Maruyama driven by caller-supplied Brownian increments dW
// (each entry the increment over one step, i.e. N(0, delta I) in law).
// Lets refinement studies drive coarse and fine runs with consistent
// noise; no safety box, the caller owns the increments.
Trajectory simulate_with_increments(const sys::ContinuousSystem& s,
                                    const linalg::Vec& a0, double delta,
                                    const std::vector<linalg::Vec>& dW);

// Paired initial conditions drawn per path; the stream is the path's
// dedicated init stream.
using InitSampler =
    std::function<std::pair<linalg::Vec, linalg::Vec>(rng::Stream&)>;
InitSampler fixed_init(linalg::Vec a0, linalg::Vec b0);

// Per-time ensemble statistics. stderr entries are the standard errors of
// the means; metric-distance columns are filled only when requested and
// then only on the configured path/time subsample.
struct EnsembleStats {
  std::vector<double> times;
  std::vector<double> mean_sq_err;
  std::vector<double> sq_err_stderr;
  std::vector<std::size_t> n_alive;
  std::vector<double> dm_times;
  std::vector<double> mean_dm_sq;
  std::vector<double> dm_stderr;
  std::vector<std::size_t> dm_count;
};

struct Ensemble {
  EnsembleStats stats;
  std::vector<TrajectoryPair> kept;  // first keep_paths_limit pairs
  std::uint64_t master_seed = 0;
  std::size_t n_paths = 0;
  std::size_t n_diverged = 0;
};

struct EnsembleOptions {
  std::size_t n_paths = 1;
  std::uint64_t seed = 0;
  Coupling coupling = Coupling::independent;
  std::size_t record_stride = 1;
  std::size_t keep_paths_limit = 0;
  // Metric mean squared distances E[d^2_M] on a subsample of paths and
  // recorded times (geodesic solves are expensive).
  bool metric_distances = false;
  std::size_t dm_paths = tol::kDmSubsamplePaths;
  std::size_t dm_times = tol::kDmSubsampleTimes;
  std::size_t dm_segments = 16;
  Exec exec = Exec::serial;
};

// Ensemble of independent pairs; path seeds derive from (seed, path
// index), so any prefix of an ensemble is reproducible regardless of
// n_paths, execution order, or thread count.
Ensemble run_ensemble_discrete(const sys::DiscreteSystem& s,
                               const InitSampler& init, std::size_t steps,
                               const EnsembleOptions& opts);
Ensemble run_ensemble_continuous(const sys::ContinuousSystem& s,
                                 const InitSampler& init, double T,
                                 double delta, const EnsembleOptions& opts);

}  // namespace stocon::sde
