#pragma once

#include <cstdint>
#include <vector>

#include "stocon/linalg.hpp"
#include "stocon/parallel.hpp"
#include "stocon/system.hpp"
#include "stocon/tolerances.hpp"

namespace stocon::cert {

enum class Mode { discrete, continuous };

// Certification sweeps evaluate a scalar field over a deterministic set of
// sample points: a regular grid (box corners included) topped up with
// seeded low-discrepancy points. Counts are exact and reproducible.
struct SampleSpec {
  std::size_t count = tol::kCertSamples;
  std::uint64_t seed = 0;
  Exec exec = Exec::serial;
};

struct SamplePoint {
  linalg::Vec state;
  double time = 0.0;
};

// integer_time rounds the time coordinate to whole steps for maps.
std::vector<SamplePoint> sample_points(const sys::Domain& domain,
                                       const SampleSpec& spec,
                                       bool integer_time);

struct WorstPoint {
  linalg::Vec state;
  double time = 0.0;
  double value = 0.0;
};

// A sampled supremum or infimum together with where it was attained and
// how many point evaluations failed (singular metric factor, domain
// errors); failed points are skipped, not fatal.
struct Extremum {
  double value = 0.0;
  WorstPoint worst;
  std::size_t evaluated = 0;
  std::size_t failures = 0;
};

// F = Theta_{k+1}(f(a,k)) * (df/da) * Theta_k(a)^{-1}; the left factor is
// evaluated at the image point and the next step.
linalg::Mat generalized_jacobian_discrete(const sys::DiscreteSystem& s,
                                          const linalg::Vec& a, long k);

// Symmetric part of (Theta_dot + Theta * df/da) * Theta^{-1}.
linalg::Mat continuous_gen_jacobian_sym(const sys::ContinuousSystem& s,
                                        const linalg::Vec& a, double t);

// mu_hat = sup over samples of lambda_max(F^T F). Contraction needs < 1.
Extremum discrete_rate(const sys::DiscreteSystem& s, const sys::Domain& domain,
                       const SampleSpec& spec);

// lambda_hat = -sup over samples of lambda_max of the symmetric
// generalized Jacobian. Contraction needs > 0; worst.value keeps the raw
// eigenvalue at the worst point.
Extremum continuous_rate(const sys::ContinuousSystem& s,
                         const sys::Domain& domain, const SampleSpec& spec);

// beta_hat = inf over samples of lambda_min(M).
Extremum metric_floor(const sys::ContinuousSystem& s, const sys::Domain& domain,
                      const SampleSpec& spec);
Extremum metric_floor(const sys::DiscreteSystem& s, const sys::Domain& domain,
                      const SampleSpec& spec);

// sup over samples of tr(sigma^T M sigma), the metric-weighted noise power.
Extremum noise_trace_bound(const sys::ContinuousSystem& s,
                           const sys::Domain& domain, const SampleSpec& spec);
Extremum noise_trace_bound(const sys::DiscreteSystem& s,
                           const sys::Domain& domain, const SampleSpec& spec);

// Uniform bounds feeding the prior-metric-bound comparison: sup of the
// diffusion Frobenius norm and sup of the metric spectral norm.
Extremum sigma_frobenius_sup(const sys::ContinuousSystem& s,
                             const sys::Domain& domain, const SampleSpec& spec);
Extremum metric_norm_sup(const sys::ContinuousSystem& s,
                         const sys::Domain& domain, const SampleSpec& spec);

// Sampled Lipschitz and growth estimates; evidence, not a proof.
struct RegularityEstimate {
  double lipschitz = 0.0;  // sup (|f(a)-f(b)| + |sigma(a)-sigma(b)|_F) / |a-b|
  double growth = 0.0;     // sup (|f|^2 + |sigma|_F^2) / (1 + |a|^2)
  std::size_t pairs = 0;
};
RegularityEstimate regularity_check(const sys::ContinuousSystem& s,
                                    const sys::Domain& domain,
                                    std::size_t pairs, std::uint64_t seed);

// Trajectory-conditioned noise bound: Monte Carlo over initial points in
// a region and over sample paths of the per-time average of
// tr(sigma^T M sigma) along the flow.
struct ConditionalTraceEstimate {
  double max_mean_trace = 0.0;  // max over recorded times of the path mean
  double stderr_at_max = 0.0;
  double time_of_max = 0.0;
  double overall_mean = 0.0;    // averaged over times and paths
  std::size_t n_paths = 0;
  std::size_t n_diverged = 0;
  bool certifiable = true;      // false if any path left the safety box
};
ConditionalTraceEstimate conditional_trace_bound(
    const sys::ContinuousSystem& s, const sys::Domain& initial_region,
    double horizon, double delta, std::size_t paths, std::uint64_t seed,
    Exec exec = Exec::serial);

struct HypothesisFlags {
  bool rate = false;         // mu_hat < 1 (discrete) or lambda_hat > 0
  bool floor = false;        // beta_hat > 0
  bool noise = false;        // noise bound finite
  bool evaluations = false;  // failures within the tolerated fraction
  bool all() const { return rate && floor && noise && evaluations; }
};

struct CertificationReport {
  Mode mode = Mode::discrete;
  double rate = 0.0;      // mu_hat or lambda_hat with margin applied
  double rate_raw = 0.0;  // sampled value before the margin
  double beta = 0.0;
  double noise_bound = 0.0;
  double lipschitz_est = 0.0;  // continuous mode only
  double growth_est = 0.0;     // continuous mode only
  double margin = 1.0;
  std::size_t sample_count = 0;
  std::size_t eval_failures = 0;
  WorstPoint worst_rate, worst_beta, worst_noise;
  HypothesisFlags pass;
};

// Full hypothesis sweep. margin >= 1 inflates mu_hat (discrete) or
// deflates lambda_hat (continuous) for conservative reporting; pass
// flags are judged on the reported rate.
CertificationReport certify(const sys::DiscreteSystem& s,
                            const SampleSpec& spec,
                            double margin = tol::kRateMargin);
CertificationReport certify(const sys::ContinuousSystem& s,
                            const SampleSpec& spec,
                            double margin = tol::kRateMargin);

}  // namespace stocon::cert
