#pragma once

#include <cstddef>
#include <vector>

namespace stocon::bounds {

enum class Mode { discrete, continuous };

// Constants of the mean-square convergence bounds. rate is mu per step
// (discrete, must lie in (0,1)) or lambda per unit time (continuous,
// positive). noise is the metric-weighted trace bound D or C. u0 is the
// initial mean squared metric distance. noise_free_reference halves the
// noise-dependent terms (one trajectory is deterministic, so only one
// noise source enters).
struct BoundInputs {
  Mode mode = Mode::discrete;
  double rate = 0.0;
  double noise = 0.0;
  double beta = 1.0;
  double u0 = 0.0;
  bool noise_free_reference = false;
  void validate() const;
};

struct BoundValues {
  double d2 = 0.0;  // bound on E[d_M^2]
  double ms = 0.0;  // bound on E[|a-b|^2]
};

// Closed forms. Infinite abscissae yield the asymptote exactly.
BoundValues discrete_bound(const BoundInputs& in, double k);
BoundValues continuous_bound(const BoundInputs& in, double t);
BoundValues evaluate(const BoundInputs& in, double abscissa);
BoundValues asymptote(const BoundInputs& in);

// Exact-integral variant: the decaying term averages [u0_i - asymptote]+
// over supplied per-pair initial squared distances instead of applying
// the positive part to their mean. Never smaller than the majorized
// closed form. The mean-square bound uses the sample mean of u0.
BoundValues discrete_bound_sampled(const BoundInputs& in, double k,
                                   const std::vector<double>& u0_samples);
BoundValues continuous_bound_sampled(const BoundInputs& in, double t,
                                     const std::vector<double>& u0_samples);

struct BoundSeries {
  std::vector<double> abscissae;
  std::vector<double> d2;
  std::vector<double> ms;
};
BoundSeries bound_series(const BoundInputs& in,
                         const std::vector<double>& abscissae);

// Constants of the weaker bound available with a state-independent
// analysis: trading rate for noise via a free parameter eps,
// lambda1 = lambda - eps/beta and c1 = c + n*m_bar^2*sigma_bar^4/(2 eps).
struct PriorConstants {
  double lambda1 = 0.0;
  double c1 = 0.0;
  bool rate_weaker = false;   // lambda1 < lambda
  bool noise_larger = false;  // c1 > c
};
PriorConstants prior_bound_constants(double lambda, double c, double beta,
                                     double sigma_bar, double m_bar,
                                     std::size_t n, double eps);

// Mean-square asymptote of the prior bound; +infinity when lambda1 <= 0
// (no contraction survives the trade, so the bound never settles).
double prior_ms_asymptote(const PriorConstants& pc, double beta);

}  // namespace stocon::bounds
