#include "stocon/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stocon/error.hpp"

namespace stocon::bounds {

void BoundInputs::validate() const {
  if (mode == Mode::discrete) {
    if (!(rate > 0.0) || !(rate < 1.0))
      throw InvalidInput("discrete rate must lie in (0,1)");
  } else {
    if (!(rate > 0.0)) throw InvalidInput("continuous rate must be positive");
  }
  if (!(beta > 0.0)) throw InvalidInput("metric floor must be positive");
  if (!(noise >= 0.0) || !std::isfinite(noise))
    throw InvalidInput("noise bound must be finite and nonnegative");
  if (!(u0 >= 0.0) || !std::isfinite(u0))
    throw InvalidInput("initial mean squared distance must be nonnegative");
}

namespace {

double effective_noise(const BoundInputs& in) {
  return in.noise_free_reference ? 0.5 * in.noise : in.noise;
}

// Decay factor mu^k or exp(-2 lambda t); zero at infinity.
double decay(const BoundInputs& in, double x) {
  if (!(x >= 0.0)) throw InvalidInput("abscissa must be nonnegative");
  return in.mode == Mode::discrete ? std::pow(in.rate, x)
                                   : std::exp(-2.0 * in.rate * x);
}

double noise_asymptote(const BoundInputs& in) {
  return in.mode == Mode::discrete
             ? 2.0 * effective_noise(in) / (1.0 - in.rate)
             : effective_noise(in) / in.rate;
}

BoundValues eval_with_plus_term(const BoundInputs& in, double x,
                                double plus_term, double u0_mean) {
  const double a = noise_asymptote(in);
  const double rho = decay(in, x);
  BoundValues out;
  out.d2 = a + rho * plus_term;
  out.ms = (a + rho * u0_mean) / in.beta;
  return out;
}

double plus_part(double x) { return std::max(0.0, x); }

}  // namespace

BoundValues discrete_bound(const BoundInputs& in, double k) {
  if (in.mode != Mode::discrete)
    throw InvalidInput("discrete bound requires discrete inputs");
  in.validate();
  return eval_with_plus_term(in, k, plus_part(in.u0 - noise_asymptote(in)),
                             in.u0);
}

BoundValues continuous_bound(const BoundInputs& in, double t) {
  if (in.mode != Mode::continuous)
    throw InvalidInput("continuous bound requires continuous inputs");
  in.validate();
  return eval_with_plus_term(in, t, plus_part(in.u0 - noise_asymptote(in)),
                             in.u0);
}

BoundValues evaluate(const BoundInputs& in, double abscissa) {
  return in.mode == Mode::discrete ? discrete_bound(in, abscissa)
                                   : continuous_bound(in, abscissa);
}

BoundValues asymptote(const BoundInputs& in) {
  in.validate();
  const double a = noise_asymptote(in);
  return {a, a / in.beta};
}

namespace {

BoundValues bound_sampled(const BoundInputs& in, double x,
                          const std::vector<double>& u0_samples) {
  in.validate();
  if (u0_samples.empty())
    throw InvalidInput("sampled bound needs at least one initial distance");
  const double a = noise_asymptote(in);
  double plus_sum = 0.0, u0_sum = 0.0;
  for (double u : u0_samples) {
    if (!(u >= 0.0) || !std::isfinite(u))
      throw InvalidInput("initial squared distances must be nonnegative");
    plus_sum += plus_part(u - a);
    u0_sum += u;
  }
  const double m = static_cast<double>(u0_samples.size());
  return eval_with_plus_term(in, x, plus_sum / m, u0_sum / m);
}

}  // namespace

BoundValues discrete_bound_sampled(const BoundInputs& in, double k,
                                   const std::vector<double>& u0_samples) {
  if (in.mode != Mode::discrete)
    throw InvalidInput("discrete bound requires discrete inputs");
  return bound_sampled(in, k, u0_samples);
}

BoundValues continuous_bound_sampled(const BoundInputs& in, double t,
                                     const std::vector<double>& u0_samples) {
  if (in.mode != Mode::continuous)
    throw InvalidInput("continuous bound requires continuous inputs");
  return bound_sampled(in, t, u0_samples);
}

BoundSeries bound_series(const BoundInputs& in,
                         const std::vector<double>& abscissae) {
  in.validate();
  BoundSeries out;
  out.abscissae = abscissae;
  out.d2.reserve(abscissae.size());
  out.ms.reserve(abscissae.size());
  for (double x : abscissae) {
    const BoundValues v = evaluate(in, x);
    out.d2.push_back(v.d2);
    out.ms.push_back(v.ms);
  }
  return out;
}

PriorConstants prior_bound_constants(double lambda, double c, double beta,
                                     double sigma_bar, double m_bar,
                                     std::size_t n, double eps) {
  if (!(eps > 0.0)) throw InvalidInput("eps must be positive");
  if (!(beta > 0.0)) throw InvalidInput("metric floor must be positive");
  if (!(sigma_bar >= 0.0) || !(m_bar >= 0.0))
    throw InvalidInput("uniform bounds must be nonnegative");
  PriorConstants pc;
  pc.lambda1 = lambda - eps / beta;
  pc.c1 = c + static_cast<double>(n) * m_bar * m_bar * sigma_bar * sigma_bar *
                  sigma_bar * sigma_bar / (2.0 * eps);
  pc.rate_weaker = pc.lambda1 < lambda;
  pc.noise_larger = pc.c1 > c;
  return pc;
}

double prior_ms_asymptote(const PriorConstants& pc, double beta) {
  if (!(beta > 0.0)) throw InvalidInput("metric floor must be positive");
  if (!(pc.lambda1 > 0.0)) return std::numeric_limits<double>::infinity();
  return pc.c1 / (beta * pc.lambda1);
}

}  // namespace stocon::bounds
