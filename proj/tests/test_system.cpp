#include <cmath>

#include "doctest.h"
#include "stocon/error.hpp"
#include "stocon/system.hpp"

using namespace stocon;
using linalg::Mat;
using linalg::Vec;

namespace {

sys::Domain box2(double r) {
  sys::Domain d;
  d.lower = {-r, -r};
  d.upper = {r, r};
  d.t1 = 10.0;
  return d;
}

sys::ContinuousSystem identity_theta_system(sys::VectorField drift,
                                            std::size_t n, std::size_t d) {
  sys::ContinuousSystem s;
  s.n = n;
  s.d = d;
  s.drift = std::move(drift);
  s.diffusion = [n, d](const Vec&, double) { return Mat(n, d, 0.0); };
  s.theta = [n](const Vec&, double) { return Mat::identity(n); };
  s.domain = box2(5.0);
  return s;
}

// Scalar-field plant used throughout: f = (x2*sqrt(1+x1^2),
// -x1*x2^2/sqrt(1+x1^2)).
Vec plant_drift(const Vec& x, double) {
  const double s = std::sqrt(1.0 + x[0] * x[0]);
  return Vec{x[1] * s, -x[0] * x[1] * x[1] / s};
}

}  // namespace

TEST_SUITE("system") {
  TEST_CASE("domain membership, clamping, and inflation") {
    sys::Domain d = box2(2.0);
    d.validate();
    CHECK(d.contains(Vec{1.0, -2.0}));
    CHECK_FALSE(d.contains(Vec{2.1, 0.0}));
    CHECK_FALSE(d.contains(Vec{0.0}));  // wrong dimension

    Vec clamped = d.clamp(Vec{5.0, -3.0});
    CHECK(clamped[0] == 2.0);
    CHECK(clamped[1] == -2.0);

    sys::Domain big = d.inflate(10.0);
    CHECK(big.lower[0] == -20.0);
    CHECK(big.upper[1] == 20.0);
    CHECK(big.t1 == d.t1);

    sys::Domain slice;
    slice.lower = {1.0};
    slice.upper = {1.0};
    slice.validate();  // degenerate axis pins a slice
    CHECK(slice.contains(Vec{1.0}));

    sys::Domain bad;
    bad.lower = {2.0};
    bad.upper = {1.0};
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
  }

  TEST_CASE("metric is theta-transpose-theta, exactly symmetric") {
    auto s = identity_theta_system(
        [](const Vec& x, double) { return x; }, 2, 1);
    Mat m = sys::metric(s, Vec{0.3, -0.7}, 0.0);
    CHECK(m == Mat::identity(2));

    // Constant factor [[-3,5],[3,2]]: M = [[18,-9],[-9,29]].
    s.theta = [](const Vec&, double) {
      return Mat(2, 2, {-3.0, 5.0, 3.0, 2.0});
    };
    m = sys::metric(s, Vec{1.0, 1.0}, 0.0);
    CHECK(m(0, 0) == 18.0);
    CHECK(m(0, 1) == -9.0);
    CHECK(m(1, 0) == -9.0);
    CHECK(m(1, 1) == 29.0);
    CHECK(linalg::max_abs_asymmetry(m) == 0.0);
  }

  TEST_CASE("finite differences recover a linear field exactly") {
    Mat a(2, 2, {0.5, -1.25, 2.0, 0.75});
    auto s = identity_theta_system(
        [&a](const Vec& x, double) { return linalg::matvec(a, x); }, 2, 1);
    Mat j = sys::drift_jacobian(s, Vec{0.4, -1.1}, 0.0);
    CHECK(linalg::max_abs(linalg::sub(j, a)) < 1e-9);
  }

  TEST_CASE("plant Jacobian at (0,1) is the quarter-turn matrix") {
    auto s = identity_theta_system(plant_drift, 2, 1);
    Mat j = sys::drift_jacobian(s, Vec{0.0, 1.0}, 0.0);
    CHECK(j(0, 0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(j(0, 1) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(j(1, 0) == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(j(1, 1) == doctest::Approx(0.0).epsilon(1e-9));
  }

  TEST_CASE("central differences converge at second order") {
    auto field = [](const Vec& x, double) {
      return Vec{std::sin(x[0] * x[1]), std::exp(x[0]) - x[1] * x[1] * x[1]};
    };
    Vec at{0.7, 0.4};
    // Analytic Jacobian.
    Mat exact(2, 2,
              {at[1] * std::cos(at[0] * at[1]), at[0] * std::cos(at[0] * at[1]),
               std::exp(at[0]), -3.0 * at[1] * at[1]});
    double err_h = linalg::max_abs(
        linalg::sub(sys::fd_jacobian(field, at, 0.0, 1e-2), exact));
    double err_h2 = linalg::max_abs(
        linalg::sub(sys::fd_jacobian(field, at, 0.0, 0.5e-2), exact));
    double ratio = err_h / err_h2;
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
  }

  TEST_CASE("analytic Jacobian short-circuits finite differences") {
    auto s = identity_theta_system(plant_drift, 2, 1);
    Mat marker(2, 2, {42.0, 0.0, 0.0, 42.0});
    s.jacobian = [&marker](const Vec&, double) { return marker; };
    CHECK(sys::drift_jacobian(s, Vec{1.0, 1.0}, 0.0) == marker);
  }

  TEST_CASE("theta_dot of a constant factor is exactly zero") {
    auto s = identity_theta_system(plant_drift, 2, 1);
    Mat td = sys::theta_dot(s, Vec{1.2, -0.4}, 3.0);
    CHECK(linalg::max_abs(td) == 0.0);
  }

  TEST_CASE("theta_dot of a time-only factor matches the analytic derivative") {
    auto s = identity_theta_system(
        [](const Vec&, double) { return Vec{0.0, 0.0}; }, 2, 1);
    s.theta = [](const Vec&, double t) {
      return linalg::scale(std::exp(-t), Mat::identity(2));
    };
    for (double t : {0.0, 0.5, 2.0}) {
      Mat td = sys::theta_dot(s, Vec{0.0, 0.0}, t);
      Mat expect = linalg::scale(-std::exp(-t), Mat::identity(2));
      CHECK(linalg::max_abs(linalg::sub(td, expect)) < 1e-8);
    }
  }

  TEST_CASE("theta_dot follows the deterministic flow for state-dependent factors") {
    // Flow a(t) = e^{-t} a0 in closed form, theta quadratic in the state:
    // theta_dot = [[-2a1^2, -2a1a2], [0, -2a2^2]] by the chain rule.
    auto s = identity_theta_system(
        [](const Vec& x, double) { return Vec{-x[0], -x[1]}; }, 2, 1);
    s.theta = [](const Vec& x, double) {
      return Mat(2, 2, {1.0 + x[0] * x[0], x[0] * x[1], 0.0, 1.0 + x[1] * x[1]});
    };
    Vec a{1.0, 2.0};
    Mat td = sys::theta_dot(s, a, 0.0);
    Mat expect(2, 2, {-2.0, -4.0, 0.0, -8.0});
    CHECK(linalg::max_abs(linalg::sub(td, expect)) < 1e-9);

    // Difference quotient along the exact flow as a second, independent
    // check: (theta(a(h)) - theta(a(-h))) / 2h at t = 0.
    const double h = 1e-4;
    Mat th_p = s.theta(linalg::scale(std::exp(-h), a), h);
    Mat th_m = s.theta(linalg::scale(std::exp(h), a), -h);
    Mat quot = linalg::scale(1.0 / (2.0 * h), linalg::sub(th_p, th_m));
    CHECK(linalg::max_abs(linalg::sub(td, quot)) < 1e-6);
  }

  TEST_CASE("Euler discretization wires map, noise scaling, and step times") {
    auto s = identity_theta_system(
        [](const Vec& x, double) { return Vec{-x[0], -x[1]}; }, 2, 2);
    s.diffusion = [](const Vec&, double) { return Mat::identity(2); };
    s.theta = [](const Vec&, double t) {
      return linalg::scale(1.0 + t, Mat::identity(2));
    };
    const double delta = 0.01;
    sys::DiscreteSystem d = sys::euler_discretize(s, delta);
    CHECK(d.n == 2);
    CHECK(d.d == 2);

    Vec a{1.0, -2.0};
    Vec next = d.map(a, 0);
    CHECK(next[0] == doctest::Approx(0.99).epsilon(1e-15));
    CHECK(next[1] == doctest::Approx(-1.98).epsilon(1e-15));

    Mat j = sys::map_jacobian(d, a, 0);
    CHECK(linalg::max_abs(linalg::sub(
              j, linalg::scale(0.99, Mat::identity(2)))) < 1e-9);

    CHECK(d.diffusion(a, 5)(0, 0) == doctest::Approx(std::sqrt(delta)));
    CHECK(d.theta_k(a, 3)(1, 1) == doctest::Approx(1.0 + 3.0 * delta));

    // Analytic Jacobian carries through as I + delta*J.
    s.jacobian = [](const Vec&, double) {
      return linalg::scale(-1.0, Mat::identity(2));
    };
    sys::DiscreteSystem d2 = sys::euler_discretize(s, delta);
    Mat j2 = d2.jacobian(a, 0);
    CHECK(j2(0, 0) == 0.99);
    CHECK(j2(0, 1) == 0.0);

    CHECK_THROWS_AS(sys::euler_discretize(s, 0.0), InvalidInput);
  }

  TEST_CASE("system validation rejects incomplete definitions") {
    sys::ContinuousSystem s;
    CHECK_THROWS_AS(s.validate(), InvalidInput);
    s = identity_theta_system(plant_drift, 2, 1);
    s.validate();
    s.domain.lower = {0.0};
    s.domain.upper = {1.0};
    CHECK_THROWS_AS(s.validate(), InvalidInput);
  }
}
