#include <cmath>
#include <complex>

#include "doctest.h"
#include "oracles.hpp"
#include "stocon/error.hpp"
#include "stocon/geodesic.hpp"
#include "test_util.hpp"

using namespace stocon;
using linalg::Mat;
using linalg::Vec;

namespace {

geo::MetricField identity_metric() {
  return [](const Vec& p, double) { return Mat::identity(p.size()); };
}

geo::MetricField constant_metric(Mat m) {
  return [m](const Vec&, double) { return m; };
}

// Conformal factor e^{2 x1} on the plane; flat, with global isometry
// (x,y) -> e^{x+iy}, so distances have a closed form.
geo::MetricField conformal_metric() {
  return [](const Vec& p, double) {
    const double c = std::exp(2.0 * p[0]);
    return Mat(2, 2, {c, 0.0, 0.0, c});
  };
}

double conformal_exact_dist_sq(const Vec& a, const Vec& b) {
  const std::complex<double> za(a[0], a[1]), zb(b[0], b[1]);
  return std::norm(std::exp(za) - std::exp(zb));
}

// Metric factor of the observer example: theta = P * [[1,0],[x1 x2/s, s]]
// with s = sqrt(1+x1^2). M is the pullback of the flat metric under
// psi(x) = P * (x1, x2 s), so squared distances are |psi(a)-psi(b)|^2.
Mat observer_theta(const Vec& x) {
  const double s = std::sqrt(1.0 + x[0] * x[0]);
  Mat inner(2, 2, {1.0, 0.0, x[0] * x[1] / s, s});
  Mat p(2, 2, {-3.0, 5.0, 3.0, 2.0});
  return linalg::matmul(p, inner);
}

geo::MetricField observer_metric() {
  return [](const Vec& x, double) { return linalg::ata(observer_theta(x)); };
}

Vec observer_push(const Vec& x) {
  const double s = std::sqrt(1.0 + x[0] * x[0]);
  return Vec{-3.0 * x[0] + 5.0 * x[1] * s, 3.0 * x[0] + 2.0 * x[1] * s};
}

double observer_exact_dist_sq(const Vec& a, const Vec& b) {
  return linalg::norm2_sq(linalg::sub(observer_push(a), observer_push(b)));
}

}  // namespace

TEST_SUITE("geodesic") {
  TEST_CASE("straight-line energy under the identity metric is exact") {
    Vec a{0.0, 0.0}, b{3.0, 4.0};
    for (std::size_t m : {1u, 7u, 64u}) {
      geo::Curve c = geo::straight_line(a, b, m);
      CHECK(geo::curve_energy(c, identity_metric(), 0.0) ==
            doctest::Approx(25.0).epsilon(1e-14));
    }
    Mat scaled = linalg::scale(3.5, Mat::identity(2));
    geo::Curve c = geo::straight_line(a, b, 16);
    CHECK(geo::curve_energy(c, constant_metric(scaled), 0.0) ==
          doctest::Approx(3.5 * 25.0).epsilon(1e-14));
  }

  TEST_CASE("identity-metric distances are Euclidean to machine precision") {
    auto r = geo::distance_sq(Vec{0.0, 0.0}, Vec{3.0, 4.0}, identity_metric(),
                              0.0);
    CHECK(r.dist_sq == doctest::Approx(25.0).epsilon(1e-13));
    CHECK(r.converged);
    CHECK(r.dist_sq <= r.straight_line_energy + 1e-12);

    auto same = geo::distance_sq(Vec{1.0, 2.0}, Vec{1.0, 2.0},
                                 identity_metric(), 0.0);
    CHECK(same.dist_sq == 0.0);
    CHECK(same.converged);
  }

  TEST_CASE("constant SPD metrics keep straight geodesics") {
    Mat m0(2, 2, {18.0, -9.0, -9.0, 29.0});
    Vec a{0.2, -1.0}, b{1.4, 0.6};
    Vec d = linalg::sub(b, a);
    const double expect = linalg::dot(d, linalg::matvec(m0, d));
    auto r = geo::distance_sq(a, b, constant_metric(m0), 0.0);
    CHECK(r.dist_sq == doctest::Approx(expect).epsilon(1e-12));
    CHECK(r.iterations == 0);  // zero gradient at the straight line
    CHECK(r.converged);
  }

  TEST_CASE("midpoint energy matches adaptive quadrature on straight lines") {
    auto metric = observer_metric();
    Vec a{0.0, 0.0}, b{1.0, 0.0};
    geo::Curve c = geo::straight_line(a, b, 64);
    const double e64 = geo::curve_energy(c, metric, 0.0);
    const double q = oracles::straight_energy_quadrature(metric, a, b, 0.0);
    // Along x2 = 0 the integrand is the constant 18.
    CHECK(e64 == doctest::Approx(18.0).epsilon(1e-13));
    CHECK(std::fabs(e64 - q) / q < 1e-6);

    // Oblique segment: integrand varies, midpoint rule converges at
    // second order toward the quadrature value.
    Vec b2{1.0, 1.0};
    const double q2 =
        oracles::straight_energy_quadrature(metric, a, b2, 0.0, 1e-13);
    const double err64 = std::fabs(
        geo::curve_energy(geo::straight_line(a, b2, 64), metric, 0.0) - q2);
    const double err128 = std::fabs(
        geo::curve_energy(geo::straight_line(a, b2, 128), metric, 0.0) - q2);
    CHECK(err64 > 1e-9);  // not at roundoff, the ratio below is meaningful
    const double ratio = err64 / err128;
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
  }

  TEST_CASE("conformal metric distance matches the closed form") {
    Vec a{-0.5, 0.0}, b{0.5, 0.0};
    const double exact = conformal_exact_dist_sq(a, b);  // 4 sinh^2(1/2)
    CHECK(exact == doctest::Approx(4.0 * std::pow(std::sinh(0.5), 2)));

    geo::GeodesicOptions opts;
    opts.segments = 128;
    auto r = geo::distance_sq(a, b, conformal_metric(), 0.0, opts);
    CHECK(r.converged);
    CHECK(std::fabs(r.dist_sq - exact) / exact < 5e-4);
    CHECK(r.dist_sq <= r.straight_line_energy + 1e-12);
    // The optimizer must beat the straight line here (reparametrization
    // lowers the energy from sinh(1) toward 4 sinh^2(1/2)).
    CHECK(r.dist_sq < r.straight_line_energy * 0.95);
  }

  TEST_CASE("conformal metric distance matches the grid shortest-path oracle") {
    Vec a{-0.5, 0.0}, b{0.5, 0.0};
    const double oracle = oracles::grid_distance_sq(
        conformal_metric(), 0.0, -1.0, 1.0, -1.0, 1.0, 100, 100, a, b);
    geo::GeodesicOptions opts;
    opts.segments = 64;
    auto r = geo::distance_sq(a, b, conformal_metric(), 0.0, opts);
    CHECK(std::fabs(r.dist_sq - oracle) / oracle < 0.02);
  }

  TEST_CASE("observer metric distances match the flat pullback closed form") {
    const Vec pairs[][2] = {
        {Vec{0.0, 0.0}, Vec{1.0, 1.0}},
        {Vec{-1.5, 0.5}, Vec{1.0, -0.5}},
        {Vec{0.3, -1.2}, Vec{-0.7, 1.4}},
        {Vec{1.5, 1.5}, Vec{-1.5, -1.5}},
        {Vec{0.0, 1.0}, Vec{0.1, 0.9}},
    };
    sys::Domain box;
    box.lower = {-3.0, -3.0};
    box.upper = {3.0, 3.0};
    geo::GeodesicOptions opts;
    opts.segments = 64;
    opts.domain = &box;
    for (const auto& pr : pairs) {
      const double exact = observer_exact_dist_sq(pr[0], pr[1]);
      auto r = geo::distance_sq(pr[0], pr[1], observer_metric(), 0.0, opts);
      CHECK(std::fabs(r.dist_sq - exact) / exact < 1e-3);
      CHECK_FALSE(r.clamped);  // pullback geodesics stay inside the box
      CHECK(r.dist_sq <= r.straight_line_energy + 1e-12);
    }
  }

  TEST_CASE("distance is symmetric in its endpoints") {
    TestRng rng(4717);
    geo::GeodesicOptions opts;
    opts.segments = 16;
    auto metric = conformal_metric();
    for (int trial = 0; trial < 100; ++trial) {
      Vec a{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
      Vec b{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
      auto fwd = geo::distance_sq(a, b, metric, 0.0, opts);
      auto rev = geo::distance_sq(b, a, metric, 0.0, opts);
      const double denom = std::max(fwd.dist_sq, 1e-12);
      CHECK(std::fabs(fwd.dist_sq - rev.dist_sq) / denom < 1e-6);
    }
  }

  TEST_CASE("metric floor bounds distances from below") {
    // On the box x1 in [-0.5, 0.5] the conformal metric has floor e^{-1}.
    TestRng rng(99);
    const double beta = std::exp(-1.0);
    geo::GeodesicOptions opts;
    opts.segments = 16;
    for (int trial = 0; trial < 25; ++trial) {
      Vec a{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
      Vec b{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
      auto r = geo::distance_sq(a, b, conformal_metric(), 0.0, opts);
      CHECK(r.dist_sq >= beta * linalg::norm2_sq(linalg::sub(a, b)) - 1e-9);
    }
  }

  TEST_CASE("triangle inequality holds for converged solves") {
    TestRng rng(1234);
    geo::GeodesicOptions opts;
    opts.segments = 32;
    auto metric = conformal_metric();
    for (int trial = 0; trial < 5; ++trial) {
      Vec a{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
      Vec b{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
      Vec c{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
      const double ab = std::sqrt(geo::distance_sq(a, b, metric, 0.0, opts).dist_sq);
      const double bc = std::sqrt(geo::distance_sq(b, c, metric, 0.0, opts).dist_sq);
      const double ac = std::sqrt(geo::distance_sq(a, c, metric, 0.0, opts).dist_sq);
      CHECK(ac <= (ab + bc) * (1.0 + 1e-4));
    }
  }

  TEST_CASE("curves are clamped to the domain and flagged") {
    // Free geodesic between these endpoints bows into x1 < -0.05; the box
    // stops it, so the result lands between the free distance and the
    // straight-line energy.
    Vec a{0.0, -0.8}, b{0.0, 0.8};
    sys::Domain box;
    box.lower = {-0.05, -1.0};
    box.upper = {1.0, 1.0};
    geo::GeodesicOptions opts;
    opts.segments = 64;
    opts.domain = &box;
    auto r = geo::distance_sq(a, b, conformal_metric(), 0.0, opts);
    const double free_exact = conformal_exact_dist_sq(a, b);
    CHECK(r.clamped);
    CHECK(r.dist_sq > free_exact);
    CHECK(r.dist_sq < r.straight_line_energy);
    for (const auto& p : r.curve.points) CHECK(p[0] >= -0.05 - 1e-15);
  }

  TEST_CASE("refinement is consistent and keeps the bookkeeping") {
    // Identity metric: refinement changes nothing.
    auto flat = geo::distance_sq(Vec{0.0, 0.0}, Vec{3.0, 4.0},
                                 identity_metric(), 0.0);
    auto flat2 = geo::refine(flat, identity_metric(), 0.0, 2);
    CHECK(std::fabs(flat2.dist_sq - flat.dist_sq) < 1e-12);
    CHECK(flat2.straight_line_energy == flat.straight_line_energy);
    CHECK(flat2.curve.segments() == 2 * flat.curve.segments());

    // Conformal: coarse and refined solves agree to 1e-3 relative.
    geo::GeodesicOptions opts;
    opts.segments = 128;
    auto coarse = geo::distance_sq(Vec{-0.5, 0.0}, Vec{0.5, 0.0},
                                   conformal_metric(), 0.0, opts);
    auto fine = geo::refine(coarse, conformal_metric(), 0.0, 2, opts);
    CHECK(std::fabs(fine.dist_sq - coarse.dist_sq) / coarse.dist_sq < 1e-3);
    CHECK(fine.straight_line_energy == coarse.straight_line_energy);

    CHECK_THROWS_AS(geo::refine(coarse, conformal_metric(), 0.0, 1),
                    InvalidInput);
  }

  TEST_CASE("warm starts reproduce cold-start results") {
    geo::GeodesicOptions opts;
    opts.segments = 64;
    auto metric = conformal_metric();
    auto base = geo::distance_sq(Vec{-0.5, 0.0}, Vec{0.5, 0.0}, metric, 0.0,
                                 opts);

    Vec a{-0.5, 0.05}, b{0.5, -0.05};
    auto cold = geo::distance_sq(a, b, metric, 0.0, opts);
    geo::GeodesicOptions warm_opts = opts;
    warm_opts.initial_curve = &base.curve;
    auto warm = geo::distance_sq(a, b, metric, 0.0, warm_opts);
    CHECK(std::fabs(warm.dist_sq - cold.dist_sq) / cold.dist_sq < 1e-6);
    CHECK(warm.dist_sq <= warm.straight_line_energy + 1e-12);
  }

  TEST_CASE("input validation") {
    CHECK_THROWS_AS(geo::straight_line(Vec{0.0}, Vec{0.0, 1.0}, 4),
                    InvalidInput);
    CHECK_THROWS_AS(geo::straight_line(Vec{0.0}, Vec{1.0}, 0), InvalidInput);
    geo::Curve c;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c.points = {Vec{0.0, 0.0}, Vec{1.0}};
    CHECK_THROWS_AS(geo::curve_energy(c, identity_metric(), 0.0), InvalidInput);
  }
}
