#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../oracle.hpp"
#include "twofold/error.hpp"
#include "twofold/normalform.hpp"
#include "twofold/polar.hpp"

using namespace twofold;

namespace {
const TwoFoldParams kParams(-0.5, -2.5);
const oracle::Params kOracle{};
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double unwrap(double d) {
  while (d > std::numbers::pi) d -= kTwoPi;
  while (d < -std::numbers::pi) d += kTwoPi;
  return d;
}
}  // namespace

TEST_CASE("wrap_two_pi") {
  CHECK(wrap_two_pi(0.0) == 0.0);
  CHECK(wrap_two_pi(kTwoPi) == doctest::Approx(0.0));
  CHECK(wrap_two_pi(-0.5) == doctest::Approx(kTwoPi - 0.5));
  CHECK(wrap_two_pi(7.0 * kTwoPi + 1.0) == doctest::Approx(1.0));
  const double w = wrap_two_pi(-1e-18);
  CHECK(w >= 0.0);
  CHECK(w < kTwoPi);
}

TEST_CASE("r grows linearly along cone orbits from the two-fold") {
  const double alpha = oracle::alpha(kOracle);
  for (double a : {1e-3, 0.05, 1.0}) {
    const PsiOrbit psi(kParams, a);
    for (double t : {0.3 * a, a, 1.7 * a, 5.0 * a, 40.0 * a}) {
      const State3 X = psi_orbit_eval(psi, t).X;
      const PolarPoint p = to_polar(kParams, X.x, X.y);
      CHECK(p.r == doctest::Approx(alpha * t).epsilon(1e-9));
      CHECK(p.theta >= 0.0);
      CHECK(p.theta < kTwoPi);
    }
  }
}

TEST_CASE("polar ODE along cone orbits") {
  const double alpha = oracle::alpha(kOracle), beta = oracle::beta(kOracle);
  const double h = 1e-6;
  for (double a : {0.01, 0.3, 2.0}) {
    const PsiOrbit psi(kParams, a);
    for (int k = 1; k <= 40; ++k) {
      const double t = a * (0.05 + 0.13 * k);
      const State3 X0 = psi_orbit_eval(psi, t - h).X, X1 = psi_orbit_eval(psi, t + h).X;
      const PolarPoint p0 = to_polar(kParams, X0.x, X0.y), p1 = to_polar(kParams, X1.x, X1.y);
      const double rdot = (p1.r - p0.r) / (2 * h);
      const double r = 0.5 * (p0.r + p1.r);
      const double thetadot = unwrap(p1.theta - p0.theta) / (2 * h);
      CHECK(std::abs(rdot - alpha) < 1e-5);
      CHECK(std::abs(r * thetadot - beta) < 1e-5);
    }
  }
}

TEST_CASE("closed-form polar flow") {
  const double alpha = oracle::alpha(kOracle), beta = oracle::beta(kOracle);
  const PolarPoint p = polar_flow_from_singularity(kParams, 0.4, 3.0, 1.0);
  CHECK(p.r == doctest::Approx(alpha * 2.0));
  CHECK(p.theta == doctest::Approx(wrap_two_pi(beta / alpha * std::log(2.0) + 0.4)));
  CHECK_THROWS_AS(polar_flow_from_singularity(kParams, 0.0, 1.0, 1.0), Error);
}

TEST_CASE("negative y axis angle") {
  const double alpha = oracle::alpha(kOracle), mu = oracle::mu(kOracle);
  CHECK(negative_y_axis_theta(kParams) ==
        doctest::Approx(wrap_two_pi(kTwoPi * std::log((1 - 2 * alpha) * mu) / std::log(mu))));
  const PolarPoint below = to_polar(kParams, -1e-12, -1.0);
  const PolarPoint below_r = to_polar(kParams, 1e-12, -1.0);
  CHECK(std::abs(unwrap(below.theta - negative_y_axis_theta(kParams))) < 1e-6);
  CHECK(std::abs(unwrap(below_r.theta - negative_y_axis_theta(kParams))) < 1e-6);
}

TEST_CASE("continuity across the surface and scaling") {
  for (double y : {-2.0, -0.3, 0.4, 1.5}) {
    const PolarPoint l = to_polar(kParams, -1e-10, y), r = to_polar(kParams, 1e-10, y);
    CHECK(l.r == doctest::Approx(r.r).epsilon(1e-8));
    CHECK(std::abs(unwrap(l.theta - r.theta)) < 1e-6);
  }
  // r is homogeneous of degree one under the (x, y) -> (s^2 x, s y) scaling of the cone
  const PolarPoint p = to_polar(kParams, -0.2, 0.3), q = to_polar(kParams, -0.2 * 4.0, 0.6);
  CHECK(q.r == doctest::Approx(2.0 * p.r).epsilon(1e-10));
}

TEST_CASE("degenerate origin and domain errors") {
  const PolarPoint o = to_polar(kParams, 0.0, 0.0);
  CHECK(o.degenerate);
  CHECK(o.r == 0.0);
  CHECK(o.theta == 0.0);
  CHECK_THROWS_AS(tau_left(kParams, 0.5, 1.0), Error);
  CHECK_THROWS_AS(tau_right(-0.5, 1.0), Error);
  CHECK_THROWS_AS(to_polar(kParams, NAN, 1.0), Error);
}
