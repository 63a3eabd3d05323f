#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracle.hpp"
#include "twofold/error.hpp"
#include "twofold/normalform.hpp"

using namespace twofold;

namespace {
const TwoFoldParams kParams(-0.5, -2.5);
const oracle::Params kOracle{};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }
}  // namespace

TEST_CASE("derived constants match direct evaluation") {
  const DerivedConstants c = derived_constants(kParams);
  CHECK(rel(c.mu, oracle::mu(kOracle)) < 1e-12);
  CHECK(rel(c.gamma, oracle::gamma(kOracle)) < 1e-12);
  CHECK(rel(c.lambda, oracle::lambda_weak(kOracle)) < 1e-12);
  CHECK(rel(c.alpha, oracle::alpha(kOracle)) < 1e-12);
  CHECK(rel(c.beta, oracle::beta(kOracle)) < 1e-12);
  // identity tying alpha to the return map eigen-data
  CHECK(std::abs(c.mu * (1 - 2 * c.alpha) - (1 - 2 * c.alpha * c.gamma)) < 1e-12);
}

TEST_CASE("derived constants against published decimals") {
  const DerivedConstants c = derived_constants(kParams);
  CHECK(c.mu == doctest::Approx(2.6180340).epsilon(1e-7));
  CHECK(c.gamma == doctest::Approx(-3.6180340).epsilon(1e-7));
  CHECK(c.lambda == doctest::Approx(-0.0857864).epsilon(1e-6));
  CHECK(c.alpha == doctest::Approx(0.1297318).epsilon(1e-6));
  // the quoted beta is 0.8469758; the formula gives 0.8469551
  CHECK(c.beta == doctest::Approx(0.8469758).epsilon(5e-5));
}

TEST_CASE("identity holds across the admissible parameter set") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-6.0, -0.1);
  int checked = 0;
  while (checked < 200) {
    const double vm = u(rng), vp = u(rng);
    if (vm * vp <= 1.05) continue;
    const DerivedConstants c = derived_constants(TwoFoldParams(vm, vp));
    CHECK(std::abs(c.mu * (1 - 2 * c.alpha) - (1 - 2 * c.alpha * c.gamma)) < 1e-10 * c.mu);
    CHECK(c.mu > 1.0);
    CHECK(c.lambda < 0.0);
    CHECK(c.alpha > 0.0);
    CHECK(c.alpha < 0.5);
    ++checked;
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(TwoFoldParams(0.5, -2.5), Error);
  CHECK_THROWS_AS(TwoFoldParams(-0.5, 0.0), Error);
  CHECK_THROWS_AS(TwoFoldParams(-0.5, -1.0), Error);  // product 0.5
  CHECK_THROWS_AS(TwoFoldParams(-1.0, -1.0), Error);  // product exactly 1
  CHECK_THROWS_AS(TwoFoldParams(NAN, -2.0), Error);
  try {
    TwoFoldParams(1.0, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidParams);
  }
  CHECK_NOTHROW(TwoFoldParams(-1.0, -1.1));
}

TEST_CASE("half flows solve their vector fields") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const State3 X{u(rng), u(rng), u(rng)};
    const double dt = 0.5 + 0.5 * u(rng);
    oracle::V3 L{X.x, X.y, X.z}, R = L;
    const int n = 2000;
    for (int k = 0; k < n; ++k) {
      L = oracle::rk4(kOracle, oracle::Terms::None, L, dt / n, false);
      R = oracle::rk4(kOracle, oracle::Terms::None, R, dt / n, true);
    }
    const State3 l = flow_left(kParams, X, dt), r = flow_right(kParams, X, dt);
    CHECK(std::abs(l.x - L[0]) < 1e-11);
    CHECK(std::abs(l.y - L[1]) < 1e-11);
    CHECK(std::abs(l.z - L[2]) < 1e-11);
    CHECK(std::abs(r.x - R[0]) < 1e-11);
    CHECK(std::abs(r.y - R[1]) < 1e-11);
    CHECK(std::abs(r.z - R[2]) < 1e-11);
  }
  const State3 X{0.3, -0.2, 0.1};
  CHECK(flow_left(kParams, X, 0.0) == X);
}

TEST_CASE("return map reproduces the worked crossing") {
  const ReturnMapResult r = return_map(kParams, 1.0, -3.6180340);
  CHECK(r.y_next == doctest::Approx(2.6180340).epsilon(1e-7));
  CHECK(r.z_next == doctest::Approx(-9.4721360).epsilon(1e-7));
  CHECK(r.elapsed == doctest::Approx(12.4721360).epsilon(1e-7));
}

TEST_CASE("return map equals the composed half flows") {
  // left flow returns at t = -2z, right flow at t = -2y1
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uy(0.05, 3.0), uz(-8.0, -0.05);
  const double k = return_map_branch_slope(kParams);
  int done = 0;
  while (done < 100) {
    const double y = uy(rng), z = uz(rng);
    if (!(z < k * y)) continue;
    const double tl = -2.0 * z;
    const State3 mid = flow_left(kParams, {0.0, y, z}, tl);
    const double tr = -2.0 * mid.y;
    const State3 end = flow_right(kParams, {0.0, mid.y, mid.z}, tr);
    const ReturnMapResult r = return_map(kParams, y, z);
    CHECK(r.y_next == doctest::Approx(end.y).epsilon(1e-12));
    CHECK(r.z_next == doctest::Approx(end.z).epsilon(1e-12));
    CHECK(r.elapsed == doctest::Approx(tl + tr).epsilon(1e-12));
    ++done;
  }
}

TEST_CASE("return map scales along the unstable eigenvector") {
  const double g = oracle::gamma(kOracle), m = oracle::mu(kOracle);
  for (double y : {1e-6, 1e-3, 0.5, 7.0}) {
    const ReturnMapResult r = return_map(kParams, y, g * y);
    CHECK(r.y_next == doctest::Approx(m * y).epsilon(1e-12));
    CHECK(r.z_next == doctest::Approx(m * g * y).epsilon(1e-12));
  }
  const ReturnMapResult o = return_map(kParams, 0.0, 0.0);
  CHECK(o.y_next == 0.0);
  CHECK(o.z_next == 0.0);
  CHECK(o.elapsed == 0.0);
}

TEST_CASE("return map rejects points that land in sliding") {
  const double k = return_map_branch_slope(kParams);
  CHECK_THROWS_AS(return_map(kParams, 1.0, 0.5 * k), Error);
  try {
    return_map(kParams, 1.0, -0.01);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LeavesCrossingRegime);
  }
}

TEST_CASE("psi orbits") {
  const double a = 0.2;
  const PsiOrbit psi(kParams, a);
  const double m = oracle::mu(kOracle), g = oracle::gamma(kOracle), al = oracle::alpha(kOracle);

  SUBCASE("meets zeta at t = a and mu a") {
    for (double t : {a, m * a, m * m * a}) {
      const State3 X = psi_orbit_eval(psi, t).X;
      CHECK(std::abs(X.x) < 1e-14);
      CHECK(X.y == doctest::Approx(al * t).epsilon(1e-12));
      CHECK(X.z == doctest::Approx(g * al * t).epsilon(1e-12));
    }
  }
  SUBCASE("psi_a and psi_(mu a) are the same orbit") {
    const PsiOrbit other(kParams, m * a);
    for (double t : {0.01, 0.3, 1.0, 4.2}) {
      const State3 p = psi_orbit_eval(psi, t).X, q = psi_orbit_eval(other, t).X;
      CHECK(p.x == doctest::Approx(q.x).epsilon(1e-10));
      CHECK(p.y == doctest::Approx(q.y).epsilon(1e-10));
      CHECK(p.z == doctest::Approx(q.z).epsilon(1e-10));
    }
  }
  SUBCASE("follows the vector field between crossings") {
    for (double t : {0.21, 0.4, 0.55, 1.7}) {
      const State3 X = psi_orbit_eval(psi, t).X;
      const double h = 1e-6;
      const State3 Y = psi_orbit_eval(psi, t + h).X;
      const auto f = oracle::field(kOracle, oracle::Terms::None, {X.x, X.y, X.z}, X.x > 0.0);
      CHECK((Y.x - X.x) / h == doctest::Approx(f[0]).epsilon(1e-4));
      CHECK((Y.y - X.y) / h == doctest::Approx(f[1]).epsilon(1e-4));
      CHECK((Y.z - X.z) / h == doctest::Approx(f[2]).epsilon(1e-4));
    }
  }
  SUBCASE("lies on the unstable cone") {
    for (double t : {0.25, 0.33, 0.4, 0.47}) {
      const State3 X = psi_orbit_eval(psi, t).X;
      if (std::abs(X.x) < 1e-9) continue;
      const Side s = X.x > 0.0 ? Side::Right : Side::Left;
      CHECK(lambda_surface_x(kParams, X.y, X.z, s) == doctest::Approx(X.x).epsilon(1e-8));
    }
  }
  SUBCASE("resolution and domain") {
    CHECK(psi_orbit_eval(psi, 0.0).below_resolution);
    CHECK(psi_orbit_eval(psi, 0.0).X == State3{});
    CHECK_FALSE(psi_orbit_eval(psi, 1e-9).below_resolution);
    CHECK_THROWS_AS(psi_orbit_eval(psi, -1.0), Error);
    CHECK_THROWS_AS(PsiOrbit(kParams, 0.0), Error);
    CHECK_THROWS_AS(PsiOrbit(kParams, INFINITY), Error);
  }
}
