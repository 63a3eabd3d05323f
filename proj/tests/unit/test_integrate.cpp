#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "../oracle.hpp"
#include "twofold/error.hpp"
#include "twofold/integrate.hpp"
#include "twofold/normalform.hpp"

using namespace twofold;

namespace {
const TwoFoldParams kParams(-0.5, -2.5);
const oracle::Params kOracle{};

IntegratorConfig config(double dt) {
  IntegratorConfig c;
  c.dt = dt;
  c.sample_stride = 0;
  return c;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}
}  // namespace

TEST_CASE("configuration validation") {
  IntegratorConfig c;
  CHECK_NOTHROW(c.validate());
  c.dt = 0.0;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidArgument);
  c = {};
  c.event_tol = c.dt;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidArgument);
  c = {};
  c.max_steps = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.chatter_guard = -1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.relative_step = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.twofold_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("deterministic integrator matches the closed-form half flows") {
  const FieldSpec f = FieldSpec::normal_form(kParams);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  int done = 0;
  while (done < 100) {
    const bool right = done % 2 == 1;
    State3 X{u(rng), u(rng), u(rng)};
    X.x = right ? std::abs(X.x) + 0.1 : -std::abs(X.x) - 0.1;
    // keep only points whose unit-time segment stays on one side
    bool stays = true;
    for (int k = 1; k <= 100 && stays; ++k) {
      const State3 Y = right ? flow_right(kParams, X, k / 100.0) : flow_left(kParams, X, k / 100.0);
      stays = right ? Y.x > 1e-3 : Y.x < -1e-3;
    }
    if (!stays) continue;
    const Trajectory tr = integrate_deterministic(f, X, 0.0, 1.0, config(1e-3));
    const State3 got = tr.samples.back().X;
    const State3 want = right ? flow_right(kParams, X, 1.0) : flow_left(kParams, X, 1.0);
    CHECK(tr.samples.back().t == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(got.x - want.x) < 1e-9);
    CHECK(std::abs(got.y - want.y) < 1e-9);
    CHECK(std::abs(got.z - want.z) < 1e-9);
    CHECK(tr.events.empty());
    ++done;
  }
}

TEST_CASE("crossing sequence follows the return map") {
  const FieldSpec f = FieldSpec::normal_form(kParams);
  IntegratorConfig c = config(1e-3);
  c.stop_after_pos_y = 1;
  const Trajectory tr = integrate_deterministic(f, {0.0, 1.0, -3.6180340}, 0.0, 20.0, c);
  REQUIRE(tr.events.size() == 2);
  CHECK(tr.events[0].kind == EventKind::CrossingNegY);
  CHECK(tr.events[0].t == doctest::Approx(7.236068).epsilon(1e-6));
  CHECK(tr.events[0].X.y == doctest::Approx(-2.618034).epsilon(1e-6));
  const Event& e = tr.events[1];
  CHECK(e.kind == EventKind::CrossingPosY);
  CHECK(std::abs(e.t - 12.4721360) < 1e-6);
  CHECK(std::abs(e.X.y - 2.6180340) < 1e-6);
  CHECK(std::abs(e.X.z - -9.4721360) < 1e-6);
  CHECK(std::abs(e.X.x) < 1e-9);
  // stop_after_pos_y ended the run at the crossing
  CHECK(tr.samples.back().t == doctest::Approx(e.t));
}

TEST_CASE("sliding into the two-fold") {
  for (auto [kind, terms] : {std::pair{PerturbationKind::LinearDamping, oracle::Terms::Linear},
                             std::pair{PerturbationKind::Cubic, oracle::Terms::Cubic},
                             std::pair{PerturbationKind::None, oracle::Terms::None}}) {
    const FieldSpec f = FieldSpec::normal_form(kParams, kind);
    const Trajectory tr = integrate_deterministic(f, {0.0, 1.0, 1.0}, 0.0, 100.0, config(1e-4));
    REQUIRE(tr.reached_twofold());
    CHECK(tr.events.front().kind == EventKind::SlidingEntry);
    const double want = oracle::sliding_arrival_time(kOracle, terms, 1.0, 1.0, 1e-4, 1e-6);
    CHECK(tr.events.back().t == doctest::Approx(want).epsilon(1e-5));
    CHECK(norm(tr.events.back().X) < 1e-5);
  }
}

TEST_CASE("sliding entry from x < 0 into A") {
  const FieldSpec f = FieldSpec::normal_form(kParams);
  // z > 0 drives x up to the surface where y > 0 holds
  const Trajectory tr = integrate_deterministic(f, {-0.5, 3.0, 1.0}, 0.0, 200.0, config(1e-3));
  REQUIRE(tr.events.size() >= 2);
  CHECK(tr.events.front().kind == EventKind::SlidingEntry);
  CHECK(std::abs(tr.events.front().X.x) < 1e-9);
  CHECK(tr.reached_twofold());
}

TEST_CASE("repelling region is left immediately into x < 0") {
  const FieldSpec f = FieldSpec::normal_form(kParams);
  IntegratorConfig c = config(1e-3);
  c.sample_stride = 1;
  const Trajectory tr = integrate_deterministic(f, {0.0, -1.0, -1.0}, 0.0, 0.1, c);
  CHECK(tr.samples[1].X.x < 0.0);
}

TEST_CASE("sample stride and endpoints") {
  const FieldSpec f = FieldSpec::normal_form(kParams);
  IntegratorConfig c = config(0.01);
  c.sample_stride = 10;
  const Trajectory tr = integrate_deterministic(f, {-5.0, 0.0, 0.0}, 0.0, 1.0, c);
  CHECK(tr.samples.front().t == 0.0);
  CHECK(tr.samples.back().t == doctest::Approx(1.0));
  CHECK(tr.samples.size() == 11);
}

TEST_CASE("error paths") {
  const FieldSpec f = FieldSpec::normal_form(kParams);
  IntegratorConfig c = config(1e-3);
  CHECK_THROWS_AS(integrate_deterministic(f, {0.0, 1.0, NAN}, 0.0, 1.0, c), Error);
  CHECK_THROWS_AS(integrate_deterministic(f, {-1.0, 1.0, 1.0}, 1.0, 0.0, c), Error);
  c.max_steps = 10;
  CHECK(code_of([&] { integrate_deterministic(f, {-5.0, 0.0, 0.0}, 0.0, 1.0, c); }) == ErrorCode::MaxStepsExceeded);
  NoiseSpec n;
  n.epsilon = 1e-3;
  CHECK(code_of([&] { integrate_sde(f, {-5.0, 0.0, 0.0}, 0.0, 1.0, c, n); }) == ErrorCode::MaxStepsExceeded);
  n.epsilon = -1.0;
  CHECK_THROWS_AS(integrate_sde(f, {-5.0, 0.0, 0.0}, 0.0, 1.0, config(1e-3), n), Error);
}

TEST_CASE("continuation through the two-fold") {
  const FieldSpec f = FieldSpec::normal_form(kParams, PerturbationKind::LinearDamping);
  SUBCASE("restart point lies on psi_a") {
    const auto r = two_fold_continuation(f, 3.0, ViablePsi{0.01, std::nullopt});
    REQUIRE(r);
    CHECK(r->t == doctest::Approx(3.01));
    CHECK(r->X.y == doctest::Approx(oracle::alpha(kOracle) * 0.01));
    CHECK(r->X.z == doctest::Approx(oracle::gamma(kOracle) * oracle::alpha(kOracle) * 0.01));
    CHECK_FALSE(two_fold_continuation(f, 3.0, StopAtTwoFold{}));
    CHECK_THROWS_AS(two_fold_continuation(f, 3.0, ViablePsi{0.0, std::nullopt}), Error);
    CHECK_THROWS_AS(two_fold_continuation(f, 3.0, ViablePsi{0.1, -1.0}), Error);
  }
  SUBCASE("orbit continues to the periodic orbit") {
    const Trajectory tr =
        integrate_with_continuation(f, {0.0, 1.0, 1.0}, 0.0, 20.0, config(1e-4), ViablePsi{0.01, std::nullopt});
    CHECK_FALSE(tr.reached_twofold());
    CHECK(tr.samples.back().t == doctest::Approx(20.0));
    const Event* last = tr.last_crossing_pos_y(20.0);
    REQUIRE(last);
    CHECK(last->t > 15.0);
  }
}

TEST_CASE("stream seeds") {
  CHECK(derive_stream_seed(1, 0) == derive_stream_seed(1, 0));
  CHECK(derive_stream_seed(1, 0) != derive_stream_seed(1, 1));
  CHECK(derive_stream_seed(1, 0) != derive_stream_seed(2, 0));
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(derive_stream_seed(42, i));
  CHECK(seen.size() == 10000);
}

TEST_CASE("Euler-Maruyama noise statistics away from the surface") {
  // on the left the y drift is the constant V-, so y(T) - y0 - V- T ~ N(0, eps^2 T)
  const FieldSpec f = FieldSpec::normal_form(kParams);
  IntegratorConfig c = config(1e-3);
  const double eps = 0.05, T = 1.0;
  const int n = 2000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    NoiseSpec noise;
    noise.epsilon = eps;
    noise.seed = derive_stream_seed(9, i);
    const Trajectory tr = integrate_sde(f, {-100.0, 0.0, 0.0}, 0.0, T, c, noise);
    const double dev = tr.samples.back().X.y - (-0.5 * T);
    sum += dev;
    sum2 += dev * dev;
  }
  const double mean = sum / n, var = sum2 / n - mean * mean;
  const double sigma2 = eps * eps * T;
  CHECK(std::abs(mean) < 4.0 * std::sqrt(sigma2 / n));
  CHECK(var == doctest::Approx(sigma2).epsilon(0.1));
}

TEST_CASE("SDE paths are reproducible by seed") {
  const FieldSpec f = FieldSpec::normal_form(kParams, PerturbationKind::LinearDamping);
  IntegratorConfig c = config(1e-4);
  NoiseSpec n;
  n.epsilon = 1e-3;
  n.seed = 77;
  const Trajectory a = integrate_sde(f, {0.0, 1.0, 1.0}, 0.0, 8.0, c, n);
  const Trajectory b = integrate_sde(f, {0.0, 1.0, 1.0}, 0.0, 8.0, c, n);
  n.seed = 78;
  const Trajectory other = integrate_sde(f, {0.0, 1.0, 1.0}, 0.0, 8.0, c, n);
  CHECK(a.samples.back().X == b.samples.back().X);
  CHECK(a.events.size() == b.events.size());
  CHECK_FALSE(a.samples.back().X == other.samples.back().X);
}

TEST_CASE("noise-free SDE tracks the deterministic crossing orbit") {
  const FieldSpec f = FieldSpec::normal_form(kParams, PerturbationKind::LinearDamping);
  const State3 X0{0.0, 0.16, -0.55};
  IntegratorConfig det = config(1e-4);
  det.stop_after_pos_y = 3;
  const Trajectory d = integrate_deterministic(f, X0, 0.0, 10.0, det);
  REQUIRE(d.events.size() >= 3);
  const double t3 = d.events.back().t;
  NoiseSpec n;
  const Trajectory s = integrate_sde(f, X0, 0.0, t3 + 0.1, config(1e-5), n);
  std::vector<double> pos;
  for (const Event& e : s.events)
    if (e.kind == EventKind::CrossingPosY) pos.push_back(e.t);
  REQUIRE(pos.size() >= 3);
  CHECK(pos[2] == doctest::Approx(t3).epsilon(1e-3));
}
