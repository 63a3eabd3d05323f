#include <doctest.h>

#include <cmath>
#include <numbers>

#include "twofold/ensemble.hpp"
#include "twofold/error.hpp"
#include "twofold/phase.hpp"

using namespace twofold;

namespace {
const TwoFoldParams kParams(-0.5, -2.5);
constexpr double kTwoPi = 2.0 * std::numbers::pi;

EnsembleConfig small_config() {
  EnsembleConfig c;
  c.n_samples = 24;
  c.T = 8.0;
  c.noise.epsilon = 1e-3;
  c.noise.seed = 5;
  c.integrator.dt = 1e-4;
  c.integrator.sample_stride = 0;
  return c;
}
}  // namespace

TEST_CASE("ensemble configuration validation") {
  EnsembleConfig c = small_config();
  CHECK_NOTHROW(c.validate());
  c.n_samples = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_config();
  c.T = c.t0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_config();
  c.noise.epsilon = -1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_config();
  c.X0.y = NAN;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_config();
  c.integrator.dt = -1.0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("ensemble is identical across thread counts") {
  const FieldSpec f = FieldSpec::normal_form(kParams, PerturbationKind::LinearDamping);
  EnsembleConfig c = small_config();
  const EnsembleResult one = run_ensemble(f, c, 1.18);
  c.threads = 4;
  const EnsembleResult four = run_ensemble(f, c, 1.18);
  REQUIRE(one.samples.size() == four.samples.size());
  CHECK(one.samples.size() == 24);
  for (std::size_t i = 0; i < one.samples.size(); ++i) {
    CHECK(one.samples[i].sample_index == i);
    CHECK(one.samples[i].phi_T == four.samples[i].phi_T);
    CHECK(one.samples[i].s_T == four.samples[i].s_T);
    CHECK(one.samples[i].phi_T >= 0.0);
    CHECK(one.samples[i].phi_T < kTwoPi);
    CHECK(one.samples[i].s_T <= c.T);
  }
  CHECK(one.failure_fraction() == 0.0);
  // a different master seed changes the draws
  c.noise.seed = 6;
  const EnsembleResult other = run_ensemble(f, c, 1.18);
  CHECK(other.samples[0].phi_T != one.samples[0].phi_T);
}

TEST_CASE("samples without a crossing before T are reported, not dropped silently") {
  const FieldSpec f = FieldSpec::normal_form(kParams, PerturbationKind::LinearDamping);
  EnsembleConfig c = small_config();
  c.X0 = {-50.0, 0.0, 0.0};
  c.T = 0.2;
  c.n_samples = 5;
  const EnsembleResult r = run_ensemble(f, c, 1.18);
  CHECK(r.samples.empty());
  REQUIRE(r.failures.size() == 5);
  CHECK(r.failures[0].code == ErrorCode::NoCrossingBefore);
  CHECK(r.failure_fraction() == 1.0);
}

TEST_CASE("noise-free ensemble through the two-fold is degenerate") {
  const FieldSpec f = FieldSpec::normal_form(kParams, PerturbationKind::LinearDamping);
  EnsembleConfig c = small_config();
  c.noise.epsilon = 0.0;
  c.n_samples = 3;
  c.T = 12.0;
  c.continuation = ViablePsi{0.01, std::nullopt};
  const EnsembleResult r = run_ensemble(f, c, 1.18);
  REQUIRE(r.samples.size() == 3);
  CHECK(r.samples[0].phi_T == r.samples[1].phi_T);
  CHECK(r.samples[1].phi_T == r.samples[2].phi_T);
}

TEST_CASE("histogram") {
  const std::vector<double> ph{0.0, 0.1, 3.2, kTwoPi - 1e-12, 6.0};
  const auto h = histogram(ph, 4);
  REQUIRE(h.size() == 4);
  CHECK(h[0] == 2);
  CHECK(h[1] == 0);
  CHECK(h[2] == 1);
  CHECK(h[3] == 2);
  CHECK_THROWS_AS(histogram(ph, 0), Error);
  CHECK_THROWS_AS(histogram({7.0}, 3), Error);
}

TEST_CASE("KS distance") {
  auto uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
  CHECK(ks_distance({0.5}, uniform) == doctest::Approx(0.5));
  std::vector<double> grid;
  for (int i = 0; i < 100; ++i) grid.push_back((i + 0.5) / 100.0);
  CHECK(ks_distance(grid, uniform) == doctest::Approx(0.005));
  CHECK(ks_distance({0.0, 0.0, 0.0, 0.0}, uniform) == doctest::Approx(1.0));
  const DensityTable d({0.0, 1.0}, {1.0, 1.0});
  CHECK(ks_distance(grid, d) == doctest::Approx(0.005));
  CHECK_THROWS_AS(ks_distance(std::vector<double>{}, uniform), Error);
}
