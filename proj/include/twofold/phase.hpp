#pragma once

#include <cstdint>
#include <vector>

#include "twofold/core.hpp"
#include "twofold/integrate.hpp"

namespace twofold {

// Stable oscillation found by iterating the section map on {x = 0, y > 0}.
// For the controlled Hopf field the z slot carries time and is ignored when
// comparing section points.
struct PeriodicOrbit {
  State3 section_point;
  double section_time = 0.0;
  double tau = 0.0;
  std::vector<Sample> samples;  // one period starting at section_point
};

struct OrbitSearchOptions {
  std::uint32_t max_iterations = 5000;
  double tolerance = 1e-10;
  // Longest time allowed between two section hits.
  double max_return_time = 1e3;
};

PeriodicOrbit find_periodic_orbit(const FieldSpec& spec, const State3& guess, double t0,
                                  const IntegratorConfig& cfg, const OrbitSearchOptions& opts = {});

// 2pi (T - s_T) / tau mod 2pi with s_T the latest CrossingPosY at or before T.
double phase_phi_T(const Trajectory& traj, double T, double tau);

// Asymptotic phase of the state X at time t: the trajectory is followed for
// settle_periods periods and phi_T is read off at that horizon.
double asymptotic_phase(const FieldSpec& spec, const PeriodicOrbit& orbit, const State3& X,
                        double t, const IntegratorConfig& cfg, std::uint32_t settle_periods = 40);

// Monotone cubic (Fritsch-Carlson) interpolant through strictly increasing
// abscissae.  Falls back to linear segments when the ordinates are not
// strictly increasing.
class MonotoneInterpolant {
 public:
  MonotoneInterpolant() = default;
  MonotoneInterpolant(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double derivative(double x) const;
  // Solves value(x) = v for x in [x_min, x_max] by bisection.
  double inverse(double v, double tol = 1e-12) const;

  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  double y_min() const { return y_.front(); }
  double y_max() const { return y_.back(); }
  bool linear_fallback() const noexcept { return linear_; }
  const std::vector<double>& xs() const noexcept { return x_; }
  const std::vector<double>& ys() const noexcept { return y_; }

 private:
  std::size_t segment(double x) const;

  std::vector<double> x_, y_, slope_;
  bool linear_ = false;
};

struct ReturnTimeOptions {
  double a_min = 1e-3;
  // Seeds per factor mu in a, spaced geometrically.
  std::uint32_t n_seeds = 24;
  double t_max = 60.0;
  unsigned threads = 1;
};

struct ReturnTimeKnot {
  double a;
  double f;
};

struct ReturnTimeTable {
  std::vector<ReturnTimeKnot> knots;
  MonotoneInterpolant f;

  double eval(double a) const { return f(a); }
  // f^(-n)(v); DepthTooLarge when it leaves the tabulated range below.
  double inverse_iterate(double v, std::uint32_t n) const;
};

ReturnTimeTable return_time_table(const FieldSpec& spec, const IntegratorConfig& cfg,
                                  const ReturnTimeOptions& opts = {});
ReturnTimeTable make_return_time_table(std::vector<ReturnTimeKnot> knots);

// Piecewise-linear density on [lo, hi].
class DensityTable {
 public:
  DensityTable() = default;
  DensityTable(std::vector<double> s, std::vector<double> p);

  double lo() const { return s_.front(); }
  double hi() const { return s_.back(); }
  double density(double x) const;
  double cdf(double x) const;
  double mass() const { return cum_.back(); }
  // Rescales so that the mass is one.
  void normalise();

  const std::vector<double>& s() const noexcept { return s_; }
  const std::vector<double>& p() const noexcept { return p_; }

 private:
  std::vector<double> s_, p_, cum_;
};

// Density of s_T: the reciprocal law on [f^-(n+1)(T - t0), f^-n(T - t0)]
// pushed forward n times through f and shifted by t0.
DensityTable pdf_sT(const ReturnTimeTable& table, double T, double t0, std::uint32_t n,
                    std::uint32_t grid = 4001);

// Density of phi = 2pi (T - s) / tau mod 2pi on [0, 2pi].
DensityTable pdf_phase(const DensityTable& p_sT, double T, double tau, std::uint32_t grid = 721);

double l1_distance(const DensityTable& a, const DensityTable& b, std::uint32_t grid = 4001);

struct IsochronPoint {
  State3 X;
  double t;            // time along the seeding orbit
  std::uint32_t orbit;  // index of the seeding orbit
};

struct Isochron {
  double phase;
  std::vector<IsochronPoint> points;  // ordered from the two-fold outward
};

struct IsochronOptions {
  std::uint32_t n_orbits = 100;
  double a_min = 1e-3;
  double t_max = 40.0;
  // Points closer than this in time to the seed are dropped.
  double t_min = 0.0;
  // Stored sample spacing, in steps, from which level-set points are
  // re-integrated.
  std::uint32_t sample_stride = 32;
  unsigned threads = 1;
};

std::vector<Isochron> isochron_mesh(const FieldSpec& spec, const PeriodicOrbit& orbit,
                                    const std::vector<double>& phases, const IntegratorConfig& cfg,
                                    const IsochronOptions& opts = {});

}  // namespace twofold
