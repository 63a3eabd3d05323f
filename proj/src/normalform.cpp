#include "twofold/normalform.hpp"

#include <cmath>

#include "twofold/error.hpp"

namespace twofold {

DerivedConstants derived_constants(const TwoFoldParams& p) {
  return {p.lambda_weak(), p.mu(), p.gamma(), p.alpha(), p.beta()};
}

State3 flow_left(const TwoFoldParams& p, const State3& X0, double dt) {
  return {X0.x + X0.z * dt + 0.5 * dt * dt, X0.y + p.v_minus() * dt, X0.z + dt};
}

State3 flow_right(const TwoFoldParams& p, const State3& X0, double dt) {
  return {X0.x - X0.y * dt - 0.5 * dt * dt, X0.y + dt, X0.z + p.v_plus() * dt};
}

double return_map_branch_slope(const TwoFoldParams& p) {
  return 2.0 * p.v_plus() / (4.0 * p.v_minus() * p.v_plus() - 1.0);
}

ReturnMapResult return_map(const TwoFoldParams& p, double y, double z) {
  if (y == 0.0 && z == 0.0) return {};
  if (!(z < 0.0) || !(z < return_map_branch_slope(p) * y))
    fail(ErrorCode::LeavesCrossingRegime,
         "return_map: (y, z) is not below the branch line; the orbit enters attracting sliding");
  const double vm = p.v_minus();
  const double vp = p.v_plus();
  return {-y + 2.0 * vm * z, -2.0 * vp * y + (4.0 * vm * vp - 1.0) * z,
          2.0 * ((2.0 * vm - 1.0) * z - y)};
}

double lambda_xi(const TwoFoldParams& p, double y, double z) {
  const double vm = p.v_minus();
  const double vp = p.v_plus();
  return (vp * y * y - 2.0 * vp * vm * y * z + vm * z * z) / (2.0 * (vp * vm - 1.0));
}

double lambda_surface_x(const TwoFoldParams& p, double y, double z, Side side) {
  const double xi = lambda_xi(p, y, z);
  return side == Side::Left ? -xi / p.v_minus() : xi / p.v_plus();
}

PsiOrbit::PsiOrbit(const TwoFoldParams& p, double a_) : params(p), a(a_) {
  if (!(a_ > 0.0) || !std::isfinite(a_)) fail(ErrorCode::InvalidArgument, "psi orbit requires a > 0");
}

PsiSample psi_orbit_eval(const PsiOrbit& orbit, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) fail(ErrorCode::DomainError, "psi_orbit_eval requires t >= 0");
  if (t < 1e-12 * orbit.a) return {State3{}, true};

  const TwoFoldParams& p = orbit.params;
  const double mu = p.mu();
  // Start of the revolution containing t: mu^k a <= t < mu^(k+1) a.
  double start = orbit.a * std::pow(mu, std::floor(std::log(t / orbit.a) / std::log(mu)));
  while (start > t) start /= mu;
  while (start * mu <= t) start *= mu;

  const double y0 = p.alpha() * start;
  const State3 on_zeta{0.0, y0, p.gamma() * y0};
  const double elapsed = t - start;
  const double left_duration = -2.0 * on_zeta.z;
  if (elapsed <= left_duration) return {flow_left(p, on_zeta, elapsed), false};
  const State3 on_cplus{0.0, on_zeta.y - 2.0 * p.v_minus() * on_zeta.z, -on_zeta.z};
  return {flow_right(p, on_cplus, elapsed - left_duration), false};
}

}  // namespace twofold
