#include "twofold/polar.hpp"

#include <cmath>
#include <numbers>

#include "twofold/error.hpp"

namespace twofold {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// y - sqrt(y^2 + w) for w >= 0 without cancellation when y > 0.
double shifted_root_difference(double y, double w) {
  const double root = std::sqrt(y * y + w);
  return y > 0.0 ? -w / (y + root) : y - root;
}

}  // namespace

double wrap_two_pi(double angle) {
  double w = std::fmod(angle, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

double tau_left(const TwoFoldParams& p, double x, double y) {
  if (!(x < 0.0)) fail(ErrorCode::DomainError, "tau_left requires x < 0");
  const double w = -2.0 * p.v_minus() / p.v_plus() * x;
  // V-(1 + sqrt(1 - 1/(V-V+))) = V- gamma / V+
  return shifted_root_difference(y, w) / (p.v_minus() * p.gamma() / p.v_plus());
}

double tau_right(double x, double y) {
  if (!(x > 0.0)) fail(ErrorCode::DomainError, "tau_right requires x > 0");
  return shifted_root_difference(y, 2.0 * x);
}

double negative_y_axis_theta(const TwoFoldParams& p) {
  return kTwoPi * std::log((1.0 - 2.0 * p.alpha()) * p.mu()) / std::log(p.mu());
}

PolarPoint to_polar(const TwoFoldParams& p, double x, double y) {
  const double alpha = p.alpha();
  const double scale = p.beta() / alpha;
  if (x == 0.0) {
    if (y == 0.0) return {0.0, 0.0, true};
    if (y > 0.0) return {y, 0.0, false};
    return {(1.0 - 2.0 * alpha) * -y, wrap_two_pi(scale * std::log(1.0 - 2.0 * alpha * p.gamma())),
            false};
  }
  if (x < 0.0) {
    const double root = std::sqrt(y * y - 2.0 * p.v_minus() / p.v_plus() * x);
    const double tau = tau_left(p, x, y);
    const double y0 = y - p.v_minus() * tau;
    return {alpha * y - (alpha - 1.0) * root, wrap_two_pi(scale * std::log1p(alpha * tau / y0)), false};
  }
  const double root = std::sqrt(y * y + 2.0 * x);
  const double tau = tau_right(x, y);
  const double y0 = y - tau;
  return {alpha * y - (alpha - 1.0) * root,
          wrap_two_pi(scale * std::log1p(alpha * tau / y0) + kTwoPi), false};
}

PolarPoint polar_flow_from_singularity(const TwoFoldParams& p, double C, double t, double t0) {
  if (!(t > t0)) fail(ErrorCode::DomainError, "polar_flow_from_singularity requires t > t0");
  const double elapsed = t - t0;
  return {p.alpha() * elapsed, wrap_two_pi(p.beta() / p.alpha() * std::log(elapsed) + C), false};
}

}  // namespace twofold
