#pragma once

#include "twofold/core.hpp"

namespace twofold {

// Flow-adapted polar coordinates about the two-fold.  On the unstable cone the
// unperturbed dynamics become rdot = alpha, thetadot = beta / r.
struct PolarPoint {
  double r = 0.0;
  double theta = 0.0;       // in [0, 2pi)
  bool degenerate = false;  // r = 0 at the two-fold, theta carried as 0
};

// Reduces to [0, 2pi).
double wrap_two_pi(double angle);

// Time from zeta forward to (x, y) on the left sheet.  Requires x < 0.
double tau_left(const TwoFoldParams& params, double x, double y);
// Time from zeta to (x, y) on the right sheet (negative).  Requires x > 0.
double tau_right(double x, double y);

PolarPoint to_polar(const TwoFoldParams& params, double x, double y);

// Angle at which the negative y-axis sits: 2pi ln((1 - 2 alpha) mu) / ln mu.
double negative_y_axis_theta(const TwoFoldParams& params);

// Closed-form solution of the polar ODE leaving r = 0 at t0 with phase
// constant C.  Requires t > t0.
PolarPoint polar_flow_from_singularity(const TwoFoldParams& params, double C, double t, double t0);

}  // namespace twofold
