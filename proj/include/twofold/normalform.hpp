#pragma once

#include "twofold/core.hpp"

namespace twofold {

struct DerivedConstants {
  double lambda = 0.0;
  double mu = 0.0;
  double gamma = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

DerivedConstants derived_constants(const TwoFoldParams& params);

// Exact solutions of the unperturbed left and right half systems.
State3 flow_left(const TwoFoldParams& params, const State3& X0, double dt);
State3 flow_right(const TwoFoldParams& params, const State3& X0, double dt);

struct ReturnMapResult {
  double y_next = 0.0;
  double z_next = 0.0;
  double elapsed = 0.0;
};

// Slope k of the branch line z = k y separating crossing returns from returns
// into the attracting sliding region.
double return_map_branch_slope(const TwoFoldParams& params);

// Next crossing of {x = 0, y > 0} from (0, y, z), z < 0, following the left
// then right half-flows.  Throws LeavesCrossingRegime when z is not below the
// branch line (the orbit lands in A instead).  The origin maps to itself.
ReturnMapResult return_map(const TwoFoldParams& params, double y, double z);

// Xi(y, z) of the implicit description of the unstable cone.
double lambda_xi(const TwoFoldParams& params, double y, double z);

// x-coordinate of the unstable cone above (y, z) on the requested sheet.
double lambda_surface_x(const TwoFoldParams& params, double y, double z, Side side);

// The viable orbit leaving the two-fold at t = 0 and meeting zeta at t = a.
struct PsiOrbit {
  TwoFoldParams params;
  double a;

  PsiOrbit(const TwoFoldParams& p, double a_);
};

struct PsiSample {
  State3 X;
  // t < 1e-12 a: the point is indistinguishable from the two-fold and X is
  // the origin.
  bool below_resolution = false;
};

PsiSample psi_orbit_eval(const PsiOrbit& orbit, double t);

}  // namespace twofold
