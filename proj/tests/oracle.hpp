// Reference computations written directly from the model equations, kept
// separate from the library so tests compare two independent derivations.
#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using V3 = std::array<double, 3>;

struct Params {
  double vm = -0.5;
  double vp = -2.5;
};

inline double mu(const Params& p) {
  // eigenvalues of [[-1, 2 vm], [-2 vp, 4 vm vp - 1]]: trace 4 vm vp - 2, det 1
  const double tr = 4.0 * p.vm * p.vp - 2.0;
  return 0.5 * (tr + std::sqrt(tr * tr - 4.0));
}

inline double gamma(const Params& p) {
  // (M - mu I)(1, g) = 0 from the first row
  return (1.0 + mu(p)) / (2.0 * p.vm);
}

inline double lambda_weak(const Params& p) {
  // sliding matrix [[vm, 1], [1, vp]], eigenvalue closer to zero
  const double m = 0.5 * (p.vm + p.vp), d = 0.5 * (p.vm - p.vp);
  return m + std::sqrt(d * d + 1.0);
}

inline double alpha(const Params& p) {
  return 1.0 / (1.0 + (1.0 - 1.0 / p.vm) / std::sqrt(1.0 - 1.0 / (p.vm * p.vp)));
}

inline double beta(const Params& p) { return 2.0 * M_PI * alpha(p) / std::log(mu(p)); }

enum class Terms { None, Linear, Cubic };

// Left field for x <= 0, right for x > 0.
inline V3 field(const Params& p, Terms g, const V3& X, bool right) {
  V3 f = right ? V3{-X[1], 1.0, p.vp} : V3{X[2], p.vm, 1.0};
  if (g == Terms::Linear) {
    f[0] -= X[0];
    f[1] -= X[1];
    f[2] -= X[2];
  } else if (g == Terms::Cubic) {
    f[0] -= X[0] * X[0] * X[0];
    f[1] -= X[1] * X[1] * X[1];
  }
  return f;
}

inline V3 axpy(const V3& X, double h, const V3& k) { return {X[0] + h * k[0], X[1] + h * k[1], X[2] + h * k[2]}; }

inline V3 rk4(const Params& p, Terms g, const V3& X, double h, bool right) {
  const V3 k1 = field(p, g, X, right);
  const V3 k2 = field(p, g, axpy(X, 0.5 * h, k1), right);
  const V3 k3 = field(p, g, axpy(X, 0.5 * h, k2), right);
  const V3 k4 = field(p, g, axpy(X, h, k3), right);
  V3 out{};
  for (int i = 0; i < 3; ++i) out[i] = X[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

struct Crossing {
  double t;
  V3 X;
};

// Fixed-step RK4 on crossing orbits (no sliding), with each switch located by
// bisection on the step fraction.  Returns crossings of {x = 0, y > 0}.
inline std::vector<Crossing> crossings(const Params& p, Terms g, V3 X, double t, double t_end, double h,
                                       std::size_t max_crossings = 1u << 30) {
  std::vector<Crossing> out;
  // start slightly off the surface on the side the flow enters
  bool right = X[0] > 0.0 || (X[0] == 0.0 && field(p, g, X, false)[0] > 0.0 && field(p, g, X, true)[0] > 0.0);
  while (t < t_end && out.size() < max_crossings) {
    const double step = std::min(h, t_end - t);
    V3 next = rk4(p, g, X, step, right);
    const bool switched = right ? next[0] < 0.0 : next[0] > 0.0;
    if (!switched) {
      X = next;
      t += step;
      continue;
    }
    double lo = 0.0, hi = step;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      const V3 trial = rk4(p, g, X, mid, right);
      const bool crossed = right ? trial[0] < 0.0 : trial[0] > 0.0;
      (crossed ? hi : lo) = mid;
    }
    X = rk4(p, g, X, hi, right);
    X[0] = 0.0;
    t += hi;
    right = !right;
    if (X[1] > 0.0) out.push_back({t, X});
  }
  return out;
}

// Reduced Filippov sliding flow on x = 0 in the attracting region, integrated
// until the state is within tol of the two-fold.
inline double sliding_arrival_time(const Params& p, Terms g, double y, double z, double h, double tol) {
  auto rhs = [&](double yy, double zz) {
    const V3 L = field(p, g, {0.0, yy, zz}, false), R = field(p, g, {0.0, yy, zz}, true);
    const double q = L[0] / (L[0] - R[0]);
    return std::array<double, 2>{(1 - q) * L[1] + q * R[1], (1 - q) * L[2] + q * R[2]};
  };
  double t = 0.0;
  while (std::hypot(y, z) > tol) {
    const double hh = std::min(h, 0.05 * std::hypot(y, z));
    const auto k1 = rhs(y, z);
    const auto k2 = rhs(y + 0.5 * hh * k1[0], z + 0.5 * hh * k1[1]);
    const auto k3 = rhs(y + 0.5 * hh * k2[0], z + 0.5 * hh * k2[1]);
    const auto k4 = rhs(y + hh * k3[0], z + hh * k3[1]);
    y += hh / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    z += hh / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    t += hh;
    if (t > 1e3) return NAN;
  }
  return t;
}

}  // namespace oracle
