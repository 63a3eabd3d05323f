#pragma once

#include <cstdint>
#include <vector>

#include "twofold/core.hpp"
#include "twofold/integrate.hpp"

namespace twofold {

struct PlanarState {
  double x = 0.0;
  double y = 0.0;
};

// Hopf normal form (x - y - x r^2, x + y - y r^2).
PlanarState hopf_field(const PlanarState& s) noexcept;

// hopf_field plus, for t1 < t < t2, (a1 t, a2) when x <= 0 and (a3 t, a4) when x > 0.
PlanarState controlled_field(double t, const PlanarState& s, const ControlParams& p) noexcept;

struct TwoFoldConditionReport {
  bool left_fold_invisible;   // a2 < a1
  bool right_fold_invisible;  // a3 < a4
  bool generic;               // a1 != a3
  bool sign_condition;        // a1 < a3
  bool window_ordered;        // t1 < t2

  bool all_pass() const noexcept {
    return left_fold_invisible && right_fold_invisible && generic && sign_condition;
  }
};

TwoFoldConditionReport verify_twofold_conditions(const ControlParams& p) noexcept;

struct DesyncConfig {
  ControlParams control{};
  std::uint32_t n_osc = 5;
  double epsilon = 1e-3;
  std::uint64_t seed = 0;
  double t_start = -15.0;
  double t_end = 15.0;
  PlanarState X0{1.0, 0.0};
  double dt = 1e-4;
  // Keep every n-th step of each oscillator path (0 keeps only the endpoints).
  std::uint32_t sample_stride = 0;
  unsigned threads = 1;

  // Requires t_start <= t1 <= t2 <= t_end with t_start < t_end.
  void validate() const;
};

struct DesyncResult {
  std::vector<double> phase_before;  // atan2(y, x) in [0, 2pi) at t_start
  std::vector<double> phase_after;   // at t_end
  double circular_variance_before = 0.0;
  double circular_variance_after = 0.0;
  // Per-oscillator samples with z holding time.
  std::vector<std::vector<Sample>> paths;
};

// 1 - |mean of exp(i phi)|.
double circular_variance(const std::vector<double>& phases);

DesyncResult desync_experiment(const DesyncConfig& cfg);

}  // namespace twofold
