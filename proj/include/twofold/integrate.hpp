#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "twofold/core.hpp"

namespace twofold {

struct IntegratorConfig {
  double dt = 1e-5;
  // Bisection tolerance for event location, in time and in |x|.
  double event_tol = 1e-10;
  // Sliding states closer than this to the two-fold end the integration.
  double twofold_tol = 1e-6;
  std::uint64_t max_steps = 200'000'000;
  // Minimum |x| excursion between recorded SDE crossings.  Unset means
  // 3 (eps sqrt(dt) |D row 0| + dt |xdot|), the noise scale plus the overshoot
  // of one Euler step against the local drift.
  std::optional<double> chatter_guard;
  // Deterministic steps are additionally capped at relative_step times the
  // distance to the two-fold so revolutions near it stay resolved.
  double relative_step = 0.01;
  // Keep every n-th step in Trajectory::samples (0 keeps only the endpoints).
  std::uint32_t sample_stride = 1;
  // Deterministic runs stop at the n-th CrossingPosY event (0 = never).
  std::uint32_t stop_after_pos_y = 0;

  // Throws InvalidArgument on non-positive values or event_tol >= dt.
  void validate() const;
};

enum class EventKind { CrossingPosY, CrossingNegY, SlidingEntry, SlidingExit, TwoFoldReached };

const char* to_string(EventKind k) noexcept;

struct Event {
  EventKind kind;
  double t;
  State3 X;
};

struct Sample {
  double t;
  State3 X;
};

struct Trajectory {
  std::vector<Sample> samples;
  std::vector<Event> events;

  bool reached_twofold() const noexcept {
    return !events.empty() && events.back().kind == EventKind::TwoFoldReached;
  }
  // Latest CrossingPosY event with t <= T, if any.
  const Event* last_crossing_pos_y(double T) const noexcept;
};

struct NoiseSpec {
  double epsilon = 0.0;
  std::array<std::array<double, 3>, 3> D{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
  std::uint64_t seed = 0;
};

// Seed of the independent noise stream used by sample `index` of a run with
// master seed `master`; a pure function of its arguments.
std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) noexcept;

// Hybrid Filippov integration: RK4 on the active side, crossings located by
// bisection, attracting sliding followed on the surface.  Repelling sliding is
// never entered; points of R leave into x < 0.  Stops with a TwoFoldReached
// event when a sliding state comes within twofold_tol of the two-fold.
Trajectory integrate_deterministic(const FieldSpec& spec, const State3& X0, double t0, double t_end,
                                   const IntegratorConfig& cfg);

struct ViablePsi {
  double a;
  // Time after the arrival at which the restart point is taken; unset means a.
  std::optional<double> offset;
};
struct StopAtTwoFold {};
using ContinuationPolicy = std::variant<ViablePsi, StopAtTwoFold>;

struct RestartPoint {
  State3 X;
  double t;
};

// Where to resume after arriving at the two-fold at t_arrival.  ViablePsi
// restarts on psi_a at t_arrival + offset; StopAtTwoFold yields nothing.
std::optional<RestartPoint> two_fold_continuation(const FieldSpec& spec, double t_arrival,
                                                  const ContinuationPolicy& policy);

// integrate_deterministic, resuming through each two-fold arrival according
// to `policy`.
Trajectory integrate_with_continuation(const FieldSpec& spec, const State3& X0, double t0,
                                       double t_end, const IntegratorConfig& cfg,
                                       const ContinuationPolicy& policy);

// Euler-Maruyama with the drift side picked by the sign of x at each step.
Trajectory integrate_sde(const FieldSpec& spec, const State3& X0, double t0, double t_end,
                         const IntegratorConfig& cfg, const NoiseSpec& noise);

}  // namespace twofold
