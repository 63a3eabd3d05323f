#include "twofold/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "twofold/error.hpp"
#include "twofold/normalform.hpp"

namespace twofold {

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorCode::InvalidArgument, "integrator dt must be > 0");
  if (!(event_tol > 0.0) || !(event_tol < dt))
    fail(ErrorCode::InvalidArgument, "integrator event_tol must satisfy 0 < event_tol < dt");
  if (!(twofold_tol > 0.0)) fail(ErrorCode::InvalidArgument, "integrator twofold_tol must be > 0");
  if (max_steps == 0) fail(ErrorCode::InvalidArgument, "integrator max_steps must be > 0");
  if (chatter_guard && !(*chatter_guard > 0.0))
    fail(ErrorCode::InvalidArgument, "integrator chatter_guard must be > 0");
  if (!(relative_step > 0.0)) fail(ErrorCode::InvalidArgument, "integrator relative_step must be > 0");
}

const char* to_string(EventKind k) noexcept {
  switch (k) {
    case EventKind::CrossingPosY: return "crossing_pos_y";
    case EventKind::CrossingNegY: return "crossing_neg_y";
    case EventKind::SlidingEntry: return "sliding_entry";
    case EventKind::SlidingExit: return "sliding_exit";
    case EventKind::TwoFoldReached: return "twofold_reached";
  }
  return "?";
}

const Event* Trajectory::last_crossing_pos_y(double T) const noexcept {
  const Event* best = nullptr;
  for (const auto& e : events) {
    if (e.t > T) break;
    if (e.kind == EventKind::CrossingPosY) best = &e;
  }
  return best;
}

std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) noexcept {
  // splitmix64 finaliser applied to a counter offset by the master seed
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  return mix(mix(master) ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
}

namespace {

enum class Mode { Left, Right, Sliding };

Side mode_side(Mode m) { return m == Mode::Right ? Side::Right : Side::Left; }

State3 rk4_step(const FieldSpec& spec, Side side, const State3& X, double t, double h) {
  const Vec3 k1 = eval_field(spec, side, X, t);
  const Vec3 k2 = eval_field(spec, side, X + (0.5 * h) * k1, t + 0.5 * h);
  const Vec3 k3 = eval_field(spec, side, X + (0.5 * h) * k2, t + 0.5 * h);
  const Vec3 k4 = eval_field(spec, side, X + h * k3, t + h);
  return X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Filippov combination without the sliding-region check, used inside RK
// stages where q may stray slightly outside (0, 1).
struct Combination {
  Vec3 v;  // (0, ydot, zdot)
  double q;
  bool degenerate;
};

Combination combination(const FieldSpec& spec, const State3& X, double t) {
  const Vec3 fl = eval_field(spec, Side::Left, X, t);
  const Vec3 fr = eval_field(spec, Side::Right, X, t);
  const double denom = fl.x - fr.x;
  if (denom == 0.0) return {{}, 0.0, true};
  const double q = fl.x / denom;
  return {{0.0, (1.0 - q) * fl.y + q * fr.y, (1.0 - q) * fl.z + q * fr.z}, q, false};
}

State3 sliding_rk4_step(const FieldSpec& spec, const State3& X, double t, double h) {
  const Vec3 k1 = combination(spec, X, t).v;
  const Vec3 k2 = combination(spec, X + (0.5 * h) * k1, t + 0.5 * h).v;
  const Vec3 k3 = combination(spec, X + (0.5 * h) * k2, t + 0.5 * h).v;
  const Vec3 k4 = combination(spec, X + h * k3, t + h).v;
  State3 out = X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  out.x = 0.0;
  return out;
}

// Distance to the two-fold measured within the surface.
double twofold_distance(const FieldSpec& spec, const State3& X, double t) {
  return spec.is_normal_form() ? std::hypot(X.y, X.z) : std::hypot(X.y, t);
}

// Motion selected at a surface point from the two normal components.  Points
// of the repelling region leave into x < 0 (viable continuation).
Mode surface_mode(double fl, double fr) {
  if (fl > 0.0 && fr < 0.0) return Mode::Sliding;
  if (fl < 0.0 && fr > 0.0) return Mode::Left;
  if (fl >= 0.0 && fr >= 0.0) return Mode::Right;
  return Mode::Left;
}

class DeterministicRun {
 public:
  DeterministicRun(const FieldSpec& spec, const IntegratorConfig& cfg, double t_end)
      : spec_(spec), cfg_(cfg), t_end_(t_end) {}

  Trajectory run(State3 X, double t) {
    traj_.samples.push_back({t, X});
    Mode mode;
    if (on_surface(X)) {
      X.x = 0.0;
      if (twofold_distance(spec_, X, t) < cfg_.twofold_tol && candidate_twofold(X, t)) {
        traj_.events.push_back({EventKind::TwoFoldReached, t, X});
        return std::move(traj_);
      }
      mode = surface_mode(eval_field(spec_, Side::Left, X, t).x, eval_field(spec_, Side::Right, X, t).x);
      if (mode == Mode::Sliding) traj_.events.push_back({EventKind::SlidingEntry, t, X});
    } else {
      mode = X.x < 0.0 ? Mode::Left : Mode::Right;
    }

    std::uint64_t steps = 0;
    std::uint32_t since_sample = 0;
    bool done = false;
    while (!done && t < t_end_) {
      if (++steps > cfg_.max_steps) {
        std::ostringstream os;
        os << "integrate_deterministic exceeded " << cfg_.max_steps << " steps at t = " << t;
        fail(ErrorCode::MaxStepsExceeded, os.str());
      }
      if (mode == Mode::Sliding)
        done = sliding_step(X, t, mode);
      else
        done = side_step(X, t, mode);
      if (!is_finite(X)) {
        std::ostringstream os;
        os << "integrate_deterministic produced a non-finite state at t = " << t;
        fail(ErrorCode::NonFiniteState, os.str());
      }
      if (cfg_.sample_stride != 0 && ++since_sample >= cfg_.sample_stride) {
        traj_.samples.push_back({t, X});
        since_sample = 0;
      }
    }
    if (traj_.samples.back().t != t) traj_.samples.push_back({t, X});
    return std::move(traj_);
  }

 private:
  bool candidate_twofold(const State3& X, double t) const {
    const double fl = eval_field(spec_, Side::Left, X, t).x;
    const double fr = eval_field(spec_, Side::Right, X, t).x;
    return surface_mode(fl, fr) == Mode::Sliding || (fl == 0.0 && fr == 0.0);
  }

  double step_cap(const State3& X) const {
    double h = cfg_.dt;
    if (spec_.is_normal_form()) {
      const double r = norm(X);
      if (r > 0.0) h = std::min(h, cfg_.relative_step * r);
    }
    return h;
  }

  // Returns true when the requested number of CrossingPosY events is reached.
  bool side_step(State3& X, double& t, Mode& mode) {
    const Side side = mode_side(mode);
    const double h = std::min(step_cap(X), t_end_ - t);
    const State3 X1 = rk4_step(spec_, side, X, t, h);
    auto crossed = [side](const State3& Y) { return side == Side::Left ? Y.x > 0.0 : Y.x < 0.0; };
    if (!crossed(X1)) {
      X = X1;
      t += h;
      return false;
    }

    double lo = 0.0, hi = h;
    State3 Xhi = X1;
    for (int it = 0; it < 400; ++it) {
      if (hi - lo <= cfg_.event_tol && std::abs(Xhi.x) <= cfg_.event_tol) break;
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const State3 Xm = rk4_step(spec_, side, X, t, mid);
      if (crossed(Xm)) {
        hi = mid;
        Xhi = Xm;
      } else {
        lo = mid;
      }
    }
    const State3 located = Xhi;
    t += hi;
    X = located;
    X.x = 0.0;

    const double fl = eval_field(spec_, Side::Left, X, t).x;
    const double fr = eval_field(spec_, Side::Right, X, t).x;
    Mode next = surface_mode(fl, fr);
    if (next == Mode::Sliding) {
      traj_.events.push_back({EventKind::SlidingEntry, t, located});
    } else if (next != mode) {
      const bool pos = X.y > 0.0;
      traj_.events.push_back({pos ? EventKind::CrossingPosY : EventKind::CrossingNegY, t, located});
      if (pos && cfg_.stop_after_pos_y != 0 && ++pos_y_count_ >= cfg_.stop_after_pos_y) {
        mode = next;
        return true;
      }
    }
    mode = next;
    return false;
  }

  // Returns true when the two-fold has been reached.
  bool sliding_step(State3& X, double& t, Mode& mode) {
    const Combination c0 = combination(spec_, X, t);
    const double rho = twofold_distance(spec_, X, t);
    if (c0.degenerate || rho < cfg_.twofold_tol) {
      traj_.events.push_back({EventKind::TwoFoldReached, t, X});
      return true;
    }
    const double speed = std::hypot(c0.v.y, c0.v.z);
    double h = std::min(cfg_.dt, t_end_ - t);
    if (speed > 0.0) h = std::min(h, 0.05 * rho / speed);

    auto inside = [](const Combination& c) { return !c.degenerate && c.q > 0.0 && c.q < 1.0; };
    const State3 X1 = sliding_rk4_step(spec_, X, t, h);
    const Combination c1 = combination(spec_, X1, t + h);
    if (inside(c1)) {
      X = X1;
      t += h;
      if (twofold_distance(spec_, X, t) < cfg_.twofold_tol) {
        traj_.events.push_back({EventKind::TwoFoldReached, t, X});
        return true;
      }
      return false;
    }

    double lo = 0.0, hi = h;
    State3 Xhi = X1;
    Combination chi = c1;
    for (int it = 0; it < 400; ++it) {
      if (hi - lo <= cfg_.event_tol) break;
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const State3 Xm = sliding_rk4_step(spec_, X, t, mid);
      const Combination cm = combination(spec_, Xm, t + mid);
      if (inside(cm)) {
        lo = mid;
      } else {
        hi = mid;
        Xhi = Xm;
        chi = cm;
      }
    }
    t += hi;
    X = Xhi;
    if (chi.degenerate) {
      traj_.events.push_back({EventKind::TwoFoldReached, t, X});
      return true;
    }
    traj_.events.push_back({EventKind::SlidingExit, t, X});
    mode = chi.q <= 0.0 ? Mode::Left : Mode::Right;
    return false;
  }

  const FieldSpec& spec_;
  const IntegratorConfig& cfg_;
  double t_end_;
  std::uint32_t pos_y_count_ = 0;
  Trajectory traj_;
};

void check_interval(double t0, double t_end) {
  if (!std::isfinite(t0) || !std::isfinite(t_end) || !(t_end > t0))
    fail(ErrorCode::InvalidArgument, "integration interval requires t_end > t0");
}

}  // namespace

Trajectory integrate_deterministic(const FieldSpec& spec, const State3& X0, double t0, double t_end,
                                   const IntegratorConfig& cfg) {
  cfg.validate();
  check_interval(t0, t_end);
  if (!is_finite(X0)) fail(ErrorCode::NonFiniteState, "initial state is not finite");
  return DeterministicRun(spec, cfg, t_end).run(X0, t0);
}

std::optional<RestartPoint> two_fold_continuation(const FieldSpec& spec, double t_arrival,
                                                  const ContinuationPolicy& policy) {
  if (std::holds_alternative<StopAtTwoFold>(policy)) return std::nullopt;
  const auto& psi = std::get<ViablePsi>(policy);
  if (!(psi.a > 0.0)) fail(ErrorCode::InvalidArgument, "ViablePsi requires a > 0");
  const double offset = psi.offset.value_or(psi.a);
  if (!(offset > 0.0)) fail(ErrorCode::InvalidArgument, "ViablePsi offset must be > 0");
  const PsiOrbit orbit(spec.params(), psi.a);
  return RestartPoint{psi_orbit_eval(orbit, offset).X, t_arrival + offset};
}

Trajectory integrate_with_continuation(const FieldSpec& spec, const State3& X0, double t0,
                                       double t_end, const IntegratorConfig& cfg,
                                       const ContinuationPolicy& policy) {
  constexpr int kMaxRestarts = 64;
  Trajectory out = integrate_deterministic(spec, X0, t0, t_end, cfg);
  for (int restarts = 0; restarts < kMaxRestarts && out.reached_twofold(); ++restarts) {
    const auto restart = two_fold_continuation(spec, out.events.back().t, policy);
    if (!restart || !(restart->t < t_end)) break;
    Trajectory part = integrate_deterministic(spec, restart->X, restart->t, t_end, cfg);
    out.samples.insert(out.samples.end(), part.samples.begin(), part.samples.end());
    out.events.insert(out.events.end(), part.events.begin(), part.events.end());
  }
  return out;
}

namespace {

template <class Drift>
Trajectory run_sde(const Drift& drift, const State3& X0, double t0, double t_end,
                   const IntegratorConfig& cfg, const NoiseSpec& noise) {
  const auto& D = noise.D;
  const double row0 = std::sqrt(D[0][0] * D[0][0] + D[0][1] * D[0][1] + D[0][2] * D[0][2]);
  const double noise_scale = noise.epsilon * std::sqrt(cfg.dt) * row0;

  const double span = t_end - t0;
  const auto n_steps = static_cast<std::uint64_t>(std::ceil(span / cfg.dt - 1e-9));
  if (n_steps > cfg.max_steps) fail(ErrorCode::MaxStepsExceeded, "integrate_sde: interval needs more than max_steps steps");

  std::mt19937_64 engine(noise.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Trajectory traj;
  if (cfg.sample_stride != 0) traj.samples.reserve(n_steps / cfg.sample_stride + 2);
  traj.samples.push_back({t0, X0});

  State3 X = X0;
  double t = t0;
  double excursion = std::abs(X0.x);
  std::uint32_t since_sample = 0;
  for (std::uint64_t k = 0; k < n_steps; ++k) {
    const double t_next = k + 1 == n_steps ? t_end : t0 + static_cast<double>(k + 1) * cfg.dt;
    const double h = t_next - t;
    const Side side = X.x <= 0.0 ? Side::Left : Side::Right;
    const Vec3 F = drift(side, X, t);
    const double xi0 = normal(engine), xi1 = normal(engine), xi2 = normal(engine);
    const double amp = noise.epsilon * std::sqrt(h);
    State3 Xn{X.x + h * F.x + amp * (D[0][0] * xi0 + D[0][1] * xi1 + D[0][2] * xi2),
              X.y + h * F.y + amp * (D[1][0] * xi0 + D[1][1] * xi1 + D[1][2] * xi2),
              X.z + h * F.z + amp * (D[2][0] * xi0 + D[2][1] * xi1 + D[2][2] * xi2)};
    if (!is_finite(Xn)) {
      std::ostringstream os;
      os << "integrate_sde produced a non-finite state at t = " << t_next;
      fail(ErrorCode::NonFiniteState, os.str());
    }
    if ((X.x <= 0.0) != (Xn.x <= 0.0)) {
      const double guard = cfg.chatter_guard.value_or(3.0 * (noise_scale + h * std::abs(F.x)));
      if (excursion > guard) {
        const double frac = X.x / (X.x - Xn.x);
        const State3 Xc = X + frac * (Xn - X);
        traj.events.push_back(
            {Xc.y > 0.0 ? EventKind::CrossingPosY : EventKind::CrossingNegY, t + frac * h, Xc});
        excursion = std::abs(Xn.x);
      } else {
        excursion = std::max(excursion, std::abs(Xn.x));
      }
    } else {
      excursion = std::max(excursion, std::abs(Xn.x));
    }
    X = Xn;
    t = t_next;
    if (cfg.sample_stride != 0 && ++since_sample >= cfg.sample_stride) {
      traj.samples.push_back({t, X});
      since_sample = 0;
    }
  }
  if (traj.samples.back().t != t) traj.samples.push_back({t, X});
  return traj;
}

}  // namespace

Trajectory integrate_sde(const FieldSpec& spec, const State3& X0, double t0, double t_end,
                         const IntegratorConfig& cfg, const NoiseSpec& noise) {
  cfg.validate();
  check_interval(t0, t_end);
  if (!(noise.epsilon >= 0.0) || !std::isfinite(noise.epsilon))
    fail(ErrorCode::InvalidArgument, "noise epsilon must be >= 0");
  if (!is_finite(X0)) fail(ErrorCode::NonFiniteState, "initial state is not finite");

  auto drift = [&spec](Side side, const State3& X, double t) { return eval_field(spec, side, X, t); };
  return run_sde(drift, X0, t0, t_end, cfg, noise);
}

}  // namespace twofold
