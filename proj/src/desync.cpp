#include "twofold/desync.hpp"

#include <cmath>
#include <complex>

#include "parallel.hpp"
#include "twofold/error.hpp"
#include "twofold/polar.hpp"

namespace twofold {

PlanarState hopf_field(const PlanarState& s) noexcept {
  const double r2 = s.x * s.x + s.y * s.y;
  return {s.x - s.y - s.x * r2, s.x + s.y - s.y * r2};
}

PlanarState controlled_field(double t, const PlanarState& s, const ControlParams& p) noexcept {
  PlanarState v = hopf_field(s);
  if (p.t1 < t && t < p.t2) {
    if (s.x <= 0.0) {
      v.x += p.a1 * t;
      v.y += p.a2;
    } else {
      v.x += p.a3 * t;
      v.y += p.a4;
    }
  }
  return v;
}

TwoFoldConditionReport verify_twofold_conditions(const ControlParams& p) noexcept {
  return {p.a2 < p.a1, p.a3 < p.a4, p.a1 != p.a3, p.a1 < p.a3, p.t1 < p.t2};
}

void DesyncConfig::validate() const {
  if (n_osc == 0) fail(ErrorCode::InvalidArgument, "desync needs n_osc >= 1");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) fail(ErrorCode::InvalidArgument, "desync epsilon must be >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorCode::InvalidArgument, "desync dt must be > 0");
  if (!std::isfinite(X0.x) || !std::isfinite(X0.y)) fail(ErrorCode::InvalidArgument, "desync X0 must be finite");
  if (!(t_start < t_end) || !(t_start <= control.t1) || !(control.t1 <= control.t2) || !(control.t2 <= t_end))
    fail(ErrorCode::InvalidArgument, "desync requires t_start <= t1 <= t2 <= t_end and t_start < t_end");
}

double circular_variance(const std::vector<double>& phases) {
  if (phases.empty()) fail(ErrorCode::InvalidArgument, "circular_variance needs at least one phase");
  std::complex<double> sum{0.0, 0.0};
  for (double p : phases) sum += std::polar(1.0, p);
  return 1.0 - std::abs(sum) / static_cast<double>(phases.size());
}

DesyncResult desync_experiment(const DesyncConfig& cfg) {
  cfg.validate();
  const FieldSpec spec = FieldSpec::controlled_hopf(cfg.control);
  IntegratorConfig icfg;
  icfg.dt = cfg.dt;
  icfg.event_tol = std::min(icfg.event_tol, 0.5 * cfg.dt);
  icfg.sample_stride = cfg.sample_stride;
  icfg.max_steps = std::max<std::uint64_t>(icfg.max_steps,
                                           static_cast<std::uint64_t>((cfg.t_end - cfg.t_start) / cfg.dt) + 2);
  NoiseSpec base;
  base.epsilon = cfg.epsilon;
  base.D = {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 0.0}}};

  DesyncResult out;
  out.phase_before.resize(cfg.n_osc);
  out.phase_after.resize(cfg.n_osc);
  out.paths.resize(cfg.n_osc);
  const State3 start{cfg.X0.x, cfg.X0.y, cfg.t_start};
  detail::parallel_for(cfg.n_osc, cfg.threads, [&](std::size_t i) {
    NoiseSpec noise = base;
    noise.seed = derive_stream_seed(cfg.seed, i);
    Trajectory tr = integrate_sde(spec, start, cfg.t_start, cfg.t_end, icfg, noise);
    const State3& last = tr.samples.back().X;
    out.phase_before[i] = wrap_two_pi(std::atan2(cfg.X0.y, cfg.X0.x));
    out.phase_after[i] = wrap_two_pi(std::atan2(last.y, last.x));
    if (cfg.sample_stride != 0) out.paths[i] = std::move(tr.samples);
  });
  out.circular_variance_before = circular_variance(out.phase_before);
  out.circular_variance_after = circular_variance(out.phase_after);
  return out;
}

}  // namespace twofold
