#include "twofold/phase.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "parallel.hpp"
#include "twofold/error.hpp"
#include "twofold/polar.hpp"

namespace twofold {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const Event* first_pos_y(const Trajectory& tr) {
  for (const auto& e : tr.events)
    if (e.kind == EventKind::CrossingPosY) return &e;
  return nullptr;
}

const Event* last_pos_y(const Trajectory& tr) {
  const Event* best = nullptr;
  for (const auto& e : tr.events)
    if (e.kind == EventKind::CrossingPosY) best = &e;
  return best;
}

State3 psi_seed(const TwoFoldParams& p, double a) {
  const double y = p.alpha() * a;
  return {0.0, y, p.gamma() * y};
}

void require_normal_form(const FieldSpec& spec, const char* what) {
  if (!spec.is_normal_form()) fail(ErrorCode::InvalidArgument, std::string(what) + " requires a normal-form field");
}

}  // namespace

PeriodicOrbit find_periodic_orbit(const FieldSpec& spec, const State3& guess, double t0,
                                  const IntegratorConfig& cfg, const OrbitSearchOptions& opts) {
  cfg.validate();
  if (opts.max_iterations == 0 || !(opts.tolerance > 0.0) || !(opts.max_return_time > 0.0))
    fail(ErrorCode::InvalidArgument, "find_periodic_orbit: invalid search options");

  IntegratorConfig hit_cfg = cfg;
  hit_cfg.sample_stride = 0;
  hit_cfg.stop_after_pos_y = 1;
  auto next_hit = [&](const State3& X, double t) {
    const Trajectory tr = integrate_deterministic(spec, X, t, t + opts.max_return_time, hit_cfg);
    const Event* e = first_pos_y(tr);
    if (!e) {
      std::ostringstream os;
      os << "find_periodic_orbit: no return to the section within " << opts.max_return_time
         << " of t = " << t << (tr.reached_twofold() ? " (orbit reached the two-fold)" : "");
      fail(ErrorCode::NoConvergence, os.str());
    }
    return *e;
  };
  const bool planar = !spec.is_normal_form();
  auto gap = [planar](const State3& a, const State3& b) {
    return planar ? std::abs(a.y - b.y) : std::hypot(a.y - b.y, a.z - b.z);
  };

  Event prev = next_hit(guess, t0);
  for (std::uint32_t it = 0; it < opts.max_iterations; ++it) {
    const Event cur = next_hit(prev.X, prev.t);
    if (gap(cur.X, prev.X) < opts.tolerance) {
      PeriodicOrbit orbit;
      orbit.section_point = cur.X;
      orbit.section_time = cur.t;
      orbit.tau = cur.t - prev.t;
      IntegratorConfig sample_cfg = cfg;
      sample_cfg.stop_after_pos_y = 0;
      if (sample_cfg.sample_stride == 0) sample_cfg.sample_stride = 1;
      orbit.samples = integrate_deterministic(spec, cur.X, cur.t, cur.t + orbit.tau, sample_cfg).samples;
      return orbit;
    }
    prev = cur;
  }
  std::ostringstream os;
  os << "find_periodic_orbit: section map did not converge in " << opts.max_iterations << " iterations";
  fail(ErrorCode::NoConvergence, os.str());
}

double phase_phi_T(const Trajectory& traj, double T, double tau) {
  if (!(tau > 0.0)) fail(ErrorCode::InvalidArgument, "phase_phi_T requires tau > 0");
  const Event* e = traj.last_crossing_pos_y(T);
  if (!e) {
    std::ostringstream os;
    os << "no crossing of {x = 0, y > 0} at or before T = " << T;
    fail(ErrorCode::NoCrossingBefore, os.str());
  }
  return wrap_two_pi(kTwoPi * (T - e->t) / tau);
}

double asymptotic_phase(const FieldSpec& spec, const PeriodicOrbit& orbit, const State3& X,
                        double t, const IntegratorConfig& cfg, std::uint32_t settle_periods) {
  if (settle_periods == 0) fail(ErrorCode::InvalidArgument, "asymptotic_phase needs settle_periods >= 1");
  IntegratorConfig run_cfg = cfg;
  run_cfg.sample_stride = 0;
  run_cfg.stop_after_pos_y = 0;
  const double horizon = t + settle_periods * orbit.tau;
  const Trajectory tr = integrate_deterministic(spec, X, t, horizon, run_cfg);
  if (tr.reached_twofold()) fail(ErrorCode::NoConvergence, "asymptotic_phase: orbit ends at the two-fold");
  return phase_phi_T(tr, horizon, orbit.tau);
}

MonotoneInterpolant::MonotoneInterpolant(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) fail(ErrorCode::InvalidArgument, "interpolant needs >= 2 matching knots");
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = x_[k + 1] - x_[k];
    if (!(h[k] > 0.0)) fail(ErrorCode::InvalidArgument, "interpolant abscissae must increase strictly");
    delta[k] = (y_[k + 1] - y_[k]) / h[k];
    if (!(delta[k] > 0.0)) linear_ = true;
  }
  slope_.assign(n, 0.0);
  if (linear_ || n == 2) {
    linear_ = true;
    for (std::size_t k = 0; k + 1 < n; ++k) slope_[k] = delta[k];
    slope_[n - 1] = delta[n - 2];
    return;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double w1 = 2.0 * h[k] + h[k - 1];
    const double w2 = h[k] + 2.0 * h[k - 1];
    slope_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
  }
  auto edge = [](double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m <= 0.0) return 0.0;
    if (std::abs(m) > 3.0 * std::abs(d0)) m = 3.0 * d0;
    return m;
  };
  slope_[0] = edge(h[0], h[1], delta[0], delta[1]);
  slope_[n - 1] = edge(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

std::size_t MonotoneInterpolant::segment(double x) const {
  if (!(x >= x_.front() && x <= x_.back())) {
    std::ostringstream os;
    os << "interpolant evaluated at " << x << " outside [" << x_.front() << ", " << x_.back() << "]";
    fail(ErrorCode::DomainError, os.str());
  }
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t k = static_cast<std::size_t>(it - x_.begin());
  return k == 0 ? 0 : std::min(k - 1, x_.size() - 2);
}

double MonotoneInterpolant::operator()(double x) const {
  const std::size_t k = segment(x);
  const double h = x_[k + 1] - x_[k];
  if (linear_) return y_[k] + slope_[k] * (x - x_[k]);
  const double s = (x - x_[k]) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y_[k] + (s3 - 2 * s2 + s) * h * slope_[k] +
         (-2 * s3 + 3 * s2) * y_[k + 1] + (s3 - s2) * h * slope_[k + 1];
}

double MonotoneInterpolant::derivative(double x) const {
  const std::size_t k = segment(x);
  if (linear_) return slope_[k];
  const double h = x_[k + 1] - x_[k];
  const double s = (x - x_[k]) / h;
  const double s2 = s * s;
  return (6 * s2 - 6 * s) / h * y_[k] + (3 * s2 - 4 * s + 1) * slope_[k] +
         (-6 * s2 + 6 * s) / h * y_[k + 1] + (3 * s2 - 2 * s) * slope_[k + 1];
}

double MonotoneInterpolant::inverse(double v, double tol) const {
  if (!(v >= y_.front() && v <= y_.back())) {
    std::ostringstream os;
    os << "interpolant inverse of " << v << " outside [" << y_.front() << ", " << y_.back() << "]";
    fail(ErrorCode::DomainError, os.str());
  }
  const auto it = std::upper_bound(y_.begin(), y_.end(), v);
  std::size_t k = static_cast<std::size_t>(it - y_.begin());
  k = k == 0 ? 0 : std::min(k - 1, y_.size() - 2);
  double lo = x_[k], hi = x_[k + 1];
  for (int iter = 0; iter < 200 && hi - lo > tol * std::abs(hi); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if ((*this)(mid) < v)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double ReturnTimeTable::inverse_iterate(double v, std::uint32_t n) const {
  for (std::uint32_t k = 0; k < n; ++k) {
    if (v < f.y_min()) {
      std::ostringstream os;
      os << "f^-" << (k + 1) << " leaves the tabulated range (below f(" << f.x_min()
         << ")); use a smaller a_min or a lower depth";
      fail(ErrorCode::DepthTooLarge, os.str());
    }
    if (v > f.y_max()) {
      std::ostringstream os;
      os << "time " << v << " beyond the tabulated range (max " << f.y_max() << "); raise t_max";
      fail(ErrorCode::DomainError, os.str());
    }
    v = f.inverse(v);
  }
  return v;
}

ReturnTimeTable make_return_time_table(std::vector<ReturnTimeKnot> knots) {
  std::sort(knots.begin(), knots.end(), [](const auto& l, const auto& r) { return l.a < r.a; });
  std::vector<ReturnTimeKnot> kept;
  for (const auto& k : knots) {
    if (!(k.f > k.a)) fail(ErrorCode::InvalidArgument, "return-time knots need f(a) > a");
    if (!kept.empty() && k.a <= kept.back().a * (1.0 + 1e-12)) continue;
    kept.push_back(k);
  }
  if (kept.size() < 2) fail(ErrorCode::InvalidArgument, "return-time table needs >= 2 distinct knots");
  std::vector<double> a, f;
  for (const auto& k : kept) {
    a.push_back(k.a);
    f.push_back(k.f);
  }
  ReturnTimeTable table;
  table.knots = std::move(kept);
  table.f = MonotoneInterpolant(std::move(a), std::move(f));
  return table;
}

ReturnTimeTable return_time_table(const FieldSpec& spec, const IntegratorConfig& cfg,
                                  const ReturnTimeOptions& opts) {
  require_normal_form(spec, "return_time_table");
  cfg.validate();
  const TwoFoldParams& p = spec.params();
  if (!(opts.a_min > 0.0) || opts.n_seeds == 0 || !(opts.t_max > p.mu() * opts.a_min))
    fail(ErrorCode::InvalidArgument, "return_time_table: need a_min > 0, n_seeds >= 1, t_max > mu a_min");

  IntegratorConfig run_cfg = cfg;
  run_cfg.sample_stride = 0;
  run_cfg.stop_after_pos_y = 0;
  std::vector<std::vector<ReturnTimeKnot>> per_seed(opts.n_seeds);
  detail::parallel_for(opts.n_seeds, opts.threads, [&](std::size_t i) {
    const double a = opts.a_min * std::pow(p.mu(), static_cast<double>(i) / opts.n_seeds);
    const Trajectory tr = integrate_deterministic(spec, psi_seed(p, a), a, opts.t_max, run_cfg);
    double prev = a;
    for (const auto& e : tr.events) {
      if (e.kind == EventKind::SlidingEntry || e.kind == EventKind::TwoFoldReached) break;
      if (e.kind != EventKind::CrossingPosY) continue;
      per_seed[i].push_back({prev, e.t});
      prev = e.t;
    }
    if (per_seed[i].empty()) {
      std::ostringstream os;
      os << "orbit seeded at a = " << a << " did not return to the section before t = " << opts.t_max;
      fail(ErrorCode::SeedEscaped, os.str());
    }
  });
  std::vector<ReturnTimeKnot> knots;
  for (auto& v : per_seed) knots.insert(knots.end(), v.begin(), v.end());
  return make_return_time_table(std::move(knots));
}

DensityTable::DensityTable(std::vector<double> s, std::vector<double> p) : s_(std::move(s)), p_(std::move(p)) {
  if (s_.size() < 2 || p_.size() != s_.size()) fail(ErrorCode::InvalidArgument, "density table needs >= 2 matching knots");
  for (std::size_t k = 0; k < s_.size(); ++k) {
    if (!(p_[k] >= 0.0) || !std::isfinite(p_[k])) fail(ErrorCode::InvalidArgument, "density values must be finite and >= 0");
    if (k > 0 && !(s_[k] > s_[k - 1])) fail(ErrorCode::InvalidArgument, "density abscissae must increase strictly");
  }
  cum_.assign(s_.size(), 0.0);
  for (std::size_t k = 1; k < s_.size(); ++k)
    cum_[k] = cum_[k - 1] + 0.5 * (p_[k] + p_[k - 1]) * (s_[k] - s_[k - 1]);
}

double DensityTable::density(double x) const {
  if (!(x >= s_.front() && x <= s_.back())) return 0.0;
  auto it = std::upper_bound(s_.begin(), s_.end(), x);
  std::size_t k = std::min(static_cast<std::size_t>(it - s_.begin()), s_.size() - 1);
  if (k == 0) return p_.front();
  --k;
  const double w = (x - s_[k]) / (s_[k + 1] - s_[k]);
  return (1.0 - w) * p_[k] + w * p_[k + 1];
}

double DensityTable::cdf(double x) const {
  if (x <= s_.front()) return 0.0;
  if (x >= s_.back()) return cum_.back();
  auto it = std::upper_bound(s_.begin(), s_.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - s_.begin()) - 1;
  return cum_[k] + 0.5 * (p_[k] + density(x)) * (x - s_[k]);
}

void DensityTable::normalise() {
  const double m = cum_.back();
  if (!(m > 0.0)) fail(ErrorCode::InvalidArgument, "cannot normalise a density of zero mass");
  for (auto& v : p_) v /= m;
  for (auto& v : cum_) v /= m;
}

DensityTable pdf_sT(const ReturnTimeTable& table, double T, double t0, std::uint32_t n, std::uint32_t grid) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "pdf_sT requires depth n >= 1");
  if (grid < 3) fail(ErrorCode::InvalidArgument, "pdf_sT requires grid >= 3");
  const double u = T - t0;
  if (!(u > 0.0)) fail(ErrorCode::InvalidArgument, "pdf_sT requires T > t0");
  const double upper = table.inverse_iterate(u, n);
  const double lower = table.inverse_iterate(upper, 1);
  if (!(lower > 0.0) || !(upper > lower)) fail(ErrorCode::DepthTooLarge, "pdf_sT: seed interval degenerate");

  const MonotoneInterpolant& f = table.f;
  auto slope = [&f](double x) {
    if (!f.linear_fallback()) return f.derivative(x);
    constexpr double h = 1e-6;
    const double lo = std::max(f.x_min(), x - h), hi = std::min(f.x_max(), x + h);
    return (f(hi) - f(lo)) / (hi - lo);
  };

  const double log_width = std::log(upper / lower);
  std::vector<double> s(grid), p(grid);
  for (std::uint32_t i = 0; i < grid; ++i) {
    double x = i + 1 == grid ? upper : lower * std::exp(log_width * i / (grid - 1));
    double density = 1.0 / (log_width * x);
    for (std::uint32_t k = 0; k < n; ++k) {
      density /= slope(x);
      x = k + 1 == n && i + 1 == grid ? u : f(x);
    }
    s[i] = t0 + x;
    p[i] = density;
  }
  DensityTable out(std::move(s), std::move(p));
  out.normalise();
  return out;
}

DensityTable pdf_phase(const DensityTable& p_sT, double T, double tau, std::uint32_t grid) {
  if (!(tau > 0.0)) fail(ErrorCode::InvalidArgument, "pdf_phase requires tau > 0");
  if (grid < 3) fail(ErrorCode::InvalidArgument, "pdf_phase requires grid >= 3");
  std::vector<double> phi(grid), q(grid, 0.0);
  const double jac = tau / kTwoPi;
  for (std::uint32_t j = 0; j + 1 < grid; ++j) {
    phi[j] = kTwoPi * j / (grid - 1);
    // s = T - tau (phi / 2pi + k) for every k that lands in the support
    const double base = T - jac * phi[j];
    const auto k_lo = static_cast<long>(std::floor((base - p_sT.hi()) / tau));
    const auto k_hi = static_cast<long>(std::ceil((base - p_sT.lo()) / tau));
    // support taken as (lo, hi] so a branch landing on both ends counts once
    for (long k = std::max(0L, k_lo); k <= k_hi; ++k) {
      const double s = base - k * tau;
      if (s > p_sT.lo() && s <= p_sT.hi()) q[j] += p_sT.density(s) * jac;
    }
  }
  // 2pi is the same phase as 0
  phi[grid - 1] = kTwoPi;
  q[grid - 1] = q[0];
  DensityTable out(std::move(phi), std::move(q));
  out.normalise();
  return out;
}

double l1_distance(const DensityTable& a, const DensityTable& b, std::uint32_t grid) {
  if (grid < 3) fail(ErrorCode::InvalidArgument, "l1_distance requires grid >= 3");
  const double lo = std::min(a.lo(), b.lo()), hi = std::max(a.hi(), b.hi());
  const double h = (hi - lo) / (grid - 1);
  double sum = 0.0;
  for (std::uint32_t i = 0; i < grid; ++i) {
    const double x = lo + h * i;
    const double w = (i == 0 || i + 1 == grid) ? 0.5 : 1.0;
    sum += w * std::abs(a.density(x) - b.density(x));
  }
  return sum * h;
}

std::vector<Isochron> isochron_mesh(const FieldSpec& spec, const PeriodicOrbit& orbit,
                                    const std::vector<double>& phases, const IntegratorConfig& cfg,
                                    const IsochronOptions& opts) {
  require_normal_form(spec, "isochron_mesh");
  cfg.validate();
  if (opts.n_orbits < 10) fail(ErrorCode::InvalidArgument, "isochron_mesh requires n_orbits >= 10");
  if (!(orbit.tau > 0.0)) fail(ErrorCode::InvalidArgument, "isochron_mesh requires a periodic orbit");
  const TwoFoldParams& p = spec.params();
  if (!(opts.a_min > 0.0) || !(opts.t_max > p.mu() * opts.a_min + orbit.tau))
    fail(ErrorCode::InvalidArgument, "isochron_mesh: need a_min > 0 and t_max beyond one period");
  std::vector<double> targets;
  for (double ph : phases) {
    if (!std::isfinite(ph)) fail(ErrorCode::InvalidArgument, "isochron phases must be finite");
    targets.push_back(wrap_two_pi(ph));
  }

  IntegratorConfig run_cfg = cfg;
  run_cfg.sample_stride = std::max<std::uint32_t>(1, opts.sample_stride);
  run_cfg.stop_after_pos_y = 0;
  IntegratorConfig locate_cfg = cfg;
  locate_cfg.sample_stride = 0;
  locate_cfg.stop_after_pos_y = 0;
  const double tau = orbit.tau;

  // per_orbit[j][phase index]
  std::vector<std::vector<std::vector<IsochronPoint>>> per_orbit(opts.n_orbits);
  detail::parallel_for(opts.n_orbits, opts.threads, [&](std::size_t j) {
    const double a = opts.a_min * std::pow(p.mu(), static_cast<double>(j) / opts.n_orbits);
    const Trajectory tr = integrate_deterministic(spec, psi_seed(p, a), a, opts.t_max, run_cfg);
    const Event* ref = last_pos_y(tr);
    if (!ref || tr.reached_twofold()) {
      std::ostringstream os;
      os << "isochron orbit seeded at a = " << a << " never settled onto the periodic orbit";
      fail(ErrorCode::SeedEscaped, os.str());
    }
    const auto& samples = tr.samples;
    auto state_at = [&](double t) {
      auto it = std::upper_bound(samples.begin(), samples.end(), t,
                                 [](double v, const Sample& s) { return v < s.t; });
      const Sample& from = *(it - 1);
      if (t == from.t) return from.X;
      return integrate_deterministic(spec, from.X, from.t, t, locate_cfg).samples.back().X;
    };
    const double t_first = std::max(a, opts.t_min);
    auto& out = per_orbit[j];
    out.resize(targets.size());
    for (std::size_t k = 0; k < targets.size(); ++k) {
      double t = ref->t + tau * targets[k] / kTwoPi;
      while (t > samples.back().t) t -= tau;
      for (; t >= t_first; t -= tau) out[k].push_back({state_at(t), t, static_cast<std::uint32_t>(j)});
    }
  });

  std::vector<Isochron> result(targets.size());
  for (std::size_t k = 0; k < targets.size(); ++k) {
    result[k].phase = targets[k];
    for (auto& orb : per_orbit) result[k].points.insert(result[k].points.end(), orb[k].begin(), orb[k].end());
    std::sort(result[k].points.begin(), result[k].points.end(),
              [](const IsochronPoint& l, const IsochronPoint& r) { return l.t < r.t; });
  }
  return result;
}

}  // namespace twofold
