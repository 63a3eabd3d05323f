#include "twofold/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "parallel.hpp"

namespace twofold {

void EnsembleConfig::validate() const {
  if (n_samples == 0) fail(ErrorCode::InvalidArgument, "ensemble needs n_samples >= 1");
  if (!std::isfinite(t0) || !std::isfinite(T) || !(T > t0))
    fail(ErrorCode::InvalidArgument, "ensemble needs T > t0");
  if (!is_finite(X0)) fail(ErrorCode::InvalidArgument, "ensemble X0 must be finite");
  if (!(noise.epsilon >= 0.0) || !std::isfinite(noise.epsilon))
    fail(ErrorCode::InvalidArgument, "noise epsilon must be >= 0");
  integrator.validate();
}

double EnsembleResult::failure_fraction() const noexcept {
  const double total = static_cast<double>(samples.size() + failures.size());
  return total == 0.0 ? 0.0 : static_cast<double>(failures.size()) / total;
}

std::vector<double> EnsembleResult::phases() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.phi_T);
  return out;
}

EnsembleResult run_ensemble(const FieldSpec& spec, const EnsembleConfig& cfg, double tau) {
  cfg.validate();
  if (!(tau > 0.0)) fail(ErrorCode::InvalidArgument, "run_ensemble requires tau > 0");
  IntegratorConfig icfg = cfg.integrator;
  icfg.sample_stride = 0;
  icfg.stop_after_pos_y = 0;
  const bool deterministic = cfg.noise.epsilon == 0.0 && cfg.continuation.has_value();

  struct Slot {
    bool ok = false;
    PhaseSample sample{};
    SampleFailure failure{};
  };
  std::vector<Slot> slots(cfg.n_samples);
  detail::parallel_for(cfg.n_samples, cfg.threads, [&](std::size_t i) {
    Slot& slot = slots[i];
    try {
      Trajectory tr;
      if (deterministic) {
        tr = integrate_with_continuation(spec, cfg.X0, cfg.t0, cfg.T, icfg, *cfg.continuation);
      } else {
        NoiseSpec noise = cfg.noise;
        noise.seed = derive_stream_seed(cfg.noise.seed, i);
        tr = integrate_sde(spec, cfg.X0, cfg.t0, cfg.T, icfg, noise);
      }
      const double phi = phase_phi_T(tr, cfg.T, tau);
      slot.sample = {i, phi, tr.last_crossing_pos_y(cfg.T)->t};
      slot.ok = true;
    } catch (const Error& e) {
      slot.failure = {i, e.code(), e.what()};
    }
  });

  EnsembleResult result;
  for (auto& s : slots) {
    if (s.ok)
      result.samples.push_back(s.sample);
    else
      result.failures.push_back(std::move(s.failure));
  }
  return result;
}

std::vector<std::uint64_t> histogram(const std::vector<double>& phases, std::uint32_t n_bins) {
  if (n_bins < 2) fail(ErrorCode::InvalidArgument, "histogram needs n_bins >= 2");
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  std::vector<std::uint64_t> counts(n_bins, 0);
  for (double phi : phases) {
    if (!(phi >= 0.0 && phi < kTwoPi)) fail(ErrorCode::InvalidArgument, "histogram phases must lie in [0, 2pi)");
    auto bin = static_cast<std::size_t>(phi / kTwoPi * n_bins);
    ++counts[std::min<std::size_t>(bin, n_bins - 1)];
  }
  return counts;
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) fail(ErrorCode::InvalidArgument, "ks_distance needs at least one sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = cdf(samples[i]);
    d = std::max({d, std::abs(F - i / n), std::abs((i + 1) / n - F)});
  }
  return std::min(d, 1.0);
}

double ks_distance(const std::vector<double>& samples, const DensityTable& density) {
  return ks_distance(samples, [&density](double x) { return density.cdf(x); });
}

}  // namespace twofold
