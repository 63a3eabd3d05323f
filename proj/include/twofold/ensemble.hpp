#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "twofold/core.hpp"
#include "twofold/error.hpp"
#include "twofold/integrate.hpp"
#include "twofold/phase.hpp"

namespace twofold {

struct EnsembleConfig {
  std::uint64_t n_samples = 2000;
  State3 X0{0.0, 1.0, 1.0};
  double t0 = 0.0;
  double T = 15.0;
  // noise.seed is the master seed; sample i runs on derive_stream_seed(seed, i).
  NoiseSpec noise{};
  IntegratorConfig integrator{};
  // With epsilon = 0 and a policy set, samples use the deterministic
  // integrator continued through the two-fold.
  std::optional<ContinuationPolicy> continuation;
  unsigned threads = 1;

  void validate() const;
};

struct PhaseSample {
  std::uint64_t sample_index;
  double phi_T;
  double s_T;
};

struct SampleFailure {
  std::uint64_t sample_index;
  ErrorCode code;
  std::string message;
};

struct EnsembleResult {
  std::vector<PhaseSample> samples;  // ordered by sample_index
  std::vector<SampleFailure> failures;

  double failure_fraction() const noexcept;
  std::vector<double> phases() const;
};

EnsembleResult run_ensemble(const FieldSpec& spec, const EnsembleConfig& cfg, double tau);

// Counts over n_bins equal half-open bins of [0, 2pi).
std::vector<std::uint64_t> histogram(const std::vector<double>& phases, std::uint32_t n_bins);

// Sup distance between the empirical CDF of `samples` and `cdf`.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);
double ks_distance(const std::vector<double>& samples, const DensityTable& density);

}  // namespace twofold
