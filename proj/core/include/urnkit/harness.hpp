#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "urnkit/policy.hpp"
#include "urnkit/spectral.hpp"

namespace urnkit {

// A reproducible ensemble experiment. Replication r runs on a generator
// seeded with avalanche_mix64(master_seed ^ r); aggregation is performed
// in replication order, so results are independent of thread scheduling.
struct ExperimentConfig {
  PolicyPtr policy;
  RowVec y0;
  RowVec fallback_p;
  std::int64_t n_max = 0;
  std::vector<std::int64_t> checkpoints;  // strictly increasing, last == n_max
  std::int64_t replications = 1;
  std::uint64_t master_seed = 0;
  SpectralProfile profile;
  int threads = 0;  // 0 = hardware concurrency
};

// Geometric checkpoint schedule with ratio 10^(1/4) starting at `start`,
// deduplicated after rounding, last entry forced to n_max.
std::vector<std::int64_t> geometric_checkpoints(std::int64_t n_max, std::int64_t start = 100);

struct CheckpointStats {
  std::int64_t n = 0;
  RowVec mean_y_over_n, median_y_over_n;
  RowVec mean_n_over_n, median_n_over_n;
  double mean_dist_scaled = 0.0;   // mean_r dist(Y/n, lambda_h * S_H)
  double mean_dist_simplex = 0.0;  // mean_r dist(Y+/sum Y+, S_H)
  double q05_dist_scaled = 0.0, q50_dist_scaled = 0.0, q95_dist_scaled = 0.0;
  double q05_dist_simplex = 0.0, q50_dist_simplex = 0.0, q95_dist_simplex = 0.0;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double expected_slope = 0.0;
  double residual_rms = 0.0;
  bool degenerate = false;  // some checkpoint distances hit zero
};

struct EnsembleSummary {
  std::vector<std::int64_t> checkpoint_ns;
  std::vector<CheckpointStats> per_checkpoint;
  std::vector<RowVec> terminal_y_over_n;            // per surviving replication
  std::vector<RowVec> varpi;                        // per replication, when nu1 >= 2
  std::optional<RateFit> rate_fit;
  std::vector<std::pair<std::int64_t, std::string>> failures;  // replication -> error
  std::int64_t replications = 0;
};

EnsembleSummary run_ensemble(const ExperimentConfig& config);

// Dominant-class weights at the final checkpoint, one vector of nu1
// entries per replication: varpi_j = (Y u_j) / sum_i (Y u_i).
// Throws NotReducibleError when nu1 == 1.
std::vector<RowVec> varpi_samples(const EnsembleSummary& summary, const SpectralProfile& profile);

struct AtomTestReport {
  int max_multiplicity = 0;   // duplicates after rounding to 12 decimals
  double min_value = 0.0;
  bool pass = false;          // max_multiplicity <= 5 and min_value > 0
};

// Checks a sample of limit weights for point masses and positivity.
// Requires at least 500 samples.
AtomTestReport atom_and_positivity_test(std::span<const double> samples);

// Least-squares slope of log mean-distance against log n across the
// checkpoints. Requires >= 6 checkpoints spanning >= 2 decades.
RateFit fit_rate(const EnsembleSummary& summary, const SpectralProfile& profile);

struct DivergenceReport {
  std::vector<std::int64_t> ns;
  std::vector<RowVec> median_y_over_n;  // one entry per checkpoint
  RowVec growth_ratio;                  // per color: median(last) / median(first)
};

// Median composition growth across checkpoints; the ratio exceeds 1
// persistently when the replacement mean diverges.
DivergenceReport divergence_probe(const ExperimentConfig& config);

struct DriftVerdict {
  EnsembleSummary ensemble;
  std::vector<DriftTrace> traces;  // one per checkpoint
  std::string drift_regime;        // homogeneous | summable | cesaro_only
  bool cesaro_vanishes = false;    // (1/n) sum ||H_m - H|| -> 0
  bool weighted_sum_finite = false;  // sum ||H_m - H|| / m < infinity
};

// Convergence report for a deterministic mean schedule, labeling which
// drift hypothesis the schedule satisfies.
DriftVerdict nonhomogeneous_verdict(const ExperimentConfig& config, const DriftSchedule& schedule);

}  // namespace urnkit
