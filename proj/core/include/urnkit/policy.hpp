#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "urnkit/linalg.hpp"
#include "urnkit/rng.hpp"
#include "urnkit/structure.hpp"

namespace urnkit {

// One possible value of a single replacement row with its probability.
struct RowOutcome {
  RowVec row;
  double prob = 0.0;
};

// A replacement policy: the law of the random matrix added to the urn at
// each step. Policies are immutable after construction; sampling draws
// from the caller's generator only.
class ReplacementPolicy {
 public:
  virtual ~ReplacementPolicy() = default;

  int dim() const { return d_; }
  const std::string& kind() const { return kind_; }

  // Draw the step-n replacement matrix into `out` (resized as needed).
  virtual void sample_into(Matrix& out, std::int64_t n, Rng& rng) const = 0;

  Matrix sample(std::int64_t n, Rng& rng) const {
    Matrix d;
    sample_into(d, n, rng);
    return d;
  }

  virtual bool has_mean() const = 0;
  // Exact mean matrix at step n; throws MeanUnavailableError.
  virtual Matrix mean(std::int64_t n) const = 0;
  // The limiting mean matrix (equal to mean(n) for homogeneous policies,
  // the schedule base otherwise). Spectral classification uses this.
  virtual Matrix limit_mean() const { return mean(1); }

  // Declared sign/shape properties (hold almost surely for every sample).
  virtual bool nonneg_entries() const = 0;
  virtual bool nonneg_offdiag() const = 0;
  virtual bool integer_valued() const = 0;
  virtual bool finite_support() const = 0;

  // All possible values of row `color` at step n with probabilities.
  // Only available for finite-support policies.
  virtual std::vector<RowOutcome> row_support(int color, std::int64_t n) const;

  // Pattern of entries that are nonzero with positive probability.
  virtual StructureMatrix structure() const = 0;

 protected:
  ReplacementPolicy(int d, std::string kind);
  int d_;
  std::string kind_;
};

using PolicyPtr = std::shared_ptr<const ReplacementPolicy>;

PolicyPtr make_deterministic(Matrix h);
PolicyPtr make_finite_discrete(std::vector<Matrix> outcomes, std::vector<double> probs);
PolicyPtr make_diagonal_iid(std::vector<double> values, std::vector<double> probs, int d);
PolicyPtr make_markov_add(Matrix p);
PolicyPtr make_log_zeta_diagonal(double beta, int d);

enum class DriftMode { none, cesaro_o1, summable };

// Deterministic mean schedule H_n = H + E * w(n) with w(n) = 0,
// 1/(1 + log n), or 1/n. The cesaro_o1 drift makes the Cesaro mean of
// ||H_n - H|| vanish while sum_m ||H_m - H|| / m diverges; the summable
// drift keeps that sum finite.
struct DriftSchedule {
  Matrix base;
  DriftMode mode = DriftMode::none;
  Matrix perturbation;

  Matrix at(std::int64_t n) const;
  double weight(std::int64_t n) const;
};

PolicyPtr make_nonhomogeneous(DriftSchedule schedule);

struct DriftTrace {
  double cesaro = 0.0;    // (1/n) sum_{m<=n} ||H_m - H||
  double weighted = 0.0;  // sum_{m<=n} ||H_m - H|| / m
};

// Exact partial sums of the drift magnitudes (max-row-sum norm).
DriftTrace drift_cesaro_diagnostics(const DriftSchedule& schedule, std::int64_t n);

struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
  bool divergence_flag = false;  // estimate moved >25% between N/4 and N
};

struct MomentDiagnostics {
  MomentEstimate m1;       // E ||D||
  MomentEstimate m_llogl;  // E ||D|| log+ ||D||
  MomentEstimate m2;       // E ||D||^2
};

// Monte Carlo moment estimates with a doubling-sample growth flag per
// moment. Requires N >= 1000.
MomentDiagnostics moment_diagnostics(const ReplacementPolicy& policy, std::int64_t n_samples,
                                     Rng& rng);

class LogZetaTable;
// Access the underlying sampler table / schedule of specialized policies.
// Throw DomainError for other kinds.
const LogZetaTable& log_zeta_table(const ReplacementPolicy& policy);
const DriftSchedule& nonhomogeneous_schedule(const ReplacementPolicy& policy);

}  // namespace urnkit
