#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "urnkit/linalg.hpp"
#include "urnkit/policy.hpp"
#include "urnkit/rng.hpp"

namespace urnkit {

// Urn composition and draw bookkeeping. Ball counts may be negative or
// non-integer; only the selection rule applies positive parts. One state
// is confined to one thread; all randomness flows through its generator.
struct UrnState {
  RowVec Y;
  std::int64_t n = 0;
  std::vector<std::int64_t> N;  // per-color draw counts, sum == n
  RowVec fallback_p;            // selection law when no color has positive count
  Rng rng;

  UrnState(RowVec y0, RowVec fallback, std::uint64_t seed);
  UrnState(RowVec y0, std::uint64_t seed);  // uniform fallback

  int dim() const { return static_cast<int>(Y.size()); }
  double alpha() const { return Y.sum(); }
};

struct StepRecord {
  int drawn = -1;
  Matrix D;
  RowVec Y_after;
};

// P(draw color k) = Y_k^+ / sum_j Y_j^+, or fallback_p if that sum is 0.
RowVec selection_probabilities(const RowVec& y, const RowVec& fallback_p);

// One draw-and-replace transition. The color is drawn by inverse CDF on a
// single uniform variate, then the policy samples the replacement matrix
// at index n+1 from the same generator.
void step(UrnState& state, const ReplacementPolicy& policy, StepRecord& out);
StepRecord step(UrnState& state, const ReplacementPolicy& policy);

// Running decomposition of the composition process: the draw-noise and
// replacement-noise martingales, the accumulated remainder, the inverse
// total-mass clock, and the normalized composition.
struct Diagnostics {
  RowVec M1;     // sum of (X_n - E[X_n | F_{n-1}])
  RowVec M2;     // sum of X_n (D_n - H_n)
  RowVec s;      // accumulated remainder
  double q = 0.0;  // sum over steps of 1/alpha(Y) where positive
  RowVec theta;  // Y_n^+ / n
  std::int64_t alpha_skips = 0;  // steps where alpha(Y) <= 0 contributed nothing to q

  static Diagnostics zero(int d);
};

// Fold one observed step into the diagnostics. H_n is the analytic mean
// of the policy at this step.
Diagnostics update_diagnostics(Diagnostics diag, const RowVec& y_before, std::int64_t n_after,
                               int drawn, const Matrix& d_sampled, const Matrix& h_n,
                               const RowVec& fallback_p);

struct TrajectorySnapshot {
  std::int64_t n = 0;
  RowVec Y;
  std::vector<std::int64_t> N;
  std::optional<Diagnostics> diag;
};

// Run n_steps transitions, snapshotting at the given sorted checkpoint
// indices (all in [1, n_steps]). Diagnostics require an analytic mean.
std::vector<TrajectorySnapshot> run_trajectory(UrnState& state, const ReplacementPolicy& policy,
                                               std::int64_t n_steps,
                                               std::span<const std::int64_t> checkpoints,
                                               bool with_diagnostics);

// Both sides of the one-step conditional mean identity for a right
// eigenvector u of H: E[Y_{n+1} u | F_n] computed from the transition law
// (lhs) and in closed form Y u (1 + lambda/alpha(Y)) (rhs). Requires
// Y >= 0, alpha(Y) > 0, and H u = lambda u.
std::pair<double, double> conditional_mean_identity(const UrnState& state, const Matrix& h,
                                                    const ColVec& u, double lambda_h);

}  // namespace urnkit
