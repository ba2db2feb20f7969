#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "urnkit/linalg.hpp"
#include "urnkit/policy.hpp"
#include "urnkit/rng.hpp"
#include "urnkit/stats.hpp"

namespace urnkit {

// Continuous-time multitype branching population, tracked as per-type
// counts only. A type-k particle lives Exp(alpha_k); on death it is
// replaced by D_kk + 1 particles of its own type and D_kq of type q,
// so the net change of the count vector is row k of D.
struct BranchingState {
  std::vector<std::int64_t> Z;
  double t = 0.0;
  std::int64_t splits = 0;
  ColVec alpha;                       // per-type lifetime rates, > 0
  std::vector<std::int64_t> deaths;   // per-type death counts

  BranchingState(std::vector<std::int64_t> z0, ColVec rates);
  explicit BranchingState(std::vector<std::int64_t> z0);  // unit rates

  int dim() const { return static_cast<int>(Z.size()); }
};

// Run n_splits death/replacement events; returns Z after each split.
// The policy must emit nonnegative integer matrices. Throws
// ExtinctionError when the total rate hits zero early.
std::vector<std::vector<std::int64_t>> simulate_splits(BranchingState& state,
                                                       const ReplacementPolicy& policy,
                                                       std::int64_t n_splits, Rng& rng);

struct CompositionReport {
  RowVec composition;      // Z / sum Z at the end
  RowVec death_fractions;  // deaths_k / total deaths
};

CompositionReport long_run_composition(BranchingState& state, const ReplacementPolicy& policy,
                                       std::int64_t t_splits, Rng& rng);

// Exact law of the urn composition after n draws for an integer-valued
// finite-support policy, by breadth-first expansion over states. Throws
// StateSpaceTooLargeError past max_states.
using UrnLaw = std::map<std::vector<std::int64_t>, double>;
UrnLaw enumerate_urn_law(const ReplacementPolicy& policy, const std::vector<std::int64_t>& y0,
                         int n, const RowVec& fallback_p, std::size_t max_states = 100000);
UrnLaw enumerate_urn_law(const ReplacementPolicy& policy, const std::vector<std::int64_t>& y0,
                         int n, std::size_t max_states = 100000);

struct EmbeddingTestReport {
  Chi2Report chi2;
  std::int64_t reps = 0;
  std::size_t states = 0;
};

// Chi-square comparison of the branching state at the n-th split time
// (unit rates, reps independent runs) against the exact urn law after n
// draws from the same start. Requires alpha = 1 and small n.
EmbeddingTestReport embedding_distribution_test(const ReplacementPolicy& policy,
                                                const std::vector<std::int64_t>& y0, int n,
                                                std::int64_t reps, Rng& rng);

// The urn policy equivalent to running the branching process with the
// given rates: replacement D * diag(alpha) on the rescaled composition
// (alpha_1 Y_1, ..., alpha_d Y_d).
PolicyPtr rescaled_urn_policy(const PolicyPtr& base, const ColVec& alpha);

}  // namespace urnkit
