#include "urnkit/branching.hpp"

#include <cmath>
#include <utility>

#include "urnkit/errors.hpp"
#include "urnkit/urn.hpp"

namespace urnkit {

namespace {

void require_branching_policy(const ReplacementPolicy& policy) {
  if (!policy.integer_valued() || !policy.nonneg_entries())
    throw DomainError("branching: policy must emit nonnegative integer matrices (kind '" +
                      policy.kind() + "' does not)");
}

std::int64_t to_count(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) > 1e-9) throw DomainError("branching: non-integer replacement entry");
  return static_cast<std::int64_t>(r);
}

// One death/replacement event; returns the dying type.
int branching_event(BranchingState& state, const ReplacementPolicy& policy, Rng& rng,
                    Matrix& scratch) {
  const int d = state.dim();
  double total = 0.0;
  for (int k = 0; k < d; ++k) total += state.alpha(k) * static_cast<double>(state.Z[k]);
  if (!(total > 0.0))
    throw ExtinctionError("population extinct after " + std::to_string(state.splits) + " splits");

  state.t += rng.exponential(total);
  const double u = rng.uniform01() * total;
  int dying = d - 1;
  double cum = 0.0;
  for (int k = 0; k + 1 < d; ++k) {
    cum += state.alpha(k) * static_cast<double>(state.Z[k]);
    if (u < cum) {
      dying = k;
      break;
    }
  }
  policy.sample_into(scratch, state.splits + 1, rng);
  for (int q = 0; q < d; ++q) state.Z[q] += to_count(scratch(dying, q));
  state.deaths[static_cast<std::size_t>(dying)] += 1;
  state.splits += 1;
  return dying;
}

}  // namespace

BranchingState::BranchingState(std::vector<std::int64_t> z0, ColVec rates)
    : Z(std::move(z0)), alpha(std::move(rates)) {
  if (Z.empty() || Z.size() > kMaxDim) throw DomainError("BranchingState: dimension outside [1, 64]");
  if (alpha.size() != static_cast<long>(Z.size()))
    throw DomainError("BranchingState: rate dimension mismatch");
  if ((alpha.array() <= 0.0).any()) throw DomainError("BranchingState: rates must be positive");
  for (std::int64_t z : Z)
    if (z < 0) throw DomainError("BranchingState: counts must be nonnegative");
  deaths.assign(Z.size(), 0);
}

BranchingState::BranchingState(std::vector<std::int64_t> z0)
    : BranchingState(std::vector<std::int64_t>(z0), ColVec::Ones(static_cast<long>(z0.size()))) {}

std::vector<std::vector<std::int64_t>> simulate_splits(BranchingState& state,
                                                       const ReplacementPolicy& policy,
                                                       std::int64_t n_splits, Rng& rng) {
  require_branching_policy(policy);
  if (policy.dim() != state.dim()) throw DomainError("simulate_splits: dimension mismatch");
  std::vector<std::vector<std::int64_t>> record;
  record.reserve(static_cast<std::size_t>(n_splits));
  Matrix scratch;
  for (std::int64_t i = 0; i < n_splits; ++i) {
    branching_event(state, policy, rng, scratch);
    record.push_back(state.Z);
  }
  return record;
}

CompositionReport long_run_composition(BranchingState& state, const ReplacementPolicy& policy,
                                       std::int64_t t_splits, Rng& rng) {
  require_branching_policy(policy);
  if (policy.dim() != state.dim()) throw DomainError("long_run_composition: dimension mismatch");
  Matrix scratch;
  for (std::int64_t i = 0; i < t_splits; ++i) branching_event(state, policy, rng, scratch);

  const int d = state.dim();
  CompositionReport rep;
  rep.composition = RowVec::Zero(d);
  rep.death_fractions = RowVec::Zero(d);
  double zt = 0.0, dt = 0.0;
  for (int k = 0; k < d; ++k) {
    zt += static_cast<double>(state.Z[k]);
    dt += static_cast<double>(state.deaths[k]);
  }
  for (int k = 0; k < d; ++k) {
    rep.composition(k) = zt > 0.0 ? static_cast<double>(state.Z[k]) / zt : 0.0;
    rep.death_fractions(k) = dt > 0.0 ? static_cast<double>(state.deaths[k]) / dt : 0.0;
  }
  return rep;
}

UrnLaw enumerate_urn_law(const ReplacementPolicy& policy, const std::vector<std::int64_t>& y0,
                         int n, const RowVec& fallback_p, std::size_t max_states) {
  if (!policy.finite_support() || !policy.integer_valued())
    throw StateSpaceTooLargeError(
        "enumerate_urn_law: needs an integer-valued finite-support policy");
  const int d = policy.dim();
  if (static_cast<int>(y0.size()) != d) throw DomainError("enumerate_urn_law: Y0 dimension mismatch");

  UrnLaw current;
  current[y0] = 1.0;
  RowVec y(d);
  for (int level = 0; level < n; ++level) {
    UrnLaw next;
    for (const auto& [state, prob] : current) {
      for (int k = 0; k < d; ++k) y(k) = static_cast<double>(state[k]);
      const RowVec sel = selection_probabilities(y, fallback_p);
      for (int k = 0; k < d; ++k) {
        if (sel(k) <= 0.0) continue;
        for (const auto& outcome : policy.row_support(k, level + 1)) {
          if (outcome.prob <= 0.0) continue;
          std::vector<std::int64_t> succ = state;
          for (int q = 0; q < d; ++q) succ[static_cast<std::size_t>(q)] += to_count(outcome.row(q));
          next[succ] += prob * sel(k) * outcome.prob;
        }
      }
      if (next.size() > max_states)
        throw StateSpaceTooLargeError("enumerate_urn_law: more than " +
                                      std::to_string(max_states) + " reachable states");
    }
    current = std::move(next);
  }
  return current;
}

UrnLaw enumerate_urn_law(const ReplacementPolicy& policy, const std::vector<std::int64_t>& y0,
                         int n, std::size_t max_states) {
  const int d = policy.dim();
  return enumerate_urn_law(policy, y0, n,
                           RowVec::Constant(d, 1.0 / static_cast<double>(d)), max_states);
}

EmbeddingTestReport embedding_distribution_test(const ReplacementPolicy& policy,
                                                const std::vector<std::int64_t>& y0, int n,
                                                std::int64_t reps, Rng& rng) {
  require_branching_policy(policy);
  if (n < 1) throw DomainError("embedding_distribution_test: n must be >= 1");
  if (reps < 100) throw DomainError("embedding_distribution_test: need at least 100 replications");

  const UrnLaw law = enumerate_urn_law(policy, y0, n);

  std::map<std::vector<std::int64_t>, std::int64_t> observed;
  Matrix scratch;
  for (std::int64_t r = 0; r < reps; ++r) {
    BranchingState state(y0);
    for (int i = 0; i < n; ++i) branching_event(state, policy, rng, scratch);
    observed[state.Z] += 1;
  }

  std::vector<double> obs, expd;
  obs.reserve(law.size());
  expd.reserve(law.size());
  for (const auto& [state, prob] : law) {
    obs.push_back(static_cast<double>(observed.count(state) ? observed.at(state) : 0));
    expd.push_back(prob * static_cast<double>(reps));
  }
  for (const auto& [state, count] : observed)
    if (!law.count(state))
      throw Error("embedding test: simulated state outside the enumerated support");

  EmbeddingTestReport rep;
  rep.chi2 = pearson_chi2(obs, expd);
  rep.reps = reps;
  rep.states = law.size();
  return rep;
}

namespace {

class RescaledPolicy final : public ReplacementPolicy {
 public:
  RescaledPolicy(PolicyPtr base, ColVec alpha)
      : ReplacementPolicy(base->dim(), base->kind() + "_rescaled"),
        base_(std::move(base)),
        alpha_(std::move(alpha)) {
    if (alpha_.size() != base_->dim()) throw DomainError("rescaled policy: rate dimension mismatch");
    if ((alpha_.array() <= 0.0).any()) throw DomainError("rescaled policy: rates must be positive");
  }

  void sample_into(Matrix& out, std::int64_t n, Rng& rng) const override {
    base_->sample_into(out, n, rng);
    out = out * alpha_.asDiagonal();
  }
  bool has_mean() const override { return base_->has_mean(); }
  Matrix mean(std::int64_t n) const override { return base_->mean(n) * alpha_.asDiagonal(); }
  Matrix limit_mean() const override { return base_->limit_mean() * alpha_.asDiagonal(); }
  bool nonneg_entries() const override { return base_->nonneg_entries(); }
  bool nonneg_offdiag() const override { return base_->nonneg_offdiag(); }
  bool integer_valued() const override {
    if (!base_->integer_valued()) return false;
    for (long k = 0; k < alpha_.size(); ++k)
      if (alpha_(k) != std::floor(alpha_(k))) return false;
    return true;
  }
  bool finite_support() const override { return base_->finite_support(); }
  std::vector<RowOutcome> row_support(int color, std::int64_t n) const override {
    auto out = base_->row_support(color, n);
    for (auto& o : out) o.row = o.row.cwiseProduct(alpha_.transpose());
    return out;
  }
  StructureMatrix structure() const override { return base_->structure(); }

 private:
  PolicyPtr base_;
  ColVec alpha_;
};

}  // namespace

PolicyPtr rescaled_urn_policy(const PolicyPtr& base, const ColVec& alpha) {
  return std::make_shared<RescaledPolicy>(base, alpha);
}

}  // namespace urnkit
