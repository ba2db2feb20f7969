#include "urnkit/urn.hpp"

#include <algorithm>
#include <cmath>

#include "urnkit/errors.hpp"

namespace urnkit {

namespace {

void require_simplex_row(const RowVec& p, const char* what) {
  if ((p.array() < 0.0).any() || std::abs(p.sum() - 1.0) > 1e-12)
    throw DomainError(std::string(what) + ": not a probability vector");
}

}  // namespace

UrnState::UrnState(RowVec y0, RowVec fallback, std::uint64_t seed)
    : Y(std::move(y0)), fallback_p(std::move(fallback)), rng(seed) {
  if (Y.size() < 1 || Y.size() > kMaxDim) throw DomainError("UrnState: dimension outside [1, 64]");
  if (!Y.allFinite()) throw DomainError("UrnState: Y0 must be finite");
  if (fallback_p.size() != Y.size()) throw DomainError("UrnState: fallback_p dimension mismatch");
  require_simplex_row(fallback_p, "UrnState fallback_p");
  N.assign(static_cast<std::size_t>(Y.size()), 0);
}

UrnState::UrnState(RowVec y0, std::uint64_t seed)
    : UrnState(RowVec(y0), RowVec::Constant(y0.size(), 1.0 / static_cast<double>(y0.size())),
               seed) {}

RowVec selection_probabilities(const RowVec& y, const RowVec& fallback_p) {
  RowVec pos = positive_part(y);
  const double total = pos.sum();
  if (total <= 0.0) return fallback_p;
  return pos / total;
}

void step(UrnState& state, const ReplacementPolicy& policy, StepRecord& out) {
  if (policy.dim() != state.dim()) throw DomainError("step: policy dimension mismatch");
  const RowVec sel = selection_probabilities(state.Y, state.fallback_p);
  const double u = state.rng.uniform01();
  int drawn = state.dim() - 1;
  double cum = 0.0;
  for (int k = 0; k + 1 < state.dim(); ++k) {
    cum += sel(k);
    if (u < cum) {
      drawn = k;
      break;
    }
  }
  policy.sample_into(out.D, state.n + 1, state.rng);
  state.Y += out.D.row(drawn);
  state.N[static_cast<std::size_t>(drawn)] += 1;
  state.n += 1;
  out.drawn = drawn;
  out.Y_after = state.Y;
}

StepRecord step(UrnState& state, const ReplacementPolicy& policy) {
  StepRecord rec;
  step(state, policy, rec);
  return rec;
}

Diagnostics Diagnostics::zero(int d) {
  Diagnostics diag;
  diag.M1 = RowVec::Zero(d);
  diag.M2 = RowVec::Zero(d);
  diag.s = RowVec::Zero(d);
  diag.theta = RowVec::Zero(d);
  return diag;
}

Diagnostics update_diagnostics(Diagnostics diag, const RowVec& y_before, std::int64_t n_after,
                               int drawn, const Matrix& d_sampled, const Matrix& h_n,
                               const RowVec& fallback_p) {
  const int d = static_cast<int>(y_before.size());
  const RowVec sel = selection_probabilities(y_before, fallback_p);
  RowVec x = RowVec::Zero(d);
  x(drawn) = 1.0;

  const RowVec dm1 = x - sel;
  const RowVec dy = d_sampled.row(drawn);
  const RowVec dm2 = dy - h_n.row(drawn);
  const RowVec y_after = y_before + dy;
  const RowVec dy_pos = positive_part(y_after) - positive_part(y_before);

  diag.M1 += dm1;
  diag.M2 += dm2;
  diag.s += dm1 * h_n + dm2 + (dy_pos - dy);
  const double alpha_before = y_before.sum();
  if (alpha_before > 0.0)
    diag.q += 1.0 / alpha_before;
  else
    diag.alpha_skips += 1;
  diag.theta = positive_part(y_after) / static_cast<double>(n_after);
  return diag;
}

std::vector<TrajectorySnapshot> run_trajectory(UrnState& state, const ReplacementPolicy& policy,
                                               std::int64_t n_steps,
                                               std::span<const std::int64_t> checkpoints,
                                               bool with_diagnostics) {
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1 || checkpoints[i] > n_steps)
      throw DomainError("run_trajectory: checkpoint outside [1, n_steps]");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
      throw DomainError("run_trajectory: checkpoints must be strictly increasing");
  }
  if (with_diagnostics && !policy.has_mean())
    throw MeanUnavailableError(
        "run_trajectory: diagnostics need an analytic mean schedule, which policy '" +
        policy.kind() + "' does not provide");

  std::vector<TrajectorySnapshot> out;
  out.reserve(checkpoints.size());
  Diagnostics diag = Diagnostics::zero(state.dim());
  StepRecord rec;
  RowVec y_before(state.dim());
  std::size_t next_cp = 0;
  for (std::int64_t i = 0; i < n_steps; ++i) {
    if (with_diagnostics) {
      y_before = state.Y;
      step(state, policy, rec);
      diag = update_diagnostics(std::move(diag), y_before, state.n, rec.drawn, rec.D,
                                policy.mean(state.n), state.fallback_p);
    } else {
      step(state, policy, rec);
    }
    if (next_cp < checkpoints.size() && state.n == checkpoints[next_cp]) {
      TrajectorySnapshot snap;
      snap.n = state.n;
      snap.Y = state.Y;
      snap.N = state.N;
      if (with_diagnostics) snap.diag = diag;
      out.push_back(std::move(snap));
      ++next_cp;
    }
  }
  return out;
}

std::pair<double, double> conditional_mean_identity(const UrnState& state, const Matrix& h,
                                                    const ColVec& u, double lambda_h) {
  if ((state.Y.array() < 0.0).any())
    throw DomainError("conditional_mean_identity: requires Y >= 0 componentwise");
  const double alpha = state.alpha();
  if (!(alpha > 0.0)) throw DomainError("conditional_mean_identity: requires alpha(Y) > 0");
  const ColVec hu = h * u;
  const double resid = (hu - lambda_h * u).cwiseAbs().maxCoeff();
  if (resid > 1e-9 * std::max(1.0, u.cwiseAbs().maxCoeff()) * std::max(1.0, std::abs(lambda_h)))
    throw DomainError("conditional_mean_identity: u is not a right eigenvector for lambda_h");

  const double yu = state.Y * u;
  double lhs = yu;
  for (int k = 0; k < state.dim(); ++k) lhs += state.Y(k) / alpha * hu(k);
  const double rhs = yu * (1.0 + lambda_h / alpha);
  return {lhs, rhs};
}

}  // namespace urnkit
