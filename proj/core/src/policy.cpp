#include "urnkit/policy.hpp"

#include <cmath>
#include <utility>

#include "urnkit/errors.hpp"
#include "urnkit/log_zeta.hpp"

namespace urnkit {

namespace {

bool is_integral(double x) { return std::isfinite(x) && x == std::floor(x); }

void require_simplex(const std::vector<double>& probs, const char* what) {
  if (probs.empty()) throw DomainError(std::string(what) + ": empty probability vector");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw DomainError(std::string(what) + ": negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw DomainError(std::string(what) + ": probabilities sum to " + std::to_string(sum));
}

bool matrix_integral(const Matrix& m) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (!is_integral(m(i, j))) return false;
  return true;
}

bool matrix_nonneg(const Matrix& m) { return (m.array() >= 0.0).all(); }

bool matrix_nonneg_offdiag(const Matrix& m) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) < 0.0) return false;
  return true;
}

class DeterministicPolicy final : public ReplacementPolicy {
 public:
  explicit DeterministicPolicy(Matrix h)
      : ReplacementPolicy(static_cast<int>(h.rows()), "deterministic"), h_(std::move(h)) {
    if (h_.rows() != h_.cols()) throw DomainError("deterministic policy: H must be square");
  }

  void sample_into(Matrix& out, std::int64_t, Rng&) const override { out = h_; }
  bool has_mean() const override { return true; }
  Matrix mean(std::int64_t) const override { return h_; }
  bool nonneg_entries() const override { return matrix_nonneg(h_); }
  bool nonneg_offdiag() const override { return matrix_nonneg_offdiag(h_); }
  bool integer_valued() const override { return matrix_integral(h_); }
  bool finite_support() const override { return true; }
  std::vector<RowOutcome> row_support(int color, std::int64_t) const override {
    return {{h_.row(color), 1.0}};
  }
  StructureMatrix structure() const override { return StructureMatrix::from_pattern(h_); }

 private:
  Matrix h_;
};

class FiniteDiscretePolicy final : public ReplacementPolicy {
 public:
  FiniteDiscretePolicy(std::vector<Matrix> outcomes, std::vector<double> probs)
      : ReplacementPolicy(outcomes.empty() ? 0 : static_cast<int>(outcomes.front().rows()),
                          "finite_discrete"),
        outcomes_(std::move(outcomes)),
        probs_(std::move(probs)) {
    if (outcomes_.empty()) throw DomainError("finite_discrete policy: no outcomes");
    require_simplex(probs_, "finite_discrete policy");
    if (probs_.size() != outcomes_.size())
      throw DomainError("finite_discrete policy: outcomes/probs length mismatch");
    for (const auto& m : outcomes_)
      if (m.rows() != d_ || m.cols() != d_)
        throw DomainError("finite_discrete policy: outcome dimensions differ");
    mean_ = Matrix::Zero(d_, d_);
    for (std::size_t i = 0; i < outcomes_.size(); ++i) mean_ += probs_[i] * outcomes_[i];
  }

  void sample_into(Matrix& out, std::int64_t, Rng& rng) const override {
    out = outcomes_[static_cast<std::size_t>(rng.pick(probs_))];
  }
  bool has_mean() const override { return true; }
  Matrix mean(std::int64_t) const override { return mean_; }
  bool nonneg_entries() const override {
    for (const auto& m : outcomes_)
      if (!matrix_nonneg(m)) return false;
    return true;
  }
  bool nonneg_offdiag() const override {
    for (const auto& m : outcomes_)
      if (!matrix_nonneg_offdiag(m)) return false;
    return true;
  }
  bool integer_valued() const override {
    for (const auto& m : outcomes_)
      if (!matrix_integral(m)) return false;
    return true;
  }
  bool finite_support() const override { return true; }
  std::vector<RowOutcome> row_support(int color, std::int64_t) const override {
    std::vector<RowOutcome> out;
    for (std::size_t i = 0; i < outcomes_.size(); ++i)
      if (probs_[i] > 0.0) out.push_back({outcomes_[i].row(color), probs_[i]});
    return out;
  }
  StructureMatrix structure() const override {
    StructureMatrix s(d_);
    for (std::size_t i = 0; i < outcomes_.size(); ++i) {
      if (probs_[i] <= 0.0) continue;
      for (int k = 0; k < d_; ++k)
        for (int q = 0; q < d_; ++q)
          if (outcomes_[i](k, q) != 0.0) s.set(k, q, true);
    }
    return s;
  }

 private:
  std::vector<Matrix> outcomes_;
  std::vector<double> probs_;
  Matrix mean_;
};

// Diagonal reinforced urn: D = diag(xi_1, ..., xi_d) with i.i.d. scalar
// entries from a finite discrete law.
class DiagonalIidPolicy final : public ReplacementPolicy {
 public:
  DiagonalIidPolicy(std::vector<double> values, std::vector<double> probs, int d)
      : ReplacementPolicy(d, "diagonal_iid"), values_(std::move(values)), probs_(std::move(probs)) {
    if (values_.empty() || values_.size() != probs_.size())
      throw DomainError("diagonal_iid policy: values/probs length mismatch");
    require_simplex(probs_, "diagonal_iid policy");
    scalar_mean_ = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) scalar_mean_ += probs_[i] * values_[i];
  }

  void sample_into(Matrix& out, std::int64_t, Rng& rng) const override {
    out = Matrix::Zero(d_, d_);
    for (int k = 0; k < d_; ++k)
      out(k, k) = values_[static_cast<std::size_t>(rng.pick(probs_))];
  }
  bool has_mean() const override { return true; }
  Matrix mean(std::int64_t) const override {
    return scalar_mean_ * Matrix::Identity(d_, d_);
  }
  bool nonneg_entries() const override {
    for (double v : values_)
      if (v < 0.0) return false;
    return true;
  }
  bool nonneg_offdiag() const override { return true; }
  bool integer_valued() const override {
    for (double v : values_)
      if (!is_integral(v)) return false;
    return true;
  }
  bool finite_support() const override { return true; }
  std::vector<RowOutcome> row_support(int color, std::int64_t) const override {
    std::vector<RowOutcome> out;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (probs_[i] <= 0.0) continue;
      RowVec row = RowVec::Zero(d_);
      row(color) = values_[i];
      out.push_back({std::move(row), probs_[i]});
    }
    return out;
  }
  StructureMatrix structure() const override {
    StructureMatrix s(d_);
    bool any = false;
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (probs_[i] > 0.0 && values_[i] != 0.0) any = true;
    for (int k = 0; k < d_; ++k) s.set(k, k, any);
    return s;
  }

 private:
  std::vector<double> values_;
  std::vector<double> probs_;
  double scalar_mean_ = 0.0;
};

// One ball added per draw, of a type chosen by a Markov transition row:
// every sampled row is one-hot and the mean matrix equals P.
class MarkovAddPolicy final : public ReplacementPolicy {
 public:
  explicit MarkovAddPolicy(Matrix p)
      : ReplacementPolicy(static_cast<int>(p.rows()), "markov_add"), p_(std::move(p)) {
    if (p_.rows() != p_.cols()) throw DomainError("markov_add policy: P must be square");
    for (int k = 0; k < d_; ++k) {
      double sum = 0.0;
      for (int q = 0; q < d_; ++q) {
        if (p_(k, q) < 0.0) throw DomainError("markov_add policy: negative transition probability");
        sum += p_(k, q);
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw DomainError("markov_add policy: row " + std::to_string(k + 1) +
                          " of P sums to " + std::to_string(sum));
    }
    for (int k = 0; k < d_; ++k) {
      std::vector<double> row(static_cast<std::size_t>(d_));
      for (int q = 0; q < d_; ++q) row[static_cast<std::size_t>(q)] = p_(k, q);
      rows_.push_back(std::move(row));
    }
  }

  void sample_into(Matrix& out, std::int64_t, Rng& rng) const override {
    out = Matrix::Zero(d_, d_);
    for (int k = 0; k < d_; ++k) out(k, rng.pick(rows_[static_cast<std::size_t>(k)])) = 1.0;
  }
  bool has_mean() const override { return true; }
  Matrix mean(std::int64_t) const override { return p_; }
  bool nonneg_entries() const override { return true; }
  bool nonneg_offdiag() const override { return true; }
  bool integer_valued() const override { return true; }
  bool finite_support() const override { return true; }
  std::vector<RowOutcome> row_support(int color, std::int64_t) const override {
    std::vector<RowOutcome> out;
    for (int q = 0; q < d_; ++q) {
      if (p_(color, q) <= 0.0) continue;
      RowVec row = RowVec::Zero(d_);
      row(q) = 1.0;
      out.push_back({std::move(row), p_(color, q)});
    }
    return out;
  }
  StructureMatrix structure() const override { return StructureMatrix::from_pattern(p_); }

 private:
  Matrix p_;
  std::vector<std::vector<double>> rows_;
};

class LogZetaDiagonalPolicy final : public ReplacementPolicy {
 public:
  LogZetaDiagonalPolicy(double beta, int d)
      : ReplacementPolicy(d, "log_zeta_diagonal"), table_(beta) {}

  void sample_into(Matrix& out, std::int64_t, Rng& rng) const override {
    out = Matrix::Zero(d_, d_);
    for (int k = 0; k < d_; ++k) out(k, k) = table_.sample(rng);
  }
  bool has_mean() const override { return table_.mean_available(); }
  Matrix mean(std::int64_t) const override {
    return table_.mean() * Matrix::Identity(d_, d_);
  }
  bool nonneg_entries() const override { return true; }
  bool nonneg_offdiag() const override { return true; }
  bool integer_valued() const override { return true; }
  bool finite_support() const override { return false; }
  StructureMatrix structure() const override {
    StructureMatrix s(d_);
    for (int k = 0; k < d_; ++k) s.set(k, k, true);
    return s;
  }
  const LogZetaTable& table() const { return table_; }

 private:
  LogZetaTable table_;
};

class NonhomogeneousPolicy final : public ReplacementPolicy {
 public:
  explicit NonhomogeneousPolicy(DriftSchedule schedule)
      : ReplacementPolicy(static_cast<int>(schedule.base.rows()), "nonhomogeneous"),
        schedule_(std::move(schedule)) {
    if (schedule_.base.rows() != schedule_.base.cols())
      throw DomainError("nonhomogeneous policy: base matrix must be square");
    if (schedule_.perturbation.rows() != schedule_.base.rows() ||
        schedule_.perturbation.cols() != schedule_.base.cols())
      throw DomainError("nonhomogeneous policy: perturbation dimensions differ from base");
    if (!matrix_nonneg_offdiag(schedule_.base) ||
        !matrix_nonneg_offdiag(schedule_.base + schedule_.perturbation))
      throw DomainError(
          "nonhomogeneous policy: every scheduled mean must keep nonnegative off-diagonal "
          "entries (base and base + E violate this)");
  }

  void sample_into(Matrix& out, std::int64_t n, Rng&) const override { out = schedule_.at(n); }
  bool has_mean() const override { return true; }
  Matrix mean(std::int64_t n) const override { return schedule_.at(n); }
  Matrix limit_mean() const override { return schedule_.base; }
  bool nonneg_entries() const override {
    return matrix_nonneg(schedule_.base) && matrix_nonneg(schedule_.base + schedule_.perturbation);
  }
  bool nonneg_offdiag() const override { return true; }
  bool integer_valued() const override { return false; }
  bool finite_support() const override { return false; }
  // Classification uses the limiting mean's pattern.
  StructureMatrix structure() const override {
    return StructureMatrix::from_pattern(schedule_.base);
  }
  const DriftSchedule& schedule() const { return schedule_; }

 private:
  DriftSchedule schedule_;
};

}  // namespace

ReplacementPolicy::ReplacementPolicy(int d, std::string kind) : d_(d), kind_(std::move(kind)) {
  if (d < 1 || d > kMaxDim) throw DomainError("policy: dimension outside [1, 64]");
}

std::vector<RowOutcome> ReplacementPolicy::row_support(int, std::int64_t) const {
  throw StateSpaceTooLargeError("policy '" + kind_ +
                                "' has unbounded support; exact law enumeration unavailable");
}

PolicyPtr make_deterministic(Matrix h) { return std::make_shared<DeterministicPolicy>(std::move(h)); }

PolicyPtr make_finite_discrete(std::vector<Matrix> outcomes, std::vector<double> probs) {
  return std::make_shared<FiniteDiscretePolicy>(std::move(outcomes), std::move(probs));
}

PolicyPtr make_diagonal_iid(std::vector<double> values, std::vector<double> probs, int d) {
  return std::make_shared<DiagonalIidPolicy>(std::move(values), std::move(probs), d);
}

PolicyPtr make_markov_add(Matrix p) { return std::make_shared<MarkovAddPolicy>(std::move(p)); }

PolicyPtr make_log_zeta_diagonal(double beta, int d) {
  return std::make_shared<LogZetaDiagonalPolicy>(beta, d);
}

PolicyPtr make_nonhomogeneous(DriftSchedule schedule) {
  return std::make_shared<NonhomogeneousPolicy>(std::move(schedule));
}

const LogZetaTable& log_zeta_table(const ReplacementPolicy& policy) {
  const auto* p = dynamic_cast<const LogZetaDiagonalPolicy*>(&policy);
  if (!p) throw DomainError("log_zeta_table: policy kind is '" + policy.kind() + "'");
  return p->table();
}

const DriftSchedule& nonhomogeneous_schedule(const ReplacementPolicy& policy) {
  const auto* p = dynamic_cast<const NonhomogeneousPolicy*>(&policy);
  if (!p) throw DomainError("nonhomogeneous_schedule: policy kind is '" + policy.kind() + "'");
  return p->schedule();
}

double DriftSchedule::weight(std::int64_t n) const {
  if (n < 1) throw DomainError("drift schedule: step index must be >= 1");
  switch (mode) {
    case DriftMode::none:
      return 0.0;
    case DriftMode::cesaro_o1:
      // Cesaro mean ~ 1/log n vanishes while sum w(m)/m = infinity.
      return 1.0 / (1.0 + std::log(static_cast<double>(n)));
    case DriftMode::summable:
      return 1.0 / static_cast<double>(n);
  }
  return 0.0;
}

Matrix DriftSchedule::at(std::int64_t n) const {
  const double w = weight(n);
  if (w == 0.0) return base;
  return base + w * perturbation;
}

DriftTrace drift_cesaro_diagnostics(const DriftSchedule& schedule, std::int64_t n) {
  if (n < 1) throw DomainError("drift_cesaro_diagnostics: n must be >= 1");
  const double e_norm = max_row_sum_norm(schedule.perturbation);
  DriftTrace t;
  if (schedule.mode == DriftMode::none || e_norm == 0.0) return t;
  double sum_w = 0.0, sum_w_over_m = 0.0;
  for (std::int64_t m = 1; m <= n; ++m) {
    const double w = schedule.weight(m);
    sum_w += w;
    sum_w_over_m += w / static_cast<double>(m);
  }
  t.cesaro = e_norm * sum_w / static_cast<double>(n);
  t.weighted = e_norm * sum_w_over_m;
  return t;
}

MomentDiagnostics moment_diagnostics(const ReplacementPolicy& policy, std::int64_t n_samples,
                                     Rng& rng) {
  if (n_samples < 1000) throw DomainError("moment_diagnostics: need at least 1000 samples");

  const std::int64_t quarter = n_samples / 4;
  double s1 = 0.0, s1q = 0.0, sl = 0.0, slq = 0.0, s2 = 0.0, s2q = 0.0;
  double ss1 = 0.0, ssl = 0.0, ss2 = 0.0;  // sums of squares for std errors
  Matrix d;
  for (std::int64_t i = 1; i <= n_samples; ++i) {
    policy.sample_into(d, i, rng);
    const double z = max_row_sum_norm(d);
    const double zl = z * std::max(std::log(z), 0.0);
    const double z2 = z * z;
    s1 += z;
    sl += zl;
    s2 += z2;
    ss1 += z * z;
    ssl += zl * zl;
    ss2 += z2 * z2;
    if (i == quarter) {
      s1q = s1;
      slq = sl;
      s2q = s2;
    }
  }

  const double n = static_cast<double>(n_samples);
  auto finish = [&](double sum, double sumsq, double quarter_sum) {
    MomentEstimate e;
    e.value = sum / n;
    const double var = std::max(sumsq / n - e.value * e.value, 0.0);
    e.std_error = std::sqrt(var / n);
    const double vq = quarter_sum / static_cast<double>(quarter);
    e.divergence_flag = vq > 0.0 ? std::abs(e.value - vq) > 0.25 * vq : e.value > 0.0;
    return e;
  };
  MomentDiagnostics out;
  out.m1 = finish(s1, ss1, s1q);
  out.m_llogl = finish(sl, ssl, slq);
  out.m2 = finish(s2, ss2, s2q);
  return out;
}

}  // namespace urnkit
