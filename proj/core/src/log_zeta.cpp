#include "urnkit/log_zeta.hpp"

#include <algorithm>
#include <cmath>

#include "urnkit/errors.hpp"

namespace urnkit {

namespace {

// f(x) = 1 / (x^2 (log x)^beta), the raw probability weight.
double weight_f(double x, double beta) { return 1.0 / (x * x * std::pow(std::log(x), beta)); }

double weight_f_prime(double x, double beta) {
  const double lx = std::log(x);
  return -std::pow(lx, -beta) / (x * x * x) * (2.0 + beta / lx);
}

// g(x) = x f(x) = 1 / (x (log x)^beta), the raw mean weight.
double weight_g(double x, double beta) { return 1.0 / (x * std::pow(std::log(x), beta)); }

double weight_g_prime(double x, double beta) {
  const double lx = std::log(x);
  return -std::pow(lx, -beta) / (x * x) * (1.0 + beta / lx);
}

// Integral of f over [a, b] via composite Simpson after x = a e^t.
double integral_f(double a, double b, double beta) {
  const double span = std::log(b / a);
  const int n = 2048;  // even
  const double h = span / n;
  auto g = [&](double t) {
    return std::exp(-t) / (a * std::pow(std::log(a) + t, beta));
  };
  double sum = g(0.0) + g(span);
  for (int i = 1; i < n; ++i) sum += g(i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

// Closed-form integral of g over [a, b].
double integral_g(double a, double b, double beta) {
  if (beta == 1.0) return std::log(std::log(b)) - std::log(std::log(a));
  return (std::pow(std::log(b), 1.0 - beta) - std::pow(std::log(a), 1.0 - beta)) / (1.0 - beta);
}

// Euler-Maclaurin sum_{j=a}^{b-1} phi(j) given the integral over [a, b].
double em_sum(double integral, double phi_a, double phi_b, double dphi_a, double dphi_b) {
  return integral + 0.5 * (phi_a - phi_b) + (dphi_b - dphi_a) / 12.0;
}

}  // namespace

LogZetaTable::LogZetaTable(double beta) : beta_(beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw DomainError("log_zeta: beta must be finite and >= 0");

  // Dense raw weights, summed directly.
  const int dense_n = static_cast<int>(kDenseEnd) - 2;
  std::vector<double> raw(dense_n);
  double dense_mass = 0.0, dense_mean = 0.0;
  for (int i = 0; i < dense_n; ++i) {
    const double j = static_cast<double>(i + 2);
    raw[i] = weight_f(j, beta);
    dense_mass += raw[i];
    dense_mean += weight_g(j, beta);
  }

  // Bucket raw masses [2^16, 2^17), ..., [2^39, 2^40).
  bucket_lo_.resize(kBuckets);
  std::vector<double> bucket_mass(kBuckets);
  double buckets_mass = 0.0, buckets_mean = 0.0;
  double lo = kDenseEnd;
  for (int b = 0; b < kBuckets; ++b) {
    const double hi = lo * 2.0;
    bucket_lo_[b] = lo;
    bucket_mass[b] = em_sum(integral_f(lo, hi, beta), weight_f(lo, beta), weight_f(hi, beta),
                            weight_f_prime(lo, beta), weight_f_prime(hi, beta));
    buckets_mass += bucket_mass[b];
    buckets_mean += em_sum(integral_g(lo, hi, beta), weight_g(lo, beta), weight_g(hi, beta),
                           weight_g_prime(lo, beta), weight_g_prime(hi, beta));
    lo = hi;
  }

  const double total = dense_mass + buckets_mass;
  norm_const_ = 1.0 / total;
  mean_ = (dense_mean + buckets_mean) / total;
  // Mass beyond the support: integral bound 1/(J (log J)^beta), < 1e-12.
  tail_bound_ = norm_const_ / (kSupportEnd * std::pow(std::log(kSupportEnd), beta));

  dense_cdf_.resize(dense_n);
  double cum = 0.0;
  for (int i = 0; i < dense_n; ++i) {
    cum += raw[i] * norm_const_;
    dense_cdf_[i] = cum;
  }
  bucket_cdf_.resize(kBuckets);
  for (int b = 0; b < kBuckets; ++b) {
    cum += bucket_mass[b] * norm_const_;
    bucket_cdf_[b] = cum;
  }
  bucket_cdf_.back() = 1.0;
}

double LogZetaTable::mean() const {
  if (!mean_available())
    throw MeanUnavailableError("log_zeta: beta = " + std::to_string(beta_) +
                               " <= 1, the mean diverges (harmonic-log series)");
  return mean_;
}

double LogZetaTable::sample(Rng& rng) const {
  const double u = rng.uniform01();
  if (u < dense_cdf_.back()) {
    const auto it = std::upper_bound(dense_cdf_.begin(), dense_cdf_.end(), u);
    return static_cast<double>(2 + (it - dense_cdf_.begin()));
  }
  const auto bit = std::upper_bound(bucket_cdf_.begin(), bucket_cdf_.end(), u);
  const int b = static_cast<int>(std::min<std::ptrdiff_t>(bit - bucket_cdf_.begin(), kBuckets - 1));
  const double a = bucket_lo_[b];
  const double hi = a * 2.0;

  // Rejection within the bucket: propose floor(X) with X ~ density 1/x^2
  // on [a, hi]; accept with the (log a / log j)^beta tilt.
  const double la = std::log(a);
  const double accept_scale = 1.0 / (1.0 + 1.0 / a);
  for (;;) {
    const double w = rng.uniform01();
    const double x = 1.0 / (1.0 / a - w * (1.0 / a - 1.0 / hi));
    double j = std::floor(x);
    j = std::min(std::max(j, a), hi - 1.0);
    const double accept =
        (1.0 + 1.0 / j) * std::pow(la / std::log(j), beta_) * accept_scale;
    if (rng.uniform01() < accept) return j;
  }
}

double LogZetaTable::cdf(double j) const {
  if (j < 2.0) return 0.0;
  if (j >= kSupportEnd - 1.0) return 1.0;
  const double fl = std::floor(j);
  if (fl < kDenseEnd) {
    const std::size_t idx = static_cast<std::size_t>(fl) - 2;
    return dense_cdf_[idx];
  }
  // Partial bucket mass via the same Euler-Maclaurin evaluation.
  int b = 0;
  while (b + 1 < kBuckets && bucket_lo_[b + 1] <= fl) ++b;
  const double a = bucket_lo_[b];
  const double base = b == 0 ? dense_cdf_.back() : bucket_cdf_[b - 1];
  if (fl + 1.0 >= a * 2.0) return bucket_cdf_[b];
  const double part =
      em_sum(integral_f(a, fl + 1.0, beta_), weight_f(a, beta_), weight_f(fl + 1.0, beta_),
             weight_f_prime(a, beta_), weight_f_prime(fl + 1.0, beta_));
  return base + part * norm_const_;
}

}  // namespace urnkit
