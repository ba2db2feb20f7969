#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace urnkit {

double mean(std::span<const double> x);
double sample_sd(std::span<const double> x);

// Type-7 (linear interpolation) quantile of an unsorted sample.
double quantile(std::span<const double> x, double p);

// One-sample Kolmogorov-Smirnov statistic against Uniform(0,1).
double ks_statistic_uniform(std::span<const double> samples);

// One-sample KS statistic against an arbitrary CDF given as sorted
// (sample, cdf-at-sample) evaluations done by the caller.
double ks_statistic(std::span<const double> samples, double (*cdf)(double, const void*), const void* ctx);

// Asymptotic p-value for the one-sample KS statistic (Stephens' small-n
// correction on the Kolmogorov tail series).
double ks_pvalue(double d_stat, std::int64_t n);

// Regularized incomplete gamma functions.
double gamma_p(double a, double x);  // P(a,x), lower
double gamma_q(double a, double x);  // Q(a,x), upper

// Survival function of the chi-square distribution.
double chi2_sf(double x, double dof);

struct Chi2Report {
  double stat = 0.0;
  int dof = 0;
  double pvalue = 1.0;
};

// Pearson chi-square of observed counts against expected counts.
Chi2Report pearson_chi2(std::span<const double> observed, std::span<const double> expected);

}  // namespace urnkit
