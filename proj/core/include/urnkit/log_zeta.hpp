#pragma once

#include <cstdint>
#include <vector>

#include "urnkit/rng.hpp"

namespace urnkit {

// Discrete heavy-tail law P(J = j) = c_beta / (j^2 (log j)^beta), j >= 2.
//
// Sampling is exact inverse-CDF on a dense table for j < 2^16 plus a
// power-of-two bucket layer with rejection up to 2^40. The normalizer and
// the truncated mean are computed by direct summation on the dense range
// and Euler-Maclaurin corrected integrals per bucket; the mass beyond the
// supported range is bounded explicitly and stays below 1e-12.
//
// One parameter sweeps the moment regimes: the mean is finite iff
// beta > 1 and E[J log J] is finite iff beta > 2, while E[J^2] diverges
// for every beta.
class LogZetaTable {
 public:
  explicit LogZetaTable(double beta);

  double beta() const { return beta_; }

  // c_beta: the probability of j is normalizer() / (j^2 (log j)^beta).
  double normalizer() const { return norm_const_; }

  // Upper bound on the probability mass beyond the supported range.
  double tail_bound() const { return tail_bound_; }

  double support_end() const { return kSupportEnd; }

  bool mean_available() const { return beta_ > 1.0; }
  // Mean of the (truncated-support) law; requires mean_available().
  double mean() const;

  double sample(Rng& rng) const;

  // P(J <= j), exact over the supported range.
  double cdf(double j) const;

 private:
  static constexpr double kDenseEnd = 65536.0;           // 2^16
  static constexpr double kSupportEnd = 1099511627776.0; // 2^40
  static constexpr int kBuckets = 24;

  double beta_ = 0.0;
  double norm_const_ = 0.0;
  double tail_bound_ = 0.0;
  double mean_ = 0.0;
  std::vector<double> dense_cdf_;   // cumulative P(J <= 2 + i)
  std::vector<double> bucket_cdf_;  // cumulative P up to each bucket end
  std::vector<double> bucket_lo_;   // bucket lower edges
};

}  // namespace urnkit
