#pragma once

#include <optional>
#include <vector>

#include "urnkit/linalg.hpp"
#include "urnkit/structure.hpp"

namespace urnkit {

// One irreducible class of colors with its local dominant eigenvalue.
struct SpectralClass {
  std::vector<int> colors;  // 0-based
  double lambda = 0.0;
};

// Spectral data of a mean replacement matrix: the dominant eigenvalue,
// the class decomposition, the nonnegative eigenvector bases spanning the
// limit set, the projection onto the dominant left eigenspace, and the
// secondary-spectrum quantities that drive the convergence-rate law.
struct SpectralProfile {
  int d = 0;
  double lambda_h = 0.0;
  std::vector<SpectralClass> classes;  // topological order
  int nu1 = 0;                         // number of classes attaining lambda_h
  std::vector<RowVec> v_basis;         // left eigenvectors, each sums to 1
  std::vector<ColVec> u_basis;         // right eigenvectors, v_j * u_j = 1
  Matrix u_projection;                 // U = sum_j u_j v_j, idempotent
  std::optional<double> rho;           // second/first real-part ratio, or none
  int nu_sec = 1;                      // largest Jordan block at that level
  bool irreducible = false;
};

// Throws DomainError unless H is square, finite, d <= 64, and has
// nonnegative off-diagonal entries.
void validate_mean_matrix(const Matrix& h);

// Dominant eigen-structure from the class decomposition. Per-class Perron
// roots come from shifted power iteration; the cross-class parts of each
// u_j solve a linear system against the sub-dominant block. Throws
// NonPositiveLambda or NoPositiveRightEigenvector. rho/nu_sec are left
// unset; second_eigen_structure fills them.
SpectralProfile perron_data(const Matrix& h, const std::vector<std::vector<int>>& classes);

// Ratio of the second-largest eigenvalue real part to lambda_h, and the
// largest Jordan block size at that level (rank-stabilization estimate).
// rho is empty when the whole spectrum sits in the lambda_h cluster.
std::pair<std::optional<double>, int> second_eigen_structure(const Matrix& h, double lambda_h);

// Full pipeline: classes from the structure pattern, then perron_data,
// then the secondary spectrum. nu_sec_override replaces the estimated
// block size when the caller knows the exact Jordan structure.
SpectralProfile analyze_mean_matrix(const Matrix& h, const StructureMatrix& structure,
                                    std::optional<int> nu_sec_override = std::nullopt);
SpectralProfile analyze_mean_matrix(const Matrix& h,
                                    std::optional<int> nu_sec_override = std::nullopt);

// Almost-sure convergence-rate envelope b_n. rho empty routes to the
// rho < 1/2 branch. Requires n >= 16 and rho < 1.
double rate_bn(std::optional<double> rho, int nu_sec, double n);

// Euclidean distance from x to {scale * sum_j beta_j v_j : beta in the
// nu1-simplex}, by projected gradient on beta. Absolute accuracy ~1e-10.
double dist_to_limit_set(const RowVec& x, const SpectralProfile& profile, double scale);

// Regression function of the composition process: h(theta) =
// theta (I - H / alpha(theta)) with alpha = sum of components.
RowVec sa_regression(const RowVec& theta, const Matrix& h);

struct OdeSample {
  double t = 0.0;
  RowVec theta;
};

// Fixed-step fourth-order integration of dtheta/dt = -h(theta) from a
// strictly positive start. Throws BlowUpError if the total mass leaves
// [1e-9, 1e9]. Requires dt <= 1e-2.
std::vector<OdeSample> integrate_mean_ode(const RowVec& theta0, const Matrix& h, double T, double dt);

}  // namespace urnkit
