#pragma once

#include <Eigen/Dense>

namespace urnkit {

// Urn compositions and left eigenvectors are rows; right eigenvectors are
// columns. Keeping the distinction in the types keeps v*H and H*u honest.
using Matrix = Eigen::MatrixXd;
using RowVec = Eigen::RowVectorXd;
using ColVec = Eigen::VectorXd;

// Matrix norm used throughout: maximum absolute row sum.
inline double max_row_sum_norm(const Matrix& a) {
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

inline RowVec positive_part(const RowVec& y) { return y.cwiseMax(0.0); }

// Euclidean projection onto the probability simplex {b >= 0, sum b = 1}.
RowVec project_to_simplex(const RowVec& y);

}  // namespace urnkit
